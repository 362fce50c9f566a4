#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace readward::text {

/// Whitespace-delimited words, in order.
std::vector<std::string> split_words(std::string_view s);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
/// Runs of whitespace collapsed to a single space, ends trimmed.
std::string collapse_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lowercased alphabetic tokens; everything else separates tokens.
std::vector<std::string> alpha_tokens(std::string_view s);

/// Built-in English stopword list (about 150 words, lowercase).
bool is_stopword(std::string_view lower_word);

/// Lowercased, alphabetic, non-stopword tokens with a trailing plural "s" folded.
std::vector<std::string> content_words(std::string_view s);
std::string fold_plural(std::string_view lower_word);

/// Splits on '.', '!' or '?' followed by whitespace (or end of input). The
/// terminal punctuation stays with its sentence.
std::vector<std::string> split_sentences(std::string_view s);

/// Lowercase hex SHA-256 of the UTF-8 bytes.
std::string sha256_hex(std::string_view s);

}  // namespace readward::text
