#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <map>
#include <string>
#include <vector>

#include "readward/errors.hpp"
#include "readward/qa_provider.hpp"

namespace readward::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("readward_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Answers with the first configured span for the question that occurs in the
/// passage; fixed scores per prompt substring.
class SpanProvider final : public qa::Provider {
public:
  std::map<std::string, std::vector<std::string>> spans;
  std::vector<std::pair<std::string, std::vector<double>>> scores;

  std::string answer(const qa::ExtractiveQuery& q) override {
    auto it = spans.find(q.question);
    if (it == spans.end()) return "";
    for (const auto& s : it->second) {
      if (q.passage.find(s) != std::string::npos) return s;
    }
    return "";
  }
  qa::ChoiceScores score_choices(const qa::ChoiceQuery& q) override {
    for (const auto& [needle, s] : scores) {
      if (q.prompt.find(needle) != std::string::npos) return {s};
    }
    throw AbstainError("no scores configured");
  }
  std::string name() const override { return "span"; }
};

}  // namespace readward::testing
