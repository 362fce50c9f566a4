#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "readward/env.hpp"
#include "readward/reason.hpp"

namespace readward::interact {

using env::BBox;

struct Detection {
  BBox box;
  std::string class_name;
  double confidence = 1.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Emulated detector failures: missed objects, wrong labels, fused boxes.
struct NoiseModel {
  double miss_prob = 0.0;
  double flip_prob = 0.0;
  /// Boxes whose centres lie within this Chebyshev distance (cells) fuse; 0 disables.
  int merge_dist = 0;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_identity() const { return miss_prob == 0.0 && flip_prob == 0.0 && merge_dist == 0; }
  /// Parses "miss=0.1,flip=0.2,merge=2[,seed=7]".
  static NoiseModel parse(const std::string& spec);
  std::string to_string() const;
};

/// Detections for one frame. Non-agent objects are dropped with miss_prob and
/// relabelled to a uniformly drawn other class (from `classes`) with flip_prob;
/// then nearby boxes fuse into their union under one member's label. The result
/// depends only on (objects, noise, step). Noisy detections carry confidence < 1.
std::vector<Detection> corrupt(std::span<const env::GameObject> objects, const NoiseModel& noise, int step,
                               std::span<const std::string> classes);

struct Track {
  int track_id = 0;
  BBox box;
  int vx = 0;
  int vy = 0;
  /// Votes in first-seen order so ties resolve to the earliest class.
  std::vector<std::pair<std::string, int>> class_votes;
  int age = 0;
  int misses = 0;

  const std::string& dominant_class() const;
  int votes_for(const std::string& class_name) const;
};

struct TrackerOptions {
  double iou_threshold = 0.3;
  int max_misses = 5;
  /// Cells added on every side before computing IoU, so single-cell movers overlap.
  int gate_pad = 1;
  /// Pairs whose detection label matches the track's dominant class are
  /// matched before any cross-class pair.
  bool class_priority = true;
};

struct TrackerState {
  std::vector<Track> tracks;
  int next_id = 1;
};

double iou(const BBox& a, const BBox& b);

/// Greedy IoU association (highest first) of tracks to detections, scoring each
/// pair by the better of the constant-velocity prediction and the last box. Matched tracks take the detection box and a class vote, unmatched
/// tracks age and die after max_misses, unmatched detections start new tracks.
TrackerState track_update(TrackerState state, std::span<const Detection> detections,
                          const TrackerOptions& options = {});

/// Tracks that mirror ground-truth objects one to one (the noise-free path).
std::vector<Track> tracks_from_ground_truth(std::span<const env::GameObject> objects);

struct InteractionEvent {
  int step = 0;
  std::string object_class;
  int track_id = 0;
  bool new_contact = true;

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

/// Per-track contact flags carried between steps.
using ContactState = std::map<int, bool>;

/// Emits an event for each track whose box turns from apart to intersecting the
/// agent box. Tracks not seen this step keep their flag; vanished tracks are forgotten.
std::pair<std::vector<InteractionEvent>, ContactState> detect_events(const BBox& agent_box,
                                                                     std::span<const Track> tracks,
                                                                     const ContactState& contact_state, int step);

/// Sum of table rewards over events. Classes missing from the table add 0 and
/// are appended to `unknown` when given.
double shape(std::span<const InteractionEvent> events, const reason::RewardTable& table,
             std::vector<std::string>* unknown = nullptr);

/// Per-episode pipeline: detection (ground truth or noisy), tracking, contact
/// debouncing. Confined to one worker.
class InteractionMonitor {
public:
  InteractionMonitor(std::string agent_class, std::vector<std::string> classes, std::optional<NoiseModel> noise = {});

  void reset();
  std::vector<InteractionEvent> observe(const env::StepResult& frame);

private:
  std::string agent_class_;
  std::vector<std::string> classes_;
  std::optional<NoiseModel> noise_;
  TrackerState tracker_;
  ContactState contacts_;
  int episode_ = 0;
};

}  // namespace readward::interact
