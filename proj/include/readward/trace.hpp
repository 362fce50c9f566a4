#pragma once

#include <vector>

#include "readward/interact.hpp"

namespace readward {

struct StepRecord {
  int action = 0;
  /// Reward the env reported (zero before the terminal step when delayed).
  double env_reward = 0.0;
  double native_reward = 0.0;
  double aux_reward = 0.0;
  /// What the learner consumed: env + aux, clipped when clipping is on.
  double total_reward = 0.0;
};

struct EpisodeTrace {
  int episode = 0;
  /// Global step count at which the episode started.
  long start_step = 0;
  std::vector<StepRecord> steps;
  std::vector<interact::InteractionEvent> events;
  bool complete = false;

  long end_step() const { return start_step + static_cast<long>(steps.size()); }
  double aux_sum() const;
};

namespace env {

/// Native (undelayed) return of a finished episode. Throws on an incomplete trace.
double game_score(const EpisodeTrace& trace);

}  // namespace env

}  // namespace readward
