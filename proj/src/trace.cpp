#include "readward/trace.hpp"

#include "readward/errors.hpp"

namespace readward {

double EpisodeTrace::aux_sum() const {
  double s = 0.0;
  for (const auto& r : steps) s += r.aux_reward;
  return s;
}

double env::game_score(const EpisodeTrace& trace) {
  if (!trace.complete) throw PreconditionError("episode " + std::to_string(trace.episode) + " is incomplete");
  double s = 0.0;
  for (const auto& r : trace.steps) s += r.native_reward;
  return s;
}

}  // namespace readward
