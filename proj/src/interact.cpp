#include "readward/interact.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "readward/errors.hpp"
#include "readward/log.hpp"

namespace readward::interact {

void NoiseModel::validate() const {
  if (!(miss_prob >= 0.0 && miss_prob < 1.0)) throw ConfigError("noise: miss must be in [0, 1)");
  if (!(flip_prob >= 0.0 && flip_prob < 1.0)) throw ConfigError("noise: flip must be in [0, 1)");
  if (merge_dist < 0) throw ConfigError("noise: merge must be >= 0");
}

NoiseModel NoiseModel::parse(const std::string& spec) {
  NoiseModel n;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("noise: expected key=value, got '" + item + "'");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    try {
      if (key == "miss") {
        n.miss_prob = std::stod(value);
      } else if (key == "flip") {
        n.flip_prob = std::stod(value);
      } else if (key == "merge") {
        n.merge_dist = std::stoi(value);
      } else if (key == "seed") {
        n.seed = std::stoull(value);
      } else {
        throw ConfigError("noise: unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("noise: bad value for '" + key + "'");
    }
  }
  n.validate();
  return n;
}

std::string NoiseModel::to_string() const {
  std::ostringstream os;
  os << "miss=" << miss_prob << ",flip=" << flip_prob << ",merge=" << merge_dist << ",seed=" << seed;
  return os.str();
}

std::vector<Detection> corrupt(std::span<const env::GameObject> objects, const NoiseModel& noise, int step,
                               std::span<const std::string> classes) {
  noise.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(noise.seed), static_cast<std::uint32_t>(noise.seed >> 32),
                    static_cast<std::uint32_t>(step)};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution miss(noise.miss_prob);
  std::bernoulli_distribution flip(noise.flip_prob);
  const double conf = noise.is_identity() ? 1.0 : 1.0 - std::max(noise.miss_prob, noise.flip_prob);

  std::vector<Detection> dets;
  dets.reserve(objects.size());
  for (const auto& o : objects) {
    if (o.is_agent) {
      dets.push_back({o.box, o.class_name, conf});
      continue;
    }
    if (miss(rng)) continue;
    std::string label = o.class_name;
    if (flip(rng)) {
      std::vector<std::string> others;
      for (const auto& c : classes) {
        if (c != label) others.push_back(c);
      }
      if (!others.empty()) {
        std::uniform_int_distribution<size_t> pick(0, others.size() - 1);
        label = others[pick(rng)];
      }
    }
    dets.push_back({o.box, std::move(label), conf});
  }
  if (noise.merge_dist == 0) return dets;

  // Each unconsumed detection absorbs later ones centred near it (not transitive).
  std::vector<Detection> merged;
  std::vector<bool> used(dets.size(), false);
  for (size_t i = 0; i < dets.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    std::vector<size_t> members{i};
    BBox box = dets[i].box;
    for (size_t j = i + 1; j < dets.size(); ++j) {
      if (used[j]) continue;
      const double d = std::max(std::abs(dets[i].box.center_x() - dets[j].box.center_x()),
                                std::abs(dets[i].box.center_y() - dets[j].box.center_y()));
      if (d <= noise.merge_dist) {
        used[j] = true;
        members.push_back(j);
        box = env::united(box, dets[j].box);
      }
    }
    std::uniform_int_distribution<size_t> pick(0, members.size() - 1);
    const auto label = members.size() == 1 ? dets[i].class_name : dets[members[pick(rng)]].class_name;
    merged.push_back({box, label, dets[i].confidence});
  }
  return merged;
}

const std::string& Track::dominant_class() const {
  if (class_votes.empty()) throw PreconditionError("track has no class votes");
  auto best = class_votes.begin();
  for (auto it = class_votes.begin(); it != class_votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

int Track::votes_for(const std::string& class_name) const {
  for (const auto& [c, n] : class_votes) {
    if (c == class_name) return n;
  }
  return 0;
}

double iou(const BBox& a, const BBox& b) {
  const long inter = env::overlap_area(a, b);
  if (inter == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

namespace {

BBox padded(BBox b, int pad) { return {b.x_min - pad, b.y_min - pad, b.x_max + pad, b.y_max + pad}; }

BBox shifted(BBox b, int dx, int dy) { return {b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy}; }

void vote(Track& t, const std::string& c) {
  for (auto& [name, n] : t.class_votes) {
    if (name == c) {
      ++n;
      return;
    }
  }
  t.class_votes.emplace_back(c, 1);
}

}  // namespace

TrackerState track_update(TrackerState state, std::span<const Detection> detections, const TrackerOptions& options) {
  struct Candidate {
    bool same_class;
    double score;
    size_t track;
    size_t det;
  };
  std::vector<Candidate> candidates;
  for (size_t t = 0; t < state.tracks.size(); ++t) {
    const auto& tr = state.tracks[t];
    const int ahead = tr.misses + 1;
    const BBox predicted = padded(shifted(tr.box, tr.vx * ahead, tr.vy * ahead), options.gate_pad);
    const BBox last = padded(tr.box, options.gate_pad);
    for (size_t d = 0; d < detections.size(); ++d) {
      const BBox det = padded(detections[d].box, options.gate_pad);
      // A mover that turns leaves the predicted box but stays near the last one.
      const double s = std::max(iou(predicted, det), iou(last, det));
      if (s >= options.iou_threshold) {
        const bool same = options.class_priority && detections[d].class_name == tr.dominant_class();
        candidates.push_back({same, s, t, d});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.same_class != b.same_class) return a.same_class;
    return a.score > b.score;
  });

  std::vector<bool> track_done(state.tracks.size(), false);
  std::vector<bool> det_done(detections.size(), false);
  for (const auto& c : candidates) {
    if (track_done[c.track] || det_done[c.det]) continue;
    track_done[c.track] = det_done[c.det] = true;
    auto& tr = state.tracks[c.track];
    const auto& det = detections[c.det];
    const int steps = tr.misses + 1;
    tr.vx = (det.box.x_min - tr.box.x_min) / steps;
    tr.vy = (det.box.y_min - tr.box.y_min) / steps;
    tr.box = det.box;
    vote(tr, det.class_name);
    ++tr.age;
    tr.misses = 0;
  }

  std::vector<Track> next;
  next.reserve(state.tracks.size() + detections.size());
  for (size_t t = 0; t < state.tracks.size(); ++t) {
    auto& tr = state.tracks[t];
    if (!track_done[t]) {
      ++tr.age;
      if (++tr.misses > options.max_misses) continue;
    }
    next.push_back(std::move(tr));
  }
  for (size_t d = 0; d < detections.size(); ++d) {
    if (det_done[d]) continue;
    Track tr;
    tr.track_id = state.next_id++;
    tr.box = detections[d].box;
    tr.class_votes.emplace_back(detections[d].class_name, 1);
    tr.age = 1;
    next.push_back(std::move(tr));
  }
  state.tracks = std::move(next);
  return state;
}

std::vector<Track> tracks_from_ground_truth(std::span<const env::GameObject> objects) {
  std::vector<Track> tracks;
  tracks.reserve(objects.size());
  for (const auto& o : objects) {
    if (o.is_agent) continue;
    Track t;
    t.track_id = o.id;
    t.box = o.box;
    t.class_votes.emplace_back(o.class_name, 1);
    t.age = 1;
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::pair<std::vector<InteractionEvent>, ContactState> detect_events(const BBox& agent_box,
                                                                     std::span<const Track> tracks,
                                                                     const ContactState& contact_state, int step) {
  std::vector<InteractionEvent> events;
  ContactState next;
  for (const auto& t : tracks) {
    auto prev_it = contact_state.find(t.track_id);
    const bool was = prev_it != contact_state.end() && prev_it->second;
    if (t.misses > 0) {
      next[t.track_id] = was;
      continue;
    }
    const bool now = env::intersects(agent_box, t.box);
    if (now && !was) events.push_back({step, t.dominant_class(), t.track_id, true});
    next[t.track_id] = now;
  }
  return {std::move(events), std::move(next)};
}

double shape(std::span<const InteractionEvent> events, const reason::RewardTable& table,
             std::vector<std::string>* unknown) {
  double total = 0.0;
  for (const auto& e : events) {
    if (auto r = table.reward_for(e.object_class)) {
      total += *r;
    } else if (unknown) {
      unknown->push_back(e.object_class);
    }
  }
  return total;
}

InteractionMonitor::InteractionMonitor(std::string agent_class, std::vector<std::string> classes,
                                       std::optional<NoiseModel> noise)
    : agent_class_(std::move(agent_class)), classes_(std::move(classes)), noise_(noise) {
  if (noise_) noise_->validate();
}

void InteractionMonitor::reset() {
  tracker_ = {};
  contacts_.clear();
  ++episode_;
}

std::vector<InteractionEvent> InteractionMonitor::observe(const env::StepResult& frame) {
  if (!noise_) {
    // Same rule as detect_events over ground-truth tracks, without building them.
    std::vector<InteractionEvent> events;
    ContactState next;
    const auto& agent = frame.agent().box;
    for (const auto& o : frame.objects) {
      if (o.is_agent) continue;
      const bool now = env::intersects(agent, o.box);
      auto it = contacts_.find(o.id);
      if (now && !(it != contacts_.end() && it->second)) events.push_back({frame.step, o.class_name, o.id, true});
      if (now) next[o.id] = true;
    }
    contacts_ = std::move(next);
    return events;
  }

  NoiseModel per_episode = *noise_;
  per_episode.seed = noise_->seed * 1000003ULL + static_cast<std::uint64_t>(episode_);
  const auto dets = corrupt(frame.objects, per_episode, frame.step, classes_);
  std::vector<Detection> others;
  std::optional<BBox> agent_box;
  for (const auto& d : dets) {
    if (d.class_name == agent_class_ && !agent_box) {
      agent_box = d.box;
    } else {
      others.push_back(d);
    }
  }
  tracker_ = track_update(std::move(tracker_), others);
  if (!agent_box) return {};  // agent fused into another box: nothing registers
  auto [events, contacts] = detect_events(*agent_box, tracker_.tracks, contacts_, frame.step);
  contacts_ = std::move(contacts);
  return std::move(events);
}

}  // namespace readward::interact
