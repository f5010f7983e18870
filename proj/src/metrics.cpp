#include "tvr/metrics.hpp"

#include <algorithm>
#include <array>

#include "tvr/error.hpp"
#include "tvr/random.hpp"

namespace tvr {

BasicScore eval_basic(const AtomicTransformation& pred, const AtomicTransformation& ref) {
  BasicScore s;
  s.obj_correct = pred.object == ref.object;
  s.attr_correct = attribute_of(pred.value) == attribute_of(ref.value);
  s.val_correct = pred.value == ref.value;
  s.all_correct = s.obj_correct && s.attr_correct && s.val_correct;
  return s;
}

int scene_distance(const SceneGraph& a, const SceneGraph& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kMismatchedIds, "scene_distance: scenes have " +
                                               std::to_string(a.size()) + " and " +
                                               std::to_string(b.size()) + " objects");
  }
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ObjectState& x = a.objects()[i];
    const ObjectState& y = b.objects()[i];
    const bool vx = is_visible(x.position, a.config());
    const bool vy = is_visible(y.position, b.config());
    if (!vx && !vy) continue;
    if (vx != vy || x.position != y.position) ++d;
    d += x.size != y.size;
    d += x.color != y.color;
    d += x.shape != y.shape;
    d += x.material != y.material;
  }
  return d;
}

MultiScore eval_multi(const Transformation& pred, const Sample& sample) {
  MultiScore s;
  s.reference_length = static_cast<int>(sample.reference.size());
  const auto loose = apply_sequence(sample.initial, pred, ApplyMode::kLoose);
  s.distance = scene_distance(loose.scene, sample.final_scene);
  s.normalized_distance =
      static_cast<double>(s.distance) / static_cast<double>(std::max(1, s.reference_length));
  s.loose_correct = s.distance == 0;
  const auto strict = apply_sequence(sample.initial, pred, ApplyMode::kStrict);
  s.strict_correct = strict.all_ok() && scene_distance(strict.scene, sample.final_scene) == 0;
  return s;
}

double error_of_order(double lacc, double acc) {
  return lacc > 0.0 ? (lacc - acc) / lacc : 0.0;
}

namespace {

struct Accumulator {
  std::size_t count = 0;
  double distance = 0.0;
  double normalized = 0.0;
  std::size_t strict = 0;
  std::size_t loose = 0;

  void add(const MultiScore& s) {
    ++count;
    distance += s.distance;
    normalized += s.normalized_distance;
    strict += s.strict_correct ? 1 : 0;
    loose += s.loose_correct ? 1 : 0;
  }

  LengthBreakdown finish() const {
    LengthBreakdown b;
    const double n = static_cast<double>(count);
    b.count = count;
    b.ad = distance / n;
    b.and_ = normalized / n;
    b.acc = static_cast<double>(strict) / n;
    b.lacc = static_cast<double>(loose) / n;
    b.eo = error_of_order(b.lacc, b.acc);
    return b;
  }
};

}  // namespace

AggregateReport aggregate(const std::vector<MultiScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "aggregate: no scores");
  Accumulator total;
  std::map<int, Accumulator> by_length;
  for (const auto& s : scores) {
    total.add(s);
    by_length[s.reference_length].add(s);
  }
  const LengthBreakdown t = total.finish();
  AggregateReport r;
  r.count = t.count;
  r.ad = t.ad;
  r.and_ = t.and_;
  r.acc = t.acc;
  r.lacc = t.lacc;
  r.eo = t.eo;
  for (const auto& [length, acc] : by_length) r.per_length[length] = acc.finish();
  return r;
}

BasicReport aggregate_basic(const std::vector<BasicScore>& scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyInput, "aggregate_basic: no scores");
  BasicReport r;
  r.count = scores.size();
  for (const auto& s : scores) {
    r.obj_acc += s.obj_correct;
    r.attr_acc += s.attr_correct;
    r.val_acc += s.val_correct;
    r.acc += s.all_correct;
  }
  const double n = static_cast<double>(r.count);
  r.obj_acc /= n;
  r.attr_acc /= n;
  r.val_acc /= n;
  r.acc /= n;
  return r;
}

namespace {
constexpr std::array<std::string_view, 3> kRewardNames = {"corr", "dist", "corr_and_dist"};
}

std::string_view to_string(RewardKind k) { return kRewardNames[static_cast<std::size_t>(k)]; }

std::optional<RewardKind> parse_reward_kind(std::string_view token) {
  for (std::size_t i = 0; i < kRewardNames.size(); ++i) {
    if (kRewardNames[i] == token) return static_cast<RewardKind>(i);
  }
  return std::nullopt;
}

double reward(const Transformation& pred, const Sample& sample, RewardKind kind) {
  const MultiScore s = eval_multi(pred, sample);
  const double corr = s.strict_correct ? 1.0 : 0.0;
  const double dist = -s.normalized_distance;
  switch (kind) {
    case RewardKind::kCorr: return corr;
    case RewardKind::kDist: return dist;
    case RewardKind::kCorrAndDist: return corr + dist;
  }
  return 0.0;
}

OrderSensitiveSubset order_sensitive_subset(const std::vector<Sample>& dataset,
                                            std::size_t max_length) {
  OrderSensitiveSubset out;
  for (const auto& s : dataset) {
    if (is_order_sensitive(s.initial, s.reference, max_length)) out.samples.push_back(s);
  }
  out.fraction = dataset.empty() ? 0.0
                                 : static_cast<double>(out.samples.size()) /
                                       static_cast<double>(dataset.size());
  return out;
}

double random_order_eo(const std::vector<Sample>& dataset, int trials, std::uint64_t seed) {
  if (dataset.empty()) throw Error(ErrorCode::kEmptyInput, "random_order_eo: empty dataset");
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "random_order_eo: trials must be >= 1");
  Rng rng(seed);
  double sum = 0.0;
  std::vector<MultiScore> scores(dataset.size());
  for (int trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      Transformation shuffled = dataset[i].reference;
      rng.shuffle(shuffled);
      scores[i] = eval_multi(shuffled, dataset[i]);
    }
    sum += aggregate(scores).eo;
  }
  return sum / trials;
}

}  // namespace tvr
