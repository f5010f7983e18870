#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "tvr/sample.hpp"
#include "tvr/scene.hpp"
#include "tvr/transform.hpp"

namespace tvr {

struct BasicScore {
  bool obj_correct = false;
  bool attr_correct = false;
  bool val_correct = false;
  bool all_correct = false;

  bool operator==(const BasicScore&) const = default;
};

BasicScore eval_basic(const AtomicTransformation& pred, const AtomicTransformation& ref);

// Attribute-level mismatch count restricted to what visible objects show:
//  - objects invisible in both scenes contribute nothing;
//  - position costs 1 if visibility differs, or both are visible at
//    different coordinates;
//  - each intrinsic attribute costs 1 if it differs and the object is visible
//    in at least one scene.
// Throws Error(kMismatchedIds) when the object id sets differ.
int scene_distance(const SceneGraph& a, const SceneGraph& b);

struct MultiScore {
  int distance = 0;
  double normalized_distance = 0.0;
  bool strict_correct = false;
  bool loose_correct = false;
  int reference_length = 0;

  bool operator==(const MultiScore&) const = default;
};

MultiScore eval_multi(const Transformation& pred, const Sample& sample);

struct LengthBreakdown {
  std::size_t count = 0;
  double ad = 0.0;
  double and_ = 0.0;
  double acc = 0.0;
  double lacc = 0.0;
  double eo = 0.0;

  bool operator==(const LengthBreakdown&) const = default;
};

struct AggregateReport {
  double ad = 0.0;
  double and_ = 0.0;
  double acc = 0.0;
  double lacc = 0.0;
  double eo = 0.0;
  std::size_t count = 0;
  std::map<int, LengthBreakdown> per_length;

  bool operator==(const AggregateReport&) const = default;
};

// (LAcc - Acc) / LAcc, defined as 0 when LAcc is 0.
double error_of_order(double lacc, double acc);

// Throws Error(kEmptyInput).
AggregateReport aggregate(const std::vector<MultiScore>& scores);

struct BasicReport {
  double obj_acc = 0.0;
  double attr_acc = 0.0;
  double val_acc = 0.0;
  double acc = 0.0;
  std::size_t count = 0;

  bool operator==(const BasicReport&) const = default;
};

// Throws Error(kEmptyInput).
BasicReport aggregate_basic(const std::vector<BasicScore>& scores);

enum class RewardKind : std::uint8_t { kCorr, kDist, kCorrAndDist };

std::string_view to_string(RewardKind k);
std::optional<RewardKind> parse_reward_kind(std::string_view token);

double reward(const Transformation& pred, const Sample& sample, RewardKind kind);

struct OrderSensitiveSubset {
  std::vector<Sample> samples;
  double fraction = 0.0;
};

OrderSensitiveSubset order_sensitive_subset(const std::vector<Sample>& dataset,
                                            std::size_t max_length = 4);

// Mean EO over `trials` runs that answer every sample with its reference
// atomics in a uniformly random order. Throws Error(kEmptyInput).
double random_order_eo(const std::vector<Sample>& dataset, int trials, std::uint64_t seed);

}  // namespace tvr
