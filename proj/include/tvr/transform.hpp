#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "tvr/scene.hpp"

namespace tvr {

enum class Attribute : std::uint8_t { kSize, kColor, kShape, kMaterial, kPosition };

std::string_view to_string(Attribute a);

// Compass directions, clockwise from north. N = (0, +1), E = (+1, 0).
enum class Direction : std::uint8_t { kN, kNE, kE, kSE, kS, kSW, kW, kNW };

inline constexpr std::array<Direction, 8> kAllDirections = {
    Direction::kN, Direction::kNE, Direction::kE, Direction::kSE,
    Direction::kS, Direction::kSW, Direction::kW, Direction::kNW};

struct Displacement {
  int dx = 0;
  int dy = 0;
};

Displacement unit_vector(Direction d);
std::string_view to_string(Direction d);

struct MoveValue {
  Direction direction = Direction::kN;
  int step = 1;  // 1 or 2

  Displacement displacement(const PlaneConfig& cfg) const;
  bool operator==(const MoveValue&) const = default;
};

// One of the 33 values of the transformation vocabulary. Stored as its
// canonical index: sizes, colors, shapes, materials, then moves ordered by
// (direction N..NW clockwise, step 1..2).
class TransformValue {
 public:
  static constexpr int kCount = 33;

  TransformValue() = default;
  TransformValue(Size v);
  TransformValue(Color v);
  TransformValue(Shape v);
  TransformValue(Material v);
  TransformValue(MoveValue v);

  // Precondition: 0 <= index < kCount.
  static TransformValue from_index(int index);
  static std::optional<TransformValue> parse(std::string_view token);

  int index() const { return index_; }
  Attribute attribute() const;
  std::string token() const;

  std::optional<Size> size() const;
  std::optional<Color> color() const;
  std::optional<Shape> shape() const;
  std::optional<Material> material() const;
  std::optional<MoveValue> move() const;

  bool is_move() const { return attribute() == Attribute::kPosition; }

  bool operator==(const TransformValue&) const = default;
  auto operator<=>(const TransformValue&) const = default;

 private:
  explicit TransformValue(int index, int /*tag*/) : index_(index) {}
  int index_ = 0;
};

Attribute attribute_of(const TransformValue& v);

// All 33 values in canonical order.
const std::array<TransformValue, TransformValue::kCount>& all_values();

struct AtomicTransformation {
  ObjectId object = 0;
  TransformValue value;

  bool operator==(const AtomicTransformation&) const = default;
};

using Transformation = std::vector<AtomicTransformation>;

// Canonical text form: "(3, glass)".
std::string format_atomic(const AtomicTransformation& t);
std::optional<AtomicTransformation> parse_atomic(std::string_view text);
std::string format_transformation(const Transformation& t);

enum class ApplyMode : std::uint8_t { kStrict, kLoose };

enum class ApplyStatus : std::uint8_t {
  kOk,
  kObjectNotFound,
  kOverlapViolation,
  kOutOfPlane,
  kNoOp,
};

std::string_view to_string(ApplyStatus s);

// Checks an atomic against a scene without building the successor scene.
// `changed`, when non-null, receives the transformed object (also on failure,
// except for kObjectNotFound).
ApplyStatus check_atomic(const SceneGraph& scene, const AtomicTransformation& t, ApplyMode mode,
                         ObjectState* changed = nullptr);

struct AtomicResult {
  std::optional<SceneGraph> scene;
  ApplyStatus status = ApplyStatus::kOk;

  bool ok() const { return status == ApplyStatus::kOk; }
};

AtomicResult apply_atomic(const SceneGraph& scene, const AtomicTransformation& t, ApplyMode mode);

struct SequenceResult {
  SceneGraph scene;
  std::vector<ApplyStatus> steps;

  std::size_t failures() const;
  bool all_ok() const { return failures() == 0; }
};

// Strict mode skips failing steps and keeps folding.
SequenceResult apply_sequence(const SceneGraph& scene, const Transformation& t, ApplyMode mode);

struct SolveOptions {
  std::size_t max_diff_count = 8;
};

// Finds a strictly applicable sequence whose result is visible-equivalent to
// `final_scene`. Throws Error(kMismatchedIds), Error(kSequenceTooLong) or
// Error(kUnsolvable).
Transformation solve(const SceneGraph& initial, const SceneGraph& final_scene,
                     const SolveOptions& options = {});

// True iff some permutation of `t` has a failed step under strict
// application from `scene`. Throws Error(kSequenceTooLong) past max_length.
bool is_order_sensitive(const SceneGraph& scene, const Transformation& t,
                        std::size_t max_length = 4);

using BigInt = boost::multiprecision::cpp_int;

// sum_{i=1..max_len} (value_count * object_count)^i
BigInt answer_space_size(int object_count, int value_count, int max_len);

}  // namespace tvr
