#include "tvr/transform.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <string>

#include "tvr/error.hpp"

namespace tvr {

namespace {

constexpr int kSizeBase = 0;
constexpr int kColorBase = 3;
constexpr int kShapeBase = 11;
constexpr int kMaterialBase = 14;
constexpr int kMoveBase = 17;

constexpr std::array<std::string_view, 8> kDirectionNames = {"N", "NE", "E", "SE",
                                                             "S", "SW", "W", "NW"};
constexpr std::array<Displacement, 8> kUnitVectors = {{
    {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}, {-1, -1}, {-1, 0}, {-1, 1},
}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::kSize: return "size";
    case Attribute::kColor: return "color";
    case Attribute::kShape: return "shape";
    case Attribute::kMaterial: return "material";
    case Attribute::kPosition: return "position";
  }
  return "unknown";
}

Displacement unit_vector(Direction d) { return kUnitVectors[static_cast<std::size_t>(d)]; }
std::string_view to_string(Direction d) { return kDirectionNames[static_cast<std::size_t>(d)]; }

Displacement MoveValue::displacement(const PlaneConfig& cfg) const {
  const Displacement u = unit_vector(direction);
  return {u.dx * step * cfg.step_unit, u.dy * step * cfg.step_unit};
}

TransformValue::TransformValue(Size v) : index_(kSizeBase + static_cast<int>(v)) {}
TransformValue::TransformValue(Color v) : index_(kColorBase + static_cast<int>(v)) {}
TransformValue::TransformValue(Shape v) : index_(kShapeBase + static_cast<int>(v)) {}
TransformValue::TransformValue(Material v) : index_(kMaterialBase + static_cast<int>(v)) {}
TransformValue::TransformValue(MoveValue v)
    : index_(kMoveBase + static_cast<int>(v.direction) * 2 + (v.step - 1)) {
  if (v.step != 1 && v.step != 2) {
    throw Error(ErrorCode::kInvalidArgument, "move step must be 1 or 2");
  }
}

TransformValue TransformValue::from_index(int index) {
  if (index < 0 || index >= kCount) {
    throw Error(ErrorCode::kInvalidArgument, "value index out of range: " + std::to_string(index));
  }
  return TransformValue(index, 0);
}

Attribute TransformValue::attribute() const {
  if (index_ < kColorBase) return Attribute::kSize;
  if (index_ < kShapeBase) return Attribute::kColor;
  if (index_ < kMaterialBase) return Attribute::kShape;
  if (index_ < kMoveBase) return Attribute::kMaterial;
  return Attribute::kPosition;
}

Attribute attribute_of(const TransformValue& v) { return v.attribute(); }

std::optional<Size> TransformValue::size() const {
  if (attribute() != Attribute::kSize) return std::nullopt;
  return static_cast<Size>(index_ - kSizeBase);
}
std::optional<Color> TransformValue::color() const {
  if (attribute() != Attribute::kColor) return std::nullopt;
  return static_cast<Color>(index_ - kColorBase);
}
std::optional<Shape> TransformValue::shape() const {
  if (attribute() != Attribute::kShape) return std::nullopt;
  return static_cast<Shape>(index_ - kShapeBase);
}
std::optional<Material> TransformValue::material() const {
  if (attribute() != Attribute::kMaterial) return std::nullopt;
  return static_cast<Material>(index_ - kMaterialBase);
}
std::optional<MoveValue> TransformValue::move() const {
  if (attribute() != Attribute::kPosition) return std::nullopt;
  const int rel = index_ - kMoveBase;
  return MoveValue{static_cast<Direction>(rel / 2), rel % 2 + 1};
}

std::string TransformValue::token() const {
  switch (attribute()) {
    case Attribute::kSize: return std::string(to_string(*size()));
    case Attribute::kColor: return std::string(to_string(*color()));
    case Attribute::kShape: return std::string(to_string(*shape()));
    case Attribute::kMaterial: return std::string(to_string(*material()));
    case Attribute::kPosition: {
      const MoveValue m = *move();
      return "move_" + std::string(to_string(m.direction)) + "_" + std::to_string(m.step);
    }
  }
  return {};
}

const std::array<TransformValue, TransformValue::kCount>& all_values() {
  static const auto values = [] {
    std::array<TransformValue, TransformValue::kCount> out;
    for (int i = 0; i < TransformValue::kCount; ++i) out[i] = TransformValue::from_index(i);
    return out;
  }();
  return values;
}

std::optional<TransformValue> TransformValue::parse(std::string_view token) {
  for (const auto& v : all_values()) {
    if (v.token() == token) return v;
  }
  return std::nullopt;
}

std::string format_atomic(const AtomicTransformation& t) {
  return "(" + std::to_string(t.object) + ", " + t.value.token() + ")";
}

std::optional<AtomicTransformation> parse_atomic(std::string_view text) {
  text = trim(text);
  if (text.size() < 5 || text.front() != '(' || text.back() != ')') return std::nullopt;
  text = text.substr(1, text.size() - 2);
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  const std::string_view id_part = trim(text.substr(0, comma));
  const std::string_view value_part = trim(text.substr(comma + 1));
  if (id_part.empty() ||
      !std::all_of(id_part.begin(), id_part.end(),
                   [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  if (id_part.size() > 6) return std::nullopt;
  const auto value = TransformValue::parse(value_part);
  if (!value) return std::nullopt;
  return AtomicTransformation{std::stoi(std::string(id_part)), *value};
}

std::string format_transformation(const Transformation& t) {
  std::string out = "[";
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_atomic(t[i]);
  }
  out += "]";
  return out;
}

std::string_view to_string(ApplyStatus s) {
  switch (s) {
    case ApplyStatus::kOk: return "ok";
    case ApplyStatus::kObjectNotFound: return "object_not_found";
    case ApplyStatus::kOverlapViolation: return "overlap_violation";
    case ApplyStatus::kOutOfPlane: return "out_of_plane";
    case ApplyStatus::kNoOp: return "no_op";
  }
  return "unknown";
}

ApplyStatus check_atomic(const SceneGraph& scene, const AtomicTransformation& t, ApplyMode mode,
                         ObjectState* changed) {
  if (!scene.contains(t.object)) return ApplyStatus::kObjectNotFound;
  const ObjectState& before = scene.object(t.object);
  ObjectState after = before;
  bool no_op = false;
  switch (t.value.attribute()) {
    case Attribute::kSize:
      after.size = *t.value.size();
      no_op = after.size == before.size;
      break;
    case Attribute::kColor:
      after.color = *t.value.color();
      no_op = after.color == before.color;
      break;
    case Attribute::kShape:
      after.shape = *t.value.shape();
      no_op = after.shape == before.shape;
      break;
    case Attribute::kMaterial:
      after.material = *t.value.material();
      no_op = after.material == before.material;
      break;
    case Attribute::kPosition: {
      const Displacement d = t.value.move()->displacement(scene.config());
      after.position.x += d.dx;
      after.position.y += d.dy;
      break;
    }
  }
  if (changed != nullptr) *changed = after;
  if (mode == ApplyMode::kLoose) return ApplyStatus::kOk;

  if (no_op) return ApplyStatus::kNoOp;
  if (!in_plane(after.position, scene.config())) return ApplyStatus::kOutOfPlane;
  // Colour, shape and material never change the footprint.
  const Attribute attr = t.value.attribute();
  if (attr == Attribute::kSize || attr == Attribute::kPosition) {
    for (const auto& other : scene.objects()) {
      if (other.id != after.id && collides(after, other, scene.config())) {
        return ApplyStatus::kOverlapViolation;
      }
    }
  }
  return ApplyStatus::kOk;
}

AtomicResult apply_atomic(const SceneGraph& scene, const AtomicTransformation& t, ApplyMode mode) {
  ObjectState changed;
  const ApplyStatus status = check_atomic(scene, t, mode, &changed);
  if (status != ApplyStatus::kOk) return {std::nullopt, status};
  return {scene.with_object(changed), ApplyStatus::kOk};
}

std::size_t SequenceResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](ApplyStatus s) { return s != ApplyStatus::kOk; }));
}

SequenceResult apply_sequence(const SceneGraph& scene, const Transformation& t, ApplyMode mode) {
  SequenceResult result{scene, {}};
  result.steps.reserve(t.size());
  for (const auto& atomic : t) {
    ObjectState changed;
    const ApplyStatus status = check_atomic(result.scene, atomic, mode, &changed);
    result.steps.push_back(status);
    if (status == ApplyStatus::kOk) result.scene = result.scene.with_object(changed);
  }
  return result;
}

namespace {

// A required change of one (object, attribute) with the values that realise it.
struct DiffItem {
  ObjectId object;
  std::vector<TransformValue> candidates;
};

bool backtrack(const SceneGraph& scene, const std::vector<DiffItem>& items,
               std::vector<bool>& used, Transformation& path) {
  if (path.size() == items.size()) return true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (used[i]) continue;
    for (const auto& value : items[i].candidates) {
      const AtomicTransformation step{items[i].object, value};
      ObjectState changed;
      if (check_atomic(scene, step, ApplyMode::kStrict, &changed) != ApplyStatus::kOk) continue;
      used[i] = true;
      path.push_back(step);
      if (backtrack(scene.with_object(changed), items, used, path)) return true;
      path.pop_back();
      used[i] = false;
    }
  }
  return false;
}

}  // namespace

Transformation solve(const SceneGraph& initial, const SceneGraph& final_scene,
                     const SolveOptions& options) {
  if (initial.size() != final_scene.size()) {
    throw Error(ErrorCode::kMismatchedIds, "scenes have different object counts");
  }
  const PlaneConfig& cfg = initial.config();
  std::vector<DiffItem> items;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    const ObjectState& a = initial.objects()[i];
    const ObjectState& b = final_scene.objects()[i];
    const bool visible_a = is_visible(a.position, cfg);
    const bool visible_b = is_visible(b.position, final_scene.config());
    if (!visible_a && !visible_b) continue;

    if (a.size != b.size) items.push_back({a.id, {TransformValue(b.size)}});
    if (a.color != b.color) items.push_back({a.id, {TransformValue(b.color)}});
    if (a.shape != b.shape) items.push_back({a.id, {TransformValue(b.shape)}});
    if (a.material != b.material) items.push_back({a.id, {TransformValue(b.material)}});

    if (visible_a != visible_b || a.position != b.position) {
      DiffItem move{a.id, {}};
      // Exact displacement first, then any move landing in the invisible area.
      for (const auto& v : all_values()) {
        if (!v.is_move()) continue;
        const Displacement d = v.move()->displacement(cfg);
        const Position p{a.position.x + d.dx, a.position.y + d.dy};
        if (p == b.position) move.candidates.insert(move.candidates.begin(), v);
        else if (!visible_b && !is_visible(p, cfg) && in_plane(p, cfg)) move.candidates.push_back(v);
      }
      if (move.candidates.empty()) {
        throw Error(ErrorCode::kUnsolvable,
                    "object " + std::to_string(a.id) + " cannot reach its final position in one move");
      }
      items.push_back(std::move(move));
    }
  }
  if (items.size() > options.max_diff_count) {
    throw Error(ErrorCode::kSequenceTooLong,
                std::to_string(items.size()) + " differences exceed the solver budget of " +
                    std::to_string(options.max_diff_count));
  }
  std::vector<bool> used(items.size(), false);
  Transformation path;
  path.reserve(items.size());
  if (!backtrack(initial, items, used, path)) {
    throw Error(ErrorCode::kUnsolvable, "no ordering of the differences applies under constraints");
  }
  return path;
}

bool is_order_sensitive(const SceneGraph& scene, const Transformation& t, std::size_t max_length) {
  if (t.size() > max_length) {
    throw Error(ErrorCode::kSequenceTooLong,
                "order-sensitivity check limited to " + std::to_string(max_length) + " steps");
  }
  if (t.size() < 2) return false;
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  Transformation permuted(t.size());
  do {
    for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = t[order[i]];
    if (!apply_sequence(scene, permuted, ApplyMode::kStrict).all_ok()) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

BigInt answer_space_size(int object_count, int value_count, int max_len) {
  if (object_count < 1 || value_count < 1 || max_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "answer_space_size inputs must be >= 1");
  }
  const BigInt base = BigInt(object_count) * value_count;
  BigInt term = 1;
  BigInt total = 0;
  for (int i = 1; i <= max_len; ++i) {
    term *= base;
    total += term;
  }
  return total;
}

}  // namespace tvr
