#include "tvr/scene.hpp"

#include <cstdlib>
#include <string>

#include "tvr/error.hpp"

namespace tvr {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kObjectNotFound: return "object_not_found";
    case ErrorCode::kMismatchedIds: return "mismatched_ids";
    case ErrorCode::kUnsolvable: return "unsolvable";
    case ErrorCode::kSequenceTooLong: return "sequence_too_long";
    case ErrorCode::kPlacementFailure: return "placement_failure";
    case ErrorCode::kSamplingFailure: return "sampling_failure";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kMalformedRecord: return "malformed_record";
    case ErrorCode::kVersionMismatch: return "version_mismatch";
    case ErrorCode::kChecksumMismatch: return "checksum_mismatch";
    case ErrorCode::kIoError: return "io_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kUnknownSession: return "unknown_session";
    case ErrorCode::kSessionComplete: return "session_complete";
    case ErrorCode::kMalformedAnswer: return "malformed_answer";
    case ErrorCode::kForbidden: return "forbidden";
  }
  return "unknown";
}

namespace {

constexpr std::array<std::string_view, 3> kSizeNames = {"small", "medium", "large"};
constexpr std::array<std::string_view, 8> kColorNames = {"gray",  "red",    "blue", "green",
                                                         "brown", "purple", "cyan", "yellow"};
constexpr std::array<std::string_view, 3> kShapeNames = {"cube", "sphere", "cylinder"};
constexpr std::array<std::string_view, 3> kMaterialNames = {"rubber", "metal", "glass"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_token(const std::array<std::string_view, N>& names,
                                std::string_view token) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == token) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Size v) { return kSizeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Color v) { return kColorNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Shape v) { return kShapeNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(Material v) { return kMaterialNames[static_cast<std::size_t>(v)]; }

std::optional<Size> parse_size(std::string_view token) {
  return parse_token<Size>(kSizeNames, token);
}
std::optional<Color> parse_color(std::string_view token) {
  return parse_token<Color>(kColorNames, token);
}
std::optional<Shape> parse_shape(std::string_view token) {
  return parse_token<Shape>(kShapeNames, token);
}
std::optional<Material> parse_material(std::string_view token) {
  return parse_token<Material>(kMaterialNames, token);
}

void PlaneConfig::validate() const {
  if (!(0 < visible_bound && visible_bound < plane_bound)) {
    throw Error(ErrorCode::kInvalidArgument, "plane config: need 0 < visible_bound < plane_bound");
  }
  if (!(0.0 < collision_radius[0] && collision_radius[0] < collision_radius[1] &&
        collision_radius[1] < collision_radius[2])) {
    throw Error(ErrorCode::kInvalidArgument,
                "plane config: collision radii must be positive and strictly increasing");
  }
  if (!(2.0 * collision_radius[2] < visible_bound)) {
    throw Error(ErrorCode::kInvalidArgument,
                "plane config: visible area too small for the largest object");
  }
  if (step_unit <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "plane config: step_unit must be positive");
  }
}

bool is_visible(Position p, const PlaneConfig& cfg) {
  return std::abs(p.x) <= cfg.visible_bound && std::abs(p.y) <= cfg.visible_bound;
}

bool in_plane(Position p, const PlaneConfig& cfg) {
  return std::abs(p.x) <= cfg.plane_bound && std::abs(p.y) <= cfg.plane_bound;
}

bool collides(const ObjectState& a, const ObjectState& b, const PlaneConfig& cfg) {
  // Compare squared distances; coordinates are integers so dx*dy is exact.
  const double dx = static_cast<double>(a.position.x) - b.position.x;
  const double dy = static_cast<double>(a.position.y) - b.position.y;
  const double reach = cfg.radius(a.size) + cfg.radius(b.size);
  return dx * dx + dy * dy < reach * reach;
}

SceneGraph::SceneGraph(std::vector<ObjectState> objects, PlaneConfig config)
    : objects_(std::move(objects)), config_(config) {
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (objects_[i].id != static_cast<ObjectId>(i)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "scene objects must carry ids 0..n-1 in order (index " + std::to_string(i) +
                      " has id " + std::to_string(objects_[i].id) + ")");
    }
  }
}

SceneGraph SceneGraph::with_object(const ObjectState& replacement) const {
  SceneGraph copy = *this;
  copy.objects_.at(static_cast<std::size_t>(replacement.id)) = replacement;
  return copy;
}

std::size_t SceneGraph::visible_count() const {
  std::size_t n = 0;
  for (const auto& o : objects_) n += is_visible(o.position, config_) ? 1 : 0;
  return n;
}

ValidityReport scene_valid(const SceneGraph& scene) {
  ValidityReport report;
  const auto& objs = scene.objects();
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (!in_plane(objs[i].position, scene.config())) report.out_of_plane.push_back(objs[i].id);
    for (std::size_t j = i + 1; j < objs.size(); ++j) {
      if (collides(objs[i], objs[j], scene.config())) {
        report.colliding_pairs.emplace_back(objs[i].id, objs[j].id);
      }
    }
  }
  return report;
}

}  // namespace tvr
