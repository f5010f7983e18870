#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace tvr {

enum class Size : std::uint8_t { kSmall, kMedium, kLarge };
enum class Color : std::uint8_t { kGray, kRed, kBlue, kGreen, kBrown, kPurple, kCyan, kYellow };
enum class Shape : std::uint8_t { kCube, kSphere, kCylinder };
enum class Material : std::uint8_t { kRubber, kMetal, kGlass };

inline constexpr std::array<Size, 3> kAllSizes = {Size::kSmall, Size::kMedium, Size::kLarge};
inline constexpr std::array<Color, 8> kAllColors = {
    Color::kGray,  Color::kRed,    Color::kBlue, Color::kGreen,
    Color::kBrown, Color::kPurple, Color::kCyan, Color::kYellow};
inline constexpr std::array<Shape, 3> kAllShapes = {Shape::kCube, Shape::kSphere, Shape::kCylinder};
inline constexpr std::array<Material, 3> kAllMaterials = {Material::kRubber, Material::kMetal,
                                                          Material::kGlass};

std::string_view to_string(Size v);
std::string_view to_string(Color v);
std::string_view to_string(Shape v);
std::string_view to_string(Material v);

std::optional<Size> parse_size(std::string_view token);
std::optional<Color> parse_color(std::string_view token);
std::optional<Shape> parse_shape(std::string_view token);
std::optional<Material> parse_material(std::string_view token);

struct Position {
  int x = 0;
  int y = 0;

  bool operator==(const Position&) const = default;
};

using ObjectId = int;

struct ObjectState {
  ObjectId id = 0;
  Size size = Size::kSmall;
  Color color = Color::kGray;
  Shape shape = Shape::kCube;
  Material material = Material::kRubber;
  Position position;

  bool operator==(const ObjectState&) const = default;
};

// Geometry of the bounded integer plane. Boundaries are closed on both the
// plane and the visible square.
struct PlaneConfig {
  int plane_bound = 40;
  int visible_bound = 20;
  std::array<double, 3> collision_radius = {3.0, 4.5, 6.0};  // indexed by Size
  int step_unit = 10;

  double radius(Size size) const { return collision_radius[static_cast<std::size_t>(size)]; }

  // Throws Error(kInvalidArgument) when the invariants do not hold.
  void validate() const;

  bool operator==(const PlaneConfig&) const = default;
};

bool is_visible(Position p, const PlaneConfig& cfg);
bool in_plane(Position p, const PlaneConfig& cfg);
bool collides(const ObjectState& a, const ObjectState& b, const PlaneConfig& cfg);

// Immutable set of objects whose ids are exactly 0..n-1 in order.
class SceneGraph {
 public:
  SceneGraph() = default;
  explicit SceneGraph(std::vector<ObjectState> objects, PlaneConfig config = {});

  const std::vector<ObjectState>& objects() const { return objects_; }
  const PlaneConfig& config() const { return config_; }
  std::size_t size() const { return objects_.size(); }
  bool contains(ObjectId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < objects_.size();
  }
  // Precondition: contains(id).
  const ObjectState& object(ObjectId id) const { return objects_[static_cast<std::size_t>(id)]; }

  // Copy with one object replaced (matched by id).
  SceneGraph with_object(const ObjectState& replacement) const;

  std::size_t visible_count() const;

  bool operator==(const SceneGraph&) const = default;

 private:
  std::vector<ObjectState> objects_;
  PlaneConfig config_;
};

struct ValidityReport {
  std::vector<std::pair<ObjectId, ObjectId>> colliding_pairs;
  std::vector<ObjectId> out_of_plane;

  bool valid() const { return colliding_pairs.empty() && out_of_plane.empty(); }
};

ValidityReport scene_valid(const SceneGraph& scene);

}  // namespace tvr
