#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "tvr/random.hpp"
#include "tvr/sampler.hpp"
#include "tvr/scene.hpp"
#include "tvr/transform.hpp"

namespace tvr::test {

inline ObjectState object(ObjectId id, Size size, int x, int y, Color color = Color::kGray,
                          Shape shape = Shape::kCube, Material material = Material::kRubber) {
  return ObjectState{id, size, color, shape, material, Position{x, y}};
}

inline AtomicTransformation atomic(ObjectId id, TransformValue v) { return {id, v}; }

inline AtomicTransformation move(ObjectId id, Direction d, int step) {
  return {id, TransformValue(MoveValue{d, step})};
}

// Uniform object over every attribute and the whole plane.
inline ObjectState random_object(Rng& rng, ObjectId id, int bound = 40) {
  ObjectState o;
  o.id = id;
  o.size = static_cast<Size>(rng.uniform_int(0, 2));
  o.color = static_cast<Color>(rng.uniform_int(0, 7));
  o.shape = static_cast<Shape>(rng.uniform_int(0, 2));
  o.material = static_cast<Material>(rng.uniform_int(0, 2));
  o.position = {rng.uniform_int(-bound, bound), rng.uniform_int(-bound, bound)};
  return o;
}

// Random scene without placement constraints.
inline SceneGraph random_scene(Rng& rng, int n) {
  std::vector<ObjectState> objs;
  for (int i = 0; i < n; ++i) objs.push_back(random_object(rng, i));
  return SceneGraph(std::move(objs));
}

inline AtomicTransformation random_atomic(Rng& rng, int object_count) {
  return {rng.uniform_int(0, object_count - 1),
          TransformValue::from_index(rng.uniform_int(0, TransformValue::kCount - 1))};
}

inline Transformation random_transformation(Rng& rng, int object_count, int max_len = 4) {
  Transformation t;
  const int len = rng.uniform_int(0, max_len);
  for (int i = 0; i < len; ++i) t.push_back(random_atomic(rng, object_count));
  return t;
}

inline GeneratorConfig small_config(std::size_t size, std::uint64_t seed = 7,
                                    Setting setting = Setting::kEvent) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.setting = setting;
  cfg.splits = {{"test", size}};
  return cfg;
}

// Large object 1 must leave before large object 0 can step east next to it.
// Object 0 at (-20,0), object 1 at (0,0); A = (1, E 1), B = (0, E 1).
inline SceneGraph dependency_scene() {
  return SceneGraph({object(0, Size::kLarge, -20, 0), object(1, Size::kLarge, 0, 0)});
}
inline AtomicTransformation dependency_a() { return move(1, Direction::kE, 1); }
inline AtomicTransformation dependency_b() { return move(0, Direction::kE, 1); }

}  // namespace tvr::test


namespace tvr::test {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("tvr-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace tvr::test
