#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tvr/scene.hpp"
#include "tvr/transform.hpp"

namespace tvr {

enum class Setting : std::uint8_t { kBasic, kEvent, kView };
enum class View : std::uint8_t { kLeft, kCenter, kRight };

std::string_view to_string(Setting s);
std::string_view to_string(View v);
std::optional<Setting> parse_setting(std::string_view token);
std::optional<View> parse_view(std::string_view token);

// One task instance. The initial state is always seen from the center
// camera; `view` labels the final-state camera.
struct Sample {
  std::string id;
  Setting setting = Setting::kEvent;
  SceneGraph initial;
  SceneGraph final_scene;
  Transformation reference;
  View view = View::kCenter;
  std::string split;

  bool operator==(const Sample&) const = default;
};

}  // namespace tvr
