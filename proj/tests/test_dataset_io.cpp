#include <doctest.h>

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "support.hpp"
#include "tvr/dataset_io.hpp"
#include "tvr/error.hpp"

using namespace tvr;
using test::object;

namespace {

ErrorCode read_error(const std::filesystem::path& dir, std::string* message = nullptr) {
  try {
    read_dataset(dir);
  } catch (const Error& e) {
    if (message != nullptr) *message = e.what();
    return e.code();
  }
  FAIL("read_dataset succeeded");
  return ErrorCode::kInvalidArgument;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

std::multiset<std::string> glyph_signatures(const std::string& svg) {
  std::multiset<std::string> out;
  const std::regex glyph(R"re(<g class="glyph" data-id="(\d+)" data-size="(\w+)" data-color="(\w+)" data-shape="(\w+)" data-material="(\w+)")re");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), glyph); it != std::sregex_iterator(); ++it) {
    out.insert((*it)[1].str() + (*it)[2].str() + (*it)[3].str() + (*it)[4].str() + (*it)[5].str());
  }
  return out;
}

std::pair<double, double> glyph_center(const std::string& svg, int id) {
  const std::regex re("data-id=\"" + std::to_string(id) + R"re("[^>]*data-cx="([-0-9.]+)" data-cy="([-0-9.]+)")re");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, re));
  return {std::stod(m[1].str()), std::stod(m[2].str())};
}

}  // namespace

TEST_CASE("record layout is bit-exact") {
  Sample s;
  s.id = "s1-0000001";
  s.setting = Setting::kEvent;
  s.initial = SceneGraph({object(0, Size::kLarge, -5, 7, Color::kCyan, Shape::kSphere, Material::kMetal)});
  s.reference = {{0, TransformValue(Material::kGlass)}};
  s.final_scene = apply_sequence(s.initial, s.reference, ApplyMode::kStrict).scene;
  s.split = "test";
  CHECK(sample_to_json(s).dump() ==
        R"({"id":"s1-0000001","setting":"event","view":"center","objects":[{"id":0,"size":"large","color":"cyan","shape":"sphere","material":"metal","x":-5,"y":7}],"transformations":[{"obj":0,"value":"glass"}],"split":"test"})");
  CHECK(sample_from_json(sample_to_json(s), PlaneConfig{}) == s);
}

TEST_CASE("transformation parsing accepts both token forms") {
  const Json objects = Json::parse(R"j([{"obj":1,"value":"move_SW_2"},"(3, red)"])j");
  const Transformation t = transformation_from_json(objects);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == test::move(1, Direction::kSW, 2));
  CHECK(t[1] == AtomicTransformation{3, TransformValue(Color::kRed)});

  for (const char* bad : {R"({"obj":1})", R"([{"obj":1,"value":"teal"}])", R"([{"obj":"1","value":"red"}])",
                          R"j(["(1 red)"])j", R"([{"value":"red"}])"}) {
    try {
      transformation_from_json(Json::parse(bad));
      FAIL(bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMalformedAnswer);
    }
  }
}

TEST_CASE("sample records reject inconsistent references") {
  Json j = Json::parse(
      R"({"id":"x","setting":"event","view":"center","objects":[{"id":0,"size":"large","color":"cyan","shape":"sphere","material":"metal","x":35,"y":0}],"transformations":[{"obj":0,"value":"move_E_1"}],"split":"test"})");
  try {
    sample_from_json(j, PlaneConfig{}, 4);
    FAIL("expected malformed_record");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  j["transformations"] = Json::array();
  j["objects"][0]["color"] = "teal";
  CHECK_THROWS_AS(sample_from_json(j, PlaneConfig{}), Error);
}

TEST_CASE("dataset round trip is byte-identical") {
  GeneratorConfig cfg = test::small_config(0, 12);
  cfg.splits = {{"train", 70}, {"test", 30}};
  const auto samples = generate_dataset(cfg).samples;
  test::TempDir a;
  test::TempDir b;
  const DatasetManifest m = write_dataset(a.path(), samples, cfg);
  REQUIRE(m.splits.size() == 2);
  CHECK(m.splits[0].file == "train.jsonl");
  CHECK(m.splits[0].records == 70);

  const Dataset d = read_dataset(a.path());
  CHECK(d.samples == samples);
  CHECK(d.manifest == m);
  CHECK(d.manifest.generator == cfg);

  write_dataset(b.path(), d.samples, d.manifest.generator);
  for (const char* f : {"manifest.json", "train.jsonl", "test.jsonl"}) {
    CHECK(test::read_bytes(a / f) == test::read_bytes(b / f));
  }
  CHECK(sha256_hex(test::read_bytes(a / "test.jsonl")) == m.splits[1].sha256);
}

TEST_CASE("sha256 matches known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("damaged datasets are rejected with specific errors") {
  const GeneratorConfig cfg = test::small_config(20, 13);
  const auto samples = generate_dataset(cfg).samples;
  test::TempDir dir;
  write_dataset(dir.path(), samples, cfg);
  const std::string manifest = test::read_bytes(dir / "manifest.json");
  const std::string records = test::read_bytes(dir / "test.jsonl");

  SUBCASE("truncated line") {
    auto lines = lines_of(records);
    lines[2] = lines[2].substr(0, lines[2].size() / 2);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    test::write_bytes(dir / "test.jsonl", text);
    std::string msg;
    CHECK(read_error(dir.path(), &msg) == ErrorCode::kMalformedRecord);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  SUBCASE("tampered seed") {
    Json j = Json::parse(manifest);
    j["generator"]["seed"] = 14;
    test::write_bytes(dir / "manifest.json", j.dump(2) + "\n");
    CHECK(read_error(dir.path()) == ErrorCode::kChecksumMismatch);
  }
  SUBCASE("edited record") {
    std::string edited = records;
    const auto pos = edited.find("\"red\"");
    const auto pos2 = edited.find("\"blue\"");
    REQUIRE((pos != std::string::npos || pos2 != std::string::npos));
    if (pos != std::string::npos) {
      edited.replace(pos, 5, "\"cyan\"");
    } else {
      edited.replace(pos2, 6, "\"gray\"");
    }
    test::write_bytes(dir / "test.jsonl", edited);
    // Either the reference no longer applies or the digest differs.
    const ErrorCode code = read_error(dir.path());
    CHECK((code == ErrorCode::kChecksumMismatch || code == ErrorCode::kMalformedRecord));
  }
  SUBCASE("dropped record") {
    auto lines = lines_of(records);
    lines.pop_back();
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    test::write_bytes(dir / "test.jsonl", text);
    CHECK(read_error(dir.path()) == ErrorCode::kChecksumMismatch);
  }
  SUBCASE("version") {
    Json j = Json::parse(manifest);
    j["format_version"] = 2;
    test::write_bytes(dir / "manifest.json", j.dump(2));
    CHECK(read_error(dir.path()) == ErrorCode::kVersionMismatch);
  }
  SUBCASE("split file escaping the directory") {
    Json j = Json::parse(manifest);
    j["splits"][0]["file"] = "../test.jsonl";
    test::write_bytes(dir / "manifest.json", j.dump(2));
    CHECK(read_error(dir.path()) == ErrorCode::kMalformedRecord);
  }
  SUBCASE("missing directory") {
    CHECK(read_error(dir / "nope") == ErrorCode::kIoError);
  }
}

TEST_CASE("predictions file") {
  test::TempDir dir;
  test::write_bytes(dir / "p.jsonl", "{\"id\":\"a\",\"transformations\":[\"(0, red)\"]}\n\n{\"id\":\"b\",\"transformations\":[]}\n");
  const auto preds = read_predictions(dir / "p.jsonl");
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].id == "a");
  CHECK(preds[0].transformation.size() == 1);
  CHECK(preds[1].transformation.empty());

  test::write_bytes(dir / "bad.jsonl", "{\"id\":\"a\",\"transformations\":[]}\n{\"id\":\"b\"}\n");
  try {
    read_predictions(dir / "bad.jsonl");
    FAIL("expected malformed_record");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformedRecord);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config serialization round trips") {
  GeneratorConfig cfg;
  cfg.seed = 123456789012345ULL;
  cfg.setting = Setting::kView;
  cfg.view_mode = ViewMode::kExhaustive;
  cfg.splits = {{"train", 5}, {"val", 2}};
  cfg.plane.collision_radius = {2.5, 4.0, 5.5};
  CHECK(generator_config_from_json(generator_config_to_json(cfg)) == cfg);
  CHECK(plane_config_from_json(plane_config_to_json(cfg.plane)) == cfg.plane);
}

TEST_CASE("stats report") {
  const GeneratorConfig cfg = test::small_config(400, 15);
  const auto samples = generate_dataset(cfg).samples;
  const Json r = stats_report(samples, cfg);
  // Oracle: direct counting.
  std::map<std::string, int> lengths;
  std::map<std::string, int> grams;
  for (const auto& s : samples) {
    ++lengths[std::to_string(s.reference.size())];
    for (const auto& a : s.reference) ++grams[a.value.token()];
  }
  for (const auto& [k, v] : lengths) CHECK(r["transformation_length"][k] == v);
  for (const auto& [k, v] : grams) CHECK(r["value_1gram_counts"][k] == v);
  for (int len = 1; len <= 4; ++len) {
    CHECK(std::abs(r["transformation_length"][std::to_string(len)].get<int>() / 400.0 - 0.25) <= 0.02);
  }
  REQUIRE(r["ngram"].size() == 4);
  CHECK(r["ngram"][0]["options"] == 33);
  CHECK(r["ngram"][1]["options"] == 1089);
  CHECK(r["ngram"][3]["options"] == 1185921);
  std::size_t total_atomics = 0;
  for (const auto& s : samples) total_atomics += s.reference.size();
  CHECK(r["ngram"][0]["total"] == total_atomics);

  const Json empty = stats_report({}, cfg);
  CHECK(empty["samples"] == 0);
  for (const char* key : {"visible_object_count", "transformation_length", "object_number", "move_type",
                          "value_1gram_counts"}) {
    REQUIRE(!empty[key].empty());
    for (auto& [k, v] : empty[key].items()) CHECK(v == 0);
  }
  for (auto& [attr, hist] : empty["attribute_values"].items()) {
    for (auto& [k, v] : hist.items()) CHECK(v == 0);
  }
  for (const auto& row : empty["ngram"]) {
    CHECK(row["total"] == 0);
    CHECK(row["max"] == 0);
    CHECK(row["mean"] == 0.0);
  }
}

TEST_CASE("ngram statistics match a hand-computed example") {
  Sample s;
  s.initial = SceneGraph({object(0, Size::kSmall, 0, 0), object(1, Size::kSmall, 15, 15)});
  s.reference = {{0, TransformValue(Color::kRed)}, {1, TransformValue(Color::kRed)}};
  s.final_scene = apply_sequence(s.initial, s.reference, ApplyMode::kStrict).scene;
  const NgramStats one = ngram_stats({s}, 1);
  CHECK(one.options == 33);
  CHECK(one.total == 2);
  CHECK(one.max == 2);
  CHECK(one.min == 0);
  CHECK(one.median == 0.0);
  CHECK(one.mean == doctest::Approx(2.0 / 33.0));
  // Population std with one option at 2 and 32 at 0.
  const double mean = 2.0 / 33.0;
  CHECK(one.stddev == doctest::Approx(std::sqrt(((2 - mean) * (2 - mean) + 32 * mean * mean) / 33.0)));
  const NgramStats two = ngram_stats({s}, 2);
  CHECK(two.total == 1);
  CHECK(ngram_stats({s}, 3).total == 0);
}

TEST_CASE("object encoding layout") {
  const PlaneConfig cfg;
  const ObjectEncoding e = encode_object(object(0, Size::kSmall, 40, -40, Color::kRed, Shape::kCube, Material::kRubber), cfg);
  // color(8) | size(3) | shape(3) | material(3) | x | y
  const ObjectEncoding expected = {0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1.0, -1.0};
  CHECK(e == expected);

  Rng rng(16);
  for (int i = 0; i < 1000; ++i) {
    const ObjectEncoding r = encode_object(test::random_object(rng, 0, 60), cfg);
    auto block = [&](std::size_t from, std::size_t n) {
      double sum = 0;
      for (std::size_t k = from; k < from + n; ++k) {
        REQUIRE((r[k] == 0.0 || r[k] == 1.0));
        sum += r[k];
      }
      return sum;
    };
    REQUIRE(block(0, 8) == 1.0);
    REQUIRE(block(8, 3) == 1.0);
    REQUIRE(block(11, 3) == 1.0);
    REQUIRE(block(14, 3) == 1.0);
    REQUIRE(std::abs(r[17]) <= 1.0);
    REQUIRE(std::abs(r[18]) <= 1.0);
  }
}

TEST_CASE("value encoding is a bijection onto [0, 33)") {
  std::set<int> seen;
  for (const auto& v : all_values()) {
    const int i = encode_value(v);
    CHECK(i >= 0);
    CHECK(i < 33);
    seen.insert(i);
    CHECK(decode_value(i) == v);
  }
  CHECK(seen.size() == 33);
  CHECK_THROWS_AS(decode_value(33), Error);
}

TEST_CASE("render_schematic") {
  const SceneGraph empty;
  const std::string outline = render_schematic(empty, View::kCenter);
  CHECK(outline.find("class=\"visible-area\"") != std::string::npos);
  CHECK(glyph_signatures(outline).empty());

  const SceneGraph s({object(0, Size::kSmall, 10, 0, Color::kRed, Shape::kSphere, Material::kRubber),
                      object(1, Size::kLarge, -12, 8, Color::kBlue, Shape::kCube, Material::kMetal),
                      object(2, Size::kMedium, 0, -15, Color::kYellow, Shape::kCylinder, Material::kGlass),
                      object(3, Size::kMedium, 35, 35, Color::kGreen)});
  const std::string center = render_schematic(s, View::kCenter);
  const std::string left = render_schematic(s, View::kLeft);
  CHECK(center == render_schematic(s, View::kCenter));
  CHECK(center != left);
  CHECK(glyph_signatures(center) == glyph_signatures(left));
  CHECK(glyph_signatures(center).size() == 3);
  CHECK(center.find("data-id=\"3\"") == std::string::npos);
  CHECK(center.find("<circle") != std::string::npos);
  CHECK(center.find("stroke-dasharray") != std::string::npos);

  // Rotation preserves distance from the origin and turns by 30 degrees.
  CHECK(view_rotation_degrees(View::kLeft) == -30.0);
  CHECK(view_rotation_degrees(View::kCenter) == 0.0);
  CHECK(view_rotation_degrees(View::kRight) == 30.0);
  // Canvas: 400 px over 1.5x the visible square, centred, y pointing down.
  const double scale = 400.0 / 60.0;
  auto [cx, cy] = glyph_center(center, 1);
  auto [lx, ly] = glyph_center(left, 1);
  cx -= 200.0;
  cy -= 200.0;
  lx -= 200.0;
  ly -= 200.0;
  CHECK(cx == doctest::Approx(-12.0 * scale).epsilon(1e-4));
  CHECK(cy == doctest::Approx(-8.0 * scale).epsilon(1e-4));
  CHECK(std::hypot(lx, ly) == doctest::Approx(std::hypot(cx, cy)).epsilon(1e-3));
  const double turn = std::atan2(ly, lx) - std::atan2(cy, cx);
  double deg = turn * 180.0 / 3.14159265358979323846;
  if (deg > 180.0) deg -= 360.0;
  if (deg < -180.0) deg += 360.0;
  CHECK(std::abs(deg) == doctest::Approx(30.0).epsilon(1e-3));
}
