#include "tvr/sampler.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <set>
#include <utility>

#include "tvr/error.hpp"

namespace tvr {

namespace {

constexpr std::array<std::string_view, 3> kSettingNames = {"basic", "event", "view"};
constexpr std::array<std::string_view, 3> kViewNames = {"left", "center", "right"};
constexpr std::array<std::string_view, 3> kMoveTypeNames = {"in", "out", "inside"};
constexpr std::array<std::string_view, 2> kViewModeNames = {"sampled", "exhaustive"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_name(const std::array<std::string_view, N>& names,
                               std::string_view token) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == token) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

template <typename Range>
std::vector<std::string> names_of(const Range& values) {
  std::vector<std::string> out;
  for (const auto& v : values) out.emplace_back(to_string(v));
  return out;
}

std::vector<std::string> int_keys(int lo, int hi) {
  std::vector<std::string> out;
  for (int i = lo; i <= hi; ++i) out.push_back(std::to_string(i));
  return out;
}

std::vector<std::size_t> all_options(const CountTable& table) {
  std::vector<std::size_t> out(table.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

std::size_t draw_all(CountTable& table, double tolerance, Rng& rng) {
  const auto options = all_options(table);
  return balanced_sample(options, table, tolerance, rng);
}

bool uses_order(const GeneratorConfig& cfg, int order) {
  return std::find(cfg.ngram_orders.begin(), cfg.ngram_orders.end(), order) !=
         cfg.ngram_orders.end();
}

struct Candidate {
  AtomicTransformation atomic;
  std::optional<MoveType> move_type;
};

// Every atomic that may extend the sequence from `scene`.
std::vector<Candidate> enumerate_candidates(const SceneGraph& scene,
                                            const std::vector<std::pair<ObjectId, Attribute>>& used) {
  std::vector<Candidate> out;
  const PlaneConfig& cfg = scene.config();
  for (const auto& obj : scene.objects()) {
    const bool visible_before = is_visible(obj.position, cfg);
    for (const auto& value : all_values()) {
      const Attribute attr = value.attribute();
      if (std::find(used.begin(), used.end(), std::make_pair(obj.id, attr)) != used.end()) continue;
      if (!value.is_move() && !visible_before) continue;
      const AtomicTransformation atomic{obj.id, value};
      ObjectState changed;
      if (check_atomic(scene, atomic, ApplyMode::kStrict, &changed) != ApplyStatus::kOk) continue;
      std::optional<MoveType> type;
      if (value.is_move()) {
        type = classify_move(obj.position, changed.position, cfg);
        if (!type) continue;
      }
      out.push_back({atomic, type});
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Setting s) { return kSettingNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(View v) { return kViewNames[static_cast<std::size_t>(v)]; }
std::string_view to_string(MoveType m) { return kMoveTypeNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(ViewMode m) { return kViewModeNames[static_cast<std::size_t>(m)]; }

std::optional<Setting> parse_setting(std::string_view token) {
  return parse_name<Setting>(kSettingNames, token);
}
std::optional<View> parse_view(std::string_view token) {
  return parse_name<View>(kViewNames, token);
}
std::optional<ViewMode> parse_view_mode(std::string_view token) {
  return parse_name<ViewMode>(kViewModeNames, token);
}

CountTable::CountTable(std::string factor, std::vector<std::string> keys)
    : factor_(std::move(factor)), keys_(std::move(keys)), counts_(keys_.size(), 0) {}

std::vector<double> balanced_weights(std::span<const std::size_t> options, const CountTable& counts,
                                     double tolerance) {
  if (options.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "balanced sampling needs at least one option");
  }
  std::uint64_t n_max = 0;
  for (std::size_t o : options) n_max = std::max(n_max, counts.count(o));
  std::vector<double> weights;
  weights.reserve(options.size());
  for (std::size_t o : options) {
    weights.push_back(static_cast<double>(n_max - counts.count(o)) + tolerance);
  }
  return weights;
}

std::vector<double> balanced_probabilities(std::span<const std::size_t> options,
                                           const CountTable& counts, double tolerance) {
  auto weights = balanced_weights(options, counts, tolerance);
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;
  return weights;
}

std::size_t balanced_sample(std::span<const std::size_t> options, CountTable& counts,
                            double tolerance, Rng& rng) {
  const auto weights = balanced_weights(options, counts, tolerance);
  const std::size_t chosen = options[rng.weighted_index(weights)];
  counts.increment(chosen);
  return chosen;
}

std::optional<MoveType> classify_move(Position before, Position after, const PlaneConfig& cfg) {
  const bool was_visible = is_visible(before, cfg);
  const bool now_visible = is_visible(after, cfg);
  if (was_visible && now_visible) return MoveType::kInside;
  if (was_visible) return MoveType::kOut;
  if (now_visible) return MoveType::kIn;
  return std::nullopt;
}

void GeneratorConfig::validate() const {
  plane.validate();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
  if (objects_per_scene < 1) fail("objects_per_scene must be >= 1");
  if (!(1 <= min_visible && min_visible <= max_visible && max_visible <= objects_per_scene)) {
    fail("visible_count_range must lie within [1, objects_per_scene]");
  }
  if (!(1 <= min_length && min_length <= max_length)) fail("invalid transformation length range");
  if (!(tolerance > 0.0)) fail("tolerance must be positive");
  for (int order : ngram_orders) {
    if (order < 1 || order > 2) fail("only n-gram orders 1 and 2 can be balanced online");
  }
  if (max_retries < 1) fail("max_retries must be >= 1");
  std::set<std::string> names;
  for (const auto& s : splits) {
    if (s.name.empty()) fail("split names must be non-empty");
    for (char c : s.name) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
        fail("split name '" + s.name + "' may only use letters, digits, '_' and '-'");
      }
    }
    if (!names.insert(s.name).second) fail("duplicate split name '" + s.name + "'");
  }
}

SamplerTables SamplerTables::make(const GeneratorConfig& cfg) {
  SamplerTables t;
  t.visible_count = CountTable("visible_object_count", int_keys(cfg.min_visible, cfg.max_visible));
  t.size = CountTable("size", names_of(kAllSizes));
  t.color = CountTable("color", names_of(kAllColors));
  t.shape = CountTable("shape", names_of(kAllShapes));
  t.material = CountTable("material", names_of(kAllMaterials));
  t.length = CountTable("length", int_keys(cfg.min_length, cfg.max_length));
  t.object = CountTable("object", int_keys(0, cfg.objects_per_scene - 1));
  t.move_type = CountTable("move_type", names_of(kAllMoveTypes));
  std::vector<std::string> value_keys;
  for (const auto& v : all_values()) value_keys.push_back(v.token());
  std::vector<std::string> bigram_keys;
  for (const auto& a : value_keys) {
    for (const auto& b : value_keys) bigram_keys.push_back(a + " " + b);
  }
  t.value = CountTable("value_1gram", std::move(value_keys));
  t.value_bigram = CountTable("value_2gram", std::move(bigram_keys));
  return t;
}

SceneGraph sample_scene(const GeneratorConfig& cfg, SamplerTables& tables, Rng& rng) {
  const PlaneConfig& plane = cfg.plane;
  const int n = cfg.objects_per_scene;
  const int visible = cfg.min_visible +
                      static_cast<int>(draw_all(tables.visible_count, cfg.tolerance, rng));

  std::vector<ObjectState> objects(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& o = objects[static_cast<std::size_t>(i)];
    o.id = i;
    o.size = static_cast<Size>(draw_all(tables.size, cfg.tolerance, rng));
    o.color = static_cast<Color>(draw_all(tables.color, cfg.tolerance, rng));
    o.shape = static_cast<Shape>(draw_all(tables.shape, cfg.tolerance, rng));
    o.material = static_cast<Material>(draw_all(tables.material, cfg.tolerance, rng));
  }

  // Which ids are visible is random so that ids carry no visibility bias.
  std::vector<bool> is_visible_slot(static_cast<std::size_t>(n), false);
  std::fill_n(is_visible_slot.begin(), visible, true);
  rng.shuffle(is_visible_slot);

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    bool placed_all = true;
    for (int i = 0; i < n && placed_all; ++i) {
      auto& o = objects[static_cast<std::size_t>(i)];
      bool placed = false;
      for (int tries = 0; tries < cfg.max_retries && !placed; ++tries) {
        if (is_visible_slot[static_cast<std::size_t>(i)]) {
          o.position = {rng.uniform_int(-plane.visible_bound, plane.visible_bound),
                        rng.uniform_int(-plane.visible_bound, plane.visible_bound)};
        } else {
          do {
            o.position = {rng.uniform_int(-plane.plane_bound, plane.plane_bound),
                          rng.uniform_int(-plane.plane_bound, plane.plane_bound)};
          } while (is_visible(o.position, plane));
        }
        placed = std::none_of(objects.begin(), objects.begin() + i,
                              [&](const ObjectState& other) { return collides(o, other, plane); });
      }
      placed_all = placed;
    }
    if (placed_all) return SceneGraph(std::move(objects), plane);
  }
  throw Error(ErrorCode::kPlacementFailure,
              "could not place " + std::to_string(n) + " objects without overlap after " +
                  std::to_string(cfg.max_retries) + " attempts");
}

Transformation sample_transformation(const SceneGraph& scene, SamplerTables& tables,
                                     const GeneratorConfig& cfg, Rng& rng) {
  const double t = cfg.tolerance;
  const bool balance_unigram = uses_order(cfg, 1);
  const bool balance_bigram = uses_order(cfg, 2);

  for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
    SamplerTables trial = tables;
    const int length = cfg.min_length + static_cast<int>(draw_all(trial.length, t, rng));

    SceneGraph current = scene;
    Transformation sequence;
    std::vector<std::pair<ObjectId, Attribute>> used;
    bool ok = true;
    for (int step = 0; step < length; ++step) {
      const auto candidates = enumerate_candidates(current, used);
      if (candidates.empty()) {
        ok = false;
        break;
      }

      // Value: product of the balanced weights of each configured n-gram order.
      std::vector<std::size_t> values;
      for (const auto& c : candidates) values.push_back(static_cast<std::size_t>(c.atomic.value.index()));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());

      std::vector<double> weights(values.size(), 1.0);
      if (balance_unigram) {
        const auto w = balanced_weights(values, trial.value, t);
        for (std::size_t i = 0; i < w.size(); ++i) weights[i] *= w[i];
      }
      const std::optional<std::size_t> prev =
          sequence.empty() ? std::nullopt
                           : std::optional<std::size_t>(sequence.back().value.index());
      if (balance_bigram && prev) {
        std::vector<std::size_t> row;
        for (std::size_t v : values) row.push_back(*prev * TransformValue::kCount + v);
        const auto w = balanced_weights(row, trial.value_bigram, t);
        for (std::size_t i = 0; i < w.size(); ++i) weights[i] *= w[i];
      }
      // Move values are scaled by how well they can serve the move type that
      // balancing currently favours; values that cannot reach it are damped.
      std::vector<std::array<bool, 3>> reachable(values.size(), {false, false, false});
      std::array<bool, 3> any_type = {false, false, false};
      for (const auto& c : candidates) {
        if (!c.move_type) continue;
        const auto pos = std::lower_bound(values.begin(), values.end(),
                                          static_cast<std::size_t>(c.atomic.value.index()));
        const auto type = static_cast<std::size_t>(*c.move_type);
        reachable[static_cast<std::size_t>(pos - values.begin())][type] = true;
        any_type[type] = true;
      }
      std::vector<std::size_t> open_types;
      for (std::size_t m = 0; m < 3; ++m) {
        if (any_type[m]) open_types.push_back(m);
      }
      if (!open_types.empty()) {
        const auto type_weights = balanced_weights(open_types, trial.move_type, t);
        const double best = *std::max_element(type_weights.begin(), type_weights.end());
        for (std::size_t i = 0; i < values.size(); ++i) {
          if (!TransformValue::from_index(static_cast<int>(values[i])).is_move()) continue;
          double reach = 0.0;
          for (std::size_t k = 0; k < open_types.size(); ++k) {
            if (reachable[i][open_types[k]]) reach = std::max(reach, type_weights[k]);
          }
          weights[i] *= reach / best;
        }
      }
      const std::size_t value_index = values[rng.weighted_index(weights)];
      trial.value.increment(value_index);
      if (prev) trial.value_bigram.increment(*prev * TransformValue::kCount + value_index);

      std::vector<const Candidate*> matching;
      for (const auto& c : candidates) {
        if (static_cast<std::size_t>(c.atomic.value.index()) == value_index) matching.push_back(&c);
      }

      if (TransformValue::from_index(static_cast<int>(value_index)).is_move()) {
        std::vector<std::size_t> types;
        for (const auto* c : matching) types.push_back(static_cast<std::size_t>(*c->move_type));
        std::sort(types.begin(), types.end());
        types.erase(std::unique(types.begin(), types.end()), types.end());
        const auto type = static_cast<MoveType>(balanced_sample(types, trial.move_type, t, rng));
        std::erase_if(matching, [&](const Candidate* c) { return *c->move_type != type; });
      }

      std::vector<std::size_t> objects;
      for (const auto* c : matching) objects.push_back(static_cast<std::size_t>(c->atomic.object));
      const auto object = static_cast<ObjectId>(balanced_sample(objects, trial.object, t, rng));

      const AtomicTransformation atomic{object, TransformValue::from_index(static_cast<int>(value_index))};
      current = *apply_atomic(current, atomic, ApplyMode::kStrict).scene;
      used.emplace_back(object, atomic.value.attribute());
      sequence.push_back(atomic);
    }
    if (ok) {
      tables = std::move(trial);
      return sequence;
    }
  }
  throw Error(ErrorCode::kSamplingFailure, "transformation sampling exhausted its retry budget");
}

std::string sample_id(std::uint64_t seed, std::size_t sequence_number) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "s%llu-%07zu", static_cast<unsigned long long>(seed),
                sequence_number);
  return buf;
}

Sample generate_sample(const GeneratorConfig& cfg, SamplerTables& tables, Rng& rng,
                       std::size_t sequence_number) {
  SamplerTables trial = tables;
  Sample sample;
  sample.id = sample_id(cfg.seed, sequence_number);
  sample.setting = Setting::kEvent;
  sample.view = View::kCenter;
  sample.initial = sample_scene(cfg, trial, rng);
  sample.reference = sample_transformation(sample.initial, trial, cfg, rng);
  auto applied = apply_sequence(sample.initial, sample.reference, ApplyMode::kStrict);
  if (!applied.all_ok()) {
    throw Error(ErrorCode::kSamplingFailure, "sampled reference does not apply strictly");
  }
  sample.final_scene = std::move(applied.scene);
  tables = std::move(trial);
  return sample;
}

std::vector<Sample> derive_basic(const std::vector<Sample>& event_samples) {
  std::vector<Sample> out;
  for (const auto& s : event_samples) {
    if (s.reference.size() != 1) continue;
    out.push_back(s);
    out.back().setting = Setting::kBasic;
  }
  return out;
}

std::vector<Sample> expand_views(const Sample& sample, ViewMode mode, Rng& rng) {
  std::vector<Sample> out;
  auto with_view = [&](View v, bool suffix) {
    Sample s = sample;
    s.setting = Setting::kView;
    s.view = v;
    if (suffix) s.id += "-" + std::string(to_string(v));
    return s;
  };
  if (mode == ViewMode::kExhaustive) {
    for (View v : {View::kLeft, View::kCenter, View::kRight}) out.push_back(with_view(v, true));
  } else {
    out.push_back(with_view(static_cast<View>(rng.uniform_int(0, 2)), false));
  }
  return out;
}

GeneratedDataset generate_dataset(const GeneratorConfig& cfg) {
  cfg.validate();
  GeneratedDataset out{{}, SamplerTables::make(cfg)};
  Rng rng(cfg.seed);
  std::size_t sequence = 0;
  for (const auto& split : cfg.splits) {
    std::size_t emitted = 0;
    while (emitted < split.size) {
      Sample s = generate_sample(cfg, out.tables, rng, sequence++);
      s.split = split.name;
      switch (cfg.setting) {
        case Setting::kEvent:
          out.samples.push_back(std::move(s));
          ++emitted;
          break;
        case Setting::kBasic:
          for (auto& b : derive_basic({s})) {
            out.samples.push_back(std::move(b));
            ++emitted;
          }
          break;
        case Setting::kView:
          for (auto& v : expand_views(s, cfg.view_mode, rng)) out.samples.push_back(std::move(v));
          ++emitted;
          break;
      }
    }
  }
  return out;
}

}  // namespace tvr
