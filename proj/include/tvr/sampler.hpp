#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvr/random.hpp"
#include "tvr/sample.hpp"
#include "tvr/scene.hpp"
#include "tvr/transform.hpp"

namespace tvr {

// Occurrence counts for one balanced factor. Options are addressed by index
// into `keys()`.
class CountTable {
 public:
  CountTable() = default;
  CountTable(std::string factor, std::vector<std::string> keys);

  const std::string& factor() const { return factor_; }
  const std::vector<std::string>& keys() const { return keys_; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::size_t size() const { return counts_.size(); }
  std::uint64_t count(std::size_t option) const { return counts_.at(option); }
  void increment(std::size_t option) { ++counts_.at(option); }

  bool operator==(const CountTable&) const = default;

 private:
  std::string factor_;
  std::vector<std::string> keys_;
  std::vector<std::uint64_t> counts_;
};

// Balanced-sampling weights c_i = n_max - n_i + t over the available
// `options`, where n_max is taken over those options only.
std::vector<double> balanced_weights(std::span<const std::size_t> options, const CountTable& counts,
                                     double tolerance);

// Normalised balanced-sampling probabilities, aligned with `options`.
std::vector<double> balanced_probabilities(std::span<const std::size_t> options,
                                           const CountTable& counts, double tolerance);

// Draws one of `options` by balanced sampling and increments its count.
std::size_t balanced_sample(std::span<const std::size_t> options, CountTable& counts,
                            double tolerance, Rng& rng);

enum class MoveType : std::uint8_t { kIn, kOut, kInside };

inline constexpr std::array<MoveType, 3> kAllMoveTypes = {MoveType::kIn, MoveType::kOut,
                                                         MoveType::kInside};

std::string_view to_string(MoveType m);

// nullopt for invisible-to-invisible moves.
std::optional<MoveType> classify_move(Position before, Position after, const PlaneConfig& cfg);

enum class ViewMode : std::uint8_t { kSampled, kExhaustive };

std::string_view to_string(ViewMode m);
std::optional<ViewMode> parse_view_mode(std::string_view token);

struct SplitSpec {
  std::string name;
  std::size_t size = 0;

  bool operator==(const SplitSpec&) const = default;
};

struct GeneratorConfig {
  std::uint64_t seed = 0;
  Setting setting = Setting::kEvent;
  int objects_per_scene = 10;
  int min_visible = 3;
  int max_visible = 8;
  int min_length = 1;
  int max_length = 4;
  double tolerance = 0.1;
  std::vector<int> ngram_orders = {1, 2};
  int max_retries = 100;
  ViewMode view_mode = ViewMode::kSampled;
  std::vector<SplitSpec> splits = {{"test", 1000}};
  PlaneConfig plane;

  // Throws Error(kInvalidArgument).
  void validate() const;

  bool operator==(const GeneratorConfig&) const = default;
};

// The balanced factors. Only generation mutates them.
struct SamplerTables {
  CountTable visible_count;
  CountTable size;
  CountTable color;
  CountTable shape;
  CountTable material;
  CountTable length;
  CountTable object;
  CountTable move_type;
  CountTable value;         // 1-gram
  CountTable value_bigram;  // 2-gram, option = prev * 33 + next

  static SamplerTables make(const GeneratorConfig& cfg);
};

// Throws Error(kPlacementFailure) when positions cannot be found.
SceneGraph sample_scene(const GeneratorConfig& cfg, SamplerTables& tables, Rng& rng);

// Throws Error(kSamplingFailure) when the retry budget is exhausted.
Transformation sample_transformation(const SceneGraph& scene, SamplerTables& tables,
                                     const GeneratorConfig& cfg, Rng& rng);

// Deterministic id from (seed, sequence number).
std::string sample_id(std::uint64_t seed, std::size_t sequence_number);

// Event-setting sample. Tables are updated only when the sample succeeds.
Sample generate_sample(const GeneratorConfig& cfg, SamplerTables& tables, Rng& rng,
                       std::size_t sequence_number);

std::vector<Sample> derive_basic(const std::vector<Sample>& event_samples);

// Exhaustive: one copy per camera. Sampled: one uniformly chosen camera.
std::vector<Sample> expand_views(const Sample& sample, ViewMode mode, Rng& rng);

struct GeneratedDataset {
  std::vector<Sample> samples;  // grouped by split, in config order
  SamplerTables tables;
};

// Full pipeline for the configured setting and splits. Split sizes count
// emitted base samples (before view expansion).
GeneratedDataset generate_dataset(const GeneratorConfig& cfg);

}  // namespace tvr
