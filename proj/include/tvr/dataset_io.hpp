#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvr/metrics.hpp"
#include "tvr/sample.hpp"
#include "tvr/sampler.hpp"

namespace tvr {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kManifestFile = "manifest.json";

// --- records ---------------------------------------------------------------

Json atomic_to_json(const AtomicTransformation& t);
Json transformation_to_json(const Transformation& t);
// Throws Error(kMalformedAnswer) on unknown tokens or bad shapes.
Transformation transformation_from_json(const Json& j);

Json objects_to_json(const SceneGraph& scene);
SceneGraph objects_from_json(const Json& j, const PlaneConfig& cfg);

// Prediction records share the sample layout; only `id` and
// `transformations` are read.
struct Prediction {
  std::string id;
  Transformation transformation;
};
Prediction prediction_from_json(const Json& j, std::size_t line = 0);
std::vector<Prediction> read_predictions(const std::filesystem::path& file);

// Record fields: id, setting, view, objects (initial state), transformations,
// split. The final state is rebuilt by strict application of the reference.
Json sample_to_json(const Sample& s);
// Throws Error(kMalformedRecord) tagged with `line`.
Sample sample_from_json(const Json& j, const PlaneConfig& cfg, std::size_t line = 0);

Json plane_config_to_json(const PlaneConfig& cfg);
PlaneConfig plane_config_from_json(const Json& j);
Json generator_config_to_json(const GeneratorConfig& cfg);
GeneratorConfig generator_config_from_json(const Json& j);

// --- datasets --------------------------------------------------------------

struct SplitFile {
  std::string name;
  std::string file;
  std::size_t records = 0;
  std::string sha256;

  bool operator==(const SplitFile&) const = default;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  GeneratorConfig generator;
  std::vector<SplitFile> splits;
  std::string creator = "tvr";
  Json balance_digest = Json::object();
  std::string checksum;

  bool operator==(const DatasetManifest&) const = default;
};

Json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const Json& j);

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> samples;
};

// Builds the manifest for `samples` (split files, digests, checksum) and
// writes `<dir>/<split>.jsonl` plus `<dir>/manifest.json`.
DatasetManifest write_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples,
                              const GeneratorConfig& generator);

// Throws Error(kIoError), Error(kMalformedRecord), Error(kVersionMismatch) or
// Error(kChecksumMismatch).
Dataset read_dataset(const std::filesystem::path& dir);

std::string sha256_hex(std::string_view bytes);
std::string serialize_split(const std::vector<Sample>& samples);

// --- statistics ------------------------------------------------------------

// Histograms of the balanced factors and n-gram statistics for n = 1..4.
// `cfg` fixes the histogram key ranges so empty input yields zero rows.
Json stats_report(const std::vector<Sample>& samples, const GeneratorConfig& cfg = {});

struct NgramStats {
  std::uint64_t options = 0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::uint64_t total = 0;
};

NgramStats ngram_stats(const std::vector<Sample>& samples, int n);

// --- encodings -------------------------------------------------------------

inline constexpr std::size_t kObjectEncodingSize = 19;
using ObjectEncoding = std::array<double, kObjectEncodingSize>;

// color(8) | size(3) | shape(3) | material(3) | x, y scaled by plane_bound
// and clamped to [-1, 1].
ObjectEncoding encode_object(const ObjectState& o, const PlaneConfig& cfg);
int encode_value(const TransformValue& v);
TransformValue decode_value(int index);

// --- reports ---------------------------------------------------------------

Json multi_score_to_json(const MultiScore& s);
Json aggregate_to_json(const AggregateReport& r);
Json basic_report_to_json(const BasicReport& r);

// --- rendering -------------------------------------------------------------

// Left and right views rotate the plane by -30 and +30 degrees about the
// origin before the top-down projection.
double view_rotation_degrees(View v);

// Top-down SVG of the visible objects. Deterministic for identical inputs.
std::string render_schematic(const SceneGraph& scene, View view);

}  // namespace tvr
