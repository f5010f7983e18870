#include "tvr/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "tvr/error.hpp"

namespace tvr {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& what) {
  std::string msg = "malformed record";
  if (line > 0) msg += " at line " + std::to_string(line);
  throw Error(ErrorCode::kMalformedRecord, msg + ": " + what);
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kMalformedRecord, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kMalformedRecord, std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T, typename Parser>
T required_enum(const Json& j, const char* key, Parser parse) {
  const auto token = required<std::string>(j, key);
  const auto value = parse(token);
  if (!value) {
    throw Error(ErrorCode::kMalformedRecord,
                std::string("field '") + key + "' has unknown value '" + token + "'");
  }
  return *value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << bytes;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Json parse_json(const std::string& text, ErrorCode code, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(code, where + ": " + e.what());
  }
}

std::string manifest_checksum(DatasetManifest m) {
  m.checksum.clear();
  return sha256_hex(manifest_to_json(m).dump());
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 computation failed");
  }
  std::ostringstream ss;
  ss << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) ss << std::setw(2) << static_cast<int>(digest[i]);
  return ss.str();
}

// --- records ---------------------------------------------------------------

Json atomic_to_json(const AtomicTransformation& t) {
  Json j;
  j["obj"] = t.object;
  j["value"] = t.value.token();
  return j;
}

Json transformation_to_json(const Transformation& t) {
  Json arr = Json::array();
  for (const auto& a : t) arr.push_back(atomic_to_json(a));
  return arr;
}

Transformation transformation_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kMalformedAnswer, "transformations must be an array");
  Transformation out;
  for (const auto& item : j) {
    if (item.is_string()) {
      const auto atomic = parse_atomic(item.get<std::string>());
      if (!atomic) {
        throw Error(ErrorCode::kMalformedAnswer, "cannot parse atomic '" + item.get<std::string>() + "'");
      }
      out.push_back(*atomic);
      continue;
    }
    if (!item.is_object() || !item.contains("obj") || !item.contains("value") ||
        !item["obj"].is_number_integer() || !item["value"].is_string()) {
      throw Error(ErrorCode::kMalformedAnswer, "atomic must be {\"obj\": int, \"value\": token}");
    }
    const auto value = TransformValue::parse(item["value"].get<std::string>());
    if (!value) {
      throw Error(ErrorCode::kMalformedAnswer,
                  "unknown value token '" + item["value"].get<std::string>() + "'");
    }
    out.push_back({item["obj"].get<int>(), *value});
  }
  return out;
}

Json objects_to_json(const SceneGraph& scene) {
  Json arr = Json::array();
  for (const auto& o : scene.objects()) {
    Json j;
    j["id"] = o.id;
    j["size"] = to_string(o.size);
    j["color"] = to_string(o.color);
    j["shape"] = to_string(o.shape);
    j["material"] = to_string(o.material);
    j["x"] = o.position.x;
    j["y"] = o.position.y;
    arr.push_back(std::move(j));
  }
  return arr;
}

SceneGraph objects_from_json(const Json& j, const PlaneConfig& cfg) {
  if (!j.is_array()) throw Error(ErrorCode::kMalformedRecord, "objects must be an array");
  std::vector<ObjectState> objects;
  for (const auto& item : j) {
    ObjectState o;
    o.id = required<int>(item, "id");
    o.size = required_enum<Size>(item, "size", parse_size);
    o.color = required_enum<Color>(item, "color", parse_color);
    o.shape = required_enum<Shape>(item, "shape", parse_shape);
    o.material = required_enum<Material>(item, "material", parse_material);
    o.position = {required<int>(item, "x"), required<int>(item, "y")};
    objects.push_back(o);
  }
  try {
    return SceneGraph(std::move(objects), cfg);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what());
  }
}

Json sample_to_json(const Sample& s) {
  Json j;
  j["id"] = s.id;
  j["setting"] = to_string(s.setting);
  j["view"] = to_string(s.view);
  j["objects"] = objects_to_json(s.initial);
  j["transformations"] = transformation_to_json(s.reference);
  j["split"] = s.split;
  return j;
}

Sample sample_from_json(const Json& j, const PlaneConfig& cfg, std::size_t line) {
  try {
    Sample s;
    s.id = required<std::string>(j, "id");
    s.setting = required_enum<Setting>(j, "setting", parse_setting);
    s.view = required_enum<View>(j, "view", parse_view);
    s.initial = objects_from_json(j.at("objects"), cfg);
    try {
      s.reference = transformation_from_json(j.at("transformations"));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord, e.what());
    }
    s.split = required<std::string>(j, "split");
    auto applied = apply_sequence(s.initial, s.reference, ApplyMode::kStrict);
    if (!applied.all_ok()) {
      throw Error(ErrorCode::kMalformedRecord, "reference transformation does not apply strictly");
    }
    s.final_scene = std::move(applied.scene);
    return s;
  } catch (const Error& e) {
    malformed(line, e.what());
  } catch (const nlohmann::json::exception& e) {
    malformed(line, e.what());
  }
}

Prediction prediction_from_json(const Json& j, std::size_t line) {
  try {
    Prediction p;
    p.id = required<std::string>(j, "id");
    if (!j.contains("transformations")) throw Error(ErrorCode::kMalformedRecord, "missing field 'transformations'");
    p.transformation = transformation_from_json(j.at("transformations"));
    return p;
  } catch (const Error& e) {
    malformed(line, e.what());
  }
}

std::vector<Prediction> read_predictions(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  std::vector<Prediction> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      malformed(line, e.what());
    }
    out.push_back(prediction_from_json(j, line));
  }
  return out;
}

Json plane_config_to_json(const PlaneConfig& cfg) {
  Json j;
  j["plane_bound"] = cfg.plane_bound;
  j["visible_bound"] = cfg.visible_bound;
  j["collision_radius"] = {{"small", cfg.collision_radius[0]},
                           {"medium", cfg.collision_radius[1]},
                           {"large", cfg.collision_radius[2]}};
  j["step_unit"] = cfg.step_unit;
  return j;
}

PlaneConfig plane_config_from_json(const Json& j) {
  PlaneConfig cfg;
  cfg.plane_bound = required<int>(j, "plane_bound");
  cfg.visible_bound = required<int>(j, "visible_bound");
  const Json& r = j.at("collision_radius");
  cfg.collision_radius = {required<double>(r, "small"), required<double>(r, "medium"),
                          required<double>(r, "large")};
  cfg.step_unit = required<int>(j, "step_unit");
  return cfg;
}

Json generator_config_to_json(const GeneratorConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["setting"] = to_string(cfg.setting);
  j["objects_per_scene"] = cfg.objects_per_scene;
  j["visible_count_range"] = {cfg.min_visible, cfg.max_visible};
  j["lengths"] = {cfg.min_length, cfg.max_length};
  j["tolerance"] = cfg.tolerance;
  j["ngram_orders"] = cfg.ngram_orders;
  j["max_retries"] = cfg.max_retries;
  j["view_mode"] = to_string(cfg.view_mode);
  Json splits = Json::array();
  for (const auto& s : cfg.splits) splits.push_back({{"name", s.name}, {"size", s.size}});
  j["splits"] = std::move(splits);
  j["plane"] = plane_config_to_json(cfg.plane);
  return j;
}

GeneratorConfig generator_config_from_json(const Json& j) {
  GeneratorConfig cfg;
  cfg.seed = required<std::uint64_t>(j, "seed");
  cfg.setting = required_enum<Setting>(j, "setting", parse_setting);
  cfg.objects_per_scene = required<int>(j, "objects_per_scene");
  const auto visible = required<std::vector<int>>(j, "visible_count_range");
  const auto lengths = required<std::vector<int>>(j, "lengths");
  if (visible.size() != 2 || lengths.size() != 2) {
    throw Error(ErrorCode::kMalformedRecord, "ranges must have two entries");
  }
  cfg.min_visible = visible[0];
  cfg.max_visible = visible[1];
  cfg.min_length = lengths[0];
  cfg.max_length = lengths[1];
  cfg.tolerance = required<double>(j, "tolerance");
  cfg.ngram_orders = required<std::vector<int>>(j, "ngram_orders");
  cfg.max_retries = required<int>(j, "max_retries");
  cfg.view_mode = required_enum<ViewMode>(j, "view_mode", parse_view_mode);
  cfg.splits.clear();
  for (const auto& s : j.at("splits")) {
    cfg.splits.push_back({required<std::string>(s, "name"), required<std::size_t>(s, "size")});
  }
  cfg.plane = plane_config_from_json(j.at("plane"));
  return cfg;
}

// --- datasets --------------------------------------------------------------

Json manifest_to_json(const DatasetManifest& m) {
  Json j;
  j["format_version"] = m.format_version;
  j["creator"] = m.creator;
  j["generator"] = generator_config_to_json(m.generator);
  Json splits = Json::array();
  for (const auto& s : m.splits) {
    splits.push_back({{"name", s.name}, {"file", s.file}, {"records", s.records}, {"sha256", s.sha256}});
  }
  j["splits"] = std::move(splits);
  j["balance_digest"] = m.balance_digest;
  j["checksum"] = m.checksum;
  return j;
}

DatasetManifest manifest_from_json(const Json& j) {
  DatasetManifest m;
  m.format_version = required<int>(j, "format_version");
  if (m.format_version != kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "dataset format version " + std::to_string(m.format_version) +
                    " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  m.creator = required<std::string>(j, "creator");
  m.generator = generator_config_from_json(j.at("generator"));
  for (const auto& s : j.at("splits")) {
    m.splits.push_back({required<std::string>(s, "name"), required<std::string>(s, "file"),
                        required<std::size_t>(s, "records"), required<std::string>(s, "sha256")});
    // Split files live next to the manifest.
    const std::string& file = m.splits.back().file;
    if (file.empty() || file.find('/') != std::string::npos || file.find('\\') != std::string::npos ||
        file == "." || file == "..") {
      throw Error(ErrorCode::kMalformedRecord, "split file '" + file + "' must be a plain file name");
    }
  }
  m.balance_digest = j.at("balance_digest");
  m.checksum = required<std::string>(j, "checksum");
  return m;
}

std::string serialize_split(const std::vector<Sample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s).dump();
    out += '\n';
  }
  return out;
}

DatasetManifest write_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples,
                              const GeneratorConfig& generator) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());

  // Split order: configured splits first, then any others by first appearance.
  std::vector<std::string> order;
  for (const auto& s : generator.splits) order.push_back(s.name);
  for (const auto& s : samples) {
    if (std::find(order.begin(), order.end(), s.split) == order.end()) order.push_back(s.split);
  }

  DatasetManifest m;
  m.generator = generator;
  for (const auto& name : order) {
    std::vector<Sample> part;
    for (const auto& s : samples) {
      if (s.split == name) part.push_back(s);
    }
    const std::string bytes = serialize_split(part);
    SplitFile f{name, name + ".jsonl", part.size(), sha256_hex(bytes)};
    write_file(dir / f.file, bytes);
    m.splits.push_back(std::move(f));
  }
  const Json stats = stats_report(samples, generator);
  m.balance_digest["transformation_length"] = stats["transformation_length"];
  m.balance_digest["move_type"] = stats["move_type"];
  m.balance_digest["value_1gram"] = stats["ngram"][0];
  m.checksum = manifest_checksum(m);
  write_file(dir / kManifestFile, manifest_to_json(m).dump(2) + "\n");
  return m;
}

Dataset read_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifestFile;
  const Json mj = parse_json(read_file(manifest_path), ErrorCode::kMalformedRecord,
                             manifest_path.string());
  Dataset d;
  try {
    d.manifest = manifest_from_json(mj);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, manifest_path.string() + ": " + e.what());
  }
  if (manifest_checksum(d.manifest) != d.manifest.checksum) {
    throw Error(ErrorCode::kChecksumMismatch, manifest_path.string() + ": manifest checksum mismatch");
  }
  const PlaneConfig& plane = d.manifest.generator.plane;
  for (const auto& split : d.manifest.splits) {
    const auto path = dir / split.file;
    const std::string bytes = read_file(path);
    std::istringstream in(bytes);
    std::string text;
    std::size_t line = 0;
    std::size_t records = 0;
    while (std::getline(in, text)) {
      ++line;
      Json j;
      try {
        j = Json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::kMalformedRecord,
                    path.string() + ": malformed record at line " + std::to_string(line) + ": " + e.what());
      }
      try {
        d.samples.push_back(sample_from_json(j, plane, line));
      } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
      }
      ++records;
    }
    // Records are parsed first so a damaged line is reported by position.
    if (sha256_hex(bytes) != split.sha256) {
      throw Error(ErrorCode::kChecksumMismatch, path.string() + ": content digest mismatch");
    }
    if (records != split.records) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + ": expected " +
                                                   std::to_string(split.records) + " records, found " +
                                                   std::to_string(records));
    }
  }
  return d;
}

// --- encodings -------------------------------------------------------------

ObjectEncoding encode_object(const ObjectState& o, const PlaneConfig& cfg) {
  ObjectEncoding e{};
  e[static_cast<std::size_t>(o.color)] = 1.0;
  e[8 + static_cast<std::size_t>(o.size)] = 1.0;
  e[11 + static_cast<std::size_t>(o.shape)] = 1.0;
  e[14 + static_cast<std::size_t>(o.material)] = 1.0;
  const double bound = cfg.plane_bound;
  e[17] = std::clamp(o.position.x / bound, -1.0, 1.0);
  e[18] = std::clamp(o.position.y / bound, -1.0, 1.0);
  return e;
}

int encode_value(const TransformValue& v) { return v.index(); }

TransformValue decode_value(int index) {
  if (index < 0 || index >= TransformValue::kCount) {
    throw Error(ErrorCode::kInvalidArgument, "value index " + std::to_string(index) + " is outside [0, 33)");
  }
  return TransformValue::from_index(index);
}

// --- reports ---------------------------------------------------------------

Json multi_score_to_json(const MultiScore& s) {
  Json j;
  j["distance"] = s.distance;
  j["normalized_distance"] = s.normalized_distance;
  j["strict_correct"] = s.strict_correct;
  j["loose_correct"] = s.loose_correct;
  j["reference_length"] = s.reference_length;
  return j;
}

Json aggregate_to_json(const AggregateReport& r) {
  Json j;
  j["count"] = r.count;
  j["AD"] = r.ad;
  j["AND"] = r.and_;
  j["Acc"] = r.acc;
  j["LAcc"] = r.lacc;
  j["EO"] = r.eo;
  Json rows = Json::array();
  for (const auto& [length, b] : r.per_length) {
    rows.push_back({{"length", length},
                    {"count", b.count},
                    {"AD", b.ad},
                    {"AND", b.and_},
                    {"Acc", b.acc},
                    {"LAcc", b.lacc},
                    {"EO", b.eo}});
  }
  j["per_length"] = std::move(rows);
  return j;
}

Json basic_report_to_json(const BasicReport& r) {
  Json j;
  j["count"] = r.count;
  j["ObjAcc"] = r.obj_acc;
  j["AttrAcc"] = r.attr_acc;
  j["ValAcc"] = r.val_acc;
  j["Acc"] = r.acc;
  return j;
}

}  // namespace tvr
