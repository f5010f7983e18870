#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tvr/dataset_io.hpp"
#include "tvr/error.hpp"

namespace tvr {

namespace {

template <typename Range>
Json zero_histogram(const Range& values) {
  Json h = Json::object();
  for (const auto& v : values) h[std::string(to_string(v))] = 0;
  return h;
}

Json int_histogram(int lo, int hi) {
  Json h = Json::object();
  for (int i = lo; i <= hi; ++i) h[std::to_string(i)] = 0;
  return h;
}

void bump(Json& histogram, const std::string& key) {
  if (!histogram.contains(key)) histogram[key] = 0;
  histogram[key] = histogram[key].get<std::uint64_t>() + 1;
}

}  // namespace

NgramStats ngram_stats(const std::vector<Sample>& samples, int n) {
  if (n < 1 || n > 4) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be in 1..4");
  NgramStats st;
  st.options = 1;
  for (int i = 0; i < n; ++i) st.options *= TransformValue::kCount;

  // Sliding window with stride 1 over each reference sequence.
  std::unordered_map<std::uint64_t, std::uint64_t> counts;
  for (const auto& s : samples) {
    const auto& ref = s.reference;
    if (ref.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t start = 0; start + n <= ref.size(); ++start) {
      std::uint64_t key = 0;
      for (int k = 0; k < n; ++k) {
        key = key * TransformValue::kCount + static_cast<std::uint64_t>(ref[start + k].value.index());
      }
      ++counts[key];
      ++st.total;
    }
  }

  std::vector<std::uint64_t> nonzero;
  nonzero.reserve(counts.size());
  for (const auto& [key, c] : counts) nonzero.push_back(c);
  std::sort(nonzero.begin(), nonzero.end());
  const std::uint64_t zeros = st.options - nonzero.size();

  st.min = zeros > 0 ? 0 : nonzero.front();
  st.max = nonzero.empty() ? 0 : nonzero.back();
  auto nth = [&](std::uint64_t i) -> double {
    return i < zeros ? 0.0 : static_cast<double>(nonzero[i - zeros]);
  };
  st.median = st.options % 2 == 1 ? nth(st.options / 2)
                                   : 0.5 * (nth(st.options / 2 - 1) + nth(st.options / 2));
  const double options = static_cast<double>(st.options);
  st.mean = static_cast<double>(st.total) / options;
  double sq = static_cast<double>(zeros) * st.mean * st.mean;
  for (std::uint64_t c : nonzero) {
    const double d = static_cast<double>(c) - st.mean;
    sq += d * d;
  }
  st.stddev = std::sqrt(sq / options);
  return st;
}

Json stats_report(const std::vector<Sample>& samples, const GeneratorConfig& cfg) {
  Json attrs;
  attrs["size"] = zero_histogram(kAllSizes);
  attrs["color"] = zero_histogram(kAllColors);
  attrs["shape"] = zero_histogram(kAllShapes);
  attrs["material"] = zero_histogram(kAllMaterials);
  Json visible = int_histogram(cfg.min_visible, cfg.max_visible);
  Json length = int_histogram(cfg.min_length, cfg.max_length);
  Json object = int_histogram(0, cfg.objects_per_scene - 1);
  Json move = zero_histogram(kAllMoveTypes);
  Json values = Json::object();
  for (const auto& v : all_values()) values[v.token()] = 0;

  for (const auto& s : samples) {
    for (const auto& o : s.initial.objects()) {
      bump(attrs["size"], std::string(to_string(o.size)));
      bump(attrs["color"], std::string(to_string(o.color)));
      bump(attrs["shape"], std::string(to_string(o.shape)));
      bump(attrs["material"], std::string(to_string(o.material)));
    }
    bump(visible, std::to_string(s.initial.visible_count()));
    bump(length, std::to_string(s.reference.size()));
    SceneGraph current = s.initial;
    for (const auto& atomic : s.reference) {
      bump(object, std::to_string(atomic.object));
      bump(values, atomic.value.token());
      ObjectState changed;
      if (check_atomic(current, atomic, ApplyMode::kLoose, &changed) != ApplyStatus::kOk) continue;
      if (atomic.value.is_move()) {
        const auto type = classify_move(current.object(atomic.object).position, changed.position,
                                        current.config());
        if (type) bump(move, std::string(to_string(*type)));
      }
      current = current.with_object(changed);
    }
  }

  Json report;
  report["samples"] = samples.size();
  report["attribute_values"] = std::move(attrs);
  report["visible_object_count"] = std::move(visible);
  report["transformation_length"] = std::move(length);
  report["object_number"] = std::move(object);
  report["move_type"] = std::move(move);
  report["value_1gram_counts"] = std::move(values);
  Json ngrams = Json::array();
  for (int n = 1; n <= 4; ++n) {
    const NgramStats st = ngram_stats(samples, n);
    ngrams.push_back({{"n", n},
                      {"options", st.options},
                      {"total", st.total},
                      {"min", st.min},
                      {"max", st.max},
                      {"median", st.median},
                      {"mean", st.mean},
                      {"std", st.stddev}});
  }
  report["ngram"] = std::move(ngrams);
  return report;
}

}  // namespace tvr
