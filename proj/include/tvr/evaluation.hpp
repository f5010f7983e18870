#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tvr/dataset_io.hpp"
#include "tvr/metrics.hpp"

namespace tvr {

// Read-only id -> sample lookup over one or more loaded datasets.
class SampleIndex {
 public:
  SampleIndex() = default;
  explicit SampleIndex(std::vector<Dataset> datasets);

  const Sample* find(const std::string& id) const;
  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<Dataset>& datasets() const { return datasets_; }
  std::vector<std::string> split_names() const;
  std::vector<Sample> split(const std::string& name) const;
  // Generator config of the first dataset containing `split`.
  const GeneratorConfig* config_for_split(const std::string& name) const;

 private:
  std::vector<Dataset> datasets_;
  std::vector<Sample> samples_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct EvaluationResult {
  std::vector<std::string> ids;
  std::vector<MultiScore> scores;
  AggregateReport report;
  std::optional<BasicReport> basic;  // only when every sample is Basic
};

// Scores each prediction against its sample. Throws Error(kNotFound) for an
// unknown id and Error(kEmptyInput) for no predictions. `jobs` > 1 scores in
// parallel; results are identical to the sequential run.
EvaluationResult evaluate_predictions(const SampleIndex& index,
                                      const std::vector<Prediction>& predictions,
                                      unsigned jobs = 1);

// The canonical report document shared by the CLI and the service.
Json evaluation_report_json(const EvaluationResult& result);

struct OrderAnalysis {
  std::size_t evaluated = 0;
  std::size_t order_sensitive = 0;
  double fraction = 0.0;
  double random_order_eo = 0.0;
  int trials = 0;
  std::optional<AggregateReport> predictions_on_subset;
};

OrderAnalysis order_analysis(const SampleIndex& index, const std::vector<Prediction>& predictions,
                             int trials, std::uint64_t seed);

Json order_analysis_json(const OrderAnalysis& a);

}  // namespace tvr
