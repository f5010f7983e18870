#include "tvr/evaluation.hpp"

#include <algorithm>
#include <thread>

#include "tvr/error.hpp"

namespace tvr {

SampleIndex::SampleIndex(std::vector<Dataset> datasets) : datasets_(std::move(datasets)) {
  for (const auto& d : datasets_) {
    for (const auto& s : d.samples) {
      if (!by_id_.emplace(s.id, samples_.size()).second) {
        throw Error(ErrorCode::kInvalidArgument, "duplicate sample id '" + s.id + "'");
      }
      samples_.push_back(s);
    }
  }
}

const Sample* SampleIndex::find(const std::string& id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &samples_[it->second];
}

std::vector<std::string> SampleIndex::split_names() const {
  std::vector<std::string> out;
  for (const auto& d : datasets_) {
    for (const auto& s : d.manifest.splits) {
      if (std::find(out.begin(), out.end(), s.name) == out.end()) out.push_back(s.name);
    }
  }
  return out;
}

std::vector<Sample> SampleIndex::split(const std::string& name) const {
  std::vector<Sample> out;
  for (const auto& s : samples_) {
    if (s.split == name) out.push_back(s);
  }
  return out;
}

const GeneratorConfig* SampleIndex::config_for_split(const std::string& name) const {
  for (const auto& d : datasets_) {
    for (const auto& s : d.manifest.splits) {
      if (s.name == name) return &d.manifest.generator;
    }
  }
  return nullptr;
}

EvaluationResult evaluate_predictions(const SampleIndex& index,
                                      const std::vector<Prediction>& predictions, unsigned jobs) {
  if (predictions.empty()) throw Error(ErrorCode::kEmptyInput, "no predictions to evaluate");
  std::vector<const Sample*> samples;
  samples.reserve(predictions.size());
  for (const auto& p : predictions) {
    const Sample* s = index.find(p.id);
    if (s == nullptr) throw Error(ErrorCode::kNotFound, "unknown sample id '" + p.id + "'");
    samples.push_back(s);
  }

  EvaluationResult result;
  result.scores.resize(predictions.size());
  auto score_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      result.scores[i] = eval_multi(predictions[i].transformation, *samples[i]);
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(predictions.size())));
  if (jobs == 1) {
    score_range(0, predictions.size());
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (predictions.size() + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < predictions.size(); begin += chunk) {
      workers.emplace_back(score_range, begin, std::min(predictions.size(), begin + chunk));
    }
  }

  for (const auto& p : predictions) result.ids.push_back(p.id);
  result.report = aggregate(result.scores);

  const bool all_basic = std::all_of(samples.begin(), samples.end(),
                                     [](const Sample* s) { return s->setting == Setting::kBasic; });
  if (all_basic) {
    std::vector<BasicScore> basic;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const auto& pred = predictions[i].transformation;
      // Anything other than exactly one atomic is wrong on every component.
      basic.push_back(pred.size() == 1 ? eval_basic(pred.front(), samples[i]->reference.front())
                                       : BasicScore{});
    }
    result.basic = aggregate_basic(basic);
  }
  return result;
}

Json evaluation_report_json(const EvaluationResult& result) {
  Json j;
  j["metrics"] = aggregate_to_json(result.report);
  if (result.basic) j["basic"] = basic_report_to_json(*result.basic);
  return j;
}

OrderAnalysis order_analysis(const SampleIndex& index, const std::vector<Prediction>& predictions,
                             int trials, std::uint64_t seed) {
  OrderAnalysis a;
  a.trials = trials;
  std::vector<Sample> evaluated;
  std::vector<const Prediction*> preds;
  for (const auto& p : predictions) {
    const Sample* s = index.find(p.id);
    if (s == nullptr) throw Error(ErrorCode::kNotFound, "unknown sample id '" + p.id + "'");
    evaluated.push_back(*s);
    preds.push_back(&p);
  }
  a.evaluated = evaluated.size();
  std::vector<Sample> subset;
  std::vector<MultiScore> subset_scores;
  for (std::size_t i = 0; i < evaluated.size(); ++i) {
    if (!is_order_sensitive(evaluated[i].initial, evaluated[i].reference)) continue;
    subset.push_back(evaluated[i]);
    subset_scores.push_back(eval_multi(preds[i]->transformation, evaluated[i]));
  }
  a.order_sensitive = subset.size();
  a.fraction = evaluated.empty() ? 0.0
                                 : static_cast<double>(subset.size()) / static_cast<double>(evaluated.size());
  if (!subset.empty()) {
    a.random_order_eo = random_order_eo(subset, trials, seed);
    a.predictions_on_subset = aggregate(subset_scores);
  }
  return a;
}

Json order_analysis_json(const OrderAnalysis& a) {
  Json j;
  j["evaluated"] = a.evaluated;
  j["order_sensitive"] = a.order_sensitive;
  j["fraction"] = a.fraction;
  j["random_order_trials"] = a.trials;
  j["random_order_eo"] = a.random_order_eo;
  j["predictions_on_subset"] =
      a.predictions_on_subset ? aggregate_to_json(*a.predictions_on_subset) : Json(nullptr);
  return j;
}

}  // namespace tvr
