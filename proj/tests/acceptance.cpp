// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "support.hpp"
#include "tvr/cli.hpp"
#include "tvr/dataset_io.hpp"
#include "tvr/evaluation.hpp"
#include "tvr/metrics.hpp"
#include "tvr/sampler.hpp"
#include "tvr/service.hpp"

using namespace tvr;

namespace {

constexpr std::size_t kSampleCount = 10000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::vector<Sample> samples;
  double generation_seconds = 0.0;
  test::TempDir dir;
};

Context& context() {
  static Context ctx;
  if (ctx.samples.empty()) {
    const auto start = Clock::now();
    ctx.samples = generate_dataset(test::small_config(kSampleCount, 2024)).samples;
    ctx.generation_seconds = seconds_since(start);
  }
  return ctx;
}

Outcome round_trip() {
  auto& ctx = context();
  const auto start = Clock::now();
  std::size_t failed_steps = 0;
  std::size_t mismatched = 0;
  std::vector<MultiScore> scores;
  scores.reserve(ctx.samples.size());
  for (const auto& s : ctx.samples) {
    const auto r = apply_sequence(s.initial, s.reference, ApplyMode::kStrict);
    failed_steps += r.failures();
    if (!(r.scene == s.final_scene)) ++mismatched;
    scores.push_back(eval_multi(s.reference, s));
  }
  const AggregateReport rep = aggregate(scores);
  const double secs = seconds_since(start) + ctx.generation_seconds;
  const bool ok = ctx.samples.size() == kSampleCount && failed_steps == 0 && mismatched == 0 &&
                  rep.acc == 1.0 && rep.lacc == 1.0 && rep.ad == 0.0 && rep.and_ == 0.0 && secs < 30.0;
  return {ok, std::to_string(ctx.samples.size()) + " samples, failed steps " + std::to_string(failed_steps) +
                  ", final mismatches " + std::to_string(mismatched) + ", Acc " + fmt("%.4f", rep.acc) +
                  " LAcc " + fmt("%.4f", rep.lacc) + " AD " + fmt("%.4f", rep.ad) + " AND " +
                  fmt("%.4f", rep.and_) + ", " + fmt("%.2f s", secs)};
}

Outcome oracle_equivalence() {
  auto& ctx = context();
  const auto start = Clock::now();
  std::size_t unsolved = 0;
  std::size_t invalid = 0;
  std::vector<MultiScore> scores;
  for (const auto& s : ctx.samples) {
    Transformation t;
    try {
      t = solve(s.initial, s.final_scene);
    } catch (const Error&) {
      ++unsolved;
      continue;
    }
    if (!apply_sequence(s.initial, t, ApplyMode::kStrict).all_ok()) ++invalid;
    scores.push_back(eval_multi(t, s));
  }
  const double secs = seconds_since(start);
  if (scores.empty()) return {false, "no sample solved"};
  const AggregateReport rep = aggregate(scores);
  const bool ok = unsolved == 0 && invalid == 0 && rep.ad == 0.0 && rep.eo == 0.0 && secs < 60.0;
  return {ok, "unsolved " + std::to_string(unsolved) + ", strict-invalid " + std::to_string(invalid) + ", AD " +
                  fmt("%.4f", rep.ad) + ", EO " + fmt("%.4f", rep.eo) + ", " + fmt("%.2f s", secs)};
}

// Largest relative deviation from the mean of `counts`.
double max_relative_spread(const std::vector<double>& counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  const double mean = total / static_cast<double>(counts.size());
  double worst = 0.0;
  for (double c : counts) worst = std::max(worst, std::abs(c - mean) / mean);
  return worst;
}

Outcome balance() {
  auto& ctx = context();
  const PlaneConfig plane;
  std::vector<double> lengths(4, 0.0);
  std::vector<double> unigrams(TransformValue::kCount, 0.0);
  std::vector<double> visible(6, 0.0);  // 3..8
  std::map<MoveType, double> moves;
  for (const auto& s : ctx.samples) {
    lengths.at(s.reference.size() - 1) += 1.0;
    int vis = 0;
    for (const auto& o : s.initial.objects()) vis += is_visible(o.position, plane) ? 1 : 0;
    visible.at(static_cast<std::size_t>(vis - 3)) += 1.0;
    SceneGraph cur = s.initial;
    for (const auto& a : s.reference) {
      unigrams.at(static_cast<std::size_t>(a.value.index())) += 1.0;
      const auto next = apply_atomic(cur, a, ApplyMode::kStrict);
      if (a.value.is_move()) {
        const auto type =
            classify_move(cur.object(a.object).position, next.scene->object(a.object).position, plane);
        if (type) moves[*type] += 1.0;
      }
      cur = *next.scene;
    }
  }
  double length_dev = 0.0;
  for (double c : lengths) length_dev = std::max(length_dev, std::abs(c / kSampleCount - 0.25));
  const double gram_dev = max_relative_spread(unigrams);
  const double vis_dev = max_relative_spread(visible);
  const double move_dev = max_relative_spread(
      {moves[MoveType::kIn], moves[MoveType::kOut], moves[MoveType::kInside]});
  const auto [gmin, gmax] = std::minmax_element(unigrams.begin(), unigrams.end());
  const bool ok = length_dev <= 0.02 && gram_dev <= 0.05 && vis_dev <= 0.03 && move_dev <= 0.05;
  return {ok, "length dev " + fmt("%.4f", length_dev) + " abs, 1-gram dev " + fmt("%.4f", gram_dev) +
                  " rel (min " + fmt("%.0f", *gmin) + " max " + fmt("%.0f", *gmax) + "), visible dev " +
                  fmt("%.4f", vis_dev) + " rel, move-type dev " + fmt("%.4f", move_dev) + " rel (in " +
                  fmt("%.0f", moves[MoveType::kIn]) + " out " + fmt("%.0f", moves[MoveType::kOut]) +
                  " inside " + fmt("%.0f", moves[MoveType::kInside]) + ")"};
}

Outcome algorithm_one() {
  CountTable counts("f", {"a", "b"});
  counts.increment(0);
  counts.increment(0);
  const std::vector<std::size_t> two = {0, 1};
  const auto p = balanced_probabilities(two, counts, 0.1);
  const bool skewed = std::abs(p[0] - 1.0 / 22.0) <= 1e-12 && std::abs(p[1] - 21.0 / 22.0) <= 1e-12;

  CountTable equal("f", {"a", "b", "c", "d"});
  for (std::size_t i = 0; i < 4; ++i) {
    for (int k = 0; k < 3; ++k) equal.increment(i);
  }
  const std::vector<std::size_t> four = {0, 1, 2, 3};
  bool uniform = true;
  for (double v : balanced_probabilities(four, equal, 0.1)) uniform = uniform && v == 0.25;
  return {skewed && uniform, "p = (" + fmt("%.15f", p[0]) + ", " + fmt("%.15f", p[1]) + "), equal counts " +
                                 (uniform ? "uniform" : "not uniform")};
}

Outcome answer_space() {
  const BigInt total = answer_space_size(10, 33, 4);
  BigInt dominant = 330;
  dominant = dominant * dominant * dominant * dominant;
  const bool ok = total == BigInt("11895256230") && dominant == BigInt("11859210000");
  return {ok, "total " + total.str() + ", dominant term " + dominant.str()};
}

Outcome eo_reproduction() {
  auto& ctx = context();
  const auto subset = order_sensitive_subset(ctx.samples);
  if (subset.samples.empty()) return {false, "empty order-sensitive subset"};
  const double eo = random_order_eo(subset.samples, 100, 1);
  return {eo >= 0.35 && eo <= 0.65, "random-order EO " + fmt("%.4f", eo) + " over 100 trials, order-sensitive " +
                                        std::to_string(subset.samples.size()) + " (" +
                                        fmt("%.2f%%", 100.0 * subset.fraction) + ")"};
}

// Equivalence as the visible-state view: objects hidden in both scenes are
// ignored, every other object must match exactly and be visible in both.
bool visibly_equivalent(const SceneGraph& a, const SceneGraph& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.objects()[i];
    const auto& y = b.objects()[i];
    const bool vx = is_visible(x.position, a.config());
    const bool vy = is_visible(y.position, b.config());
    if (!vx && !vy) continue;
    if (!(x == y)) return false;
  }
  return true;
}

Outcome metric_identities() {
  auto& ctx = context();
  Rng rng(77);
  std::vector<MultiScore> scores;
  std::size_t violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const Sample& s = ctx.samples[static_cast<std::size_t>(rng.uniform_int(0, kSampleCount - 1))];
    Transformation pred;
    switch (rng.uniform_int(0, 2)) {
      case 0:
        pred = test::random_transformation(rng, 12);
        break;
      case 1:
        pred = s.reference;
        std::reverse(pred.begin(), pred.end());
        break;
      default:
        pred = s.reference;
        if (!pred.empty()) pred[0] = test::random_atomic(rng, 10);
    }
    const MultiScore m = eval_multi(pred, s);
    if (m.strict_correct && !m.loose_correct) ++violations;
    if (m.distance < 0) ++violations;
    scores.push_back(m);
  }
  const AggregateReport rep = aggregate(scores);
  const double expected_eo = rep.lacc == 0.0 ? 0.0 : (rep.lacc - rep.acc) / rep.lacc;
  const bool agg_ok = rep.acc <= rep.lacc && std::abs(rep.eo - expected_eo) <= 1e-12;

  std::size_t asym = 0;
  std::size_t zero_mismatch = 0;
  std::size_t zero_pairs = 0;
  const PlaneConfig plane;
  for (int i = 0; i < 1000; ++i) {
    const SceneGraph a = test::random_scene(rng, 10);
    std::vector<ObjectState> objs = a.objects();
    const int mode = rng.uniform_int(0, 2);
    for (auto& o : objs) {
      const bool hidden = !is_visible(o.position, plane);
      if (mode == 0 && hidden) {
        o = test::random_object(rng, o.id);
        while (is_visible(o.position, plane)) o.position = {rng.uniform_int(21, 40), rng.uniform_int(-40, 40)};
      } else if (mode == 1 && rng.uniform_int(0, 9) == 0) {
        o = test::random_object(rng, o.id);
      } else if (mode == 2) {
        o = test::random_object(rng, o.id);
      }
    }
    const SceneGraph b(objs);
    const int dab = scene_distance(a, b);
    if (dab != scene_distance(b, a)) ++asym;
    const bool eq = visibly_equivalent(a, b);
    zero_pairs += eq ? 1 : 0;
    if ((dab == 0) != eq) ++zero_mismatch;
  }
  const bool ok = violations == 0 && agg_ok && asym == 0 && zero_mismatch == 0;
  return {ok, "Acc " + fmt("%.4f", rep.acc) + " <= LAcc " + fmt("%.4f", rep.lacc) + ", EO " + fmt("%.4f", rep.eo) +
                  ", per-score violations " + std::to_string(violations) + ", asymmetric pairs " +
                  std::to_string(asym) + ", zero-iff-equivalent mismatches " + std::to_string(zero_mismatch) +
                  " (" + std::to_string(zero_pairs) + " equivalent pairs)"};
}

bool same_files(const std::filesystem::path& a, const std::filesystem::path& b, std::size_t& compared) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t other = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(b)) ++other;
  if (names.size() != other) return false;
  for (const auto& n : names) {
    if (!std::filesystem::exists(b / n) || test::read_bytes(a / n) != test::read_bytes(b / n)) return false;
    ++compared;
  }
  return true;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o;
  std::ostringstream e;
  const int code = cli::run(args, o, e);
  if (out != nullptr) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

Outcome determinism() {
  auto& ctx = context();
  const auto first = ctx.dir / "gen1";
  const auto second = ctx.dir / "gen2";
  for (const auto& d : {first, second}) {
    if (run_cli({"generate", "--seed", "7", "--size", "1000", "--out", d.string()}) != 0) {
      return {false, "generate failed"};
    }
  }
  std::size_t compared = 0;
  const bool identical = same_files(first, second, compared);

  const Dataset loaded = read_dataset(first);
  const auto rewritten = ctx.dir / "rewritten";
  write_dataset(rewritten, loaded.samples, loaded.manifest.generator);
  std::size_t compared_rt = 0;
  const bool round_trip = same_files(first, rewritten, compared_rt);
  return {identical && round_trip && compared > 0,
          std::to_string(compared) + " files byte-identical across runs: " + (identical ? "yes" : "no") +
              ", read/write round trip byte-identical: " + (round_trip ? "yes" : "no")};
}

Outcome table_four() {
  std::vector<MultiScore> scores(10000);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i].reference_length = 2;
    scores[i].loose_correct = i < 3862;
    scores[i].strict_correct = i < 3205;
    scores[i].distance = scores[i].strict_correct ? 0 : 1;
    scores[i].normalized_distance = scores[i].distance / 2.0;
  }
  const AggregateReport rep = aggregate(scores);
  return {std::abs(rep.eo - 0.1701) <= 1e-4 && std::abs(rep.lacc - 0.3862) < 1e-12 &&
              std::abs(rep.acc - 0.3205) < 1e-12,
          "LAcc " + fmt("%.4f", rep.lacc) + ", Acc " + fmt("%.4f", rep.acc) + ", EO " + fmt("%.6f", rep.eo)};
}

Outcome service_parity() {
  auto& ctx = context();
  const auto data = ctx.dir / "gen1";
  if (!std::filesystem::exists(data / "manifest.json")) return {false, "dataset from determinism step missing"};
  const Dataset dataset = read_dataset(data);

  Rng rng(99);
  Json records = Json::array();
  std::string lines;
  for (std::size_t i = 0; i < 1000; ++i) {
    const Sample& s = dataset.samples[i % dataset.samples.size()];
    Transformation pred = s.reference;
    switch (rng.uniform_int(0, 3)) {
      case 0:
        break;
      case 1:
        std::reverse(pred.begin(), pred.end());
        break;
      case 2:
        pred = test::random_transformation(rng, 10);
        break;
      default:
        if (!pred.empty()) pred.pop_back();
    }
    Json rec{{"id", s.id}, {"transformations", transformation_to_json(pred)}};
    lines += rec.dump() + "\n";
    records.push_back(std::move(rec));
  }
  test::write_bytes(ctx.dir / "pred.jsonl", lines);
  std::string cli_out;
  if (run_cli({"evaluate", "--data", data.string(), "--pred", (ctx.dir / "pred.jsonl").string(), "--json"},
              &cli_out) != 0) {
    return {false, "cli evaluate failed"};
  }
  const Json cli_report = Json::parse(cli_out);

  EvalService service({dataset}, ServiceOptions{false, ctx.dir / "sessions"});
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.listen(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  client.set_keep_alive(true);
  client.set_tcp_nodelay(true);
  bool parity = false;
  std::string detail;
  if (auto res = client.Post("/evaluate", Json{{"predictions", records}}.dump(), "application/json");
      res && res->status == 200) {
    const Json body = Json::parse(res->body);
    parity = body["report"] == cli_report && body["report"].dump(2) + "\n" == cli_out &&
             body["scores"].size() == records.size();
    detail = "report identical to CLI: " + std::string(parity ? "yes" : "no");
  } else {
    detail = "POST /evaluate failed";
  }

  std::vector<double> latencies;
  bool reward_ok = true;
  for (int i = 0; i < 300; ++i) {
    const Json& rec = records[static_cast<std::size_t>(i)];
    const Json query{{"id", rec["id"]}, {"transformations", rec["transformations"]}, {"kind", "corr"}};
    const auto start = Clock::now();
    auto res = client.Post("/reward", query.dump(), "application/json");
    latencies.push_back(seconds_since(start) * 1000.0);
    reward_ok = reward_ok && res && res->status == 200;
  }
  server.stop();
  thread.join();
  std::nth_element(latencies.begin(), latencies.begin() + latencies.size() / 2, latencies.end());
  const double p50 = latencies[latencies.size() / 2];
  detail += ", reward p50 " + fmt("%.3f ms", p50) + " over " + std::to_string(latencies.size()) + " queries";
  return {parity && reward_ok && p50 < 5.0, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"round-trip soundness", round_trip},
      {"oracle equivalence", oracle_equivalence},
      {"balance suite", balance},
      {"balanced sampling probabilities", algorithm_one},
      {"answer-space size", answer_space},
      {"random-order EO", eo_reproduction},
      {"metric identities", metric_identities},
      {"determinism", determinism},
      {"EO arithmetic", table_four},
      {"service parity and latency", service_parity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
