#include "tvr/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "tvr/dataset_io.hpp"
#include "tvr/error.hpp"
#include "tvr/evaluation.hpp"
#include "tvr/sampler.hpp"
#include "tvr/service.hpp"

namespace tvr::cli {

namespace {

std::string default_data_dir() {
  const char* env = std::getenv(kDataDirEnv);
  return env == nullptr ? "" : env;
}

std::vector<Dataset> load_all(const std::vector<std::string>& dirs) {
  if (dirs.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("no dataset directory: pass --data DIR or set ") + kDataDirEnv);
  }
  std::vector<Dataset> out;
  for (const auto& d : dirs) out.push_back(read_dataset(d));
  return out;
}

// "train=800,val=100,test=100" -> split specs.
std::vector<SplitSpec> parse_splits(const std::string& text) {
  std::vector<SplitSpec> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::kInvalidArgument, "split '" + item + "' must look like NAME=SIZE");
    }
    SplitSpec spec;
    spec.name = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const long long n = std::stoll(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1 || n <= 0) throw std::invalid_argument("size");
      spec.size = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "split '" + item + "' needs a positive integer size");
    }
    out.push_back(std::move(spec));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "--splits is empty");
  return out;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

void print_report_table(std::ostream& out, const EvaluationResult& r) {
  const auto& a = r.report;
  out << "samples " << a.count << "\n";
  out << "AD    " << fixed(a.ad) << "\n"
      << "AND   " << fixed(a.and_) << "\n"
      << "Acc   " << fixed(a.acc) << "\n"
      << "LAcc  " << fixed(a.lacc) << "\n"
      << "EO    " << fixed(a.eo) << "\n";
  out << "\nlength  count  AD      AND     Acc     LAcc    EO\n";
  for (const auto& [len, b] : a.per_length) {
    out << std::left << std::setw(8) << len << std::setw(7) << b.count << std::setw(8) << fixed(b.ad)
        << std::setw(8) << fixed(b.and_) << std::setw(8) << fixed(b.acc) << std::setw(8)
        << fixed(b.lacc) << fixed(b.eo) << "\n";
  }
  if (r.basic) {
    out << "\nObjAcc  " << fixed(r.basic->obj_acc) << "\nAttrAcc " << fixed(r.basic->attr_acc)
        << "\nValAcc  " << fixed(r.basic->val_acc) << "\nAcc     " << fixed(r.basic->acc) << "\n";
  }
}

void print_order_table(std::ostream& out, const OrderAnalysis& a) {
  out << "\norder-sensitive  " << a.order_sensitive << " / " << a.evaluated << " ("
      << fixed(100.0 * a.fraction, 2) << "%)\n";
  out << "random-order EO  " << fixed(a.random_order_eo) << " over " << a.trials << " trials\n";
  if (a.predictions_on_subset) {
    out << "EO on subset     " << fixed(a.predictions_on_subset->eo) << "\n";
  }
}

void print_stats_table(std::ostream& out, const std::string& split, const Json& stats) {
  out << "split " << split << "\n";
  for (const char* key : {"visible_object_count", "transformation_length", "object_number", "move_type"}) {
    if (!stats.contains(key)) continue;
    out << key << ":";
    for (auto& [k, v] : stats.at(key).items()) out << " " << k << "=" << v.dump();
    out << "\n";
  }
  if (stats.contains("ngram")) {
    out << "n  options  total  min  max  median  mean  std\n";
    for (const auto& row : stats.at("ngram")) {
      out << row.at("n").dump() << "  " << row.at("options").dump() << "  " << row.at("total").dump()
          << "  " << row.at("min").dump() << "  " << row.at("max").dump() << "  "
          << fixed(row.at("median").get<double>(), 2) << "  " << fixed(row.at("mean").get<double>(), 2)
          << "  " << fixed(row.at("std").get<double>(), 2) << "\n";
    }
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path);
  f << text;
  if (!f) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

const Sample& find_sample(const SampleIndex& index, const std::string& id) {
  const Sample* s = index.find(id);
  if (s == nullptr) throw Error(ErrorCode::kNotFound, "unknown sample id '" + id + "'");
  return *s;
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::kIoError || code == ErrorCode::kMalformedRecord || code == ErrorCode::kVersionMismatch ||
                 code == ErrorCode::kChecksumMismatch || code == ErrorCode::kNotFound ||
                 code == ErrorCode::kInvalidArgument || code == ErrorCode::kMalformedAnswer ||
                 code == ErrorCode::kEmptyInput || code == ErrorCode::kUnknownSession
             ? kExitUserError
             : kExitInternalError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transformation-driven visual reasoning toolkit", "tvr"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // generate
  std::string gen_setting = "event";
  std::size_t gen_size = 1000;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::string gen_views = "sampled";
  std::string gen_splits;
  auto* generate = app.add_subcommand("generate", "Generate a balanced dataset");
  generate->add_option("--setting", gen_setting, "basic, event or view")
      ->check(CLI::IsMember({"basic", "event", "view"}))
      ->capture_default_str();
  auto* size_opt = generate->add_option("--size", gen_size, "Samples in the single 'test' split")
                       ->check(CLI::PositiveNumber)
                       ->capture_default_str();
  generate->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  generate->add_option("--out", gen_out, "Output directory")->required();
  generate->add_option("--views", gen_views, "View setting cameras: sampled or exhaustive")
      ->check(CLI::IsMember({"sampled", "exhaustive"}))
      ->capture_default_str();
  generate->add_option("--splits", gen_splits, "Named splits, e.g. train=800,val=100,test=100")
      ->excludes(size_opt);

  // evaluate
  std::vector<std::string> eval_data;
  std::string eval_pred;
  bool eval_order = false;
  int eval_trials = 100;
  std::uint64_t eval_seed = 0;
  bool eval_json = false;
  unsigned eval_jobs = 1;
  auto* evaluate = app.add_subcommand("evaluate", "Score a prediction file");
  evaluate->add_option("--data", eval_data, "Dataset directory (repeatable; default $TVR_DATA_DIR)");
  evaluate->add_option("--pred", eval_pred, "Prediction file in the record format")->required();
  evaluate->add_flag("--order-analysis", eval_order, "Append order-sensitive fraction and random-order EO");
  evaluate->add_option("--trials", eval_trials, "Random-order trials")->check(CLI::PositiveNumber)->capture_default_str();
  evaluate->add_option("--seed", eval_seed, "Random-order seed")->capture_default_str();
  evaluate->add_flag("--json", eval_json, "Emit the structured report");
  evaluate->add_option("--jobs", eval_jobs, "Scoring threads")->check(CLI::PositiveNumber)->capture_default_str();

  // stats
  std::vector<std::string> stats_data;
  std::string stats_split;
  bool stats_json = false;
  auto* stats = app.add_subcommand("stats", "Balance statistics per split");
  stats->add_option("--data", stats_data, "Dataset directory (repeatable; default $TVR_DATA_DIR)");
  stats->add_option("--split", stats_split, "Only this split");
  stats->add_flag("--json", stats_json, "Emit the structured report");

  // render
  std::vector<std::string> render_data;
  std::string render_id;
  std::string render_view;
  std::string render_state = "initial";
  std::string render_out;
  auto* render = app.add_subcommand("render", "Render a sample as an SVG schematic");
  render->add_option("--data", render_data, "Dataset directory (default $TVR_DATA_DIR)");
  render->add_option("--id", render_id, "Sample id")->required();
  render->add_option("--view", render_view, "left, center or right (default: center for initial, the sample's view for final)")
      ->check(CLI::IsMember({"left", "center", "right"}));
  render->add_option("--state", render_state, "initial or final")
      ->check(CLI::IsMember({"initial", "final"}))
      ->capture_default_str();
  render->add_option("--out", render_out, "Output file (default stdout)");

  // solve
  std::vector<std::string> solve_data;
  std::string solve_id;
  bool solve_json = false;
  auto* solve_cmd = app.add_subcommand("solve", "Find a feasible transformation for a sample");
  solve_cmd->add_option("--data", solve_data, "Dataset directory (default $TVR_DATA_DIR)");
  solve_cmd->add_option("--id", solve_id, "Sample id")->required();
  solve_cmd->add_flag("--json", solve_json, "Emit JSON");

  // serve
  std::vector<std::string> serve_data;
  std::string serve_addr = "127.0.0.1:8080";
  bool serve_trusted = false;
  std::string serve_sessions = "sessions";
  unsigned serve_jobs = 1;
  auto* serve = app.add_subcommand("serve", "Run the evaluation service");
  serve->add_option("--data", serve_data, "Dataset directory (repeatable; default $TVR_DATA_DIR)");
  serve->add_option("--addr", serve_addr, "Bind address HOST:PORT (port 0 picks one)")->capture_default_str();
  serve->add_flag("--trusted", serve_trusted, "Expose reference transformations and solutions");
  serve->add_option("--sessions", serve_sessions, "Session store directory")->capture_default_str();
  serve->add_option("--jobs", serve_jobs, "Scoring threads for /evaluate")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUserError;
  }

  auto with_default = [](std::vector<std::string> dirs) {
    if (dirs.empty()) {
      const std::string d = default_data_dir();
      if (!d.empty()) dirs.push_back(d);
    }
    return dirs;
  };

  try {
    if (generate->parsed()) {
      GeneratorConfig cfg;
      cfg.seed = gen_seed;
      cfg.setting = *parse_setting(gen_setting);
      cfg.view_mode = *parse_view_mode(gen_views);
      cfg.splits = gen_splits.empty() ? std::vector<SplitSpec>{{"test", gen_size}} : parse_splits(gen_splits);
      cfg.validate();
      const GeneratedDataset data = generate_dataset(cfg);
      const DatasetManifest m = write_dataset(gen_out, data.samples, cfg);
      for (const auto& s : m.splits) {
        out << "wrote " << s.records << " records to " << (std::filesystem::path(gen_out) / s.file).string()
            << "\n";
      }
      out << "manifest checksum " << m.checksum << "\n";
    } else if (evaluate->parsed()) {
      const SampleIndex index(load_all(with_default(eval_data)));
      const auto preds = read_predictions(eval_pred);
      const EvaluationResult result = evaluate_predictions(index, preds, eval_jobs);
      std::optional<OrderAnalysis> order;
      if (eval_order) order = order_analysis(index, preds, eval_trials, eval_seed);
      if (eval_json) {
        Json doc = evaluation_report_json(result);
        if (order) doc["order_analysis"] = order_analysis_json(*order);
        out << doc.dump(2) << "\n";
      } else {
        print_report_table(out, result);
        if (order) print_order_table(out, *order);
      }
    } else if (stats->parsed()) {
      const SampleIndex index(load_all(with_default(stats_data)));
      std::vector<std::string> splits = index.split_names();
      if (!stats_split.empty()) {
        if (index.config_for_split(stats_split) == nullptr) {
          throw Error(ErrorCode::kNotFound, "unknown split '" + stats_split + "'");
        }
        splits = {stats_split};
      }
      Json all = Json::array();
      for (const auto& name : splits) {
        Json doc;
        doc["split"] = name;
        doc["stats"] = stats_report(index.split(name), *index.config_for_split(name));
        if (!stats_json) print_stats_table(out, name, doc["stats"]);
        all.push_back(std::move(doc));
      }
      if (stats_json) out << (stats_split.empty() ? all : all.front()).dump(2) << "\n";
    } else if (render->parsed()) {
      const SampleIndex index(load_all(with_default(render_data)));
      const Sample& s = find_sample(index, render_id);
      const bool final_state = render_state == "final";
      View view = final_state ? s.view : View::kCenter;
      if (!render_view.empty()) view = *parse_view(render_view);
      write_text(render_out, render_schematic(final_state ? s.final_scene : s.initial, view), out);
    } else if (solve_cmd->parsed()) {
      const SampleIndex index(load_all(with_default(solve_data)));
      const Sample& s = find_sample(index, solve_id);
      const Transformation t = solve(s.initial, s.final_scene);
      if (solve_json) {
        Json doc;
        doc["id"] = s.id;
        doc["transformations"] = transformation_to_json(t);
        out << doc.dump(2) << "\n";
      } else {
        out << format_transformation(t) << "\n";
      }
    } else if (serve->parsed()) {
      const auto [host, port] = parse_address(serve_addr);
      ServiceOptions opts;
      opts.trusted = serve_trusted;
      opts.session_dir = serve_sessions;
      opts.jobs = serve_jobs;
      EvalService service(load_all(with_default(serve_data)), opts);
      HttpServer server(service);
      const int bound = server.bind(host, port);
      out << "listening on http://" << host << ":" << bound << (serve_trusted ? " (trusted)" : "") << std::endl;
      server.listen();
    }
  } catch (const Error& e) {
    err << "tvr: error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "tvr: internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"tvr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace tvr::cli
