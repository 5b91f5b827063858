#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "dynaboard/error.hpp"
#include "dynaboard/evaluate.hpp"
#include "dynaboard/lexicon.hpp"
#include "dynaboard/perturb.hpp"
#include "dynaboard/serialize.hpp"
#include "dynaboard/server.hpp"
#include "dynaboard/store.hpp"

namespace dynaboard::cli {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width, bool left) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

std::vector<Perturbation> parse_kinds(const std::string& text) {
  std::vector<Perturbation> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string name = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? text.size() + 1 : comma + 1;
    if (name == "fairness") {
      out.push_back(FairnessKind::kRace);
      out.push_back(FairnessKind::kGender);
      continue;
    }
    if (name == "robustness") {
      for (auto t : all_robustness_transforms()) out.push_back(t);
      continue;
    }
    for (const char* prefix : {"fairness-", "fairness_", "robustness-", "robustness:"}) {
      if (name.rfind(prefix, 0) == 0) {
        name.erase(0, std::string(prefix).size());
        break;
      }
    }
    try {
      out.push_back(parse_perturbation(name));
    } catch (const Error& e) {
      throw UsageError(std::string("--kind: ") + e.message());
    }
  }
  return out;
}

ModelEntry load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIoError, "cannot open manifest '" + path + "'", path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_json(text).get<ModelEntry>();
}

void print_table(std::ostream& out, const TaskConfig& task, const Leaderboard& board) {
  const auto metric_ids = task.metric_ids();
  std::size_t model_width = 5;
  for (const auto& row : board.rows) model_width = std::max(model_width, row.model_id.size());
  std::vector<std::size_t> widths;
  out << pad("Rank", 4, false) << "  " << pad("Model", model_width, true);
  for (const auto& id : metric_ids) {
    widths.push_back(std::max<std::size_t>(id.size(), 10));
    out << "  " << pad(id, widths.back(), false);
  }
  out << "  " << pad("Dynascore", 10, false) << "  " << pad("AvgZ", 8, false) << '\n';
  for (const auto& row : board.rows) {
    out << pad(std::to_string(row.rank), 4, false) << "  " << pad(row.model_id, model_width, true);
    for (std::size_t i = 0; i < metric_ids.size(); ++i) {
      out << "  " << pad(fixed2(row.raw_values.at(metric_ids[i])), widths[i], false);
    }
    out << "  " << pad(fixed2(row.dynascore), 10, false) << "  "
        << pad(fixed2(row.avg_zscore), 8, false) << '\n';
  }
}

void print_csv(std::ostream& out, const TaskConfig& task, const Leaderboard& board) {
  const auto metric_ids = task.metric_ids();
  out << "rank,model_id";
  for (const auto& id : metric_ids) out << ',' << id;
  out << ",dynascore,avg_zscore\n";
  for (const auto& row : board.rows) {
    out << row.rank << ',' << row.model_id;
    for (const auto& id : metric_ids) out << ',' << fixed2(row.raw_values.at(id));
    out << ',' << fixed2(row.dynascore) << ',' << fixed2(row.avg_zscore) << '\n';
  }
}

int cmd_submit(Store& store, const std::string& manifest, std::ostream& out) {
  const ModelEntry model = load_manifest(manifest);
  check_id(model.model_id, "model_id");
  store.load_task(model.task_id);
  store.save_model(model);
  out << "submitted model " << model.model_id << " for task " << model.task_id << '\n';
  return kExitOk;
}

int cmd_eval(Store& store, const std::string& task_id, const std::string& model_ref,
             std::uint64_t seed, std::ostream& out) {
  const TaskConfig task = store.load_task(task_id);
  ModelEntry model;
  std::error_code ec;
  if (std::filesystem::is_regular_file(model_ref, ec)) {
    model = load_manifest(model_ref);
    check_id(model.model_id, "model_id");
    store.save_model(model);
  } else {
    model = store.load_model(model_ref);
  }
  const TaskEvaluation result = evaluate_and_commit(store, model, task, seed);
  for (const auto& d : task.datasets) {
    out << model.model_id << " on " << task.task_id << "/" << d.dataset_id << ":";
    for (const auto& r : result.records) {
      if (r.dataset_id == d.dataset_id) out << ' ' << r.metric_id << '=' << fixed2(r.value);
    }
    out << '\n';
  }
  out << "committed " << result.records.size() << " records\n";
  return kExitOk;
}

int cmd_board(const Store& store, const std::string& task_id, const std::string& weights,
              const std::string& dataset_weights, const std::string& format,
              const std::string& as_of, bool snapshot, std::ostream& out, std::ostream& err) {
  ScoreRequest request;
  try {
    if (!weights.empty()) request.weights.metric_weights = parse_weight_list(weights);
    if (!dataset_weights.empty()) {
      request.weights.dataset_weights = parse_weight_list(dataset_weights);
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!as_of.empty()) request.as_of = parse_iso8601(as_of);
  const TaskConfig task = store.load_task(task_id);
  const Leaderboard board = score_task(store, task, request);
  for (const auto& w : board.warnings) err << "warning: " << w << '\n';
  if (format == "json") {
    out << leaderboard_json(board).dump() << '\n';
  } else if (format == "csv") {
    print_csv(out, task, board);
  } else {
    print_table(out, task, board);
  }
  if (snapshot) {
    Store writable = store;
    err << "snapshot: " << writable.snapshot_leaderboard(task, board).string() << '\n';
  }
  return kExitOk;
}

int cmd_perturb(const std::string& in_path, const std::string& out_path, const std::string& kinds,
                std::uint64_t seed, const std::string& lexicon_path, const std::string& ner_scope,
                std::ostream& out, std::ostream& err) {
  const auto perturbations = parse_kinds(kinds);
  const FairnessLexicon lexicon =
      lexicon_path.empty() ? FairnessLexicon::bundled() : FairnessLexicon::load(lexicon_path);
  FairnessOptions options;
  options.scope = ner_scope == "example" ? NerScope::kExample : NerScope::kSpan;
  const auto dataset = read_dataset_file(in_path);
  const auto result = perturb_dataset(dataset, perturbations, seed, lexicon, options);
  if (out_path.empty() || out_path == "-") {
    write_perturbed(out, result.examples);
  } else {
    std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(Errc::kIoError, "cannot write '" + out_path + "'", out_path);
    write_perturbed(file, result.examples);
    if (!file.flush()) throw Error(Errc::kIoError, "cannot write '" + out_path + "'", out_path);
  }
  const auto& s = result.skips;
  err << "perturbed " << s.perturbed << " of " << s.total << " examples (not applicable "
      << s.not_applicable << ", protected names " << s.ner_skipped << ")\n";
  return kExitOk;
}

int cmd_serve(const Store& store, const std::string& host, int port, std::uint64_t seed,
              std::ostream& out) {
  Api api(store, seed);
  HttpServer server(api);
  const int bound = server.bind(host, port);
  out << "listening on " << host << ':' << bound << " (data " << store.root().string() << ")"
      << std::endl;
  server.listen();
  return kExitOk;
}

}  // namespace

std::map<std::string, double> parse_weight_list(const std::string& text) {
  std::map<std::string, double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    start = comma == std::string::npos ? text.size() + 1 : comma + 1;
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || item.find('=', eq + 1) != std::string::npos) {
      throw std::invalid_argument("malformed weight '" + item + "', expected id=value");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    double w = 0.0;
    std::size_t used = 0;
    try {
      w = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (value.empty() || used != value.size() || !std::isfinite(w)) {
      throw std::invalid_argument("weight for '" + key + "' is not a number: '" + value + "'");
    }
    if (w < 0.0) throw std::invalid_argument("weight for '" + key + "' is negative");
    if (!out.emplace(key, w).second) {
      throw std::invalid_argument("weight for '" + key + "' given twice");
    }
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynascore leaderboards: evaluate models and rank them under custom weights",
               "dynaboard"};
  app.require_subcommand(1);
  std::string data_dir;
  app.add_option("--data-dir", data_dir, "Store root (default: $DYNA_DATA_DIR, else ./data)");

  auto* submit = app.add_subcommand("submit", "Register a model manifest");
  std::string manifest;
  submit->add_option("--manifest", manifest, "Model manifest JSON")->required();

  auto* eval = app.add_subcommand("eval", "Evaluate a model on every dataset of a task");
  std::string task_id;
  std::string model_ref;
  std::uint64_t seed = 0;
  eval->add_option("--task", task_id, "Task id")->required();
  eval->add_option("--model", model_ref, "Manifest path or submitted model id")->required();
  eval->add_option("--seed", seed, "Perturbation seed");

  auto* board = app.add_subcommand("board", "Rank the models of a task");
  std::string weights;
  std::string dataset_weights;
  std::string format = "table";
  std::string as_of;
  bool snapshot = false;
  board->add_option("--task", task_id, "Task id")->required();
  board->add_option("--weights", weights, "Metric weights, id=value,...");
  board->add_option("--dataset-weights", dataset_weights, "Dataset weights, id=value,...");
  board->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  board->add_option("--as-of", as_of, "Only records measured at or before this UTC time");
  board->add_flag("--snapshot", snapshot, "Also write a leaderboard snapshot to the store");

  auto* perturb = app.add_subcommand("perturb", "Write perturbed copies of a dataset");
  std::string in_path;
  std::string out_path;
  std::string kinds;
  std::string lexicon_path;
  std::string ner_scope = "span";
  perturb->add_option("--in", in_path, "Input dataset JSONL")->required();
  perturb->add_option("--out", out_path, "Output JSONL (default: standard output)");
  perturb->add_option("--kind", kinds, "race, gender, fairness, robustness, or a transform")
      ->required();
  perturb->add_option("--seed", seed, "Seed");
  perturb->add_option("--lexicon", lexicon_path, "Fairness lexicon JSON");
  perturb->add_option("--ner-scope", ner_scope, "Protected names skip the name or the example")
      ->check(CLI::IsMember({"span", "example"}));

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "0.0.0.0";
  int port = 8080;
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--seed", seed, "Perturbation seed for evaluation jobs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Store store = data_dir.empty() ? Store::from_env() : Store(data_dir);
    if (*submit) return cmd_submit(store, manifest, out);
    if (*eval) return cmd_eval(store, task_id, model_ref, seed, out);
    if (*board) {
      return cmd_board(store, task_id, weights, dataset_weights, format, as_of, snapshot, out, err);
    }
    if (*perturb) {
      return cmd_perturb(in_path, out_path, kinds, seed, lexicon_path, ner_scope, out, err);
    }
    if (*serve) return cmd_serve(store, host, port, seed, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace dynaboard::cli
