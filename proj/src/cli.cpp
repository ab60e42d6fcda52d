// Copyright 2026 The mmrs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mmrs/cli.hpp"

#include <charconv>
#include <sstream>

#include "CLI11.hpp"
#include "mmrs/eval.hpp"
#include "mmrs/io.hpp"
#include "mmrs/simgen.hpp"
#include "mmrs/trainer.hpp"
#include "mmrs/tuning.hpp"

namespace mmrs {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string data;
  std::string schema;
  std::string interactions;
  std::string out;
  std::string model;
  std::string trace;
  std::string report;
  std::string part;
  std::string split = "0.1,0.1,0.8";
  std::string weights = "all";
  std::string method = "proposed";
  std::string pairs;
  std::string grid;
  std::string baseline_grid;
  int K = 8;
  double lambda1 = 1e-3;
  double lambda2 = 1e-2;
  double lambda3 = 1e-4;
  double lambda = 1e-2;
  double tol = 1e-4;
  int max_iter = 50;
  std::uint64_t seed = 0;
  int threads = 1;
  bool balanced = false;
  int replications = 1;

  std::string user_cards = "50,30,50";
  std::string item_cards = "100,40";
  int sim_K = 20;
  int stages = 2;
  Index omega0 = 50000;
  double noise_scale = 1.0;
};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

std::vector<int> int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      invalid(std::string(what) + ": '" + item + "' is not an integer");
    }
  }
  return out;
}

SplitRatios parse_ratios(const std::string& text) {
  std::vector<double> v;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      invalid("--split: '" + item + "' is not a number");
    }
  }
  if (v.size() != 3) invalid("--split needs three ratios train,val,test");
  return {v[0], v[1], v[2]};
}

std::string g17(double v) {
  // Shortest representation that reads back to the same double.
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

io::LoadedDataset load_data(const RunConfig& cfg, bool allow_unlabeled) {
  if (cfg.data.empty()) invalid("--data is required");
  auto files = io::DatasetFiles::in(cfg.data);
  if (!cfg.schema.empty()) files.schema = cfg.schema;
  if (!cfg.interactions.empty()) files.interactions = cfg.interactions;
  return io::load_dataset(files, allow_unlabeled);
}

// The requested part of a seeded split; "all" returns the input unchanged.
Dataset select_part(const Dataset& ds, const RunConfig& cfg, const std::string& fallback) {
  const std::string part = cfg.part.empty() ? fallback : cfg.part;
  if (part == "all") return ds;
  const auto s = split_dataset(ds, parse_ratios(cfg.split), cfg.seed);
  if (part == "train") return s.train;
  if (part == "val") return s.val;
  if (part == "test") return s.test;
  invalid("--part must be all, train, val or test");
}

HyperParams hyper_from(const RunConfig& cfg, int stages) {
  HyperParams h;
  h.K = cfg.K;
  h.lambda1 = cfg.lambda1;
  h.lambda2 = cfg.lambda2;
  h.lambda3 = cfg.lambda3;
  h.weights = StageWeights::parse(cfg.weights, stages);
  h.tol_outer = cfg.tol;
  h.max_outer = cfg.max_iter;
  h.seed = cfg.seed;
  h.class_balance = cfg.balanced;
  h.validate(stages);
  return h;
}

FitOptions fit_options(const RunConfig& cfg) {
  if (cfg.threads < 1) invalid("--threads must be >= 1");
  FitOptions o;
  o.threads = cfg.threads;
  return o;
}

BaselineOptions baseline_options(const RunConfig& cfg) {
  BaselineOptions o;
  o.class_balance = cfg.balanced;
  return o;
}

std::string require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) invalid("--out is required");
  return cfg.out;
}

StagePairPredictions predictions_of(const io::AnyModel& model, const Dataset& ds) {
  return std::visit([&](const auto& m) { return predict_all(ds, m); }, model);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  SimConfig sim;
  sim.user_cardinalities = int_list(cfg.user_cards, "--user-cards");
  sim.item_cardinalities = int_list(cfg.item_cards, "--item-cards");
  sim.K_true = cfg.sim_K;
  sim.stages = cfg.stages;
  sim.omega0_size = cfg.omega0;
  sim.noise_scale = cfg.noise_scale;
  sim.seed = cfg.seed;
  const auto result = generate_dataset(sim);
  const fs::path dir = require_out(cfg);
  io::save_dataset(dir, result.dataset);
  io::save_model(dir / "truth.json", result.truth);
  out << "simulated " << result.dataset.size() << " interactions (missing ratio " << missing_ratio(sim) << ") into "
      << dir.string() << '\n';
  for (int t = 1; t <= sim.stages; ++t) {
    Index positive = 0;
    for (Index k = 0; k < result.dataset.size(); ++k) positive += result.dataset.label(k, t) == 1;
    out << "  stage " << t << ": " << positive << " positive\n";
  }
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_data(cfg, false);
  const Dataset train = select_part(loaded.dataset, cfg, "train");
  const fs::path path = require_out(cfg);
  const Method method = parse_method(cfg.method);
  if (method == Method::kProposed) {
    const HyperParams h = hyper_from(cfg, train.stages());
    const auto result = fit(train, h, fit_options(cfg));
    io::save_model(path, result.params);
    io::write_file(cfg.trace.empty() ? fs::path(path.string() + ".trace") : fs::path(cfg.trace), result.trace.to_log());
    out << "trained proposed model on " << train.size() << " interactions: objective "
        << result.trace.initial_objective << " -> "
        << (result.trace.entries.empty() ? result.trace.initial_objective : result.trace.entries.back().objective)
        << " in " << result.trace.entries.size() << " iterations" << (result.trace.converged ? "" : " (not converged)")
        << '\n';
    return kExitOk;
  }
  require_chain(train);
  const auto weights = StageWeights::parse(cfg.weights, train.stages());
  if (method == Method::kStandard)
    io::save_model(path, fit_standard(train, weights, {cfg.lambda}, baseline_options(cfg)));
  else
    io::save_model(path, fit_ordinal(train, weights, {cfg.lambda}, baseline_options(cfg)));
  out << "trained " << to_string(method) << " model on " << train.size() << " interactions\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_data(cfg, true);
  const Dataset ds = select_part(loaded.dataset, cfg, "all");
  if (cfg.model.empty()) invalid("--model is required");
  const auto model = io::load_model(cfg.model, ds.schema());
  const auto pred = predictions_of(model, ds);

  std::vector<StagePair> pairs;
  if (cfg.pairs.empty()) {
    pairs = stage_pairs(ds.stages());
  } else {
    std::stringstream in(cfg.pairs);
    std::string item;
    while (std::getline(in, item, ',')) {
      int tp = 0, t = 0;
      char colon = 0;
      std::stringstream one(item);
      if (!(one >> tp >> colon >> t) || colon != ':' || !one.eof()) invalid("--pairs: cannot parse '" + item + "'");
      check_pair(tp, t, ds.stages());
      pairs.push_back({tp, t});
    }
  }

  // Without observed labels every present stage is taken as positive and the
  // rows are flagged; phi is then sign(f).
  std::ostringstream os;
  os << "i,j";
  for (const auto& p : pairs) os << ",f_" << p.present << '_' << p.subsequent;
  for (const auto& p : pairs) os << ",phi_" << p.present << '_' << p.subsequent;
  os << ",assumed_positive\n";
  for (Index k = 0; k < ds.size(); ++k) {
    const auto& it = ds.interactions()[k];
    os << ds.users().ids[it.user] << ',' << ds.items().ids[it.item];
    for (const auto& p : pairs) os << ',' << g17(pred.value(k, p.present, p.subsequent));
    for (const auto& p : pairs) os << ',' << pred.label(k, p.present, p.subsequent);
    os << ',' << (loaded.labeled ? 0 : 1) << '\n';
  }
  if (cfg.out.empty()) out << os.str();
  else io::write_file(cfg.out, os.str());
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_data(cfg, false);
  const Dataset test = select_part(loaded.dataset, cfg, "test");
  if (cfg.model.empty()) invalid("--model is required");
  const auto model = io::load_model(cfg.model, test.schema());
  const auto weights = StageWeights::parse(cfg.weights, test.stages());
  const auto report = evaluate(predictions_of(model, test), test, weights, to_string(io::method_of(model)));
  if (cfg.out.empty()) out << report.to_json();
  else io::write_file(cfg.out, report.to_json());
  if (!cfg.report.empty()) io::write_file(cfg.report, comparison_csv({{report}}));
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_data(cfg, false);
  const auto split = split_dataset(loaded.dataset, parse_ratios(cfg.split), cfg.seed);
  const fs::path path = require_out(cfg);
  const HyperParams base = hyper_from(cfg, loaded.dataset.stages());
  const auto grid = cfg.grid.empty() ? LambdaGrid{} : LambdaGrid::parse(cfg.grid);
  const auto result = tune_proposed(split.train, split.val, base, grid, fit_options(cfg));
  io::save_model(path, result.fit.params);
  std::ostringstream log;
  log << "lambda1,lambda2,lambda3,validation_error,iterations\n";
  for (const auto& p : result.points)
    log << g17(p.lambda1) << ',' << g17(p.lambda2) << ',' << g17(p.lambda3) << ',' << g17(p.validation_error) << ','
        << p.iterations << '\n';
  io::write_file(cfg.trace.empty() ? fs::path(path.string() + ".grid.csv") : fs::path(cfg.trace), log.str());
  out << "best lambda1=" << result.best.lambda1 << " lambda2=" << result.best.lambda2
      << " lambda3=" << result.best.lambda3 << " over " << result.points.size() << " grid points\n";
  return kExitOk;
}

int cmd_benchmark(const RunConfig& cfg, std::ostream& out) {
  const auto loaded = load_data(cfg, false);
  BenchmarkConfig bc;
  bc.hyper = hyper_from(cfg, loaded.dataset.stages());
  if (!cfg.grid.empty()) bc.grid = LambdaGrid::parse(cfg.grid);
  if (!cfg.baseline_grid.empty()) bc.baseline_grid = parse_list(cfg.baseline_grid);
  bc.ratios = parse_ratios(cfg.split);
  bc.replications = cfg.replications;
  bc.fit = fit_options(cfg);
  bc.baseline = baseline_options(cfg);
  const auto reports = run_benchmark(loaded.dataset, bc);
  const std::string table = comparison_csv(reports);
  if (cfg.out.empty()) out << table;
  else io::write_file(cfg.out, table);
  if (!cfg.report.empty()) {
    std::string all = "[\n";
    for (std::size_t m = 0; m < reports.size(); ++m)
      for (std::size_t r = 0; r < reports[m].size(); ++r)
        all += reports[m][r].to_json() + (m + 1 == reports.size() && r + 1 == reports[m].size() ? "" : ",\n");
    io::write_file(cfg.report, all + "]\n");
  }
  return kExitOk;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return kExitInvalidArgument;
    case ErrorKind::kMalformedFile: return kExitMalformedFile;
    case ErrorKind::kChainViolation: return kExitChainViolation;
    case ErrorKind::kEmptyOmega: return kExitEmptyOmega;
    case ErrorKind::kSchemaMismatch: return kExitSchemaMismatch;
    case ErrorKind::kCorruptModel: return kExitCorruptModel;
    case ErrorKind::kIo: return kExitIo;
  }
  return kExitInvalidArgument;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Two-level monotonic multistage recommender toolkit", "mmrs"};
  app.require_subcommand(1);

  auto data_opts = [&](CLI::App* s) {
    s->add_option("--data", cfg.data, "Dataset directory (schema.cfg, users.csv, items.csv, interactions.csv)");
    s->add_option("--schema", cfg.schema, "Schema file overriding <data>/schema.cfg");
    s->add_option("--interactions", cfg.interactions, "Interactions file overriding <data>/interactions.csv");
    s->add_option("--split", cfg.split, "train,val,test ratios")->capture_default_str();
    s->add_option("--seed", cfg.seed, "Master seed (init, split)")->capture_default_str();
  };
  auto part_opt = [&](CLI::App* s, const char* fallback) {
    s->add_option("--part", cfg.part, std::string("Split part to use: all, train, val, test (default ") + fallback + ")");
  };
  auto hyper_opts = [&](CLI::App* s) {
    s->add_option("--k", cfg.K, "Latent dimension")->capture_default_str();
    s->add_option("--lambda1", cfg.lambda1, "Ridge on A, B")->capture_default_str();
    s->add_option("--lambda2", cfg.lambda2, "Ridge on category factors")->capture_default_str();
    s->add_option("--lambda3", cfg.lambda3, "Ridge on stage factors")->capture_default_str();
    s->add_option("--weights", cfg.weights, "Stage weights: all, next, last or t':t=w,...")->capture_default_str();
    s->add_option("--tol", cfg.tol, "Outer objective decrement tolerance")->capture_default_str();
    s->add_option("--max-iter", cfg.max_iter, "Maximum outer iterations")->capture_default_str();
    s->add_option("--threads", cfg.threads, "Worker threads for level blocks")->capture_default_str();
    s->add_flag("--balanced", cfg.balanced, "Inverse class frequency costs");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset and its ground truth");
  sim->add_option("--out", cfg.out, "Output directory")->required();
  sim->add_option("--seed", cfg.seed, "Seed")->capture_default_str();
  sim->add_option("--user-cards", cfg.user_cards, "User category cardinalities")->capture_default_str();
  sim->add_option("--item-cards", cfg.item_cards, "Item category cardinalities")->capture_default_str();
  sim->add_option("--k", cfg.sim_K, "Latent dimension of the generator")->capture_default_str();
  sim->add_option("--stages", cfg.stages, "Number of stages T")->capture_default_str();
  sim->add_option("--omega0", cfg.omega0, "Number of observed pairs")->capture_default_str();
  sim->add_option("--noise-scale", cfg.noise_scale, "Multiplier on the label noise")->capture_default_str();

  auto* train = app.add_subcommand("train", "Fit a model");
  data_opts(train);
  part_opt(train, "train");
  hyper_opts(train);
  train->add_option("--out", cfg.out, "Model file")->required();
  train->add_option("--trace", cfg.trace, "Trace log (default <out>.trace)");
  train->add_option("--method", cfg.method, "proposed, standard or ordinal")->capture_default_str();
  train->add_option("--lambda", cfg.lambda, "Ridge for the baselines")->capture_default_str();

  auto* predict = app.add_subcommand("predict", "Write decision values and labels per cell");
  data_opts(predict);
  part_opt(predict, "all");
  predict->add_option("--model", cfg.model, "Model file")->required();
  predict->add_option("--pairs", cfg.pairs, "Stage pairs t':t,... (default all)");
  predict->add_option("--out", cfg.out, "Output CSV (default stdout)");

  auto* eval = app.add_subcommand("evaluate", "Error rates and inconsistency on held-out data");
  data_opts(eval);
  part_opt(eval, "test");
  eval->add_option("--model", cfg.model, "Model file")->required();
  eval->add_option("--weights", cfg.weights, "Stage weights for the overall error")->capture_default_str();
  eval->add_option("--out", cfg.out, "Report JSON (default stdout)");
  eval->add_option("--report", cfg.report, "Also write the comparison table CSV");

  auto* tune = app.add_subcommand("tune", "Grid search lambdas on the validation part");
  data_opts(tune);
  hyper_opts(tune);
  tune->add_option("--grid", cfg.grid, "lambda1=..;lambda2=..;lambda3=..");
  tune->add_option("--out", cfg.out, "Best model file")->required();
  tune->add_option("--trace", cfg.trace, "Grid log CSV (default <out>.grid.csv)");

  auto* bench = app.add_subcommand("benchmark", "Proposed, standard and ordinal on identical splits");
  data_opts(bench);
  hyper_opts(bench);
  bench->add_option("--grid", cfg.grid, "Proposed lambda grid");
  bench->add_option("--baseline-grid", cfg.baseline_grid, "Baseline lambda list");
  bench->add_option("--replications", cfg.replications, "Number of seeded splits")->capture_default_str();
  bench->add_option("--out", cfg.out, "Comparison CSV (default stdout)");
  bench->add_option("--report", cfg.report, "All reports as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (train->parsed()) return cmd_train(cfg, out);
    if (predict->parsed()) return cmd_predict(cfg, out);
    if (eval->parsed()) return cmd_evaluate(cfg, out);
    if (tune->parsed()) return cmd_tune(cfg, out);
    return cmd_benchmark(cfg, out);
  } catch (const Error& e) {
    err << "mmrs: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "mmrs: unexpected error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace mmrs
