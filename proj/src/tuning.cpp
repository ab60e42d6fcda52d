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

#include "mmrs/tuning.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mmrs {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

double pooled_error(const StagePairPredictions& p, const Dataset& val, int present, const StageWeights& w) {
  double num = 0, den = 0;
  for (int t = present + 1; t <= val.stages(); ++t) {
    if (w(present, t) <= 0.0) continue;
    const auto e = pairwise_error(p, val, present, t);
    num += w(present, t) * static_cast<double>(e.errors);
    den += w(present, t) * static_cast<double>(e.count);
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size() || !(v > 0.0) || !std::isfinite(v))
      fail("grid: '" + item + "' is not a positive number");
    out.push_back(v);
  }
  if (out.empty()) fail("grid: empty list");
  return out;
}

LambdaGrid LambdaGrid::parse(const std::string& text) {
  LambdaGrid g;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) fail("grid: expected lambdaN=v,...");
    const std::string key = part.substr(0, eq);
    auto values = parse_list(part.substr(eq + 1));
    if (key == "lambda1") g.lambda1 = std::move(values);
    else if (key == "lambda2") g.lambda2 = std::move(values);
    else if (key == "lambda3") g.lambda3 = std::move(values);
    else fail("grid: unknown key '" + key + "'");
  }
  return g;
}

std::vector<double> default_baseline_grid() {
  return {0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1, 5, 10, 50, 100, 500};
}

TuneResult tune_proposed(const Dataset& train, const Dataset& val, const HyperParams& base, const LambdaGrid& grid,
                         const FitOptions& options, const FitObserver& observe) {
  if (grid.size() == 0) fail("tune: empty grid");
  TuneResult out;
  double best = std::numeric_limits<double>::infinity();
  for (double l1 : grid.lambda1)
    for (double l2 : grid.lambda2)
      for (double l3 : grid.lambda3) {
        HyperParams h = base;
        h.lambda1 = l1;
        h.lambda2 = l2;
        h.lambda3 = l3;
        FitResult fr = fit(train, h, options);
        if (observe) observe(train, h, fr);
        const double err = overall_error(predict_all(val, fr.params), val, h.weights);
        out.points.push_back({l1, l2, l3, err, static_cast<int>(fr.trace.entries.size())});
        if (err < best) {
          best = err;
          out.best = h;
          out.fit = std::move(fr);
        }
      }
  return out;
}

StandardModel tune_standard(const Dataset& train, const Dataset& val, const StageWeights& weights,
                            const std::vector<double>& grid, const BaselineOptions& options) {
  if (grid.empty()) fail("tune: empty baseline grid");
  const int T = train.stages();
  weights.validate(T);
  const auto pairs = stage_pairs(T);
  const MatXd design = one_hot_encode(val);
  StandardModel model;
  model.schema = train.schema();
  model.beta.assign(pairs.size(), VecXd());
  model.lambdas.assign(pairs.size(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [tp, t] = pairs[i];
    if (weights(tp, t) <= 0.0) continue;
    const auto omega = build_omega(val, tp);
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
      VecXd beta = fit_standard_pair(train, tp, t, lambda, options);
      Index wrong = 0;
      for (Index k : omega) wrong += sign_label(beta.dot(design.col(k))) != val.label(k, t);
      const double err = omega.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(omega.size());
      if (err < best) {
        best = err;
        model.beta[i] = std::move(beta);
        model.lambdas[i] = lambda;
      }
    }
  }
  return model;
}

OrdinalModel tune_ordinal(const Dataset& train, const Dataset& val, const StageWeights& weights,
                          const std::vector<double>& grid, const BaselineOptions& options) {
  if (grid.empty()) fail("tune: empty baseline grid");
  const int T = train.stages();
  weights.validate(T);
  OrdinalModel model;
  model.schema = train.schema();
  for (int tp = 0; tp < T; ++tp) {
    bool any = false;
    for (int t = tp + 1; t <= T; ++t) any = any || weights(tp, t) > 0.0;
    OrdinalStage chosen;
    chosen.present = tp;
    if (any) {
      double best = std::numeric_limits<double>::infinity();
      for (double lambda : grid) {
        OrdinalModel probe;
        probe.schema = train.schema();
        probe.stages.resize(static_cast<std::size_t>(T));
        probe.stages[tp] = fit_ordinal_stage(train, tp, lambda, weights, options);
        // Other stages stay at zero so predict_all can fill the full matrix.
        for (int other = 0; other < T; ++other)
          if (other != tp) {
            probe.stages[other].present = other;
            probe.stages[other].base = VecXd::Zero(one_hot_width(train.schema()));
            probe.stages[other].increments.assign(static_cast<std::size_t>(T - other),
                                                  VecXd::Zero(one_hot_width(train.schema())));
          }
        const double err = pooled_error(predict_all(val, probe), val, tp, weights);
        if (err < best) {
          best = err;
          chosen = std::move(probe.stages[tp]);
        }
      }
    }
    model.stages.push_back(std::move(chosen));
  }
  return model;
}

std::vector<std::vector<EvalReport>> run_benchmark(const Dataset& dataset, const BenchmarkConfig& config) {
  if (config.replications < 1) fail("benchmark: replications must be >= 1");
  require_chain(dataset);
  std::vector<std::vector<EvalReport>> reports(3);
  for (int r = 0; r < config.replications; ++r) {
    const std::uint64_t seed = config.hyper.seed + static_cast<std::uint64_t>(r);
    const auto split = split_dataset(dataset, config.ratios, seed);
    HyperParams base = config.hyper;
    base.seed = seed;
    const auto& w = base.weights;

    const auto tuned = tune_proposed(split.train, split.val, base, config.grid, config.fit, config.observe);
    reports[0].push_back(evaluate(predict_all(split.test, tuned.fit.params), split.test, w, "proposed"));

    const auto standard = tune_standard(split.train, split.val, w, config.baseline_grid, config.baseline);
    reports[1].push_back(evaluate(predict_all(split.test, standard), split.test, w, "standard"));

    const auto ordinal = tune_ordinal(split.train, split.val, w, config.baseline_grid, config.baseline);
    reports[2].push_back(evaluate(predict_all(split.test, ordinal), split.test, w, "ordinal"));
  }
  return reports;
}

}  // namespace mmrs
