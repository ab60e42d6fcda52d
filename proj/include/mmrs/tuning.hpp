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

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmrs/baselines.hpp"
#include "mmrs/eval.hpp"
#include "mmrs/trainer.hpp"

namespace mmrs {

struct LambdaGrid {
  std::vector<double> lambda1{0.001, 0.005, 0.01};
  std::vector<double> lambda2{0.01, 0.05, 0.1};
  std::vector<double> lambda3{0.0001, 0.0005, 0.001};

  /// "lambda1=a,b;lambda2=c;lambda3=d,e". Omitted keys keep their defaults.
  static LambdaGrid parse(const std::string& text);
  std::size_t size() const { return lambda1.size() * lambda2.size() * lambda3.size(); }
};

/// Ridge values tried for each baseline pair (standard) or stage (ordinal).
std::vector<double> default_baseline_grid();
std::vector<double> parse_list(const std::string& text);

struct TunePoint {
  double lambda1, lambda2, lambda3;
  double validation_error;
  int iterations;
};

struct TuneResult {
  HyperParams best;
  FitResult fit;
  std::vector<TunePoint> points;
};

/// Grid search minimizing the validation overall error. Ties keep the first
/// point in lambda1-major order.
/// `observe`, when set, sees every fit of the grid.
using FitObserver = std::function<void(const Dataset& train, const HyperParams&, const FitResult&)>;

TuneResult tune_proposed(const Dataset& train, const Dataset& val, const HyperParams& base, const LambdaGrid& grid,
                         const FitOptions& options = {}, const FitObserver& observe = {});

/// Per-pair choice of lambda by validation pairwise error.
StandardModel tune_standard(const Dataset& train, const Dataset& val, const StageWeights& weights,
                            const std::vector<double>& grid, const BaselineOptions& options = {});

/// Per-present-stage choice of lambda by pooled validation error of that stage's pairs.
OrdinalModel tune_ordinal(const Dataset& train, const Dataset& val, const StageWeights& weights,
                          const std::vector<double>& grid, const BaselineOptions& options = {});

struct BenchmarkConfig {
  HyperParams hyper;  // K, weights, tolerances and seed; lambdas come from the grid
  LambdaGrid grid;
  std::vector<double> baseline_grid = default_baseline_grid();
  SplitRatios ratios;
  int replications = 1;
  FitOptions fit;
  BaselineOptions baseline;
  FitObserver observe;
};

/// One split per replication (seed + r), shared by all three methods.
/// Returns reports indexed [method][replication] in proposed, standard, ordinal order.
std::vector<std::vector<EvalReport>> run_benchmark(const Dataset& dataset, const BenchmarkConfig& config);

}  // namespace mmrs
