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

#include <string>
#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"

namespace mmrs {

/// Misclassification count over Omega_{t'} of the test data.
struct PairError {
  int present = 0;
  int subsequent = 0;
  Index count = 0;
  Index errors = 0;
  double rate = 0;        // NaN when absent
  bool absent = true;     // Omega_{t'} empty
};

struct BalancedError {
  double rate = 0;
  bool fallback = false;  // only one class present; rate is the plain error
  bool absent = true;
};

PairError pairwise_error(const StagePairPredictions& predictions, const Dataset& test, int present, int subsequent);

/// Weighted pooled rate sum w * errors / sum w * count over evaluable pairs.
double overall_error(const StagePairPredictions& predictions, const Dataset& test, const StageWeights& weights);

/// Fraction of cells whose sign matrix breaks forward or backward monotonicity at least once.
double inconsistency_rate(const StagePairPredictions& predictions);

/// True when the unmasked signs of one cell break either monotonicity line.
bool inconsistent_cell(const StagePairPredictions& predictions, Index cell);

BalancedError balanced_error(const StagePairPredictions& predictions, const Dataset& test, int present,
                             int subsequent);

struct PairReport {
  PairError error;
  BalancedError balanced;
};

struct EvalReport {
  std::string method;
  int stages = 0;
  std::vector<PairReport> pairs;  // in stage_pairs order
  double overall = 0;             // pooled
  double overall_mean = 0;        // unweighted mean of evaluable pair rates
  double inconsistency = 0;

  std::string to_json() const;
};

EvalReport evaluate(const StagePairPredictions& predictions, const Dataset& test, const StageWeights& weights,
                    const std::string& method);

/// Table with one row per stage pair plus Overall and %Inconsist, one column
/// per method. Cells are "mean(sd)" over the reports given for each method.
std::string comparison_csv(const std::vector<std::vector<EvalReport>>& per_method);

}  // namespace mmrs
