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

#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"

namespace mmrs {

/// Options shared by the baseline fits. The hinge term is averaged over the
/// fitted samples so lambda grids are comparable with the proposed model.
struct BaselineOptions {
  bool class_balance = false;
  double tol = 1e-4;
  int max_iter = 1000;
  int max_passes = 100;       // ordinal block passes
  double pass_tol = 1e-7;     // ordinal objective decrement
};

/// Separate linear hinge classifier per stage pair on one-hot features.
struct StandardModel {
  FeatureSchema schema;
  std::vector<VecXd> beta;  // indexed by pair_index; empty when the pair was not fitted
  std::vector<double> lambdas;

  const VecXd& pair(int present, int subsequent) const;
  Index parameter_count() const;
};

/// Stagewise model: f^{t't} = (base_{t'} - sum_{r=t'+1..t} inc_{t',r}) . x with inc >= 0.
struct OrdinalStage {
  int present = 0;
  VecXd base;
  std::vector<VecXd> increments;  // r = present+1 .. T
  double lambda = 0;
};

struct OrdinalModel {
  FeatureSchema schema;
  std::vector<OrdinalStage> stages;  // indexed by t'; empty base when not fitted

  Index parameter_count() const;
};

/// Hinge + ridge on Omega_{t'} one-hot rows predicting y^t; all bounds free.
VecXd fit_standard_pair(const Dataset& dataset, int present, int subsequent, double lambda,
                        const BaselineOptions& options = {});

/// Blockwise fit of one present stage over its subsequent stages t with w_{t't} > 0.
OrdinalStage fit_ordinal_stage(const Dataset& dataset, int present, double lambda,
                               const StageWeights& weights, const BaselineOptions& options = {},
                               std::vector<double>* objective_trace = nullptr);

/// Ordinal objective for one stage slice (normalized weighted hinge plus ridge).
double ordinal_objective(const Dataset& dataset, const OrdinalStage& stage, const StageWeights& weights,
                         bool class_balance = false);

/// Fits every pair with positive weight, using lambdas[pair_index] (or one lambda for all).
StandardModel fit_standard(const Dataset& dataset, const StageWeights& weights,
                           const std::vector<double>& lambdas, const BaselineOptions& options = {});
OrdinalModel fit_ordinal(const Dataset& dataset, const StageWeights& weights,
                         const std::vector<double>& lambdas, const BaselineOptions& options = {});

double decision_value(const StandardModel& model, const Eigen::Ref<const VecXd>& x, int present, int subsequent);
double decision_value(const OrdinalStage& stage, const Eigen::Ref<const VecXd>& x, int subsequent);

StagePairPredictions predict_all(const Dataset& dataset, const StandardModel& model);
StagePairPredictions predict_all(const Dataset& dataset, const OrdinalModel& model);

}  // namespace mmrs
