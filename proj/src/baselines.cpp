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

#include "mmrs/baselines.hpp"

#include "mmrs/varsvm.hpp"

namespace mmrs {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

// Inverse class frequency factors normalized to mean one.
std::pair<double, double> balance_factors(const Dataset& ds, const std::vector<Index>& rows, int t, bool on) {
  if (!on) return {1.0, 1.0};
  Index pos = 0;
  for (Index k : rows) pos += ds.label(k, t) == 1;
  const Index n = static_cast<Index>(rows.size());
  const Index neg = n - pos;
  if (pos == 0 || neg == 0) return {1.0, 1.0};
  return {static_cast<double>(n) / (2.0 * static_cast<double>(pos)),
          static_cast<double>(n) / (2.0 * static_cast<double>(neg))};
}

struct OrdinalSamples {
  MatXd x;                     // one-hot columns of Omega_{t'}
  std::vector<Index> cell;     // column -> cell
  std::vector<int> subsequent;
  VecXd labels;
  VecXd costs;
  std::vector<Index> column;   // sample -> column of x
};

OrdinalSamples ordinal_samples(const Dataset& ds, const MatXd& design, int present,
                               const StageWeights& weights, bool class_balance) {
  const int T = ds.stages();
  const auto omega = build_omega(ds, present);
  if (omega.empty()) throw Error(ErrorKind::kEmptyOmega, "ordinal: Omega_" + std::to_string(present) + " is empty");
  OrdinalSamples s;
  s.x.resize(design.rows(), static_cast<Index>(omega.size()));
  for (std::size_t c = 0; c < omega.size(); ++c) s.x.col(static_cast<Index>(c)) = design.col(omega[c]);
  s.cell = omega;
  double total = 0;
  for (int t = present + 1; t <= T; ++t) total += weights(present, t) * static_cast<double>(omega.size());
  if (!(total > 0.0)) throw Error(ErrorKind::kEmptyOmega, "ordinal: no positive weight for this stage");
  std::vector<double> labels, costs;
  for (int t = present + 1; t <= T; ++t) {
    const double w = weights(present, t);
    if (w <= 0.0) continue;
    const auto [pf, nf] = balance_factors(ds, omega, t, class_balance);
    for (std::size_t c = 0; c < omega.size(); ++c) {
      const Label y = ds.label(omega[c], t);
      s.subsequent.push_back(t);
      s.column.push_back(static_cast<Index>(c));
      labels.push_back(y);
      costs.push_back(w / total * (y == 1 ? pf : nf));
    }
  }
  s.labels = Eigen::Map<VecXd>(labels.data(), static_cast<Index>(labels.size()));
  s.costs = Eigen::Map<VecXd>(costs.data(), static_cast<Index>(costs.size()));
  return s;
}

VecXd cumulative_direction(const OrdinalStage& st, int subsequent, int skip = -1) {
  VecXd w = st.base;
  for (int r = st.present + 1; r <= subsequent; ++r)
    if (r != skip) w -= st.increments[r - st.present - 1];
  return w;
}

}  // namespace

const VecXd& StandardModel::pair(int present, int subsequent) const {
  const auto& b = beta.at(pair_index(present, subsequent, schema.stages));
  if (b.size() == 0)
    fail("standard model: pair (" + std::to_string(present) + ", " + std::to_string(subsequent) + ") was not fitted");
  return b;
}

Index StandardModel::parameter_count() const {
  Index n = 0;
  for (const auto& b : beta) n += b.size();
  return n;
}

Index OrdinalModel::parameter_count() const {
  Index n = 0;
  for (const auto& s : stages) {
    n += s.base.size();
    for (const auto& inc : s.increments) n += inc.size();
  }
  return n;
}

VecXd fit_standard_pair(const Dataset& dataset, int present, int subsequent, double lambda,
                        const BaselineOptions& options) {
  check_pair(present, subsequent, dataset.stages());
  if (!(lambda > 0.0)) fail("standard: lambda must be positive");
  const auto omega = build_omega(dataset, present);
  if (omega.empty())
    throw Error(ErrorKind::kEmptyOmega, "standard: Omega_" + std::to_string(present) + " is empty");
  const MatXd design = one_hot_encode(dataset);
  const auto [pf, nf] = balance_factors(dataset, omega, subsequent, options.class_balance);

  varsvm::SubproblemSpec<double> spec;
  const Index n = static_cast<Index>(omega.size());
  spec.features.resize(design.rows(), n);
  spec.labels.resize(n);
  spec.costs.resize(n);
  spec.drifts = VecXd::Zero(n);
  for (Index c = 0; c < n; ++c) {
    spec.features.col(c) = design.col(omega[c]);
    spec.labels(c) = dataset.label(omega[c], subsequent);
    spec.costs(c) = (spec.labels(c) > 0 ? pf : nf) / static_cast<double>(n);
  }
  spec.ridge = lambda;
  spec.bounds.assign(static_cast<std::size_t>(design.rows()), varsvm::Bound::kFree);
  spec.tol = options.tol;
  spec.max_iter = options.max_iter;
  return varsvm::solve_subproblem(spec).beta;
}

double ordinal_objective(const Dataset& dataset, const OrdinalStage& stage, const StageWeights& weights,
                         bool class_balance) {
  const MatXd design = one_hot_encode(dataset);
  const auto s = ordinal_samples(dataset, design, stage.present, weights, class_balance);
  double loss = 0;
  for (Index k = 0; k < s.labels.size(); ++k) {
    const double f = cumulative_direction(stage, s.subsequent[k]).dot(s.x.col(s.column[k]));
    loss += s.costs(k) * hinge(s.labels(k) * f);
  }
  double norm = stage.base.squaredNorm();
  for (const auto& inc : stage.increments) norm += inc.squaredNorm();
  return loss + stage.lambda * norm;
}

OrdinalStage fit_ordinal_stage(const Dataset& dataset, int present, double lambda,
                               const StageWeights& weights, const BaselineOptions& options,
                               std::vector<double>* objective_trace) {
  const int T = dataset.stages();
  if (present < 0 || present >= T) fail("ordinal: present stage out of range");
  if (!(lambda > 0.0)) fail("ordinal: lambda must be positive");
  weights.validate(T);
  const MatXd design = one_hot_encode(dataset);
  const auto s = ordinal_samples(dataset, design, present, weights, options.class_balance);
  const Index width = design.rows();
  const Index n = s.labels.size();

  OrdinalStage st;
  st.present = present;
  st.lambda = lambda;
  st.base = VecXd::Zero(width);
  st.increments.assign(static_cast<std::size_t>(T - present), VecXd::Zero(width));

  auto objective = [&] {
    double loss = 0;
    for (Index k = 0; k < n; ++k) {
      const double f = cumulative_direction(st, s.subsequent[k]).dot(s.x.col(s.column[k]));
      loss += s.costs(k) * hinge(s.labels(k) * f);
    }
    double norm = st.base.squaredNorm();
    for (const auto& inc : st.increments) norm += inc.squaredNorm();
    return loss + lambda * norm;
  };

  // Block r = present is the free base vector; r > present are the increments.
  auto solve = [&](int r, VecXd& warm) {
    std::vector<Index> rows;
    for (Index k = 0; k < n; ++k)
      if (r == present || s.subsequent[k] >= r) rows.push_back(k);
    varsvm::SubproblemSpec<double> spec;
    const Index m = static_cast<Index>(rows.size());
    spec.features.resize(width, m);
    spec.labels.resize(m);
    spec.costs.resize(m);
    spec.drifts.resize(m);
    for (Index i = 0; i < m; ++i) {
      const Index k = rows[i];
      const auto x = s.x.col(s.column[k]);
      spec.labels(i) = s.labels(k);
      spec.costs(i) = s.costs(k);
      if (r == present) {
        spec.features.col(i) = x;
        spec.drifts(i) = (cumulative_direction(st, s.subsequent[k]) - st.base).dot(x);
      } else {
        spec.features.col(i) = -x;
        spec.drifts(i) = cumulative_direction(st, s.subsequent[k], r).dot(x);
      }
    }
    spec.ridge = lambda;
    spec.bounds.assign(static_cast<std::size_t>(width),
                       r == present ? varsvm::Bound::kFree : varsvm::Bound::kNonnegative);
    spec.tol = options.tol;
    spec.max_iter = options.max_iter;
    VecXd& target = r == present ? st.base : st.increments[r - present - 1];
    varsvm::WarmStart<double> start{warm, target};
    auto sol = varsvm::solve_subproblem(spec, start);
    warm = std::move(sol.alpha);
    target = std::move(sol.beta);
  };

  std::vector<VecXd> warm(static_cast<std::size_t>(T - present + 1));
  double current = objective();
  if (objective_trace) objective_trace->push_back(current);
  for (int pass = 0; pass < options.max_passes; ++pass) {
    for (int r = present; r <= T; ++r) solve(r, warm[r - present]);
    const double next = objective();
    if (objective_trace) objective_trace->push_back(next);
    const double dec = current - next;
    current = next;
    if (dec < options.pass_tol) break;
  }
  return st;
}

StandardModel fit_standard(const Dataset& dataset, const StageWeights& weights,
                           const std::vector<double>& lambdas, const BaselineOptions& options) {
  const int T = dataset.stages();
  weights.validate(T);
  const auto pairs = stage_pairs(T);
  if (lambdas.size() != 1 && lambdas.size() != pairs.size()) fail("standard: need one lambda or one per pair");
  StandardModel model;
  model.schema = dataset.schema();
  model.beta.assign(pairs.size(), VecXd());
  model.lambdas.assign(pairs.size(), 0.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [tp, t] = pairs[i];
    if (weights(tp, t) <= 0.0) continue;
    const double lambda = lambdas.size() == 1 ? lambdas[0] : lambdas[i];
    model.beta[i] = fit_standard_pair(dataset, tp, t, lambda, options);
    model.lambdas[i] = lambda;
  }
  return model;
}

OrdinalModel fit_ordinal(const Dataset& dataset, const StageWeights& weights,
                         const std::vector<double>& lambdas, const BaselineOptions& options) {
  const int T = dataset.stages();
  weights.validate(T);
  if (lambdas.size() != 1 && lambdas.size() != static_cast<std::size_t>(T))
    fail("ordinal: need one lambda or one per present stage");
  OrdinalModel model;
  model.schema = dataset.schema();
  for (int tp = 0; tp < T; ++tp) {
    bool any = false;
    for (int t = tp + 1; t <= T; ++t) any = any || weights(tp, t) > 0.0;
    if (!any) {
      OrdinalStage empty;
      empty.present = tp;
      model.stages.push_back(empty);
      continue;
    }
    model.stages.push_back(fit_ordinal_stage(dataset, tp, lambdas.size() == 1 ? lambdas[0] : lambdas[tp], weights, options));
  }
  return model;
}

double decision_value(const StandardModel& model, const Eigen::Ref<const VecXd>& x, int present, int subsequent) {
  const auto& b = model.pair(present, subsequent);
  if (b.size() != x.size()) fail("standard: feature width mismatch");
  return b.dot(x);
}

double decision_value(const OrdinalStage& stage, const Eigen::Ref<const VecXd>& x, int subsequent) {
  if (stage.base.size() == 0) fail("ordinal: stage " + std::to_string(stage.present) + " was not fitted");
  if (subsequent <= stage.present || subsequent > stage.present + static_cast<int>(stage.increments.size()))
    fail("ordinal: subsequent stage out of range");
  if (stage.base.size() != x.size()) fail("ordinal: feature width mismatch");
  return cumulative_direction(stage, subsequent).dot(x);
}

StagePairPredictions predict_all(const Dataset& dataset, const StandardModel& model) {
  if (!(model.schema == dataset.schema()))
    throw Error(ErrorKind::kSchemaMismatch, "model schema differs from dataset schema");
  const MatXd design = one_hot_encode(dataset);
  const auto pairs = stage_pairs(dataset.stages());
  MatXd f(static_cast<Index>(pairs.size()), dataset.size());
  for (std::size_t r = 0; r < pairs.size(); ++r)
    f.row(static_cast<Index>(r)) = model.pair(pairs[r].present, pairs[r].subsequent).transpose() * design;
  return mask_predictions(dataset, std::move(f));
}

StagePairPredictions predict_all(const Dataset& dataset, const OrdinalModel& model) {
  if (!(model.schema == dataset.schema()))
    throw Error(ErrorKind::kSchemaMismatch, "model schema differs from dataset schema");
  const MatXd design = one_hot_encode(dataset);
  const auto pairs = stage_pairs(dataset.stages());
  MatXd f(static_cast<Index>(pairs.size()), dataset.size());
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& st = model.stages.at(pairs[r].present);
    if (st.base.size() == 0) fail("ordinal: stage " + std::to_string(pairs[r].present) + " was not fitted");
    f.row(static_cast<Index>(r)) = cumulative_direction(st, pairs[r].subsequent).transpose() * design;
  }
  return mask_predictions(dataset, std::move(f));
}

}  // namespace mmrs
