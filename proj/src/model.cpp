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

#include "mmrs/model.hpp"

#include <algorithm>
#include <sstream>

namespace mmrs {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

Index row_of(const FeatureTable& table, std::int64_t id, const char* side) {
  auto r = table.find(id);
  if (!r) fail(std::string("unknown ") + side + " id " + std::to_string(id));
  return *r;
}

}  // namespace

double decision_value(const Dataset& dataset, const Model& params, std::int64_t user_id,
                      std::int64_t item_id, int present, int subsequent) {
  const Index ur = row_of(dataset.users(), user_id, "user");
  const Index ir = row_of(dataset.items(), item_id, "item");
  const VecXd a = user_map(params, dataset.users().numeric.col(ur), dataset.users().levels.col(ur));
  const VecXd b = item_map(params, dataset.items().numeric.col(ir), dataset.items().levels.col(ir));
  return decision_value(params, a, b, present, subsequent);
}

Label predict_label(double decision, Label observed_present) {
  if (observed_present != 1 && observed_present != -1) fail("predict_label: observed label must be +1 or -1");
  if (observed_present == -1) return -1;
  return sign_label(decision);
}

Label predict_label(const Dataset& dataset, const Model& params, std::int64_t user_id,
                    std::int64_t item_id, int present, int subsequent, Label observed_present) {
  if (observed_present != 1 && observed_present != -1) fail("predict_label: observed label must be +1 or -1");
  return predict_label(decision_value(dataset, params, user_id, item_id, present, subsequent),
                       observed_present);
}

StageWeights StageWeights::all(int stages) {
  StageWeights s;
  s.w = MatXd::Zero(stages + 1, stages + 1);
  for (int tp = 0; tp < stages; ++tp)
    for (int t = tp + 1; t <= stages; ++t) s.w(tp, t) = 1.0;
  return s;
}

StageWeights StageWeights::next_stage(int stages) {
  StageWeights s;
  s.w = MatXd::Zero(stages + 1, stages + 1);
  for (int tp = 0; tp < stages; ++tp) s.w(tp, tp + 1) = 1.0;
  return s;
}

StageWeights StageWeights::last_stage(int stages) {
  StageWeights s;
  s.w = MatXd::Zero(stages + 1, stages + 1);
  for (int tp = 0; tp < stages; ++tp) s.w(tp, stages) = 1.0;
  return s;
}

StageWeights StageWeights::parse(const std::string& spec, int stages) {
  if (spec == "all") return all(stages);
  if (spec == "next") return next_stage(stages);
  if (spec == "last") return last_stage(stages);
  StageWeights s;
  s.w = MatXd::Zero(stages + 1, stages + 1);
  std::stringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    int tp = 0, t = 0;
    double value = 0;
    char colon = 0, eq = 0;
    std::stringstream one(item);
    if (!(one >> tp >> colon >> t >> eq >> value) || colon != ':' || eq != '=')
      fail("weights: cannot parse '" + item + "' (expected t':t=w)");
    check_pair(tp, t, stages);
    s.w(tp, t) = value;
  }
  s.validate(stages);
  return s;
}

void StageWeights::validate(int stages) const {
  if (w.rows() != stages + 1 || w.cols() != stages + 1) fail("weights: dimension does not match T");
  bool positive = false;
  for (int tp = 0; tp < stages; ++tp)
    for (int t = tp + 1; t <= stages; ++t) {
      if (!(w(tp, t) >= 0.0) || !std::isfinite(w(tp, t))) fail("weights: must be finite and >= 0");
      positive = positive || w(tp, t) > 0.0;
    }
  if (!positive) fail("weights: at least one stage weight must be positive");
}

void HyperParams::validate(int stages) const {
  if (K < 1) fail("hyper: K must be >= 1");
  for (double l : {lambda1, lambda2, lambda3})
    if (!(l >= 0.0) || !std::isfinite(l)) fail("hyper: lambdas must be finite and >= 0");
  weights.validate(stages);
  if (!(tol_outer >= 0.0)) fail("hyper: tol must be >= 0");
  if (max_outer < 0) fail("hyper: max iterations must be >= 0");
}

std::vector<TrainingSample> training_samples(const Dataset& dataset, const StageWeights& weights,
                                             bool class_balance) {
  const int T = dataset.stages();
  weights.validate(T);
  std::vector<std::vector<Index>> omega;
  for (int tp = 0; tp < T; ++tp) omega.push_back(build_omega(dataset, tp));

  double total = 0;
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) total += weights(tp, t) * static_cast<double>(omega[tp].size());
  if (!(total > 0.0))
    throw Error(ErrorKind::kEmptyOmega, "no training cells in any stage pair with positive weight");

  std::vector<TrainingSample> out;
  for (int tp = 0; tp < T; ++tp) {
    for (int t = tp + 1; t <= T; ++t) {
      const double w = weights(tp, t);
      if (w <= 0.0 || omega[tp].empty()) continue;
      double pos_factor = 1.0, neg_factor = 1.0;
      if (class_balance) {
        Index pos = 0;
        for (Index k : omega[tp]) pos += dataset.label(k, t) == 1;
        const Index n = static_cast<Index>(omega[tp].size());
        const Index neg = n - pos;
        if (pos > 0 && neg > 0) {
          pos_factor = static_cast<double>(n) / (2.0 * static_cast<double>(pos));
          neg_factor = static_cast<double>(n) / (2.0 * static_cast<double>(neg));
        }
      }
      for (Index k : omega[tp]) {
        const Label y = dataset.label(k, t);
        out.push_back({k, tp, t, y, w / total * (y == 1 ? pos_factor : neg_factor)});
      }
    }
  }
  return out;
}

double penalty(const Model& p, const HyperParams& hyper) {
  double a = 0, b = 0;
  for (const auto& m : p.user_factors) a += m.squaredNorm();
  for (const auto& m : p.item_factors) b += m.squaredNorm();
  return hyper.lambda1 * (p.A.squaredNorm() + p.B.squaredNorm()) + hyper.lambda2 * (a + b) +
         hyper.lambda3 * p.Q.squaredNorm();
}

CellMaps cell_maps(const Dataset& dataset, const Model& params) {
  CellMaps maps{MatXd(params.K, dataset.size()), MatXd(params.K, dataset.size())};
  const auto& users = dataset.users();
  const auto& items = dataset.items();
  for (Index k = 0; k < dataset.size(); ++k) {
    const auto& it = dataset.interactions()[k];
    maps.user.col(k) = user_map(params, users.numeric.col(it.user), users.levels.col(it.user));
    maps.item.col(k) = item_map(params, items.numeric.col(it.item), items.levels.col(it.item));
  }
  return maps;
}

double model_objective(const Dataset& dataset, const Model& params, const HyperParams& hyper) {
  hyper.validate(dataset.stages());
  if (!(params.schema == dataset.schema()))
    throw Error(ErrorKind::kSchemaMismatch, "model schema differs from dataset schema");
  const auto samples = training_samples(dataset, hyper.weights, hyper.class_balance);
  const auto maps = cell_maps(dataset, params);
  const int T = dataset.stages();
  std::vector<VecXd> q(static_cast<std::size_t>((T + 1) * (T + 1)));
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) q[tp * (T + 1) + t] = stage_vector(params, tp, t);
  double loss = 0;
  for (const auto& s : samples) {
    const double f = maps.user.col(s.cell).cwiseProduct(maps.item.col(s.cell)).dot(q[s.present * (T + 1) + s.subsequent]);
    loss += s.cost * hinge(static_cast<double>(s.label) * f);
  }
  return loss + penalty(params, hyper);
}

BayesComponents bayes_from_chain(const ProbabilityChain& chain, double scale, double base) {
  const int T = chain.stages();
  if (T < 1) fail("bayes: chain needs at least one stage");
  if (!(scale > 0.0)) fail("bayes: scale c must be positive");
  if (!(base > 1.0)) fail("bayes: base must exceed 1");
  if (chain.pi(0) != 1.0) fail("bayes: pi_0 must be 1");
  for (int t = 1; t <= T; ++t) {
    if (!(chain.pi(t) >= 0.0 && chain.pi(t) <= chain.pi(t - 1)))
      fail("bayes: probabilities must be nonincreasing in [0, 1]");
    if (chain.pi(t - 1) == 0.0)
      fail("bayes: pi_" + std::to_string(t - 1) + " = 0 leaves later stages undefined");
  }
  const double log_base = std::log(base);
  BayesComponents out;
  out.h = VecXd(T + 1);
  out.h(0) = scale * std::log(2.0) / log_base;
  for (int r = 1; r <= T; ++r) out.h(r) = scale * std::log(chain.pi(r - 1) / chain.pi(r)) / log_base;
  out.f = MatXd::Zero(T + 1, T + 1);
  for (int tp = 0; tp < T; ++tp) {
    double f = out.h(0);
    for (int t = tp + 1; t <= T; ++t) {
      f -= out.h(t);
      out.f(tp, t) = f;
    }
  }
  return out;
}

std::vector<StagePair> stage_pairs(int stages) {
  std::vector<StagePair> out;
  for (int tp = 0; tp < stages; ++tp)
    for (int t = tp + 1; t <= stages; ++t) out.push_back({tp, t});
  return out;
}

int pair_index(int present, int subsequent, int stages) {
  check_pair(present, subsequent, stages);
  // Pairs with present stage below `present` come first.
  return present * stages - present * (present - 1) / 2 + (subsequent - present - 1);
}

StagePairPredictions mask_predictions(const Dataset& dataset, MatXd f) {
  const int T = dataset.stages();
  if (f.rows() != T * (T + 1) / 2 || f.cols() != dataset.size())
    fail("predictions: decision table has wrong shape");
  StagePairPredictions out;
  out.stages = T;
  out.phi.resize(f.rows(), f.cols());
  for (Index k = 0; k < dataset.size(); ++k) {
    int row = 0;
    for (int tp = 0; tp < T; ++tp)
      for (int t = tp + 1; t <= T; ++t, ++row) out.phi(row, k) = predict_label(f(row, k), dataset.label(k, tp));
  }
  out.f = std::move(f);
  return out;
}

StagePairPredictions predict_all(const Dataset& dataset, const Model& params) {
  if (!(params.schema == dataset.schema()))
    throw Error(ErrorKind::kSchemaMismatch, "model schema differs from dataset schema");
  const int T = dataset.stages();
  const auto maps = cell_maps(dataset, params);
  std::vector<VecXd> q;
  for (const auto& pr : stage_pairs(T)) q.push_back(stage_vector(params, pr.present, pr.subsequent));
  MatXd f(q.size(), dataset.size());
  for (Index k = 0; k < dataset.size(); ++k) {
    const VecXd ab = maps.user.col(k).cwiseProduct(maps.item.col(k));
    for (std::size_t r = 0; r < q.size(); ++r) f(static_cast<Index>(r), k) = ab.dot(q[r]);
  }
  return mask_predictions(dataset, std::move(f));
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kProposed: return "proposed";
    case Method::kStandard: return "standard";
    case Method::kOrdinal: return "ordinal";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "proposed") return Method::kProposed;
  if (name == "standard" || name == "svm") return Method::kStandard;
  if (name == "ordinal" || name == "osvm") return Method::kOrdinal;
  fail("unknown method '" + name + "' (expected proposed, standard or ordinal)");
}

Index count_params(const FeatureSchema& schema, int K, Method method) {
  schema.validate();
  const Index lambda = schema.width();
  const Index T = schema.stages;
  switch (method) {
    case Method::kProposed: return (lambda + T) * K;
    case Method::kStandard: return lambda * K * T * (T + 1) / 2;
    case Method::kOrdinal: return lambda * K * T;
  }
  fail("count_params: unknown method");
}

}  // namespace mmrs
