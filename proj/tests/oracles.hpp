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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library's solver or objective code.

#include <cmath>
#include <random>
#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"
#include "mmrs/varsvm.hpp"

namespace oracle {

using mmrs::Index;
using mmrs::MatXd;
using mmrs::VecXd;
using mmrs::varsvm::Bound;
using mmrs::varsvm::SubproblemSpec;

inline double objective(const SubproblemSpec<double>& spec, const VecXd& beta) {
  double f = 0;
  for (Index k = 0; k < spec.labels.size(); ++k) {
    double m = spec.drifts(k);
    for (Index j = 0; j < beta.size(); ++j) m += beta(j) * spec.features(j, k);
    const double u = spec.labels(k) * m;
    f += spec.costs(k) * (u < 1 ? 1 - u : 0);
  }
  double r = 0;
  for (Index j = 0; j < beta.size(); ++j) r += beta(j) * beta(j);
  return f + spec.ridge * r;
}

/// Projected subgradient descent with step 1/(2 lambda (k+1)) and
/// k-weighted averaging of the iterates.
inline VecXd minimize(const SubproblemSpec<double>& spec, long steps = 1000000) {
  const Index d = spec.features.rows();
  const Index n = spec.labels.size();
  VecXd beta = VecXd::Zero(d), avg = VecXd::Zero(d), g(d);
  double wsum = 0;
  for (long k = 0; k < steps; ++k) {
    g = 2 * spec.ridge * beta;
    for (Index i = 0; i < n; ++i) {
      const double u = spec.labels(i) * (spec.features.col(i).dot(beta) + spec.drifts(i));
      if (u < 1) g -= spec.costs(i) * spec.labels(i) * spec.features.col(i);
    }
    beta -= g / (2 * spec.ridge * static_cast<double>(k + 1));
    for (Index j = 0; j < d; ++j)
      if (spec.bounds[j] == Bound::kNonnegative && beta(j) < 0) beta(j) = 0;
    const double w = static_cast<double>(k + 1);
    wsum += w;
    avg += (w / wsum) * (beta - avg);
  }
  // The averaged point and the last iterate are both feasible; keep the better.
  return objective(spec, avg) <= objective(spec, beta) ? avg : beta;
}

inline SubproblemSpec<double> random_spec(std::mt19937_64& rng, int max_samples = 6, int max_dim = 3) {
  std::uniform_int_distribution<int> ns(1, max_samples), ds(1, max_dim);
  std::uniform_real_distribution<double> x(-1.5, 1.5), c(0.1, 1.0), drift(-1.0, 1.0), coin(0, 1);
  std::uniform_real_distribution<double> loglam(std::log(0.05), std::log(2.0));
  const int n = ns(rng), d = ds(rng);
  SubproblemSpec<double> s;
  s.features.resize(d, n);
  s.labels.resize(n);
  s.costs.resize(n);
  s.drifts.resize(n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < d; ++j) s.features(j, k) = x(rng);
    s.labels(k) = coin(rng) < 0.5 ? -1 : 1;
    s.costs(k) = c(rng);
    s.drifts(k) = coin(rng) < 0.3 ? 0.0 : drift(rng);
  }
  s.ridge = std::exp(loglam(rng));
  for (int j = 0; j < d; ++j) s.bounds.push_back(coin(rng) < 0.5 ? Bound::kNonnegative : Bound::kFree);
  s.tol = 1e-9;
  s.max_iter = 100000;
  return s;
}

/// a(u,s) and b(v,o) by explicit loops.
inline VecXd user_vec(const mmrs::Model& p, const mmrs::Dataset& ds, Index row) {
  VecXd a = VecXd::Zero(p.K);
  for (int k = 0; k < p.K; ++k) {
    for (int c = 0; c < p.schema.p1; ++c) a(k) += p.A(k, c) * ds.users().numeric(c, row);
    for (int l = 0; l < p.schema.d1(); ++l) a(k) += p.user_factors[l](k, ds.users().levels(l, row));
  }
  return a;
}

inline VecXd item_vec(const mmrs::Model& p, const mmrs::Dataset& ds, Index row) {
  VecXd b = VecXd::Zero(p.K);
  for (int k = 0; k < p.K; ++k) {
    for (int c = 0; c < p.schema.p2; ++c) b(k) += p.B(k, c) * ds.items().numeric(c, row);
    for (int l = 0; l < p.schema.d2(); ++l) b(k) += p.item_factors[l](k, ds.items().levels(l, row));
  }
  return b;
}

/// f^{t't} written as a.b - sum_r (a o b).q_r.
inline double decision(const mmrs::Model& p, const VecXd& a, const VecXd& b, int tp, int t) {
  double f = 0;
  for (int k = 0; k < p.K; ++k) {
    double stage = 0;
    for (int r = tp + 1; r <= t; ++r) stage += p.Q(k, r - 1);
    f += a(k) * b(k) - a(k) * b(k) * stage;
  }
  return f;
}

/// Regularized objective by a direct double loop over pairs and cells.
inline double model_objective(const mmrs::Dataset& ds, const mmrs::Model& p, const mmrs::HyperParams& h) {
  const int T = ds.stages();
  double loss = 0, norm_w = 0;
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) {
      const double w = h.weights(tp, t);
      for (Index k = 0; k < ds.size(); ++k) {
        if (ds.label(k, tp) != 1) continue;
        norm_w += w;
        const auto& it = ds.interactions()[k];
        const double f = decision(p, user_vec(p, ds, it.user), item_vec(p, ds, it.item), tp, t);
        const double u = ds.label(k, t) * f;
        loss += w * (u < 1 ? 1 - u : 0);
      }
    }
  double a2 = 0, b2 = 0;
  for (const auto& m : p.user_factors) a2 += m.squaredNorm();
  for (const auto& m : p.item_factors) b2 += m.squaredNorm();
  return loss / norm_w + h.lambda1 * (p.A.squaredNorm() + p.B.squaredNorm()) + h.lambda2 * (a2 + b2) +
         h.lambda3 * p.Q.squaredNorm();
}

}  // namespace oracle
