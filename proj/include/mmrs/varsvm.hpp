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

// Weighted, drifted, bound-constrained linear hinge SVM:
//
//   min_beta  sum_k c_k (1 - y_k (beta . x_k + d_k))_+  +  ridge * |beta|^2
//   s.t.      beta_j >= 0 for coordinates flagged kNonnegative.
//
// Solved by coordinate ascent on the dual. With s = sum_k alpha_k y_k x_k the
// primal is recovered coordinatewise as beta_j = P_j(s_j / (2 ridge)), where
// P_j clips at zero for nonnegative coordinates and is the identity otherwise.
// Each dual coordinate step maximizes the piecewise quadratic dual exactly
// along alpha_k within [0, c_k].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "mmrs/common.hpp"

namespace mmrs::varsvm {

enum class Bound : std::uint8_t { kNonnegative, kFree };

template <typename Scalar>
struct SubproblemSpec {
  Mat<Scalar> features;  // dim x n; column k is x_k
  Vec<Scalar> labels;    // +1 / -1
  Vec<Scalar> costs;     // c_k >= 0
  Vec<Scalar> drifts;    // fixed margin offset d_k
  Scalar ridge = Scalar(1);
  std::vector<Bound> bounds;
  Scalar tol = Scalar(1e-4);
  int max_iter = 1000;
  /// Cyclic visiting order unless set; a seed switches to a shuffled order.
  std::optional<std::uint64_t> shuffle_seed;

  Index dim() const { return features.rows(); }
  Index samples() const { return features.cols(); }
};

template <typename Scalar>
struct SubproblemSolution {
  Vec<Scalar> beta;
  Vec<Scalar> alpha;
  Scalar primal_objective = Scalar(0);
  Scalar kkt_residual = Scalar(0);
  int sweeps = 0;
  bool converged = false;
  /// Objective of the returned iterate candidate after each sweep (best so far).
  std::vector<Scalar> objective_trace;
};

/// Optional starting point. `alpha` warm-starts the dual; `incumbent` is a
/// feasible primal point the solver must not return anything worse than.
template <typename Scalar>
struct WarmStart {
  Vec<Scalar> alpha;
  Vec<Scalar> incumbent;
};

namespace detail {

template <typename Scalar>
void check_spec(const SubproblemSpec<Scalar>& spec) {
  auto bad = [](const char* what) { throw Error(ErrorKind::kInvalidArgument, std::string("varsvm: ") + what); };
  const Index n = spec.samples();
  if (spec.labels.size() != n || spec.costs.size() != n || spec.drifts.size() != n)
    bad("labels, costs and drifts must have one entry per sample");
  if (static_cast<Index>(spec.bounds.size()) != spec.dim()) bad("one bound flag per coordinate required");
  if (!(spec.ridge > Scalar(0)) || !std::isfinite(static_cast<double>(spec.ridge))) bad("ridge must be positive and finite");
  if (!spec.features.allFinite() || !spec.drifts.allFinite() || !spec.costs.allFinite())
    bad("non-finite input");
  for (Index k = 0; k < n; ++k) {
    if (spec.labels(k) != Scalar(1) && spec.labels(k) != Scalar(-1)) bad("labels must be +1 or -1");
    if (spec.costs(k) < Scalar(0)) bad("costs must be nonnegative");
  }
  if (spec.max_iter < 0) bad("max_iter must be >= 0");
}

template <typename Scalar>
Scalar project(Bound b, Scalar v) {
  return b == Bound::kNonnegative ? std::max(v, Scalar(0)) : v;
}

template <typename Scalar>
Vec<Scalar> beta_from_s(const SubproblemSpec<Scalar>& spec, const Vec<Scalar>& s) {
  Vec<Scalar> beta(s.size());
  const Scalar inv = Scalar(1) / (Scalar(2) * spec.ridge);
  for (Index j = 0; j < s.size(); ++j) beta(j) = project(spec.bounds[j], s(j) * inv);
  return beta;
}

// Objective and dual projected-gradient violation in one pass over the samples.
template <typename Scalar>
std::pair<Scalar, Scalar> evaluate(const SubproblemSpec<Scalar>& spec, const Vec<Scalar>& beta,
                                   const Vec<Scalar>& alpha) {
  Scalar loss = 0;
  Scalar viol = 0;
  if (spec.samples() > 0 && spec.dim() > 0) {
    const Vec<Scalar> margin = spec.features.transpose() * beta + spec.drifts;
    for (Index k = 0; k < spec.samples(); ++k) {
      const Scalar c = spec.costs(k);
      if (c == Scalar(0)) continue;
      const Scalar g = Scalar(1) - spec.labels(k) * margin(k);
      if (g > Scalar(0)) loss += c * g;
      Scalar v = std::abs(g);
      if (alpha(k) <= Scalar(0)) v = std::max(g, Scalar(0));
      else if (alpha(k) >= c) v = std::max(-g, Scalar(0));
      viol = std::max(viol, v);
    }
  } else {
    for (Index k = 0; k < spec.samples(); ++k) {
      const Scalar c = spec.costs(k);
      if (c == Scalar(0)) continue;
      const Scalar g = Scalar(1) - spec.labels(k) * spec.drifts(k);
      if (g > Scalar(0)) loss += c * g;
      Scalar v = std::abs(g);
      if (alpha(k) <= Scalar(0)) v = std::max(g, Scalar(0));
      else if (alpha(k) >= c) v = std::max(-g, Scalar(0));
      viol = std::max(viol, v);
    }
  }
  return {loss + spec.ridge * beta.squaredNorm(), viol};
}

}  // namespace detail

/// F(beta) for the spec; throws on dimension mismatch.
template <typename Scalar>
Scalar primal_objective(const SubproblemSpec<Scalar>& spec, const Vec<Scalar>& beta) {
  if (beta.size() != spec.dim())
    throw Error(ErrorKind::kInvalidArgument, "varsvm: beta dimension does not match the spec");
  Scalar loss = 0;
  for (Index k = 0; k < spec.samples(); ++k) {
    const Scalar m = spec.dim() > 0 ? spec.features.col(k).dot(beta) : Scalar(0);
    loss += spec.costs(k) * hinge(spec.labels(k) * (m + spec.drifts(k)));
  }
  return loss + spec.ridge * beta.squaredNorm();
}

/// Largest violated optimality condition: dual projected gradient over the
/// samples joined with primal stationarity of beta against beta(alpha).
/// Zero exactly at an optimum.
template <typename Scalar>
Scalar kkt_residual(const SubproblemSpec<Scalar>& spec, const SubproblemSolution<Scalar>& sol) {
  if (sol.beta.size() != spec.dim() || sol.alpha.size() != spec.samples())
    throw Error(ErrorKind::kInvalidArgument, "varsvm: solution dimensions do not match the spec");
  Vec<Scalar> ya = sol.alpha.cwiseProduct(spec.labels);
  for (Index k = 0; k < ya.size(); ++k)
    if (spec.costs(k) == Scalar(0)) ya(k) = 0;
  const Vec<Scalar> s = spec.dim() > 0 ? Vec<Scalar>(spec.features * ya) : Vec<Scalar>::Zero(0);
  const Scalar two_ridge = Scalar(2) * spec.ridge;
  Scalar primal = 0;
  for (Index j = 0; j < spec.dim(); ++j) {
    const Scalar target = detail::project(spec.bounds[j], s(j) / two_ridge);
    primal = std::max(primal, two_ridge * std::abs(sol.beta(j) - target));
  }
  return std::max(primal, detail::evaluate(spec, sol.beta, sol.alpha).second);
}

template <typename Scalar>
SubproblemSolution<Scalar> solve_subproblem(const SubproblemSpec<Scalar>& spec,
                                            const WarmStart<Scalar>& start = {}) {
  detail::check_spec(spec);
  const Index n = spec.samples();
  const Index dim = spec.dim();
  const Scalar inv2l = Scalar(1) / (Scalar(2) * spec.ridge);

  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k)
    if (spec.costs(k) > Scalar(0)) active.push_back(k);

  Vec<Scalar> alpha = Vec<Scalar>::Zero(n);
  if (start.alpha.size() == n) {
    for (Index k : active) alpha(k) = std::clamp(start.alpha(k), Scalar(0), spec.costs(k));
  }

  SubproblemSolution<Scalar> best;
  best.alpha = alpha;
  if (dim == 0 || active.empty()) {
    // Nothing to fit: beta = 0 and each dual variable sits at the bound its
    // (constant) gradient points to.
    best.beta = Vec<Scalar>::Zero(dim);
    for (Index k : active)
      best.alpha(k) = Scalar(1) - spec.labels(k) * spec.drifts(k) > Scalar(0) ? spec.costs(k) : Scalar(0);
    best.primal_objective = primal_objective(spec, best.beta);
    best.kkt_residual = kkt_residual(spec, best);
    best.converged = best.kkt_residual <= spec.tol;
    return best;
  }

  Vec<Scalar> s = spec.features * alpha.cwiseProduct(spec.labels);
  Vec<Scalar> beta = detail::beta_from_s(spec, s);
  {
    auto [obj, viol] = detail::evaluate(spec, beta, alpha);
    best.beta = beta;
    best.primal_objective = obj;
    best.kkt_residual = viol;
  }
  bool converged = best.kkt_residual <= spec.tol;

  std::optional<Rng> shuffle;
  if (spec.shuffle_seed) shuffle.emplace(substream(*spec.shuffle_seed, "varsvm"));

  std::vector<std::pair<Scalar, Index>> breaks;
  breaks.reserve(static_cast<std::size_t>(dim));
  Vec<Scalar> z(dim);

  int sweep = 0;
  for (; !converged && sweep < spec.max_iter; ++sweep) {
    if (shuffle) std::shuffle(active.begin(), active.end(), *shuffle);
    for (Index k : active) {
      const Scalar y = spec.labels(k);
      const Scalar c = spec.costs(k);
      z = y * spec.features.col(k);
      const Scalar g0 = Scalar(1) - y * spec.drifts(k) - z.dot(beta);
      const Scalar a = alpha(k);
      if ((g0 <= Scalar(0) && a <= Scalar(0)) || (g0 >= Scalar(0) && a >= c) || g0 == Scalar(0)) continue;

      // Walk along alpha_k in the ascent direction. The dual derivative is
      // piecewise linear and nonincreasing; kinks sit where a nonnegative
      // coordinate of s crosses zero.
      const Scalar dir = g0 > Scalar(0) ? Scalar(1) : Scalar(-1);
      const Scalar limit = g0 > Scalar(0) ? c - a : a;
      Scalar curvature = 0;
      breaks.clear();
      for (Index j = 0; j < dim; ++j) {
        const Scalar zj = z(j);
        if (zj == Scalar(0)) continue;
        if (spec.bounds[j] == Bound::kFree) {
          curvature += zj * zj;
          continue;
        }
        const Scalar rate = dir * zj;
        if (s(j) > Scalar(0) || (s(j) == Scalar(0) && rate > Scalar(0))) curvature += zj * zj;
        const Scalar tau = -s(j) / rate;
        if (tau > Scalar(0) && tau < limit) breaks.emplace_back(tau, j);
      }
      std::sort(breaks.begin(), breaks.end());

      Scalar grad = std::abs(g0);
      Scalar at = 0;
      Scalar step = limit;
      bool found = false;
      for (const auto& [tau, j] : breaks) {
        if (curvature > Scalar(0)) {
          const Scalar root = at + grad / (curvature * inv2l);
          if (root <= tau) {
            step = std::min(root, limit);
            found = true;
            break;
          }
        }
        grad -= curvature * inv2l * (tau - at);
        at = tau;
        const Scalar zj = z(j);
        curvature += (dir * zj > Scalar(0) ? zj * zj : -zj * zj);
        curvature = std::max(curvature, Scalar(0));
      }
      if (!found && curvature > Scalar(0)) step = std::min(at + grad / (curvature * inv2l), limit);

      const Scalar next = std::clamp(a + dir * step, Scalar(0), c);
      const Scalar delta = next - a;
      if (delta == Scalar(0)) continue;
      alpha(k) = next;
      for (Index j = 0; j < dim; ++j) {
        if (z(j) == Scalar(0)) continue;
        s(j) += delta * z(j);
        beta(j) = detail::project(spec.bounds[j], s(j) * inv2l);
      }
    }

    // Refresh s from alpha to stop rounding drift, then score the iterate.
    s = spec.features * alpha.cwiseProduct(spec.labels);
    beta = detail::beta_from_s(spec, s);
    auto [obj, viol] = detail::evaluate(spec, beta, alpha);
    converged = viol <= spec.tol;
    // A converged iterate that ties the best one up to rounding is preferred,
    // so the returned pair satisfies the tolerance.
    const Scalar slack = converged ? Scalar(1e-12) * std::max(Scalar(1), std::abs(best.primal_objective)) : Scalar(0);
    if (obj <= best.primal_objective + slack) {
      best.beta = beta;
      best.alpha = alpha;
      best.primal_objective = obj;
      best.kkt_residual = viol;
    }
    best.objective_trace.push_back(best.primal_objective);
  }
  best.sweeps = sweep;

  if (start.incumbent.size() == dim) {
    const Scalar inc = primal_objective(spec, start.incumbent);
    if (inc < best.primal_objective) {
      best.beta = start.incumbent;
      best.primal_objective = inc;
    }
  }
  best.primal_objective = primal_objective(spec, best.beta);
  best.kkt_residual = kkt_residual(spec, best);
  best.converged = best.kkt_residual <= spec.tol;
  return best;
}

}  // namespace mmrs::varsvm
