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

#include "doctest.h"
#include "oracles.hpp"

using namespace mmrs;
using namespace mmrs::varsvm;

TEST_CASE("primal objective matches an independent sum") {
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto spec = oracle::random_spec(rng, 8, 5);
    VecXd beta = VecXd::Random(spec.dim());
    for (Index j = 0; j < beta.size(); ++j)
      if (spec.bounds[j] == Bound::kNonnegative) beta(j) = std::abs(beta(j));
    CHECK(primal_objective(spec, beta) == doctest::Approx(oracle::objective(spec, beta)).epsilon(1e-12));
  }
}

TEST_CASE("solver agrees with the subgradient oracle on small problems") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const auto spec = oracle::random_spec(rng);
    const auto sol = solve_subproblem(spec);
    const VecXd ref = oracle::minimize(spec, 200000);
    CHECK(sol.primal_objective <= oracle::objective(spec, ref) + 1e-4);
    CHECK(sol.primal_objective == primal_objective(spec, sol.beta));
    for (Index j = 0; j < sol.beta.size(); ++j)
      if (spec.bounds[j] == Bound::kNonnegative) CHECK(sol.beta(j) >= 0.0);
    for (Index k = 0; k < sol.alpha.size(); ++k) {
      CHECK(sol.alpha(k) >= 0.0);
      CHECK(sol.alpha(k) <= spec.costs(k));
    }
  }
}

TEST_CASE("converged solutions meet the KKT tolerance") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 30; ++rep) {
    auto spec = oracle::random_spec(rng, 40, 6);
    spec.tol = 1e-6;
    const auto sol = solve_subproblem(spec);
    CHECK(sol.converged);
    CHECK(kkt_residual(spec, sol) <= spec.tol);
  }
}

TEST_CASE("scaling costs and ridge together leaves the minimizer unchanged") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    auto spec = oracle::random_spec(rng, 6, 3);
    spec.tol = 1e-12;
    const auto a = solve_subproblem(spec);
    auto scaled = spec;
    scaled.costs *= 3.5;
    scaled.ridge *= 3.5;
    const auto b = solve_subproblem(scaled);
    CHECK((a.beta - b.beta).norm() <= 1e-6);
    CHECK(b.primal_objective == doctest::Approx(3.5 * a.primal_objective).epsilon(1e-8));
  }
}

TEST_CASE("degenerate subproblems") {
  SubproblemSpec<double> empty;
  empty.features.resize(2, 0);
  empty.ridge = 1.0;
  empty.bounds = {Bound::kNonnegative, Bound::kFree};
  const auto e = solve_subproblem(empty);
  CHECK(e.beta == VecXd::Zero(2));
  CHECK(e.converged);

  SubproblemSpec<double> one;
  one.features = MatXd::Constant(1, 1, 1.0);
  one.labels = VecXd::Constant(1, 1.0);
  one.costs = VecXd::Constant(1, 1.0);
  one.drifts = VecXd::Zero(1);
  one.ridge = 1e-4;
  one.bounds = {Bound::kFree};
  one.tol = 1e-10;
  const auto s = solve_subproblem(one);
  CHECK(s.beta(0) > 0.0);
  CHECK(s.beta(0) == doctest::Approx(1.0).epsilon(1e-6));

  // A huge ridge drives the weights to zero.
  one.ridge = 1e6;
  CHECK(std::abs(solve_subproblem(one).beta(0)) < 1e-5);

  // Zero-cost samples do not influence the fit.
  SubproblemSpec<double> zc = one;
  zc.ridge = 0.5;
  zc.features.conservativeResize(1, 2);
  zc.features(0, 1) = 5.0;
  zc.labels.conservativeResize(2);
  zc.labels(1) = -1;
  zc.costs.conservativeResize(2);
  zc.costs(1) = 0.0;
  zc.drifts.conservativeResize(2);
  zc.drifts(1) = 0.0;
  one.ridge = 0.5;
  CHECK(solve_subproblem(zc).beta(0) == doctest::Approx(solve_subproblem(one).beta(0)));

  SubproblemSpec<double> bad = one;
  bad.ridge = 0.0;
  CHECK_THROWS_AS(solve_subproblem(bad), Error);
  bad = one;
  bad.costs(0) = -1;
  CHECK_THROWS_AS(solve_subproblem(bad), Error);
}

TEST_CASE("warm starts and incumbents never make things worse") {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    auto spec = oracle::random_spec(rng, 30, 4);
    spec.max_iter = 2;
    spec.tol = 1e-12;
    const auto cold = solve_subproblem(spec);
    VecXd incumbent = cold.beta;
    const auto warm = solve_subproblem(spec, {cold.alpha, incumbent});
    CHECK(warm.primal_objective <= cold.primal_objective);
    for (std::size_t i = 1; i < warm.objective_trace.size(); ++i)
      CHECK(warm.objective_trace[i] <= warm.objective_trace[i - 1]);
  }
}

TEST_CASE("shuffled order reaches the same optimum") {
  std::mt19937_64 rng(7);
  auto spec = oracle::random_spec(rng, 20, 3);
  spec.tol = 1e-10;
  const auto a = solve_subproblem(spec);
  spec.shuffle_seed = 9;
  const auto b = solve_subproblem(spec);
  CHECK(b.primal_objective == doctest::Approx(a.primal_objective).epsilon(1e-9));
  CHECK(solve_subproblem(spec).beta == b.beta);
}
