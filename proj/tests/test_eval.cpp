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
#include "fixtures.hpp"
#include "mmrs/eval.hpp"

using namespace mmrs;
using fixtures::schema;

namespace {

// n cells for one user-item pair each; labels given per cell.
Dataset cells(const std::vector<std::vector<int>>& labels) {
  const int T = static_cast<int>(labels.front().size());
  const int n = static_cast<int>(labels.size());
  auto users = fixtures::table(MatXd(0, n), Eigen::MatrixXi::Zero(1, n), {1});
  auto items = fixtures::table(MatXd(0, 1), Eigen::MatrixXi::Zero(1, 1), {1});
  std::vector<Interaction> xs;
  for (int k = 0; k < n; ++k) xs.push_back({k, 0, Eigen::Map<const Eigen::VectorXi>(labels[k].data(), T)});
  return Dataset(schema(0, 0, {1}, {1}, T), users, items, xs);
}

StagePairPredictions constant(const Dataset& ds, double v) {
  return mask_predictions(ds, MatXd::Constant(ds.schema().pair_count(), ds.size(), v));
}

}  // namespace

TEST_CASE("pairwise error") {
  const auto ds = cells({{1}, {1}, {-1}});
  MatXd f(1, 3);
  f << 1, 1, -1;
  CHECK(pairwise_error(mask_predictions(ds, f), ds, 0, 1).rate == 0.0);
  CHECK(pairwise_error(constant(ds, -1), ds, 0, 1).errors == 2);
  f << 1, -1, -1;
  const auto e = pairwise_error(mask_predictions(ds, f), ds, 0, 1);
  CHECK(e.rate == doctest::Approx(1.0 / 3));
  CHECK(e.count == 3);
  // A zero margin counts as an error for a positive label.
  f << 0, 1, -1;
  CHECK(pairwise_error(mask_predictions(ds, f), ds, 0, 1).errors == 1);

  const auto all_pos = cells({{1}, {1}});
  CHECK(pairwise_error(constant(all_pos, -1), all_pos, 0, 1).rate == 1.0);

  const auto dead = cells({{-1, -1}});
  CHECK(pairwise_error(constant(dead, 1), dead, 1, 2).absent);
}

TEST_CASE("overall error pools counts") {
  const auto ds = cells({{1, 1}, {1, -1}, {-1, -1}, {1, 1}});
  MatXd f(3, 4);
  // (0,1): all right. (0,2): all wrong. (1,2): right.
  f << 1, 1, -1, 1,
       -1, 1, 1, -1,
       1, -1, 1, 1;
  const auto p = mask_predictions(ds, f);
  const auto w = StageWeights::all(2);
  CHECK(pairwise_error(p, ds, 0, 1).rate == 0.0);
  CHECK(pairwise_error(p, ds, 0, 2).rate == 1.0);
  CHECK(pairwise_error(p, ds, 1, 2).count == 3);
  CHECK(overall_error(p, ds, w) == doctest::Approx(4.0 / 11));
  CHECK(overall_error(p, ds, StageWeights::parse("0:1=1,0:2=1", 2)) == doctest::Approx(0.5));
  CHECK(overall_error(p, ds, StageWeights::next_stage(2)) == doctest::Approx(0.0));

  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = fixtures::random_dataset(rng, schema(0, 0, {2}, {2}, 3), 6, 6);
    const MatXd rf = MatXd::Random(6, r.size());
    const auto rp = mask_predictions(r, rf);
    const auto weights = StageWeights::parse("0:1=1,0:3=2,1:2=0.5,2:3=3", 3);
    double num = 0, den = 0;
    for (const auto& [tp, t] : stage_pairs(3))
      for (Index k = 0; k < r.size(); ++k) {
        if (r.label(k, tp) != 1) continue;
        num += weights(tp, t) * (sign_label(rf(pair_index(tp, t, 3), k)) != r.label(k, t));
        den += weights(tp, t);
      }
    CHECK(overall_error(rp, r, weights) == doctest::Approx(num / den));

    // Permuting the cells changes nothing.
    std::vector<Index> order(static_cast<std::size_t>(r.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(order.size() - 1 - i);
    const auto shuffled = r.subset(order);
    MatXd sf(rf.rows(), rf.cols());
    for (Index k = 0; k < r.size(); ++k) sf.col(k) = rf.col(order[k]);
    CHECK(overall_error(mask_predictions(shuffled, sf), shuffled, weights) ==
          doctest::Approx(overall_error(rp, r, weights)));
  }
}

TEST_CASE("inconsistency") {
  const auto ds = cells({{1, 1}});
  MatXd f(3, 1);
  f << -1, 1, 1;  // f01 < 0 < f02
  CHECK(inconsistency_rate(mask_predictions(ds, f)) == 1.0);
  f << 1, 1, -1;  // f12 < 0 < f02
  CHECK(inconsistency_rate(mask_predictions(ds, f)) == 1.0);
  f << 1, -1, 1;
  CHECK(inconsistency_rate(mask_predictions(ds, f)) == 0.0);
  f << 1, 0, 1;  // sign(0) = -1
  CHECK(inconsistency_rate(mask_predictions(ds, f)) == 0.0);
}

TEST_CASE("balanced error") {
  std::vector<std::vector<int>> labels(10, {-1});
  for (int k = 0; k < 9; ++k) labels[k] = {1};
  const auto ds = cells(labels);
  CHECK(balanced_error(constant(ds, 1), ds, 0, 1).rate == doctest::Approx(0.5));
  MatXd f(1, 10);
  for (int k = 0; k < 10; ++k) f(0, k) = labels[k][0];
  CHECK(balanced_error(mask_predictions(ds, f), ds, 0, 1).rate == 0.0);
  f(0, 0) = -1;
  CHECK(balanced_error(mask_predictions(ds, f), ds, 0, 1).rate == doctest::Approx(0.5 / 9));

  const auto one_class = cells({{1}, {1}});
  const auto b = balanced_error(constant(one_class, -1), one_class, 0, 1);
  CHECK(b.fallback);
  CHECK(b.rate == 1.0);
}

TEST_CASE("report and table") {
  const auto ds = cells({{1, 1}, {1, -1}, {-1, -1}});
  const auto p = constant(ds, 1);
  const auto r = evaluate(p, ds, StageWeights::all(2), "proposed");
  CHECK(r.pairs.size() == 3);
  CHECK(r.inconsistency == 0.0);
  CHECK(r.to_json().find("\"overall_error\"") != std::string::npos);
  const auto table = comparison_csv({{r, r}, {r}});
  CHECK(table.find("row,proposed,proposed") == 0);
  CHECK(table.find("Stage 0 -> Stage 2") != std::string::npos);
  CHECK(table.find("%Inconsist,0.000%(0.000%)") != std::string::npos);
}
