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
#include "oracles.hpp"

using namespace mmrs;
using fixtures::schema;
using fixtures::table;

namespace {

// K = 1, one user with a = 2, one item with b = 3, q_1 = 0.5, q_2 = 0.25.
struct Scalar1 {
  Dataset ds;
  Model p;
  Scalar1() {
    auto users = table(MatXd(0, 1), Eigen::MatrixXi::Zero(1, 1), {1});
    auto items = table(MatXd(0, 1), Eigen::MatrixXi::Zero(1, 1), {1});
    Interaction x{0, 0, Eigen::VectorXi::Ones(2)};
    ds = Dataset(schema(0, 0, {1}, {1}, 2), users, items, {x});
    p = Model::zeros(ds.schema(), 1);
    p.user_factors[0](0, 0) = 2;
    p.item_factors[0](0, 0) = 3;
    p.Q(0, 0) = 0.5;
    p.Q(0, 1) = 0.25;
  }
};

}  // namespace

TEST_CASE("feature maps") {
  Model p = Model::zeros(schema(0, 0, {2}, {1}, 1), 2);
  p.user_factors[0].col(1) << 1, 2;
  CHECK(user_map(p, VecXd(0), Eigen::VectorXi::Constant(1, 1)) == VecXd((VecXd(2) << 1, 2).finished()));

  Model lin = Model::zeros(schema(1, 1, {}, {}, 1), 1);
  lin.A(0, 0) = 3;
  lin.B(0, 0) = 3;
  CHECK(user_map(lin, VecXd::Constant(1, 0.5), Eigen::VectorXi(0))(0) == 1.5);
  CHECK(item_map(lin, VecXd::Constant(1, 0.5), Eigen::VectorXi(0))(0) == 1.5);

  std::mt19937_64 rng(1);
  const auto s = schema(2, 3, {3, 4}, {2, 5}, 2);
  const auto ds = fixtures::random_dataset(rng, s, 4, 4);
  const auto q = fixtures::random_params(rng, s, 3);
  for (Index r = 0; r < 4; ++r) {
    const VecXd a = user_map(q, ds.users().numeric.col(r), ds.users().levels.col(r));
    const VecXd b = item_map(q, ds.items().numeric.col(r), ds.items().levels.col(r));
    CHECK((a - oracle::user_vec(q, ds, r)).norm() < 1e-12);
    CHECK((b - oracle::item_vec(q, ds, r)).norm() < 1e-12);
    CHECK(a.minCoeff() >= 0.0);
  }
  CHECK_THROWS_AS(user_map(q, VecXd(1), ds.users().levels.col(0)), Error);
  CHECK_THROWS_AS(user_map(q, ds.users().numeric.col(0), Eigen::VectorXi::Constant(2, 7)), Error);
}

TEST_CASE("stage vectors and decision values") {
  Scalar1 f;
  CHECK(stage_vector(f.p, 0, 2)(0) == 0.25);
  CHECK(decision_value(f.ds, f.p, 0, 0, 0, 1) == 3.0);
  CHECK(decision_value(f.ds, f.p, 0, 0, 0, 2) == 1.5);
  CHECK(decision_value(f.ds, f.p, 0, 0, 1, 2) == 4.5);
  CHECK_THROWS_AS(stage_vector(f.p, 1, 1), Error);
  CHECK_THROWS_AS(decision_value(f.ds, f.p, 9, 0, 0, 1), Error);

  Model zero_q = f.p;
  zero_q.Q.setZero();
  CHECK(stage_vector(zero_q, 0, 2) == VecXd::Ones(1));
  CHECK(decision_value(f.ds, zero_q, 0, 0, 0, 2) == 6.0);
  Model zero_a = f.p;
  zero_a.user_factors[0].setZero();
  CHECK(decision_value(f.ds, zero_a, 0, 0, 1, 2) == 0.0);

  std::mt19937_64 rng(2);
  const auto s = schema(1, 1, {3}, {2}, 4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = fixtures::random_params(rng, s, 4, 0.6);
    const VecXd a = VecXd::Random(4).cwiseAbs(), b = VecXd::Random(4).cwiseAbs();
    for (int tp = 0; tp < 4; ++tp)
      for (int t = tp + 1; t < 4; ++t) {
        CHECK((stage_vector(p, tp, t) - stage_vector(p, tp, t + 1) - p.Q.col(t)).norm() < 1e-12);
        CHECK(decision_value(p, a, b, tp, t + 1) <= decision_value(p, a, b, tp, t));
        if (tp + 1 < t) CHECK(decision_value(p, a, b, tp, t) <= decision_value(p, a, b, tp + 1, t));
      }
    for (int tp = 0; tp < 2; ++tp) {
      const int mid = tp + 1, t = 4;
      double sum = 0;
      for (int r = tp + 1; r <= mid; ++r) sum += a.cwiseProduct(b).dot(p.Q.col(r - 1));
      CHECK(decision_value(p, a, b, tp, t) == doctest::Approx(decision_value(p, a, b, mid, t) - sum).epsilon(1e-9));
    }
  }
}

TEST_CASE("masked prediction") {
  CHECK(predict_label(5.0, -1) == -1);
  CHECK(predict_label(3.0, 1) == 1);
  CHECK(predict_label(0.0, 1) == -1);
  CHECK_THROWS_AS(predict_label(1.0, 0), Error);
}

TEST_CASE("model objective") {
  CHECK(hinge(1.0) == 0.0);
  CHECK(hinge(0.0) == 1.0);
  CHECK(hinge(-1.0) == 2.0);

  std::mt19937_64 rng(3);
  const auto s = schema(1, 1, {3}, {2}, 2);
  auto ds = fixtures::random_dataset(rng, s, 5, 4);
  auto h = fixtures::hyper(2);
  {
    std::vector<Interaction> pos = ds.interactions();
    for (auto& x : pos) x.y.setOnes();
    Dataset all_pos(s, ds.user_table(), ds.item_table(), pos);
    CHECK(model_objective(all_pos, Model::zeros(s, 3), h) == doctest::Approx(1.0));
  }
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = fixtures::random_params(rng, s, 3);
    h.weights.w(0, 2) = 0.5 * (rep % 3);
    CHECK(model_objective(ds, p, h) == doctest::Approx(oracle::model_objective(ds, p, h)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(model_objective(ds, Model::zeros(schema(1, 1, {3}, {2}, 3), 3), fixtures::hyper(2)), Error);
}

TEST_CASE("stage weight presets and parsing") {
  const auto all = StageWeights::all(3);
  CHECK(all(0, 3) == 1.0);
  CHECK(all(2, 3) == 1.0);
  const auto next = StageWeights::next_stage(3);
  CHECK(next(0, 1) == 1.0);
  CHECK(next(0, 2) == 0.0);
  const auto last = StageWeights::last_stage(3);
  CHECK(last(1, 3) == 1.0);
  CHECK(last(1, 2) == 0.0);
  const auto custom = StageWeights::parse("0:1=2,1:2=0.5", 2);
  CHECK(custom(0, 1) == 2.0);
  CHECK(custom(0, 2) == 0.0);
  CHECK(custom(1, 2) == 0.5);
  CHECK_THROWS_AS(StageWeights::parse("0:1=0", 2), Error);
  CHECK_THROWS_AS(StageWeights::parse("2:1=1", 2), Error);
  CHECK_THROWS_AS(StageWeights::parse("0-1=1", 2), Error);
}

TEST_CASE("Bayes construction") {
  ProbabilityChain c{(VecXd(3) << 1, 0.8, 0.2).finished()};
  const auto b = bayes_from_chain(c);
  CHECK(b.h(0) == doctest::Approx(0.693147).epsilon(1e-5));
  CHECK(b.h(1) == doctest::Approx(0.223144).epsilon(1e-5));
  CHECK(b.h(2) == doctest::Approx(1.386294).epsilon(1e-5));
  CHECK(b.f(0, 1) == doctest::Approx(0.470004).epsilon(1e-5));
  CHECK(b.f(1, 2) == doctest::Approx(-0.693147).epsilon(1e-5));
  CHECK(b.f(0, 2) == doctest::Approx(-0.916291).epsilon(1e-5));

  ProbabilityChain half{(VecXd(2) << 1, 0.5).finished()};
  CHECK(bayes_from_chain(half).f(0, 1) == 0.0);
  CHECK(bayes_from_chain(half, 2.0, 10.0).f(0, 1) == 0.0);

  ProbabilityChain dead{(VecXd(3) << 1, 0.0, 0.0).finished()};
  CHECK_THROWS_AS(bayes_from_chain(dead), Error);
  ProbabilityChain rising{(VecXd(3) << 1, 0.3, 0.4).finished()};
  CHECK_THROWS_AS(bayes_from_chain(rising), Error);
  CHECK_THROWS_AS(bayes_from_chain(c, 0.0), Error);
  CHECK_THROWS_AS(bayes_from_chain(c, 1.0, 1.0), Error);
}

TEST_CASE("parameter accounting") {
  const auto s = schema(2, 1, {3}, {4}, 2);  // width 10
  CHECK(count_params(s, 3, Method::kProposed) == 36);
  CHECK(count_params(s, 3, Method::kStandard) == 90);
  CHECK(count_params(s, 3, Method::kOrdinal) == 60);
  CHECK(Model::zeros(s, 3).parameter_count() == 36);
  CHECK(parse_method("svm") == Method::kStandard);
  CHECK_THROWS_AS(parse_method("boost"), Error);
}

TEST_CASE("stage pair indexing") {
  for (int T = 1; T <= 5; ++T) {
    const auto pairs = stage_pairs(T);
    CHECK(static_cast<int>(pairs.size()) == T * (T + 1) / 2);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      CHECK(pair_index(pairs[i].present, pairs[i].subsequent, T) == static_cast<int>(i));
  }
}

TEST_CASE("proposed predictions are always consistent") {
  std::mt19937_64 rng(4);
  const auto s = schema(1, 1, {3, 2}, {4}, 3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = fixtures::random_dataset(rng, s, 6, 6);
    const auto p = fixtures::random_params(rng, s, 4, 0.8);
    const auto pred = predict_all(ds, p);
    CHECK(inconsistency_rate(pred) == 0.0);
    for (Index k = 0; k < ds.size(); ++k)
      for (const auto& [tp, t] : stage_pairs(3)) {
        const auto& it = ds.interactions()[k];
        CHECK(pred.value(k, tp, t) == doctest::Approx(oracle::decision(p, oracle::user_vec(p, ds, it.user),
                                                                       oracle::item_vec(p, ds, it.item), tp, t)));
        CHECK(pred.label(k, tp, t) == predict_label(pred.value(k, tp, t), ds.label(k, tp)));
      }
  }
}
