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

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"
#include "mmrs/trainer.hpp"

namespace fixtures {

using namespace mmrs;

/// Feature table with sequential ids 0..n-1.
inline std::shared_ptr<FeatureTable> table(const MatXd& numeric, const Eigen::MatrixXi& levels,
                                           const std::vector<int>& cards) {
  auto t = std::make_shared<FeatureTable>();
  for (Index r = 0; r < std::max(numeric.cols(), levels.cols()); ++r) t->ids.push_back(r);
  t->numeric = numeric.cols() == t->rows() ? numeric : MatXd(numeric.rows(), t->rows());
  t->levels = levels.cols() == t->rows() ? levels : Eigen::MatrixXi(levels.rows(), t->rows());
  t->finalize(static_cast<int>(numeric.rows()), cards);
  return t;
}

/// Random dataset over every user-item pair with a random chain per cell.
inline Dataset random_dataset(std::mt19937_64& rng, const FeatureSchema& schema, int users, int items,
                              double keep = 1.0) {
  std::uniform_real_distribution<double> unit(0, 1);
  MatXd un(schema.p1, users), vn(schema.p2, items);
  for (Index i = 0; i < un.size(); ++i) un.data()[i] = unit(rng);
  for (Index i = 0; i < vn.size(); ++i) vn.data()[i] = unit(rng);
  Eigen::MatrixXi ul(schema.d1(), users), vl(schema.d2(), items);
  for (int r = 0; r < users; ++r)
    for (int l = 0; l < schema.d1(); ++l)
      ul(l, r) = std::uniform_int_distribution<int>(0, schema.user_cardinalities[l] - 1)(rng);
  for (int r = 0; r < items; ++r)
    for (int l = 0; l < schema.d2(); ++l)
      vl(l, r) = std::uniform_int_distribution<int>(0, schema.item_cardinalities[l] - 1)(rng);
  auto ut = table(un, ul, schema.user_cardinalities);
  auto it = table(vn, vl, schema.item_cardinalities);
  std::vector<Interaction> xs;
  for (int i = 0; i < users; ++i)
    for (int j = 0; j < items; ++j) {
      if (unit(rng) > keep) continue;
      Interaction x;
      x.user = i;
      x.item = j;
      x.y.resize(schema.stages);
      bool alive = true;
      for (int t = 0; t < schema.stages; ++t) {
        alive = alive && unit(rng) < 0.7;
        x.y(t) = alive ? 1 : -1;
      }
      xs.push_back(x);
    }
  return Dataset(schema, ut, it, std::move(xs));
}

inline FeatureSchema schema(int p1, int p2, std::vector<int> ucards, std::vector<int> icards, int T) {
  FeatureSchema s;
  s.p1 = p1;
  s.p2 = p2;
  s.user_cardinalities = std::move(ucards);
  s.item_cardinalities = std::move(icards);
  s.stages = T;
  return s;
}

/// Nonnegative random parameters.
inline Model random_params(std::mt19937_64& rng, const FeatureSchema& schema, int K, double q_scale = 0.5) {
  std::uniform_real_distribution<double> unit(0, 1);
  Model p = Model::zeros(schema, K);
  auto fill = [&](MatXd& m, double scale) {
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * unit(rng);
  };
  fill(p.A, 1);
  fill(p.B, 1);
  for (auto& m : p.user_factors) fill(m, 1);
  for (auto& m : p.item_factors) fill(m, 1);
  fill(p.Q, q_scale);
  return p;
}

inline HyperParams hyper(int stages, int K = 3, double l1 = 1e-2, double l2 = 1e-2, double l3 = 1e-2) {
  HyperParams h;
  h.K = K;
  h.lambda1 = l1;
  h.lambda2 = l2;
  h.lambda3 = l3;
  h.weights = StageWeights::all(stages);
  return h;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mmrs_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
