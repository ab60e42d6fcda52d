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

#include "mmrs/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_set>

namespace mmrs {

namespace {

double universe(const std::vector<int>& cards) {
  double n = 1;
  for (int c : cards) n *= c;
  return n;
}

// Mixed-radix id of a category vector; the first group varies slowest.
std::int64_t level_id(const Eigen::VectorXi& levels, const std::vector<int>& cards) {
  std::int64_t id = 0;
  for (std::size_t l = 0; l < cards.size(); ++l) id = id * cards[l] + levels(static_cast<Index>(l));
  return id;
}

}  // namespace

FeatureSchema SimConfig::schema() const {
  FeatureSchema s;
  s.user_cardinalities = user_cardinalities;
  s.item_cardinalities = item_cardinalities;
  s.stages = stages;
  return s;
}

void SimConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "simulate: " + what); };
  if (user_cardinalities.empty() || item_cardinalities.empty()) bad("need at least one category group per side");
  if (K_true < 1) bad("K_true must be >= 1");
  if (stages < 1) bad("T must be >= 1");
  if (omega0_size < 1) bad("omega0_size must be >= 1");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) bad("noise_scale must be finite and >= 0");
  schema().validate();
  if (static_cast<double>(omega0_size) > universe(user_cardinalities) * universe(item_cardinalities))
    bad("omega0_size exceeds the number of user-item pairs");
  if (universe(user_cardinalities) * universe(item_cardinalities) > 9e18) bad("user-item universe too large");
}

double missing_ratio(const SimConfig& config) {
  return 1.0 - static_cast<double>(config.omega0_size) /
                   (universe(config.user_cardinalities) * universe(config.item_cardinalities));
}

SimResult generate_dataset(const SimConfig& config) {
  config.validate();
  const FeatureSchema schema = config.schema();
  const int K = config.K_true;
  const int T = config.stages;
  Rng rng = substream(config.seed, "simulate");
  std::normal_distribution<double> z(0.0, 1.0);
  auto chi2 = [&] {
    const double v = z(rng);
    return v * v;
  };

  // Column-major fill: a_{1,1}, a_{1,2}, .., then b, then q_1..q_T.
  auto fill = [&](MatXd& m) {
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = chi2();
  };
  Model truth = Model::zeros(schema, K);
  for (auto& m : truth.user_factors) fill(m);
  for (auto& m : truth.item_factors) fill(m);
  fill(truth.Q);

  const Index n = config.omega0_size;
  const int d1 = schema.d1();
  const int d2 = schema.d2();
  Eigen::MatrixXi ulev(d1, n), ilev(d2, n);
  std::vector<std::int64_t> uid(static_cast<std::size_t>(n)), iid(static_cast<std::size_t>(n));
  {
    std::unordered_set<std::int64_t> seen_pairs;
    const auto item_universe = static_cast<std::int64_t>(universe(config.item_cardinalities));
    Eigen::VectorXi s(d1), o(d2);
    for (Index k = 0; k < n;) {
      for (int l = 0; l < d1; ++l)
        s(l) = std::uniform_int_distribution<int>(0, config.user_cardinalities[l] - 1)(rng);
      for (int l = 0; l < d2; ++l)
        o(l) = std::uniform_int_distribution<int>(0, config.item_cardinalities[l] - 1)(rng);
      const std::int64_t i = level_id(s, config.user_cardinalities);
      const std::int64_t j = level_id(o, config.item_cardinalities);
      const std::int64_t key = i * item_universe + j;
      if (!seen_pairs.insert(key).second) continue;
      ulev.col(k) = s;
      ilev.col(k) = o;
      uid[k] = i;
      iid[k] = j;
      ++k;
    }
  }

  // p^t for every pair and stage.
  MatXd ab(K, n);
  for (Index k = 0; k < n; ++k) {
    VecXd a = VecXd::Zero(K), b = VecXd::Zero(K);
    for (int l = 0; l < d1; ++l) a += truth.user_factors[l].col(ulev(l, k));
    for (int l = 0; l < d2; ++l) b += truth.item_factors[l].col(ilev(l, k));
    ab.col(k) = a.cwiseProduct(b);
  }
  MatXd p(T, n);
  for (int t = 0; t < T; ++t)
    p.row(t) = (VecXd::Ones(K) - truth.Q.col(t)).transpose() * ab;

  std::normal_distribution<double> noise(0.0, 0.1);
  Eigen::MatrixXi y(T, n);
  for (int t = 0; t < T; ++t) {
    const double mean = p.row(t).mean();
    const double sigma = n > 1 ? std::sqrt((p.row(t).array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
    for (Index k = 0; k < n; ++k) {
      const double e = sigma * config.noise_scale * noise(rng);
      const bool alive = t == 0 || y(t - 1, k) == 1;
      y(t, k) = alive ? sign_label(p(t, k) + e) : -1;
    }
  }

  // Feature tables hold only the users and items that occur, sorted by id.
  auto build_table = [](const std::vector<std::int64_t>& ids, const Eigen::MatrixXi& levels,
                        const std::vector<int>& cards) {
    std::vector<Index> order(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) order[k] = static_cast<Index>(k);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ids[a] < ids[b]; });
    auto table = std::make_shared<FeatureTable>();
    table->levels.resize(levels.rows(), 0);
    std::vector<Index> cols;
    for (Index k : order)
      if (table->ids.empty() || table->ids.back() != ids[k]) {
        table->ids.push_back(ids[k]);
        cols.push_back(k);
      }
    table->numeric.resize(0, static_cast<Index>(cols.size()));
    table->levels.resize(levels.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) table->levels.col(static_cast<Index>(c)) = levels.col(cols[c]);
    table->finalize(0, cards);
    return table;
  };
  auto users = build_table(uid, ulev, config.user_cardinalities);
  auto items = build_table(iid, ilev, config.item_cardinalities);

  std::vector<Interaction> rows(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    rows[k].user = *users->find(uid[k]);
    rows[k].item = *items->find(iid[k]);
    rows[k].y = y.col(k);
  }
  return {Dataset(schema, users, items, std::move(rows)), std::move(truth)};
}

}  // namespace mmrs
