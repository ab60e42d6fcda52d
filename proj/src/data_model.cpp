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

#include "mmrs/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace mmrs {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

}  // namespace

Index FeatureSchema::width() const {
  Index w = p1 + p2;
  for (int n : user_cardinalities) w += n;
  for (int m : item_cardinalities) w += m;
  return w;
}

void FeatureSchema::validate() const {
  if (p1 < 0 || p2 < 0) fail("schema: numeric feature counts must be >= 0");
  if (p1 + d1() < 1) fail("schema: users need at least one feature (p1 + d1 >= 1)");
  if (p2 + d2() < 1) fail("schema: items need at least one feature (p2 + d2 >= 1)");
  for (int n : user_cardinalities)
    if (n < 1) fail("schema: user cardinalities must be >= 1");
  for (int m : item_cardinalities)
    if (m < 1) fail("schema: item cardinalities must be >= 1");
  if (stages < 1) fail("schema: T must be >= 1");
}

std::optional<Index> FeatureTable::find(std::int64_t id) const {
  auto it = row_of_.find(id);
  if (it == row_of_.end()) return std::nullopt;
  return it->second;
}

void FeatureTable::finalize(int numeric_dim, const std::vector<int>& cardinalities) {
  const Index n = rows();
  if (numeric.rows() != numeric_dim || numeric.cols() != n)
    fail("feature table: numeric block has wrong shape");
  if (levels.rows() != static_cast<Index>(cardinalities.size()) || levels.cols() != n)
    fail("feature table: categorical block has wrong shape");
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < numeric_dim; ++c) {
      const double v = numeric(c, r);
      if (!(v >= 0.0 && v <= 1.0))
        fail("feature table: numeric feature of id " + std::to_string(ids[r]) + " outside [0,1]");
    }
    for (Index l = 0; l < levels.rows(); ++l) {
      if (levels(l, r) < 0 || levels(l, r) >= cardinalities[l])
        fail("feature table: category level of id " + std::to_string(ids[r]) + " out of range");
    }
  }
  row_of_.clear();
  row_of_.reserve(ids.size());
  for (Index r = 0; r < n; ++r) {
    if (!row_of_.emplace(ids[r], r).second)
      fail("feature table: duplicate id " + std::to_string(ids[r]));
  }
}

Dataset::Dataset(FeatureSchema schema, std::shared_ptr<const FeatureTable> users,
                 std::shared_ptr<const FeatureTable> items, std::vector<Interaction> interactions)
    : schema_(std::move(schema)),
      users_(std::move(users)),
      items_(std::move(items)),
      interactions_(std::move(interactions)) {
  schema_.validate();
  if (!users_ || !items_) fail("dataset: missing feature tables");
  if (users_->numeric.rows() != schema_.p1 || users_->levels.rows() != schema_.d1())
    fail("dataset: user table does not match schema");
  if (items_->numeric.rows() != schema_.p2 || items_->levels.rows() != schema_.d2())
    fail("dataset: item table does not match schema");

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(interactions_.size());
  const auto item_rows = static_cast<std::uint64_t>(items_->rows());
  for (const auto& it : interactions_) {
    if (it.user < 0 || it.user >= users_->rows() || it.item < 0 || it.item >= items_->rows())
      fail("dataset: interaction references a missing user or item");
    if (it.y.size() != schema_.stages) fail("dataset: label vector length differs from T");
    for (Index t = 0; t < it.y.size(); ++t)
      if (it.y(t) != 1 && it.y(t) != -1) fail("dataset: labels must be +1 or -1");
    const std::uint64_t key = static_cast<std::uint64_t>(it.user) * item_rows + it.item;
    if (!seen.insert(key).second)
      fail("dataset: duplicate (user, item) pair (" + std::to_string(users_->ids[it.user]) + ", " +
           std::to_string(items_->ids[it.item]) + ")");
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  std::vector<Interaction> picked;
  picked.reserve(rows.size());
  for (Index k : rows) picked.push_back(interactions_.at(k));
  return Dataset(schema_, users_, items_, std::move(picked));
}

ValidationReport validate_chain(const Dataset& dataset) {
  ValidationReport report;
  const auto& xs = dataset.interactions();
  for (Index k = 0; k < dataset.size(); ++k) {
    const auto& y = xs[k].y;
    for (Index t = 1; t < y.size(); ++t) {
      if (y(t - 1) == -1 && y(t) == 1) report.violations.push_back({k, static_cast<int>(t + 1)});
    }
  }
  return report;
}

void require_chain(const Dataset& dataset) {
  const auto report = validate_chain(dataset);
  if (report.ok()) return;
  const auto& v = report.violations.front();
  const auto& it = dataset.interactions()[v.interaction];
  throw Error(ErrorKind::kChainViolation,
              std::to_string(report.violations.size()) + " chain violation(s); first at user " +
                  std::to_string(dataset.users().ids[it.user]) + ", item " +
                  std::to_string(dataset.items().ids[it.item]) + ", stage " +
                  std::to_string(v.stage));
}

std::vector<Index> build_omega(const Dataset& dataset, int present_stage) {
  if (present_stage < 0 || present_stage > dataset.stages() - 1)
    fail("build_omega: stage index " + std::to_string(present_stage) + " out of range");
  std::vector<Index> out;
  for (Index k = 0; k < dataset.size(); ++k)
    if (dataset.label(k, present_stage) == 1) out.push_back(k);
  return out;
}

Index one_hot_width(const FeatureSchema& schema) { return schema.width(); }

MatXd one_hot_encode(const Dataset& dataset) {
  const auto& s = dataset.schema();
  MatXd design = MatXd::Zero(one_hot_width(s), dataset.size());
  for (Index k = 0; k < dataset.size(); ++k) {
    const auto& it = dataset.interactions()[k];
    Index row = 0;
    design.col(k).segment(row, s.p1) = dataset.users().numeric.col(it.user);
    row += s.p1;
    design.col(k).segment(row, s.p2) = dataset.items().numeric.col(it.item);
    row += s.p2;
    for (int l = 0; l < s.d1(); ++l) {
      design(row + dataset.users().levels(l, it.user), k) = 1.0;
      row += s.user_cardinalities[l];
    }
    for (int l = 0; l < s.d2(); ++l) {
      design(row + dataset.items().levels(l, it.item), k) = 1.0;
      row += s.item_cardinalities[l];
    }
  }
  return design;
}

DatasetSplit split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed,
                           bool allow_empty) {
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  for (double x : r)
    if (!std::isfinite(x) || x < 0.0 || (!allow_empty && x <= 0.0))
      fail("split: ratios must be positive");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) fail("split: ratios must sum to 1");

  const Index n = dataset.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng = substream(seed, "split");
  for (Index k = n - 1; k > 0; --k) {
    std::uniform_int_distribution<Index> pick(0, k);
    std::swap(order[k], order[pick(rng)]);
  }
  const Index n_train = std::min<Index>(n, std::llround(r[0] * static_cast<double>(n)));
  const Index n_val = std::min<Index>(n - n_train, std::llround(r[1] * static_cast<double>(n)));

  auto take = [&](Index from, Index count) {
    std::vector<Index> rows(order.begin() + from, order.begin() + from + count);
    std::sort(rows.begin(), rows.end());
    return dataset.subset(rows);
  };
  return {take(0, n_train), take(n_train, n_val), take(n_train + n_val, n - n_train - n_val)};
}

}  // namespace mmrs
