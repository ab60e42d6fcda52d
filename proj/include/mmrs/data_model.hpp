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

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mmrs/common.hpp"

namespace mmrs {

/// Shape of the feature space: numeric widths, categorical cardinalities and
/// the number of stages T. Category levels are 0-based in memory and 1-based
/// in files.
struct FeatureSchema {
  int p1 = 0;
  int p2 = 0;
  std::vector<int> user_cardinalities;
  std::vector<int> item_cardinalities;
  int stages = 1;

  int d1() const { return static_cast<int>(user_cardinalities.size()); }
  int d2() const { return static_cast<int>(item_cardinalities.size()); }
  /// Lambda = p1 + p2 + sum n_l + sum m_l.
  Index width() const;
  /// Number of stage pairs (t', t) with 0 <= t' < t <= T.
  int pair_count() const { return stages * (stages + 1) / 2; }

  void validate() const;
  bool operator==(const FeatureSchema&) const = default;
};

/// Feature rows for one side (users or items). Column r of `numeric` and
/// `levels` belongs to ids[r].
struct FeatureTable {
  std::vector<std::int64_t> ids;
  MatXd numeric;
  Eigen::MatrixXi levels;

  Index rows() const { return static_cast<Index>(ids.size()); }
  std::optional<Index> find(std::int64_t id) const;

  /// Builds the id index and checks ranges against the given widths.
  void finalize(int numeric_dim, const std::vector<int>& cardinalities);

 private:
  std::unordered_map<std::int64_t, Index> row_of_;
};

struct Interaction {
  Index user = 0;  // row in the user table
  Index item = 0;  // row in the item table
  Eigen::VectorXi y;  // y^1..y^T; y^0 = +1 is implicit
};

/// Immutable set of observed cells. A pair that is not listed is missing.
class Dataset {
 public:
  Dataset() = default;
  Dataset(FeatureSchema schema, std::shared_ptr<const FeatureTable> users,
          std::shared_ptr<const FeatureTable> items, std::vector<Interaction> interactions);

  const FeatureSchema& schema() const { return schema_; }
  const FeatureTable& users() const { return *users_; }
  const FeatureTable& items() const { return *items_; }
  const std::shared_ptr<const FeatureTable>& user_table() const { return users_; }
  const std::shared_ptr<const FeatureTable>& item_table() const { return items_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }
  Index size() const { return static_cast<Index>(interactions_.size()); }
  int stages() const { return schema_.stages; }

  /// y^t for interaction k, with y^0 = +1.
  Label label(Index k, int t) const { return t == 0 ? 1 : interactions_[k].y(t - 1); }

  Dataset subset(std::span<const Index> rows) const;

 private:
  FeatureSchema schema_;
  std::shared_ptr<const FeatureTable> users_;
  std::shared_ptr<const FeatureTable> items_;
  std::vector<Interaction> interactions_;
};

struct ChainViolation {
  Index interaction;
  int stage;  // t with y^{t-1} = -1 and y^t = +1
};

struct ValidationReport {
  std::vector<ChainViolation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_chain(const Dataset& dataset);

/// Throws Error(kChainViolation) naming the first offending cell.
void require_chain(const Dataset& dataset);

/// Omega_{t'}: interaction indices with y^{t'} = +1 (Omega_0 is everything).
std::vector<Index> build_omega(const Dataset& dataset, int present_stage);

Index one_hot_width(const FeatureSchema& schema);

/// Design matrix with one column per interaction: u, v, then 0/1 dummies for
/// every user category followed by every item category.
MatXd one_hot_encode(const Dataset& dataset);

struct SplitRatios {
  double train = 0.1;
  double val = 0.1;
  double test = 0.8;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};

/// Seeded disjoint partition of the interactions. Feature tables are shared.
/// Zero ratios are rejected unless `allow_empty` is set.
DatasetSplit split_dataset(const Dataset& dataset, const SplitRatios& ratios,
                           std::uint64_t seed, bool allow_empty = false);

}  // namespace mmrs
