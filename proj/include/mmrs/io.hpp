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
#include <optional>
#include <string>
#include <variant>

#include "mmrs/baselines.hpp"
#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"

namespace mmrs::io {

namespace fs = std::filesystem;

/// key = value lines: p1, p2, d1, d2, user_cardinalities, item_cardinalities, T.
/// Cardinality lists are comma separated; '#' starts a comment.
FeatureSchema parse_schema(const std::string& text);
std::string format_schema(const FeatureSchema& schema);
FeatureSchema read_schema(const fs::path& path);

/// `id,u1..u{p},s1..s{d}` with 1-based category levels.
FeatureTable parse_feature_table(const std::string& text, int numeric_dim, const std::vector<int>& cardinalities,
                                 char prefix_numeric, char prefix_level, const std::string& id_name);
std::string format_feature_table(const FeatureTable& table, char prefix_numeric, char prefix_level,
                                 const std::string& id_name);

/// Raw interaction rows keyed by ids. Files without label columns (header
/// `i,j`) are accepted when `allow_unlabeled` is set; y is then all +1 and
/// `labeled` is false.
struct InteractionRows {
  std::vector<std::int64_t> users;
  std::vector<std::int64_t> items;
  Eigen::MatrixXi y;  // T x rows
  bool labeled = true;
};
InteractionRows parse_interactions(const std::string& text, int stages, bool allow_unlabeled = false);
std::string format_interactions(const Dataset& dataset);

/// Resolves ids against the feature tables; unknown ids are a malformed-file error.
Dataset assemble_dataset(const FeatureSchema& schema, std::shared_ptr<const FeatureTable> users,
                         std::shared_ptr<const FeatureTable> items, const InteractionRows& rows);

/// Directory with schema.cfg, users.csv, items.csv and interactions.csv.
struct DatasetFiles {
  fs::path schema;
  fs::path users;
  fs::path items;
  fs::path interactions;

  static DatasetFiles in(const fs::path& dir);
};

struct LoadedDataset {
  Dataset dataset;
  bool labeled = true;
};
LoadedDataset load_dataset(const DatasetFiles& files, bool allow_unlabeled = false);
void save_dataset(const fs::path& dir, const Dataset& dataset);

using AnyModel = std::variant<Model, StandardModel, OrdinalModel>;

Method method_of(const AnyModel& model);
const FeatureSchema& schema_of(const AnyModel& model);

/// Self-describing JSON envelope: format, version, method, schema, blocks.
/// Matrices are stored row-major; doubles round-trip exactly.
std::string model_to_json(const AnyModel& model);
AnyModel model_from_json(const std::string& text);

void save_model(const fs::path& path, const AnyModel& model);
/// Throws kSchemaMismatch when `expected` is given and differs from the stored schema.
AnyModel load_model(const fs::path& path, const std::optional<FeatureSchema>& expected = std::nullopt);

std::string read_file(const fs::path& path);
/// Writes via a temporary sibling and rename so readers never see partial files.
void write_file(const fs::path& path, const std::string& contents);

}  // namespace mmrs::io
