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

#include <string>
#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"
#include "mmrs/varsvm.hpp"

namespace mmrs {

/// One parameter block of the block successive minimization.
struct BlockId {
  enum class Kind { kUserLinear, kUserLevel, kItemLinear, kItemLevel, kStage };
  Kind kind = Kind::kUserLinear;
  int group = 0;  // l (0-based) for level blocks
  int index = 0;  // level h (0-based) for level blocks, r (1-based) for stage blocks

  static BlockId user_linear() { return {Kind::kUserLinear, 0, 0}; }
  static BlockId item_linear() { return {Kind::kItemLinear, 0, 0}; }
  static BlockId user_level(int l, int h) { return {Kind::kUserLevel, l, h}; }
  static BlockId item_level(int l, int h) { return {Kind::kItemLevel, l, h}; }
  static BlockId stage(int r) { return {Kind::kStage, 0, r}; }

  std::string name() const;
  bool operator==(const BlockId&) const = default;
};

/// Every block in update order: A, a(1,*)..a(d1,*), B, b(1,*)..b(d2,*), q_1..q_T.
/// Linear blocks are skipped when p1 or p2 is zero.
std::vector<BlockId> all_blocks(const FeatureSchema& schema);

/// Current value of a block as a flat vector (vec(A) is column-stacked).
VecXd get_block(const Model& params, const BlockId& block);
void set_block(Model& params, const BlockId& block, const VecXd& value);

/// Step-1 initialization: A, B, a, b entries |N(0, 0.1)|, q_r entries 1/(2T).
Model init_params(const FeatureSchema& schema, int K, std::uint64_t seed);

/// Holds the training samples and per-cell maps of a parameter snapshot and
/// builds block subproblems against it.
class BlockAssembler {
 public:
  BlockAssembler(const Dataset& dataset, const HyperParams& hyper);

  /// Recomputes user/item maps and stage vectors from `snapshot`.
  void refresh(const Model& snapshot);

  varsvm::SubproblemSpec<double> assemble(const BlockId& block) const;

  const std::vector<TrainingSample>& samples() const { return samples_; }
  /// Sample indices that enter a block's subproblem.
  const std::vector<Index>& members(const BlockId& block) const;

  double inner_tol = 1e-4;
  int inner_max_iter = 1000;

 private:
  const Dataset& dataset_;
  HyperParams hyper_;
  std::vector<TrainingSample> samples_;
  std::vector<Index> everyone_;
  std::vector<std::vector<std::vector<Index>>> user_members_;
  std::vector<std::vector<std::vector<Index>>> item_members_;
  std::vector<std::vector<Index>> stage_members_;
  const Model* snapshot_ = nullptr;
  CellMaps maps_;
  std::vector<VecXd> stage_vectors_;  // indexed t' * (T+1) + t

  const VecXd& q(int present, int subsequent) const;
};

/// Subproblem for one block given a parameter snapshot.
varsvm::SubproblemSpec<double> assemble_block(const BlockId& block, const Model& snapshot,
                                              const Dataset& dataset, const HyperParams& hyper);

struct TraceEntry {
  int iteration = 0;
  double objective = 0;
  double seconds = 0;
  int subproblems = 0;
  int unconverged = 0;
};

struct TrainTrace {
  double initial_objective = 0;
  std::vector<TraceEntry> entries;
  bool converged = false;

  /// "iteration objective subproblems unconverged" lines. Wall time is left
  /// out so reruns produce identical files.
  std::string to_log() const;
};

struct FitOptions {
  int threads = 1;
  double inner_tol = 1e-4;
  int inner_max_iter = 1000;
};

struct FitResult {
  Model params;
  TrainTrace trace;
};

/// Block successive minimization of the regularized multistage hinge objective.
FitResult fit(const Dataset& dataset, const HyperParams& hyper, const FitOptions& options = {});

/// Re-solves a single block from `params` and returns the objective decrease
/// (model objective before minus after).
double block_improvement(const Dataset& dataset, const Model& params, const HyperParams& hyper,
                         const BlockId& block, double inner_tol = 1e-8);

}  // namespace mmrs
