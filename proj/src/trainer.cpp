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

#include "mmrs/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mmrs/parallel.hpp"

namespace mmrs {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); }

void check_block(const FeatureSchema& schema, const BlockId& b) {
  using K = BlockId::Kind;
  switch (b.kind) {
    case K::kUserLinear:
      if (schema.p1 == 0) fail("block A is empty (p1 = 0)");
      return;
    case K::kItemLinear:
      if (schema.p2 == 0) fail("block B is empty (p2 = 0)");
      return;
    case K::kUserLevel:
      if (b.group < 0 || b.group >= schema.d1() || b.index < 0 || b.index >= schema.user_cardinalities[b.group])
        fail("user level block out of range");
      return;
    case K::kItemLevel:
      if (b.group < 0 || b.group >= schema.d2() || b.index < 0 || b.index >= schema.item_cardinalities[b.group])
        fail("item level block out of range");
      return;
    case K::kStage:
      if (b.index < 1 || b.index > schema.stages) fail("stage block out of range");
      return;
  }
}

}  // namespace

std::string BlockId::name() const {
  switch (kind) {
    case Kind::kUserLinear: return "A";
    case Kind::kItemLinear: return "B";
    case Kind::kUserLevel: return "a(" + std::to_string(group + 1) + "," + std::to_string(index + 1) + ")";
    case Kind::kItemLevel: return "b(" + std::to_string(group + 1) + "," + std::to_string(index + 1) + ")";
    case Kind::kStage: return "q(" + std::to_string(index) + ")";
  }
  return "?";
}

std::vector<BlockId> all_blocks(const FeatureSchema& schema) {
  std::vector<BlockId> out;
  if (schema.p1 > 0) out.push_back(BlockId::user_linear());
  for (int l = 0; l < schema.d1(); ++l)
    for (int h = 0; h < schema.user_cardinalities[l]; ++h) out.push_back(BlockId::user_level(l, h));
  if (schema.p2 > 0) out.push_back(BlockId::item_linear());
  for (int l = 0; l < schema.d2(); ++l)
    for (int h = 0; h < schema.item_cardinalities[l]; ++h) out.push_back(BlockId::item_level(l, h));
  for (int r = 1; r <= schema.stages; ++r) out.push_back(BlockId::stage(r));
  return out;
}

VecXd get_block(const Model& p, const BlockId& b) {
  check_block(p.schema, b);
  using K = BlockId::Kind;
  switch (b.kind) {
    case K::kUserLinear: return Eigen::Map<const VecXd>(p.A.data(), p.A.size());
    case K::kItemLinear: return Eigen::Map<const VecXd>(p.B.data(), p.B.size());
    case K::kUserLevel: return p.user_factors[b.group].col(b.index);
    case K::kItemLevel: return p.item_factors[b.group].col(b.index);
    case K::kStage: return p.Q.col(b.index - 1);
  }
  return {};
}

void set_block(Model& p, const BlockId& b, const VecXd& value) {
  check_block(p.schema, b);
  using K = BlockId::Kind;
  switch (b.kind) {
    case K::kUserLinear:
      if (value.size() != p.A.size()) fail("set_block: A size mismatch");
      p.A = Eigen::Map<const MatXd>(value.data(), p.A.rows(), p.A.cols());
      return;
    case K::kItemLinear:
      if (value.size() != p.B.size()) fail("set_block: B size mismatch");
      p.B = Eigen::Map<const MatXd>(value.data(), p.B.rows(), p.B.cols());
      return;
    case K::kUserLevel:
      if (value.size() != p.K) fail("set_block: size mismatch");
      p.user_factors[b.group].col(b.index) = value;
      return;
    case K::kItemLevel:
      if (value.size() != p.K) fail("set_block: size mismatch");
      p.item_factors[b.group].col(b.index) = value;
      return;
    case K::kStage:
      if (value.size() != p.K) fail("set_block: size mismatch");
      p.Q.col(b.index - 1) = value;
      return;
  }
}

Model init_params(const FeatureSchema& schema, int K, std::uint64_t seed) {
  schema.validate();
  if (K < 1) fail("init: K must be >= 1");
  Model p = Model::zeros(schema, K);
  Rng rng = substream(seed, "init");
  std::normal_distribution<double> normal(0.0, 0.1);
  auto fill = [&](MatXd& m) {
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = std::abs(normal(rng));
  };
  fill(p.A);
  fill(p.B);
  for (auto& m : p.user_factors) fill(m);
  for (auto& m : p.item_factors) fill(m);
  p.Q.setConstant(1.0 / (2.0 * schema.stages));
  return p;
}

BlockAssembler::BlockAssembler(const Dataset& dataset, const HyperParams& hyper)
    : dataset_(dataset), hyper_(hyper) {
  hyper_.validate(dataset.stages());
  samples_ = training_samples(dataset, hyper_.weights, hyper_.class_balance);
  const auto& schema = dataset.schema();
  everyone_.resize(samples_.size());
  for (std::size_t s = 0; s < samples_.size(); ++s) everyone_[s] = static_cast<Index>(s);

  user_members_.resize(schema.d1());
  for (int l = 0; l < schema.d1(); ++l) user_members_[l].resize(schema.user_cardinalities[l]);
  item_members_.resize(schema.d2());
  for (int l = 0; l < schema.d2(); ++l) item_members_[l].resize(schema.item_cardinalities[l]);
  stage_members_.resize(schema.stages + 1);

  const auto& users = dataset.users();
  const auto& items = dataset.items();
  for (std::size_t s = 0; s < samples_.size(); ++s) {
    const auto& sample = samples_[s];
    const auto& it = dataset.interactions()[sample.cell];
    for (int l = 0; l < schema.d1(); ++l) user_members_[l][users.levels(l, it.user)].push_back(static_cast<Index>(s));
    for (int l = 0; l < schema.d2(); ++l) item_members_[l][items.levels(l, it.item)].push_back(static_cast<Index>(s));
    for (int r = sample.present + 1; r <= sample.subsequent; ++r) stage_members_[r].push_back(static_cast<Index>(s));
  }
}

void BlockAssembler::refresh(const Model& snapshot) {
  if (!(snapshot.schema == dataset_.schema()))
    throw Error(ErrorKind::kSchemaMismatch, "snapshot schema differs from dataset schema");
  snapshot_ = &snapshot;
  maps_ = cell_maps(dataset_, snapshot);
  const int T = dataset_.stages();
  stage_vectors_.assign(static_cast<std::size_t>((T + 1) * (T + 1)), VecXd());
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) stage_vectors_[tp * (T + 1) + t] = stage_vector(snapshot, tp, t);
}

const VecXd& BlockAssembler::q(int present, int subsequent) const {
  return stage_vectors_[present * (dataset_.stages() + 1) + subsequent];
}

const std::vector<Index>& BlockAssembler::members(const BlockId& block) const {
  check_block(dataset_.schema(), block);
  using K = BlockId::Kind;
  switch (block.kind) {
    case K::kUserLinear:
    case K::kItemLinear: return everyone_;
    case K::kUserLevel: return user_members_[block.group][block.index];
    case K::kItemLevel: return item_members_[block.group][block.index];
    case K::kStage: return stage_members_[block.index];
  }
  return everyone_;
}

varsvm::SubproblemSpec<double> BlockAssembler::assemble(const BlockId& block) const {
  if (!snapshot_) fail("assembler used before refresh()");
  const Model& p = *snapshot_;
  const auto& rows = members(block);
  const auto& users = dataset_.users();
  const auto& items = dataset_.items();
  const Index K = p.K;
  const Index n = static_cast<Index>(rows.size());

  varsvm::SubproblemSpec<double> spec;
  spec.tol = inner_tol;
  spec.max_iter = inner_max_iter;
  spec.labels.resize(n);
  spec.costs.resize(n);
  spec.drifts.resize(n);

  using Kd = BlockId::Kind;
  Index dim = K;
  switch (block.kind) {
    case Kd::kUserLinear: dim = K * p.schema.p1; spec.ridge = hyper_.lambda1; break;
    case Kd::kItemLinear: dim = K * p.schema.p2; spec.ridge = hyper_.lambda1; break;
    case Kd::kUserLevel:
    case Kd::kItemLevel: spec.ridge = hyper_.lambda2; break;
    case Kd::kStage: spec.ridge = hyper_.lambda3; break;
  }
  spec.features.resize(dim, n);
  spec.bounds.assign(static_cast<std::size_t>(dim), varsvm::Bound::kNonnegative);

  for (Index k = 0; k < n; ++k) {
    const auto& s = samples_[rows[k]];
    const auto& it = dataset_.interactions()[s.cell];
    spec.labels(k) = s.label;
    spec.costs(k) = s.cost;
    const auto a = maps_.user.col(s.cell);
    const auto b = maps_.item.col(s.cell);
    const VecXd& qv = q(s.present, s.subsequent);
    switch (block.kind) {
      case Kd::kUserLinear: {
        const VecXd w = b.cwiseProduct(qv);
        const auto u = users.numeric.col(it.user);
        for (Index c = 0; c < u.size(); ++c) spec.features.col(k).segment(c * K, K) = u(c) * w;
        spec.drifts(k) = (a - p.A * u).dot(w);
        break;
      }
      case Kd::kItemLinear: {
        const VecXd w = a.cwiseProduct(qv);
        const auto v = items.numeric.col(it.item);
        for (Index c = 0; c < v.size(); ++c) spec.features.col(k).segment(c * K, K) = v(c) * w;
        spec.drifts(k) = (b - p.B * v).dot(w);
        break;
      }
      case Kd::kUserLevel: {
        spec.features.col(k) = b.cwiseProduct(qv);
        spec.drifts(k) = (a - p.user_factors[block.group].col(block.index)).dot(spec.features.col(k));
        break;
      }
      case Kd::kItemLevel: {
        spec.features.col(k) = a.cwiseProduct(qv);
        spec.drifts(k) = (b - p.item_factors[block.group].col(block.index)).dot(spec.features.col(k));
        break;
      }
      case Kd::kStage: {
        const VecXd ab = a.cwiseProduct(b);
        spec.features.col(k) = -ab;
        spec.drifts(k) = ab.dot(qv + p.Q.col(block.index - 1));
        break;
      }
    }
  }
  return spec;
}

varsvm::SubproblemSpec<double> assemble_block(const BlockId& block, const Model& snapshot,
                                              const Dataset& dataset, const HyperParams& hyper) {
  BlockAssembler assembler(dataset, hyper);
  assembler.refresh(snapshot);
  return assembler.assemble(block);
}

std::string TrainTrace::to_log() const {
  std::ostringstream out;
  out.precision(17);
  out << "0 " << initial_objective << " 0 0\n";
  for (const auto& e : entries)
    out << e.iteration << ' ' << e.objective << ' ' << e.subproblems << ' ' << e.unconverged << '\n';
  return out.str();
}

namespace {

struct Solved {
  VecXd value;
  VecXd alpha;
  bool converged = true;
};

Solved solve_block(const BlockAssembler& assembler, const Model& snapshot, const BlockId& block,
                   const VecXd& warm_alpha) {
  const auto spec = assembler.assemble(block);
  varsvm::WarmStart<double> start;
  start.alpha = warm_alpha;
  start.incumbent = get_block(snapshot, block);
  auto sol = varsvm::solve_subproblem(spec, start);
  return {std::move(sol.beta), std::move(sol.alpha), sol.converged};
}

void require_positive_ridges(const FeatureSchema& schema, const HyperParams& hyper) {
  if ((schema.p1 > 0 || schema.p2 > 0) && !(hyper.lambda1 > 0.0)) fail("fit: lambda1 must be positive");
  if ((schema.d1() > 0 || schema.d2() > 0) && !(hyper.lambda2 > 0.0)) fail("fit: lambda2 must be positive");
  if (!(hyper.lambda3 > 0.0)) fail("fit: lambda3 must be positive");
}

}  // namespace

FitResult fit(const Dataset& dataset, const HyperParams& hyper, const FitOptions& options) {
  const auto& schema = dataset.schema();
  hyper.validate(schema.stages);
  require_positive_ridges(schema, hyper);
  require_chain(dataset);

  BlockAssembler assembler(dataset, hyper);
  assembler.inner_tol = options.inner_tol;
  assembler.inner_max_iter = options.inner_max_iter;

  FitResult result{init_params(schema, hyper.K, hyper.seed), {}};
  Model& params = result.params;
  double objective = model_objective(dataset, params, hyper);
  result.trace.initial_objective = objective;

  // Dual warm starts, one per block; sample sets are fixed across iterations.
  const auto blocks = all_blocks(schema);
  std::vector<VecXd> warm(blocks.size());
  auto slot = [&](const BlockId& b) {
    for (std::size_t i = 0; i < blocks.size(); ++i)
      if (blocks[i] == b) return i;
    return blocks.size();
  };

  for (int iter = 1; iter <= hyper.max_outer; ++iter) {
    const auto started = std::chrono::steady_clock::now();
    int solved = 0, unconverged = 0;

    auto single = [&](const BlockId& b) {
      assembler.refresh(params);
      const std::size_t i = slot(b);
      auto s = solve_block(assembler, params, b, warm[i]);
      warm[i] = std::move(s.alpha);
      set_block(params, b, s.value);
      ++solved;
      unconverged += !s.converged;
    };
    // All levels of one categorical feature read the same snapshot and write
    // disjoint columns.
    auto levels = [&](BlockId::Kind kind, int group, int count) {
      assembler.refresh(params);
      std::vector<Solved> out(static_cast<std::size_t>(count));
      std::vector<std::size_t> slots(static_cast<std::size_t>(count));
      for (int h = 0; h < count; ++h) slots[h] = slot({kind, group, h});
      parallel_for(count, options.threads, [&](Index h) {
        out[h] = solve_block(assembler, params, {kind, group, static_cast<int>(h)}, warm[slots[h]]);
      });
      for (int h = 0; h < count; ++h) {
        warm[slots[h]] = std::move(out[h].alpha);
        set_block(params, {kind, group, h}, out[h].value);
        ++solved;
        unconverged += !out[h].converged;
      }
    };

    if (schema.p1 > 0) single(BlockId::user_linear());
    for (int l = 0; l < schema.d1(); ++l) levels(BlockId::Kind::kUserLevel, l, schema.user_cardinalities[l]);
    if (schema.p2 > 0) single(BlockId::item_linear());
    for (int l = 0; l < schema.d2(); ++l) levels(BlockId::Kind::kItemLevel, l, schema.item_cardinalities[l]);
    for (int r = 1; r <= schema.stages; ++r) single(BlockId::stage(r));

    const double next = model_objective(dataset, params, hyper);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.trace.entries.push_back({iter, next, seconds, solved, unconverged});
    const double decrement = objective - next;
    objective = next;
    if (decrement < hyper.tol_outer) {
      result.trace.converged = true;
      break;
    }
  }
  return result;
}

double block_improvement(const Dataset& dataset, const Model& params, const HyperParams& hyper,
                         const BlockId& block, double inner_tol) {
  BlockAssembler assembler(dataset, hyper);
  assembler.inner_tol = inner_tol;
  assembler.inner_max_iter = 100000;
  assembler.refresh(params);
  const auto spec = assembler.assemble(block);
  varsvm::WarmStart<double> start;
  start.incumbent = get_block(params, block);
  const auto sol = varsvm::solve_subproblem(spec, start);
  Model updated = params;
  set_block(updated, block, sol.beta);
  return model_objective(dataset, params, hyper) - model_objective(dataset, updated, hyper);
}

}  // namespace mmrs
