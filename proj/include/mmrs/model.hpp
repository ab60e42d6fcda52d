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

#include <cmath>
#include <string>
#include <vector>

#include "mmrs/common.hpp"
#include "mmrs/data_model.hpp"

namespace mmrs {

/// Nonnegative additive latent factor model. Decision values are
///
///   f^{t't}(x) = (a(u,s) o b(v,o)) . (1 - sum_{r=t'+1..t} q_r)
///
/// with a(u,s) = A u + sum_l a_{l,s_l} and b(v,o) = B v + sum_l b_{l,o_l}.
/// q_0 is the implicit all-ones vector and is not stored.
template <typename Scalar>
struct ModelParams {
  FeatureSchema schema;
  int K = 0;
  Mat<Scalar> A;                          // K x p1
  Mat<Scalar> B;                          // K x p2
  std::vector<Mat<Scalar>> user_factors;  // l -> K x n_l; column h is a_{l,h}
  std::vector<Mat<Scalar>> item_factors;  // l -> K x m_l; column h is b_{l,h}
  Mat<Scalar> Q;                          // K x T; column r-1 is q_r

  static ModelParams zeros(const FeatureSchema& schema, int K) {
    ModelParams p;
    p.schema = schema;
    p.K = K;
    p.A = Mat<Scalar>::Zero(K, schema.p1);
    p.B = Mat<Scalar>::Zero(K, schema.p2);
    for (int n : schema.user_cardinalities) p.user_factors.push_back(Mat<Scalar>::Zero(K, n));
    for (int m : schema.item_cardinalities) p.item_factors.push_back(Mat<Scalar>::Zero(K, m));
    p.Q = Mat<Scalar>::Zero(K, schema.stages);
    return p;
  }

  /// Number of stored scalars.
  Index parameter_count() const {
    Index n = A.size() + B.size() + Q.size();
    for (const auto& m : user_factors) n += m.size();
    for (const auto& m : item_factors) n += m.size();
    return n;
  }

  bool nonnegative() const {
    auto ok = [](const Mat<Scalar>& m) { return m.size() == 0 || m.minCoeff() >= Scalar(0); };
    if (!ok(A) || !ok(B) || !ok(Q)) return false;
    for (const auto& m : user_factors)
      if (!ok(m)) return false;
    for (const auto& m : item_factors)
      if (!ok(m)) return false;
    return true;
  }

  /// Shape, finiteness and sign checks against the schema.
  void validate() const {
    auto bad = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, "model: " + what); };
    schema.validate();
    if (K < 1) bad("K must be >= 1");
    if (A.rows() != K || A.cols() != schema.p1) bad("A has wrong shape");
    if (B.rows() != K || B.cols() != schema.p2) bad("B has wrong shape");
    if (Q.rows() != K || Q.cols() != schema.stages) bad("q has wrong shape");
    if (static_cast<int>(user_factors.size()) != schema.d1()) bad("wrong number of user factor groups");
    if (static_cast<int>(item_factors.size()) != schema.d2()) bad("wrong number of item factor groups");
    for (int l = 0; l < schema.d1(); ++l)
      if (user_factors[l].rows() != K || user_factors[l].cols() != schema.user_cardinalities[l])
        bad("user factor group " + std::to_string(l + 1) + " has wrong shape");
    for (int l = 0; l < schema.d2(); ++l)
      if (item_factors[l].rows() != K || item_factors[l].cols() != schema.item_cardinalities[l])
        bad("item factor group " + std::to_string(l + 1) + " has wrong shape");
    auto finite = [](const Mat<Scalar>& m) { return m.allFinite(); };
    bool all_finite = finite(A) && finite(B) && finite(Q);
    for (const auto& m : user_factors) all_finite = all_finite && finite(m);
    for (const auto& m : item_factors) all_finite = all_finite && finite(m);
    if (!all_finite) bad("non-finite parameter");
    if (!nonnegative()) bad("parameters must be nonnegative");
  }

  bool operator==(const ModelParams& o) const {
    if (!(schema == o.schema) || K != o.K || A != o.A || B != o.B || Q != o.Q) return false;
    if (user_factors.size() != o.user_factors.size() || item_factors.size() != o.item_factors.size())
      return false;
    for (std::size_t l = 0; l < user_factors.size(); ++l)
      if (user_factors[l] != o.user_factors[l]) return false;
    for (std::size_t l = 0; l < item_factors.size(); ++l)
      if (item_factors[l] != o.item_factors[l]) return false;
    return true;
  }
};

using Model = ModelParams<double>;

namespace detail {

template <typename Scalar, typename DerivedX, typename DerivedL>
Vec<Scalar> side_map(const Mat<Scalar>& linear, const std::vector<Mat<Scalar>>& factors,
                     const Eigen::MatrixBase<DerivedX>& numeric, const Eigen::MatrixBase<DerivedL>& levels,
                     const char* side) {
  if (numeric.size() != linear.cols() || levels.size() != static_cast<Index>(factors.size()))
    throw Error(ErrorKind::kInvalidArgument, std::string(side) + " map: feature dimensions do not match the model");
  Vec<Scalar> out = Vec<Scalar>::Zero(linear.rows());
  if (linear.cols() > 0) out.noalias() += linear * numeric.template cast<Scalar>();
  for (Index l = 0; l < levels.size(); ++l) {
    const auto h = static_cast<Index>(levels(l));
    if (h < 0 || h >= factors[l].cols())
      throw Error(ErrorKind::kInvalidArgument, std::string(side) + " map: category level out of range");
    out += factors[l].col(h);
  }
  return out;
}

}  // namespace detail

/// a(u, s) = A u + sum_l a_{l, s_l}; levels are 0-based.
template <typename Scalar, typename DerivedU, typename DerivedS>
Vec<Scalar> user_map(const ModelParams<Scalar>& p, const Eigen::MatrixBase<DerivedU>& u,
                     const Eigen::MatrixBase<DerivedS>& s) {
  return detail::side_map(p.A, p.user_factors, u, s, "user");
}

/// b(v, o) = B v + sum_l b_{l, o_l}; levels are 0-based.
template <typename Scalar, typename DerivedV, typename DerivedO>
Vec<Scalar> item_map(const ModelParams<Scalar>& p, const Eigen::MatrixBase<DerivedV>& v,
                     const Eigen::MatrixBase<DerivedO>& o) {
  return detail::side_map(p.B, p.item_factors, v, o, "item");
}

inline void check_pair(int present, int subsequent, int stages) {
  if (present < 0 || subsequent <= present || subsequent > stages)
    throw Error(ErrorKind::kInvalidArgument, "invalid stage pair (" + std::to_string(present) + ", " +
                                                 std::to_string(subsequent) + ")");
}

/// q_{t't} = 1 - sum_{r=t'+1..t} q_r. Subtraction runs from r = t down to
/// t'+1 so that values stay ordered in floating point along both t and t'.
template <typename Scalar>
Vec<Scalar> stage_vector(const ModelParams<Scalar>& p, int present, int subsequent) {
  check_pair(present, subsequent, p.schema.stages);
  Vec<Scalar> q = Vec<Scalar>::Ones(p.K);
  for (int r = subsequent; r > present; --r) q -= p.Q.col(r - 1);
  return q;
}

/// f^{t't} from precomputed user and item maps.
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar decision_value(const ModelParams<Scalar>& p, const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b, int present, int subsequent) {
  return a.cwiseProduct(b).dot(stage_vector(p, present, subsequent));
}

/// Upper-triangular (T+1)x(T+1) matrix of f^{t't}; entries with t <= t' are zero.
template <typename Scalar, typename DerivedA, typename DerivedB>
Mat<Scalar> decision_matrix(const ModelParams<Scalar>& p, const Eigen::MatrixBase<DerivedA>& a,
                            const Eigen::MatrixBase<DerivedB>& b) {
  const int T = p.schema.stages;
  const Vec<Scalar> ab = a.cwiseProduct(b);
  Mat<Scalar> f = Mat<Scalar>::Zero(T + 1, T + 1);
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) f(tp, t) = ab.dot(stage_vector(p, tp, t));
  return f;
}

/// f^{t't} for the user and item with the given ids.
double decision_value(const Dataset& dataset, const Model& params, std::int64_t user_id,
                      std::int64_t item_id, int present, int subsequent);

/// Masked prediction: -1 when y^{t'} = -1, else sign(f) with sign(0) = -1.
Label predict_label(double decision, Label observed_present);

Label predict_label(const Dataset& dataset, const Model& params, std::int64_t user_id,
                    std::int64_t item_id, int present, int subsequent, Label observed_present);

/// Stage weights w_{t't} stored in the upper triangle of a (T+1)x(T+1) matrix.
struct StageWeights {
  MatXd w;

  static StageWeights all(int stages);
  static StageWeights next_stage(int stages);
  static StageWeights last_stage(int stages);
  /// "all", "next", "last" or an explicit list "t':t=w,...". Unlisted pairs get 0.
  static StageWeights parse(const std::string& spec, int stages);

  int stages() const { return static_cast<int>(w.rows()) - 1; }
  double operator()(int present, int subsequent) const { return w(present, subsequent); }
  void validate(int stages) const;
};

struct HyperParams {
  int K = 8;
  double lambda1 = 1e-3;
  double lambda2 = 1e-2;
  double lambda3 = 1e-4;
  StageWeights weights;
  double tol_outer = 1e-4;
  int max_outer = 50;
  std::uint64_t seed = 0;
  bool class_balance = false;

  void validate(int stages) const;
};

/// One training term: cell k of the dataset, stage pair, label y^t and cost.
struct TrainingSample {
  Index cell;
  int present;
  int subsequent;
  Label label;
  double cost;
};

/// Every (cell, t', t) with (i,j) in Omega_{t'} and w_{t't} > 0, with cost
/// w_{t't} / N_w (times the inverse class frequency when balancing), where
/// N_w = sum_{t'<t} w_{t't} |Omega_{t'}|.
std::vector<TrainingSample> training_samples(const Dataset& dataset, const StageWeights& weights,
                                             bool class_balance);

/// lambda1 (|A|^2 + |B|^2) + lambda2 (|a|^2 + |b|^2) + lambda3 |q|^2.
double penalty(const Model& params, const HyperParams& hyper);

/// Normalized weighted hinge loss over all stage pairs plus the penalty.
double model_objective(const Dataset& dataset, const Model& params, const HyperParams& hyper);

/// Per-cell user and item maps (K x N) for every interaction of the dataset.
struct CellMaps {
  MatXd user;
  MatXd item;
};
CellMaps cell_maps(const Dataset& dataset, const Model& params);

/// Marginal positive probabilities pi_t = P(Y^t = 1 | observed), pi_0 = 1.
struct ProbabilityChain {
  VecXd pi;
  int stages() const { return static_cast<int>(pi.size()) - 1; }
};

struct BayesComponents {
  VecXd h;  // h^0..h^T, all >= 0
  MatXd f;  // upper triangle: f^{t't} = h^0 - sum_{r=t'+1..t} h^r
};

/// Additive Bayes decision values h^0 = c log_base 2, h^r = c log_base(pi_{r-1}/pi_r).
BayesComponents bayes_from_chain(const ProbabilityChain& chain, double scale = 1.0,
                                 double base = std::exp(1.0));

struct StagePair {
  int present;
  int subsequent;
};

/// (0,1), (0,2), .., (0,T), (1,2), .., (T-1,T).
std::vector<StagePair> stage_pairs(int stages);
int pair_index(int present, int subsequent, int stages);

/// Decision values f^{t't} (row = pair_index) and masked labels phi^{t't}
/// for every cell of a dataset.
struct StagePairPredictions {
  int stages = 0;
  MatXd f;
  Eigen::MatrixXi phi;

  Index cells() const { return f.cols(); }
  double value(Index cell, int present, int subsequent) const {
    return f(pair_index(present, subsequent, stages), cell);
  }
  Label label(Index cell, int present, int subsequent) const {
    return phi(pair_index(present, subsequent, stages), cell);
  }
};

/// Fills phi from f with the observed y^{t'} of each cell.
StagePairPredictions mask_predictions(const Dataset& dataset, MatXd f);

StagePairPredictions predict_all(const Dataset& dataset, const Model& params);

enum class Method { kProposed, kStandard, kOrdinal };

std::string to_string(Method m);
Method parse_method(const std::string& name);

/// Parameter counts: proposed (Lambda + T) K, standard Lambda K T (T+1) / 2,
/// ordinal Lambda K T.
Index count_params(const FeatureSchema& schema, int K, Method method);

}  // namespace mmrs
