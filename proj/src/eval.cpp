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

#include "mmrs/eval.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace mmrs {

namespace {

void check_shape(const StagePairPredictions& p, const Dataset& test) {
  if (p.stages != test.stages() || p.cells() != test.size() || p.phi.cols() != test.size())
    throw Error(ErrorKind::kInvalidArgument, "predictions do not match the test dataset");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

PairError pairwise_error(const StagePairPredictions& predictions, const Dataset& test, int present, int subsequent) {
  check_pair(present, subsequent, test.stages());
  check_shape(predictions, test);
  PairError e;
  e.present = present;
  e.subsequent = subsequent;
  for (Index k : build_omega(test, present)) {
    ++e.count;
    e.errors += predictions.label(k, present, subsequent) != test.label(k, subsequent);
  }
  e.absent = e.count == 0;
  e.rate = e.absent ? std::numeric_limits<double>::quiet_NaN()
                    : static_cast<double>(e.errors) / static_cast<double>(e.count);
  return e;
}

double overall_error(const StagePairPredictions& predictions, const Dataset& test, const StageWeights& weights) {
  weights.validate(test.stages());
  double num = 0, den = 0;
  for (const auto& [tp, t] : stage_pairs(test.stages())) {
    const double w = weights(tp, t);
    if (w <= 0.0) continue;
    const auto e = pairwise_error(predictions, test, tp, t);
    num += w * static_cast<double>(e.errors);
    den += w * static_cast<double>(e.count);
  }
  if (den <= 0.0) throw Error(ErrorKind::kEmptyOmega, "no stage pair can be evaluated");
  return num / den;
}

bool inconsistent_cell(const StagePairPredictions& p, Index cell) {
  const int T = p.stages;
  auto s = [&](int tp, int t) { return sign_label(p.value(cell, tp, t)); };
  for (int tp = 0; tp < T; ++tp)
    for (int t = tp + 1; t <= T; ++t) {
      if (t < T && s(tp, t) == -1 && s(tp, t + 1) == 1) return true;
      if (tp + 1 < t && s(tp + 1, t) == -1 && s(tp, t) == 1) return true;
    }
  return false;
}

double inconsistency_rate(const StagePairPredictions& predictions) {
  if (predictions.cells() == 0) return 0.0;
  Index bad = 0;
  for (Index c = 0; c < predictions.cells(); ++c) bad += inconsistent_cell(predictions, c);
  return static_cast<double>(bad) / static_cast<double>(predictions.cells());
}

BalancedError balanced_error(const StagePairPredictions& predictions, const Dataset& test, int present,
                             int subsequent) {
  check_pair(present, subsequent, test.stages());
  check_shape(predictions, test);
  Index n[2] = {0, 0}, wrong[2] = {0, 0};
  for (Index k : build_omega(test, present)) {
    const int c = test.label(k, subsequent) == 1;
    ++n[c];
    wrong[c] += predictions.label(k, present, subsequent) != test.label(k, subsequent);
  }
  BalancedError b;
  b.absent = n[0] + n[1] == 0;
  if (b.absent) {
    b.rate = std::numeric_limits<double>::quiet_NaN();
    return b;
  }
  if (n[0] == 0 || n[1] == 0) {
    b.fallback = true;
    b.rate = static_cast<double>(wrong[0] + wrong[1]) / static_cast<double>(n[0] + n[1]);
    return b;
  }
  b.rate = 0.5 * static_cast<double>(wrong[0]) / static_cast<double>(n[0]) +
           0.5 * static_cast<double>(wrong[1]) / static_cast<double>(n[1]);
  return b;
}

EvalReport evaluate(const StagePairPredictions& predictions, const Dataset& test, const StageWeights& weights,
                    const std::string& method) {
  EvalReport r;
  r.method = method;
  r.stages = test.stages();
  double sum = 0;
  int used = 0;
  for (const auto& [tp, t] : stage_pairs(test.stages())) {
    PairReport pr{pairwise_error(predictions, test, tp, t), balanced_error(predictions, test, tp, t)};
    if (!pr.error.absent && weights(tp, t) > 0.0) {
      sum += pr.error.rate;
      ++used;
    }
    r.pairs.push_back(pr);
  }
  r.overall = overall_error(predictions, test, weights);
  r.overall_mean = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
  r.inconsistency = inconsistency_rate(predictions);
  return r;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json pairs_json = json::array();
  for (const auto& p : pairs)
    pairs_json.push_back({{"present", p.error.present},
                          {"subsequent", p.error.subsequent},
                          {"count", p.error.count},
                          {"errors", p.error.errors},
                          {"error", num(p.error.rate)},
                          {"balanced_error", num(p.balanced.rate)},
                          {"balanced_fallback", p.balanced.fallback},
                          {"absent", p.error.absent}});
  json doc = {{"method", method},
              {"stages", stages},
              {"pairs", pairs_json},
              {"overall_error", num(overall)},
              {"overall_error_unweighted", num(overall_mean)},
              {"inconsistency_rate", num(inconsistency)}};
  return doc.dump(2) + "\n";
}

std::string comparison_csv(const std::vector<std::vector<EvalReport>>& per_method) {
  if (per_method.empty()) return "";
  int T = 0;
  for (const auto& reps : per_method) {
    if (reps.empty()) throw Error(ErrorKind::kInvalidArgument, "comparison table: method without reports");
    if (T == 0) T = reps.front().stages;
    for (const auto& r : reps)
      if (r.stages != T) throw Error(ErrorKind::kInvalidArgument, "comparison table: stage counts differ");
  }
  auto cell = [](std::vector<double> v, bool percent) {
    std::erase_if(v, [](double x) { return std::isnan(x); });
    if (v.empty()) return std::string("NA");
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    const double k = percent ? 100.0 : 1.0;
    return fixed(k * mean, 3) + (percent ? "%(" : "(") + fixed(k * sd, 3) + (percent ? "%)" : ")");
  };

  std::ostringstream os;
  os << "row";
  for (const auto& reps : per_method) os << ',' << reps.front().method;
  os << '\n';
  const auto pairs = stage_pairs(T);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    os << "Stage " << pairs[i].present << " -> Stage " << pairs[i].subsequent;
    for (const auto& reps : per_method) {
      std::vector<double> v;
      for (const auto& r : reps) v.push_back(r.pairs[i].error.rate);
      os << ',' << cell(v, false);
    }
    os << '\n';
  }
  os << "Overall";
  for (const auto& reps : per_method) {
    std::vector<double> v;
    for (const auto& r : reps) v.push_back(r.overall);
    os << ',' << cell(v, false);
  }
  os << "\n%Inconsist";
  for (const auto& reps : per_method) {
    std::vector<double> v;
    for (const auto& r : reps) v.push_back(r.inconsistency);
    os << ',' << cell(v, true);
  }
  os << '\n';
  return os.str();
}

}  // namespace mmrs
