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

#include <cstdint>
#include <vector>

#include "mmrs/data_model.hpp"
#include "mmrs/model.hpp"

namespace mmrs {

/// Synthetic multistage data. Users are the full product of the user category
/// spaces (likewise items); observed pairs draw their category vectors
/// uniformly and duplicates are rejected.
struct SimConfig {
  std::vector<int> user_cardinalities{50, 30, 50};
  std::vector<int> item_cardinalities{100, 40};
  int K_true = 20;
  int stages = 2;
  Index omega0_size = 50000;
  double noise_scale = 1.0;
  std::uint64_t seed = 0;

  FeatureSchema schema() const;
  void validate() const;
};

struct SimResult {
  Dataset dataset;
  Model truth;  // Q holds the per-stage q_t of the generator
};

/// Latent vectors are chi-squared(1) entrywise, drawn a, then b, then q.
/// For y^{t-1} = +1, y^t = sign(p^t + sigma_t * noise_scale * N(0, 0.1)) with
/// p^t = a.b - (a o b).q_t and sigma_t the standard deviation of p^t over
/// all observed pairs; otherwise y^t = -1. One noise value is drawn per pair
/// and stage whether or not it is used.
SimResult generate_dataset(const SimConfig& config);

/// Fraction of the user x item universe that is not observed.
double missing_ratio(const SimConfig& config);

}  // namespace mmrs
