// Copyright 2026 The colbisbm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLBISBM_PREDICT_HPP
#define COLBISBM_PREDICT_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/vem.hpp"

namespace colbisbm {

struct DyadPrediction {
  int network = 0;
  int row = 0;
  int col = 0;
  double score = 0;  // Bernoulli: probability; Poisson: mean
};

// Posterior-mixture mean of the emission parameter:
//   score(m,i,j) = Σ_q Σ_r tau1_iq tau2_jr alpha_qr
inline std::vector<DyadPrediction> predict_dyads(
    const FitResult& fit_result, const NetworkCollection& coll,
    const std::vector<std::tuple<int, int, int>>& targets) {
  std::vector<DyadPrediction> out;
  out.reserve(targets.size());
  for (const auto& [m, i, j] : targets) {
    if (m < 0 || m >= coll.size()) throw std::out_of_range("network index out of range");
    const auto& net = coll.networks[static_cast<std::size_t>(m)];
    if (i < 0 || i >= net.n1() || j < 0 || j >= net.n2()) {
      throw std::out_of_range("dyad index out of range");
    }
    const Eigen::MatrixXd& alpha = fit_result.params.alpha_for(m);
    double score = fit_result.state.tau1[static_cast<std::size_t>(m)].row(i) * alpha *
                   fit_result.state.tau2[static_cast<std::size_t>(m)].row(j).transpose();
    out.push_back({m, i, j, score});
  }
  return out;
}

// Mann-Whitney AUC: P(score of a random positive > score of a random
// negative), half credit for ties, computed via midranks.
inline double roc_auc(const std::vector<double>& scores,
                      const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) {
    if (l == 1) {
      ++n_pos;
    } else if (l == 0) {
      ++n_neg;
    } else {
      throw std::invalid_argument("labels must be 0 or 1");
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_auc needs both classes present");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum_pos += midrank;
    }
    i = j + 1;
  }
  double p = static_cast<double>(n_pos);
  double n = static_cast<double>(n_neg);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n);
}

enum class DegradeMode { MissingLinks, MissingDyads };

struct DegradedDyad {
  int row = 0;
  int col = 0;
  double value = 0;  // original value, kept for scoring
};

// Degrades ceil(p_mis * n1 * n2) observed dyads sampled uniformly without
// replacement. MissingLinks zeroes the value (still observed); MissingDyads
// masks the dyad.
inline std::pair<BipartiteNetwork, std::vector<DegradedDyad>> degrade(
    const BipartiteNetwork& net, DegradeMode mode, double p_mis,
    std::uint64_t seed) {
  if (!(p_mis > 0.0 && p_mis < 1.0)) {
    throw std::invalid_argument("p_mis must lie in (0,1)");
  }
  std::vector<std::pair<int, int>> observed;
  for (Eigen::Index i = 0; i < net.n1(); ++i) {
    for (Eigen::Index j = 0; j < net.n2(); ++j) {
      if (net.observed(i, j) == 1.0) {
        observed.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  std::size_t want = static_cast<std::size_t>(
      std::ceil(p_mis * static_cast<double>(net.n1()) * static_cast<double>(net.n2())));
  if (want > observed.size()) {
    throw std::invalid_argument("not enough observed dyads to degrade");
  }
  auto rng = make_rng(seed, {kStreamDegrade});
  // partial Fisher-Yates
  for (std::size_t k = 0; k < want; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, observed.size() - 1);
    std::swap(observed[k], observed[pick(rng)]);
  }
  BipartiteNetwork out = net;
  std::vector<DegradedDyad> truth;
  truth.reserve(want);
  for (std::size_t k = 0; k < want; ++k) {
    auto [i, j] = observed[k];
    truth.push_back({i, j, net.values(i, j)});
    if (mode == DegradeMode::MissingLinks) {
      out.values(i, j) = 0.0;
    } else {
      out.observed(i, j) = 0.0;
      out.values(i, j) = 0.0;
    }
  }
  return {std::move(out), std::move(truth)};
}

}  // namespace colbisbm

#endif  // COLBISBM_PREDICT_HPP
