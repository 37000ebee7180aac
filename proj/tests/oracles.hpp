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

// Test-only reference implementations. Everything here is written as plain
// scalar loops or exhaustive enumeration, independent of the library's
// vectorized code paths, so the two routes can check each other.

#ifndef COLBISBM_TESTS_ORACLES_HPP
#define COLBISBM_TESTS_ORACLES_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/vem.hpp"

namespace oracles {

inline double log_f(colbisbm::Emission kind, double x, double a) {
  if (kind == colbisbm::Emission::Bernoulli) {
    return x * std::log(a) + (1.0 - x) * std::log(1.0 - a);
  }
  return -a + x * std::log(a) - std::lgamma(x + 1.0);
}

// One VE update for one network, straight from the fixed-point formulas:
// tau1_iq ∝ pi_q Π_j Π_r f(x_ij; a_qr)^{tau2_jr}, then tau2 with the fresh
// tau1. Floors and renormalizes exactly like the contract states.
inline void naive_e_step_once(const colbisbm::BipartiteNetwork& net,
                              colbisbm::Emission emission,
                              const Eigen::RowVectorXd& pi,
                              const Eigen::RowVectorXd& rho,
                              const Eigen::MatrixXd& alpha, Eigen::MatrixXd& tau1,
                              Eigen::MatrixXd& tau2) {
  const int q1 = static_cast<int>(alpha.rows());
  const int q2 = static_cast<int>(alpha.cols());
  Eigen::MatrixXd new1(net.n1(), q1);
  for (Eigen::Index i = 0; i < net.n1(); ++i) {
    std::vector<double> logw(q1, 0.0);
    for (int q = 0; q < q1; ++q) {
      if (pi(q) <= 0.0) {
        logw[q] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double acc = std::log(pi(q));
      for (Eigen::Index j = 0; j < net.n2(); ++j) {
        if (net.observed(i, j) == 0.0) continue;
        for (int r = 0; r < q2; ++r) {
          acc += tau2(j, r) * log_f(emission, net.values(i, j), alpha(q, r));
        }
      }
      logw[q] = acc;
    }
    double mx = *std::max_element(logw.begin(), logw.end());
    double total = 0;
    for (int q = 0; q < q1; ++q) {
      new1(i, q) = std::exp(logw[q] - mx);
      total += new1(i, q);
    }
    for (int q = 0; q < q1; ++q) new1(i, q) /= total;
    total = 0;
    for (int q = 0; q < q1; ++q) {
      if (pi(q) > 0.0) new1(i, q) = std::max(new1(i, q), colbisbm::kTauFloor);
      else new1(i, q) = 0.0;
      total += new1(i, q);
    }
    for (int q = 0; q < q1; ++q) new1(i, q) /= total;
  }
  tau1 = new1;
  Eigen::MatrixXd new2(net.n2(), q2);
  for (Eigen::Index j = 0; j < net.n2(); ++j) {
    std::vector<double> logw(q2, 0.0);
    for (int r = 0; r < q2; ++r) {
      if (rho(r) <= 0.0) {
        logw[r] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double acc = std::log(rho(r));
      for (Eigen::Index i = 0; i < net.n1(); ++i) {
        if (net.observed(i, j) == 0.0) continue;
        for (int q = 0; q < q1; ++q) {
          acc += tau1(i, q) * log_f(emission, net.values(i, j), alpha(q, r));
        }
      }
      logw[r] = acc;
    }
    double mx = *std::max_element(logw.begin(), logw.end());
    double total = 0;
    for (int r = 0; r < q2; ++r) {
      new2(j, r) = std::exp(logw[r] - mx);
      total += new2(j, r);
    }
    for (int r = 0; r < q2; ++r) new2(j, r) /= total;
    total = 0;
    for (int r = 0; r < q2; ++r) {
      if (rho(r) > 0.0) new2(j, r) = std::max(new2(j, r), colbisbm::kTauFloor);
      else new2(j, r) = 0.0;
      total += new2(j, r);
    }
    for (int r = 0; r < q2; ++r) new2(j, r) /= total;
  }
  tau2 = new2;
}

// Exact observed log-likelihood of one network by enumerating every label
// configuration; only feasible for tiny instances.
inline double exact_log_likelihood_network(const colbisbm::BipartiteNetwork& net,
                                           colbisbm::Emission emission,
                                           const Eigen::RowVectorXd& pi,
                                           const Eigen::RowVectorXd& rho,
                                           const Eigen::MatrixXd& alpha) {
  const int n1 = static_cast<int>(net.n1());
  const int n2 = static_cast<int>(net.n2());
  const int q1 = static_cast<int>(alpha.rows());
  const int q2 = static_cast<int>(alpha.cols());
  std::vector<int> z(n1, 0), w(n2, 0);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  auto complete_ll = [&]() {
    double ll = 0;
    for (int i = 0; i < n1; ++i) {
      if (pi(z[i]) <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += std::log(pi(z[i]));
    }
    for (int j = 0; j < n2; ++j) {
      if (rho(w[j]) <= 0.0) return -std::numeric_limits<double>::infinity();
      ll += std::log(rho(w[j]));
    }
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        if (net.observed(i, j) == 0.0) continue;
        ll += log_f(emission, net.values(i, j), alpha(z[i], w[j]));
      }
    }
    return ll;
  };
  std::function<void(int)> rec_w = [&](int j) {
    if (j == n2) {
      double t = complete_ll();
      terms.push_back(t);
      max_term = std::max(max_term, t);
      return;
    }
    for (int r = 0; r < q2; ++r) {
      w[j] = r;
      rec_w(j + 1);
    }
  };
  std::function<void(int)> rec_z = [&](int i) {
    if (i == n1) {
      rec_w(0);
      return;
    }
    for (int q = 0; q < q1; ++q) {
      z[i] = q;
      rec_z(i + 1);
    }
  };
  rec_z(0);
  double total = 0;
  for (double t : terms) {
    if (std::isfinite(t)) total += std::exp(t - max_term);
  }
  return max_term + std::log(total);
}

inline double exact_log_likelihood(const colbisbm::NetworkCollection& coll,
                                   const colbisbm::ModelParams& params) {
  double total = 0;
  for (int m = 0; m < coll.size(); ++m) {
    total += exact_log_likelihood_network(
        coll.networks[static_cast<std::size_t>(m)], params.emission,
        params.pi.row(m), params.rho.row(m), params.alpha_for(m));
  }
  return total;
}

// Profile complete-data log-likelihood of hard labels: closed-form MLEs for
// alpha and the proportions given (z, w), then the complete likelihood.
inline double profile_complete_ll(const colbisbm::BipartiteNetwork& net,
                                  colbisbm::Emission emission,
                                  const std::vector<int>& z, const std::vector<int>& w,
                                  int q1, int q2) {
  const int n1 = static_cast<int>(net.n1());
  const int n2 = static_cast<int>(net.n2());
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(q1, q2), n = Eigen::MatrixXd::Zero(q1, q2);
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(q1), c2 = Eigen::VectorXd::Zero(q2);
  for (int i = 0; i < n1; ++i) c1(z[i]) += 1;
  for (int j = 0; j < n2; ++j) c2(w[j]) += 1;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      if (net.observed(i, j) == 0.0) continue;
      e(z[i], w[j]) += net.values(i, j);
      n(z[i], w[j]) += 1.0;
    }
  }
  double ll = 0;
  for (int q = 0; q < q1; ++q) {
    if (c1(q) > 0) ll += c1(q) * std::log(c1(q) / n1);
  }
  for (int r = 0; r < q2; ++r) {
    if (c2(r) > 0) ll += c2(r) * std::log(c2(r) / n2);
  }
  for (int q = 0; q < q1; ++q) {
    for (int r = 0; r < q2; ++r) {
      if (n(q, r) <= 0) continue;
      double a = colbisbm::clamp_alpha(emission, e(q, r) / n(q, r));
      ll += e(q, r) * ((emission == colbisbm::Emission::Bernoulli)
                           ? std::log(a) - std::log1p(-a)
                           : std::log(a));
      ll += (emission == colbisbm::Emission::Bernoulli) ? n(q, r) * std::log1p(-a)
                                                        : -n(q, r) * a;
      if (emission == colbisbm::Emission::Poisson) {
        // the -log(x!) data term is constant over labelings; omitted
      }
    }
  }
  return ll;
}

// Argmax of the profile complete likelihood over every hard labeling.
inline std::pair<std::vector<int>, std::vector<int>> best_hard_labeling(
    const colbisbm::BipartiteNetwork& net, colbisbm::Emission emission, int q1,
    int q2) {
  const int n1 = static_cast<int>(net.n1());
  const int n2 = static_cast<int>(net.n2());
  std::vector<int> z(n1, 0), w(n2, 0), best_z, best_w;
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(int)> rec_w = [&](int j) {
    if (j == n2) {
      double ll = profile_complete_ll(net, emission, z, w, q1, q2);
      if (ll > best) {
        best = ll;
        best_z = z;
        best_w = w;
      }
      return;
    }
    for (int r = 0; r < q2; ++r) {
      w[j] = r;
      rec_w(j + 1);
    }
  };
  std::function<void(int)> rec_z = [&](int i) {
    if (i == n1) {
      rec_w(0);
      return;
    }
    for (int q = 0; q < q1; ++q) {
      z[i] = q;
      rec_z(i + 1);
    }
  };
  rec_z(0);
  return {best_z, best_w};
}

// All-pairs ROC AUC: wins + half-ties over positive x negative pairs.
inline double brute_force_auc(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1;
      if (scores[i] > scores[j]) wins += 1;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// ARI via explicit pair-agreement counts (independent of the library's
// contingency-table route).
inline double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      bool sa = a[i] == a[j];
      bool sb = b[i] == b[j];
      if (sa && sb) n11 += 1;
      else if (sa && !sb) n10 += 1;
      else if (!sa && sb) n01 += 1;
      else n00 += 1;
    }
  }
  double denom = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
  if (denom == 0.0) return 1.0;
  return 2.0 * (n11 * n00 - n10 * n01) / denom;
}

}  // namespace oracles

#endif  // COLBISBM_TESTS_ORACLES_HPP
