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

#ifndef COLBISBM_VEM_HPP
#define COLBISBM_VEM_HPP

// Variational EM for collections of bipartite stochastic block models.
//
// Each network m carries variational membership matrices tau1[m] (n1 x Q1)
// and tau2[m] (n2 x Q2). The VE fixed point
//
//   tau1_iq  ∝  pi_q^m  Π_j Π_r f(X_ij^m; alpha_qr)^{tau2_jr}
//
// reduces, after splitting log f(x;a) = x f1(a) + f2(a) + c(x), to
//
//   log tau1  =  X⊙O · (tau2 f1ᵀ) + O · (tau2 f2ᵀ) + log pi   (row-wise softmax)
//
// with O the observation mask, so the whole E-step is a handful of GEMMs.
// Unobserved dyads drop out of every sum. The M-step pools the sufficient
// statistics e_qr = tau1ᵀ(X⊙O)tau2 and n_qr = tau1ᵀO tau2 across networks.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colbisbm/emission.hpp"
#include "colbisbm/net_model.hpp"
#include "colbisbm/parallel.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/spectral.hpp"

namespace colbisbm {

inline constexpr double kTauFloor = 1e-9;

// Binary matrices marking which blocks each network populates. Admissible
// supports have a nonzero in every row and every column.
struct SupportPair {
  Eigen::MatrixXi s1;  // M x Q1
  Eigen::MatrixXi s2;  // M x Q2

  static SupportPair all_ones(int m, int q1, int q2) {
    return {Eigen::MatrixXi::Ones(m, q1), Eigen::MatrixXi::Ones(m, q2)};
  }

  int M() const { return static_cast<int>(s1.rows()); }
  int q1() const { return static_cast<int>(s1.cols()); }
  int q2() const { return static_cast<int>(s2.cols()); }

  bool admissible() const {
    for (const auto* s : {&s1, &s2}) {
      for (Eigen::Index m = 0; m < s->rows(); ++m) {
        if (s->row(m).sum() < 1) return false;
      }
      for (Eigen::Index q = 0; q < s->cols(); ++q) {
        if (s->col(q).sum() < 1) return false;
      }
    }
    return s1.rows() == s2.rows();
  }

  // Iid and Pi pin the column side to all ones; Iid and Rho the row side.
  bool consistent_with(ModelKind kind) const {
    bool s1_full = (s1.array() == 1).all();
    bool s2_full = (s2.array() == 1).all();
    switch (kind) {
      case ModelKind::Iid: return s1_full && s2_full;
      case ModelKind::Pi: return s2_full;
      case ModelKind::Rho: return s1_full;
      case ModelKind::Sep:
      case ModelKind::PiRho: return true;
    }
    return false;
  }

  // (s1ᵀ s2)_{qr} > 0 marks block pairs that can interact somewhere.
  Eigen::MatrixXi active_pairs() const {
    Eigen::MatrixXi prod = s1.transpose() * s2;
    return (prod.array() > 0).cast<int>();
  }

  Eigen::VectorXi q1_per_network() const { return s1.rowwise().sum(); }
  Eigen::VectorXi q2_per_network() const { return s2.rowwise().sum(); }

  bool operator==(const SupportPair& other) const {
    return s1 == other.s1 && s2 == other.s2;
  }
};

struct ModelParams {
  Eigen::MatrixXd pi;   // M x Q1, each row a distribution; exact zeros off support
  Eigen::MatrixXd rho;  // M x Q2
  // Shared connectivity for the col models (size 1); one matrix per network
  // for Sep.
  std::vector<Eigen::MatrixXd> alphas;
  ModelKind kind = ModelKind::Iid;
  Emission emission = Emission::Bernoulli;

  const Eigen::MatrixXd& alpha_for(int m) const {
    return alphas.size() == 1 ? alphas[0] : alphas.at(static_cast<std::size_t>(m));
  }
  const Eigen::MatrixXd& alpha() const { return alphas.at(0); }
  int q1() const { return static_cast<int>(pi.cols()); }
  int q2() const { return static_cast<int>(rho.cols()); }
};

struct VariationalState {
  std::vector<Eigen::MatrixXd> tau1;  // per network, n1 x Q1
  std::vector<Eigen::MatrixXd> tau2;  // per network, n2 x Q2
};

struct FitResult {
  ModelParams params;
  VariationalState state;
  SupportPair support;
  double elbo = -std::numeric_limits<double>::infinity();
  int n_iterations = 0;
  bool converged = false;
  double bicl = std::numeric_limits<double>::quiet_NaN();  // filled by selection
  std::uint64_t seed = 0;
  std::vector<std::pair<int, int>> degenerate_pairs;
  std::vector<double> elbo_trace;  // ELBO after each sweep, first entry at init
};

struct FitOptions {
  double tol = 1e-6;        // relative ELBO change across sweeps
  int max_iter = 200;       // VEM sweeps
  int n_init = 5;           // spectral restarts
  int max_inner = 50;       // tau1/tau2 fixed-point rounds per network sweep
  double inner_tol = 1e-4;  // max |delta tau| stopping the fixed point
  double perturb_frac = 0.1;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // parallel restarts
};

// ---------------------------------------------------------------------------
// Engine internals
// ---------------------------------------------------------------------------

namespace detail {

struct NetworkData {
  Eigen::MatrixXd x;     // values ⊙ mask
  Eigen::MatrixXd mask;  // observation mask
  bool fully_observed = true;
  double emission_const = 0.0;  // Σ mask ⊙ (-log x!) under Poisson
  double n1 = 0, n2 = 0;
};

struct EngineContext {
  std::vector<NetworkData> nets;
  Emission emission = Emission::Bernoulli;
  double observed_mean = 0.0;  // collection-wide, for degenerate fallbacks

  static EngineContext build(const NetworkCollection& coll) {
    EngineContext ctx;
    ctx.emission = coll.emission;
    double sum = 0, count = 0;
    for (const auto& net : coll.networks) {
      NetworkData nd;
      nd.mask = net.observed;
      nd.x = net.values.array() * net.observed.array();
      nd.fully_observed = (net.observed.array() == 1.0).all();
      nd.n1 = static_cast<double>(net.n1());
      nd.n2 = static_cast<double>(net.n2());
      if (coll.emission == Emission::Poisson) {
        nd.emission_const =
            -(net.observed.array() *
              (nd.x.array() + 1.0).unaryExpr([](double v) { return std::lgamma(v); }))
                 .sum();
      }
      sum += nd.x.sum();
      count += nd.mask.sum();
      ctx.nets.push_back(std::move(nd));
    }
    ctx.observed_mean = count > 0 ? sum / count : 0.0;
    return ctx;
  }
};

struct NetworkMoments {
  Eigen::MatrixXd e;  // Q1 x Q2
  Eigen::MatrixXd n;  // Q1 x Q2
  Eigen::VectorXd n1q, n2r;
};

inline NetworkMoments compute_moments(const NetworkData& nd,
                                      const Eigen::MatrixXd& tau1,
                                      const Eigen::MatrixXd& tau2) {
  NetworkMoments m;
  m.n1q = tau1.colwise().sum();
  m.n2r = tau2.colwise().sum();
  Eigen::MatrixXd xt2 = nd.x * tau2;  // n1 x Q2
  m.e = tau1.transpose() * xt2;
  if (nd.fully_observed) {
    m.n = m.n1q * m.n2r.transpose();
  } else {
    Eigen::MatrixXd mt2 = nd.mask * tau2;
    m.n = tau1.transpose() * mt2;
  }
  return m;
}

// Row-wise softmax of logits with support masking and tau flooring.
// `allowed` is a 0/1 row vector; excluded entries come out exactly zero.
inline void softmax_rows(Eigen::MatrixXd& logits, const Eigen::RowVectorXd& allowed,
                         Eigen::MatrixXd& tau) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (Eigen::Index q = 0; q < logits.cols(); ++q) {
    if (allowed(q) == 0.0) logits.col(q).setConstant(neg_inf);
  }
  Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  tau = (logits.colwise() - row_max).array().exp();
  Eigen::VectorXd row_sum = tau.rowwise().sum();
  tau.array().colwise() /= row_sum.array();
  // floor only the supported entries, then renormalize
  for (Eigen::Index q = 0; q < tau.cols(); ++q) {
    if (allowed(q) != 0.0) {
      tau.col(q) = tau.col(q).cwiseMax(kTauFloor);
    } else {
      tau.col(q).setZero();
    }
  }
  row_sum = tau.rowwise().sum();
  tau.array().colwise() /= row_sum.array();
}

// One network's VE fixed point; updates tau1 then tau2 with the fresh tau1.
inline void e_step_network(const NetworkData& nd, const Eigen::MatrixXd& f1,
                           const Eigen::MatrixXd& f2,
                           const Eigen::RowVectorXd& log_pi,
                           const Eigen::RowVectorXd& log_rho,
                           const Eigen::RowVectorXd& allowed1,
                           const Eigen::RowVectorXd& allowed2,
                           Eigen::MatrixXd& tau1, Eigen::MatrixXd& tau2,
                           int max_rounds, double tol) {
  Eigen::MatrixXd logits1, logits2, b, c, prev1, prev2;
  for (int round = 0; round < max_rounds; ++round) {
    prev1 = tau1;
    prev2 = tau2;

    b.noalias() = tau2 * f1.transpose();  // n2 x Q1
    logits1.noalias() = nd.x * b;
    c.noalias() = tau2 * f2.transpose();
    if (nd.fully_observed) {
      logits1.rowwise() += c.colwise().sum();
    } else {
      logits1.noalias() += nd.mask * c;
    }
    logits1.rowwise() += log_pi;
    softmax_rows(logits1, allowed1, tau1);

    b.noalias() = tau1 * f1;  // n1 x Q2
    logits2.noalias() = nd.x.transpose() * b;
    c.noalias() = tau1 * f2;
    if (nd.fully_observed) {
      logits2.rowwise() += c.colwise().sum();
    } else {
      logits2.noalias() += nd.mask.transpose() * c;
    }
    logits2.rowwise() += log_rho;
    softmax_rows(logits2, allowed2, tau2);

    double delta = std::max((tau1 - prev1).cwiseAbs().maxCoeff(),
                            (tau2 - prev2).cwiseAbs().maxCoeff());
    if (delta < tol) break;
  }
}

inline ModelParams m_step_from_moments(const EngineContext& ctx,
                                       const std::vector<NetworkMoments>& mom,
                                       ModelKind kind, const SupportPair& support,
                                       std::vector<std::pair<int, int>>* degenerate) {
  const int m_count = static_cast<int>(ctx.nets.size());
  const int q1 = support.q1();
  const int q2 = support.q2();
  ModelParams params;
  params.kind = kind;
  params.emission = ctx.emission;
  params.pi.resize(m_count, q1);
  params.rho.resize(m_count, q2);
  if (degenerate) degenerate->clear();

  const double neutral = ctx.emission == Emission::Bernoulli
                             ? 0.5
                             : clamp_alpha(Emission::Poisson, ctx.observed_mean);
  constexpr double kMassEps = 1e-12;

  if (kind == ModelKind::Sep) {
    params.alphas.resize(static_cast<std::size_t>(m_count));
    for (int m = 0; m < m_count; ++m) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Constant(q1, q2, neutral);
      for (int q = 0; q < q1; ++q) {
        for (int r = 0; r < q2; ++r) {
          if (support.s1(m, q) == 0 || support.s2(m, r) == 0) continue;
          double n = mom[static_cast<std::size_t>(m)].n(q, r);
          double e = mom[static_cast<std::size_t>(m)].e(q, r);
          if (n > kMassEps) {
            a(q, r) = clamp_alpha(ctx.emission, e / n);
          } else if (degenerate) {
            degenerate->emplace_back(q, r);
          }
        }
      }
      params.alphas[static_cast<std::size_t>(m)] = std::move(a);
    }
  } else {
    Eigen::MatrixXd sum_e = Eigen::MatrixXd::Zero(q1, q2);
    Eigen::MatrixXd sum_n = Eigen::MatrixXd::Zero(q1, q2);
    for (const auto& nm : mom) {
      sum_e += nm.e;
      sum_n += nm.n;
    }
    Eigen::MatrixXi active = support.active_pairs();
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(q1, q2, neutral);
    for (int q = 0; q < q1; ++q) {
      for (int r = 0; r < q2; ++r) {
        if (active(q, r) == 0) continue;
        if (sum_n(q, r) > kMassEps) {
          a(q, r) = clamp_alpha(ctx.emission, sum_e(q, r) / sum_n(q, r));
        } else if (degenerate) {
          degenerate->emplace_back(q, r);
        }
      }
    }
    params.alphas = {std::move(a)};
  }

  const bool pi_pooled = (kind == ModelKind::Iid || kind == ModelKind::Rho);
  const bool rho_pooled = (kind == ModelKind::Iid || kind == ModelKind::Pi);
  if (pi_pooled) {
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(q1);
    double den = 0;
    for (int m = 0; m < m_count; ++m) {
      num += mom[static_cast<std::size_t>(m)].n1q.transpose();
      den += ctx.nets[static_cast<std::size_t>(m)].n1;
    }
    for (int m = 0; m < m_count; ++m) params.pi.row(m) = num / den;
  } else {
    for (int m = 0; m < m_count; ++m) {
      params.pi.row(m) = mom[static_cast<std::size_t>(m)].n1q.transpose() /
                         ctx.nets[static_cast<std::size_t>(m)].n1;
    }
  }
  if (rho_pooled) {
    Eigen::RowVectorXd num = Eigen::RowVectorXd::Zero(q2);
    double den = 0;
    for (int m = 0; m < m_count; ++m) {
      num += mom[static_cast<std::size_t>(m)].n2r.transpose();
      den += ctx.nets[static_cast<std::size_t>(m)].n2;
    }
    for (int m = 0; m < m_count; ++m) params.rho.row(m) = num / den;
  } else {
    for (int m = 0; m < m_count; ++m) {
      params.rho.row(m) = mom[static_cast<std::size_t>(m)].n2r.transpose() /
                          ctx.nets[static_cast<std::size_t>(m)].n2;
    }
  }
  // exact zeros off support
  for (int m = 0; m < m_count; ++m) {
    for (int q = 0; q < q1; ++q) {
      if (support.s1(m, q) == 0) params.pi(m, q) = 0.0;
    }
    for (int r = 0; r < q2; ++r) {
      if (support.s2(m, r) == 0) params.rho(m, r) = 0.0;
    }
  }
  return params;
}

inline double entropy(const Eigen::MatrixXd& tau) {
  // 0 log 0 = 0; supported entries are floored away from zero.
  return -(tau.array() > 0.0)
              .select(tau.array() * tau.array().max(1e-300).log(), 0.0)
              .sum();
}

inline double elbo_from_moments(const EngineContext& ctx, const ModelParams& params,
                                const VariationalState& state,
                                const std::vector<NetworkMoments>& mom) {
  double total = 0;
  const int m_count = static_cast<int>(ctx.nets.size());
  for (int m = 0; m < m_count; ++m) {
    const auto& nm = mom[static_cast<std::size_t>(m)];
    const Eigen::MatrixXd& alpha = params.alpha_for(m);
    Eigen::MatrixXd f1, f2;
    emission_terms(ctx.emission, alpha, f1, f2);
    for (int q = 0; q < alpha.rows(); ++q) {
      for (int r = 0; r < alpha.cols(); ++r) {
        double e = nm.e(q, r), n = nm.n(q, r);
        if (e != 0.0 || n != 0.0) total += e * f1(q, r) + n * f2(q, r);
      }
    }
    total += ctx.nets[static_cast<std::size_t>(m)].emission_const;
    for (int q = 0; q < params.q1(); ++q) {
      double p = params.pi(m, q);
      if (p > 0.0 && nm.n1q(q) != 0.0) total += nm.n1q(q) * std::log(p);
    }
    for (int r = 0; r < params.q2(); ++r) {
      double p = params.rho(m, r);
      if (p > 0.0 && nm.n2r(r) != 0.0) total += nm.n2r(r) * std::log(p);
    }
    total += entropy(state.tau1[static_cast<std::size_t>(m)]);
    total += entropy(state.tau2[static_cast<std::size_t>(m)]);
  }
  return total;
}

// Zeroes excluded blocks, floors the rest and renormalizes each row.
inline void apply_support(VariationalState& state, const SupportPair& support) {
  for (int m = 0; m < support.M(); ++m) {
    auto fix = [](Eigen::MatrixXd& tau, const Eigen::MatrixXi& s, int m_idx) {
      for (Eigen::Index q = 0; q < tau.cols(); ++q) {
        if (s(m_idx, q) == 0) {
          tau.col(q).setZero();
        } else {
          tau.col(q) = tau.col(q).cwiseMax(kTauFloor);
        }
      }
      Eigen::VectorXd rs = tau.rowwise().sum();
      tau.array().colwise() /= rs.array();
    };
    fix(state.tau1[static_cast<std::size_t>(m)], support.s1, m);
    fix(state.tau2[static_cast<std::size_t>(m)], support.s2, m);
  }
}

inline void check_terms_finite(const Eigen::MatrixXd& f1, const Eigen::MatrixXd& f2,
                               const Eigen::MatrixXi& active) {
  for (int q = 0; q < f1.rows(); ++q) {
    for (int r = 0; r < f1.cols(); ++r) {
      if (active(q, r) != 0 &&
          (!std::isfinite(f1(q, r)) || !std::isfinite(f2(q, r)))) {
        throw std::runtime_error(
            "non-finite emission log-weight; alpha escaped its clamped domain");
      }
    }
  }
}

struct LogProportions {
  Eigen::MatrixXd log_pi, log_rho;  // -inf off support
  Eigen::MatrixXd allowed1, allowed2;
};

inline LogProportions log_proportions(const ModelParams& params) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  LogProportions lp;
  auto fill = [&](const Eigen::MatrixXd& p, Eigen::MatrixXd& lg, Eigen::MatrixXd& al) {
    lg.resize(p.rows(), p.cols());
    al.resize(p.rows(), p.cols());
    for (Eigen::Index m = 0; m < p.rows(); ++m) {
      for (Eigen::Index q = 0; q < p.cols(); ++q) {
        if (p(m, q) > 0.0) {
          lg(m, q) = std::log(p(m, q));
          al(m, q) = 1.0;
        } else {
          lg(m, q) = neg_inf;
          al(m, q) = 0.0;
        }
      }
    }
  };
  fill(params.pi, lp.log_pi, lp.allowed1);
  fill(params.rho, lp.log_rho, lp.allowed2);
  return lp;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

namespace detail {

struct HardClusterStats {
  Eigen::MatrixXd e, n;          // q1 x q2 interaction mass and dyad counts
  Eigen::VectorXd size1, size2;  // cluster node counts

  Eigen::MatrixXd alpha() const {
    return (n.array() > 0).select(e.array() / n.array().max(1.0), 0.0);
  }
};

inline HardClusterStats hard_cluster_stats(const BipartiteNetwork& net,
                                           const Eigen::VectorXi& za,
                                           const Eigen::VectorXi& wa, int q1, int q2) {
  HardClusterStats st;
  st.e = Eigen::MatrixXd::Zero(q1, q2);
  st.n = Eigen::MatrixXd::Zero(q1, q2);
  st.size1 = Eigen::VectorXd::Zero(q1);
  st.size2 = Eigen::VectorXd::Zero(q2);
  for (Eigen::Index i = 0; i < net.n1(); ++i) st.size1(za(i)) += 1;
  for (Eigen::Index j = 0; j < net.n2(); ++j) st.size2(wa(j)) += 1;
  for (Eigen::Index i = 0; i < net.n1(); ++i) {
    for (Eigen::Index j = 0; j < net.n2(); ++j) {
      if (net.observed(i, j) == 0.0) continue;
      st.e(za(i), wa(j)) += net.values(i, j);
      st.n(za(i), wa(j)) += 1.0;
    }
  }
  return st;
}

// Profile log-likelihood of one merged cell (Bernoulli or Poisson at the
// cell's own maximum-likelihood rate).
inline double cell_profile_ll(double e, double n, Emission emission) {
  if (n <= 0.0) return 0.0;
  double rate = e / n;
  if (emission == Emission::Poisson) {
    return e > 0.0 ? e * std::log(rate) - e : 0.0;
  }
  double ll = 0.0;
  if (e > 0.0) ll += e * std::log(rate);
  if (n - e > 0.0) ll += (n - e) * std::log(1.0 - rate);
  return ll;
}

inline std::vector<int> rank_desc(const Eigen::VectorXd& score) {
  std::vector<int> idx(static_cast<std::size_t>(score.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int x, int y) { return score(x) > score(y); });
  std::vector<int> new_label(idx.size());
  for (std::size_t pos = 0; pos < idx.size(); ++pos) {
    new_label[static_cast<std::size_t>(idx[pos])] = static_cast<int>(pos);
  }
  return new_label;
}

// Minimum-cost perfect assignment (Hungarian algorithm, O(n^3));
// returns assign[item] = slot.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                     v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assign(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) {
      assign[static_cast<std::size_t>(p[static_cast<std::size_t>(j)]) - 1] = j - 1;
    }
  }
  return assign;
}

// Joint (row, col) matching of one network's clusters onto the reference
// slots, maximizing the profile log-likelihood of the merged block counts:
// a matching scores well exactly when pooling the network's cells with the
// reference cells keeps them pure. Row and column assignments are coupled,
// so the smaller side is enumerated exhaustively (capped at 8!) and the
// larger side solved exactly per candidate; the likelihood weighting makes
// empty or noisy clusters harmless.
struct Matching {
  std::vector<int> row_map, col_map;
  double ll = -std::numeric_limits<double>::infinity();
};

inline std::vector<Matching> match_to_reference_topk(
    const HardClusterStats& st, const Eigen::MatrixXd& ref_e,
    const Eigen::MatrixXd& ref_n, Emission emission, int top_k) {
  const int q1 = static_cast<int>(st.e.rows());
  const int q2 = static_cast<int>(st.e.cols());
  const bool cols_small = q2 <= q1;
  const int q_small = cols_small ? q2 : q1;
  const int q_large = cols_small ? q1 : q2;

  auto large_cost = [&](const std::vector<int>& small_map) {
    // cost(i, g) = -sum_s profile_ll(merged cell (i,s) onto (g, slot))
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(q_large, q_large);
    for (int i = 0; i < q_large; ++i) {
      for (int g = 0; g < q_large; ++g) {
        double acc = 0;
        for (int s = 0; s < q_small; ++s) {
          int slot = small_map[static_cast<std::size_t>(s)];
          double me = cols_small ? st.e(i, s) : st.e(s, i);
          double mn = cols_small ? st.n(i, s) : st.n(s, i);
          double re = cols_small ? ref_e(g, slot) : ref_e(slot, g);
          double rn = cols_small ? ref_n(g, slot) : ref_n(slot, g);
          acc += cell_profile_ll(me + re, mn + rn, emission);
        }
        cost(i, g) = -acc;
      }
    }
    return cost;
  };

  std::vector<Matching> top;
  std::vector<int> perm(static_cast<std::size_t>(q_small));
  std::iota(perm.begin(), perm.end(), 0);
  const bool enumerate = q_small <= 8;
  do {
    Eigen::MatrixXd cost = large_cost(perm);
    std::vector<int> large_map = min_cost_assignment(cost);
    double total = 0;
    for (int i = 0; i < q_large; ++i) {
      total += cost(i, large_map[static_cast<std::size_t>(i)]);
    }
    Matching cand;
    cand.ll = -total;
    cand.row_map = cols_small ? large_map : perm;
    cand.col_map = cols_small ? perm : large_map;
    top.push_back(std::move(cand));
    std::sort(top.begin(), top.end(),
              [](const Matching& a, const Matching& b) { return a.ll > b.ll; });
    if (static_cast<int>(top.size()) > top_k) top.resize(static_cast<std::size_t>(top_k));
  } while (enumerate && std::next_permutation(perm.begin(), perm.end()));
  return top;
}

inline std::pair<std::vector<int>, std::vector<int>> match_to_reference(
    const HardClusterStats& st, const Eigen::MatrixXd& ref_e,
    const Eigen::MatrixXd& ref_n, Emission emission) {
  Matching best = match_to_reference_topk(st, ref_e, ref_n, emission, 1).at(0);
  return {std::move(best.row_map), std::move(best.col_map)};
}

// Relabels network 0's clusters by decreasing marginal connectivity, then
// matches every other network's clusters onto network 0's connectivity
// profiles. Labels from independent per-network clusterings are arbitrary;
// without this step a joint fit starts block-misaligned across networks and
// coordinate ascent cannot swap whole blocks. A network's surplus clusters
// (noise splits of its own blocks) land on leftover global labels, which is
// the sub-support structure the free-support models expect.
// How separable a network's own clusters are: the smallest profile distance
// among sizeable cluster pairs, taken over both sides. A network whose fit
// duplicated one of its roles scores near zero and makes a poor reference;
// tiny clusters are ignored (they act as wildcards during matching).
inline double cluster_distinctness(const HardClusterStats& st) {
  Eigen::MatrixXd alpha = st.alpha();
  auto side_score = [&](bool rows) {
    const Eigen::VectorXd& sizes = rows ? st.size1 : st.size2;
    double n_side = sizes.sum();
    double min_count = std::max(3.0, 0.05 * n_side);
    double best = std::numeric_limits<double>::infinity();
    int q = static_cast<int>(sizes.size());
    for (int a = 0; a < q; ++a) {
      if (sizes(a) < min_count) continue;
      for (int b = a + 1; b < q; ++b) {
        if (sizes(b) < min_count) continue;
        double d = rows ? (alpha.row(a) - alpha.row(b)).squaredNorm()
                        : (alpha.col(a) - alpha.col(b)).squaredNorm();
        best = std::min(best, d);
      }
    }
    return best;
  };
  return std::min(side_score(true), side_score(false));
}

inline void align_clusters(const NetworkCollection& coll,
                           std::vector<Eigen::VectorXi>& za,
                           std::vector<Eigen::VectorXi>& wa, int q1, int q2) {
  const int m_count = coll.size();
  std::vector<HardClusterStats> stats(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    stats[mi] = hard_cluster_stats(coll.networks[mi], za[mi], wa[mi], q1, q2);
  }
  // reference: the network with the most separable clusters
  int ref_net = 0;
  double best_score = -1;
  for (int m = 0; m < m_count; ++m) {
    double s = cluster_distinctness(stats[static_cast<std::size_t>(m)]);
    if (s > best_score) {
      best_score = s;
      ref_net = m;
    }
  }
  std::vector<int> order;
  order.push_back(ref_net);
  for (int m = 0; m < m_count; ++m) {
    if (m != ref_net) order.push_back(m);
  }

  Eigen::MatrixXd ref_e = Eigen::MatrixXd::Zero(q1, q2);
  Eigen::MatrixXd ref_n = Eigen::MatrixXd::Zero(q1, q2);
  bool first = true;
  for (int m : order) {
    std::size_t mi = static_cast<std::size_t>(m);
    const HardClusterStats& st = stats[mi];
    std::vector<int> row_map, col_map;
    if (first) {
      Eigen::MatrixXd alpha = st.alpha();
      row_map = rank_desc(alpha * (st.size2 / std::max(st.size2.sum(), 1.0)));
      col_map = rank_desc(alpha.transpose() * (st.size1 / std::max(st.size1.sum(), 1.0)));
      first = false;
    } else {
      std::tie(row_map, col_map) = match_to_reference(st, ref_e, ref_n, coll.emission);
    }
    for (Eigen::Index i = 0; i < za[mi].size(); ++i) {
      za[mi](i) = row_map[static_cast<std::size_t>(za[mi](i))];
    }
    for (Eigen::Index j = 0; j < wa[mi].size(); ++j) {
      wa[mi](j) = col_map[static_cast<std::size_t>(wa[mi](j))];
    }
    for (int q = 0; q < q1; ++q) {
      for (int r = 0; r < q2; ++r) {
        ref_e(row_map[static_cast<std::size_t>(q)], col_map[static_cast<std::size_t>(r)]) +=
            st.e(q, r);
        ref_n(row_map[static_cast<std::size_t>(q)], col_map[static_cast<std::size_t>(r)]) +=
            st.n(q, r);
      }
    }
  }
}

}  // namespace detail

// Spectral co-clustering initialization. tau rows get 1-(q-1)δ on the
// assigned block and δ elsewhere, δ = 0.1/max(q1,q2); missing dyads are
// imputed at the observed mean for the embedding only. Cluster labels are
// ranked by marginal connectivity per network.
inline VariationalState init_spectral(const NetworkCollection& coll, int q1, int q2,
                                      std::uint64_t seed) {
  if (q1 < 1 || q2 < 1) throw std::invalid_argument("block counts must be >= 1");
  for (const auto& net : coll.networks) {
    if (q1 > net.n1() || q2 > net.n2()) {
      throw std::invalid_argument("network '" + net.name +
                                  "' has fewer nodes than requested blocks");
    }
  }
  const double delta = 0.1 / std::max(q1, q2);
  std::vector<Eigen::VectorXi> za(coll.networks.size()), wa(coll.networks.size());
  for (std::size_t m = 0; m < coll.networks.size(); ++m) {
    const auto& net = coll.networks[m];
    int k = std::max(q1, q2);
    auto emb = detail::spectral_embedding(net, k);
    auto rng1 = make_rng(seed, {kStreamSpectral, static_cast<std::uint64_t>(m), 1});
    auto rng2 = make_rng(seed, {kStreamSpectral, static_cast<std::uint64_t>(m), 2});
    za[m] = detail::kmeans(emb.rows, q1, rng1);
    wa[m] = detail::kmeans(emb.cols, q2, rng2);
  }
  detail::align_clusters(coll, za, wa, q1, q2);
  VariationalState state;
  for (std::size_t m = 0; m < coll.networks.size(); ++m) {
    const auto& net = coll.networks[m];
    Eigen::MatrixXd tau1 = Eigen::MatrixXd::Constant(net.n1(), q1, delta);
    for (Eigen::Index i = 0; i < net.n1(); ++i) {
      tau1(i, za[m](i)) = 1.0 - (q1 - 1) * delta;
    }
    Eigen::MatrixXd tau2 = Eigen::MatrixXd::Constant(net.n2(), q2, delta);
    for (Eigen::Index j = 0; j < net.n2(); ++j) {
      tau2(j, wa[m](j)) = 1.0 - (q2 - 1) * delta;
    }
    state.tau1.push_back(std::move(tau1));
    state.tau2.push_back(std::move(tau2));
  }
  return state;
}

// One E-step pass over every network (fixed parameters). The tau1/tau2 pair
// of each network is iterated to its fixed point.
inline VariationalState e_step(const NetworkCollection& coll, const ModelParams& params,
                               const VariationalState& state, int max_rounds = 50,
                               double tol = 1e-4) {
  auto ctx = detail::EngineContext::build(coll);
  auto lp = detail::log_proportions(params);
  VariationalState out = state;
  for (std::size_t m = 0; m < ctx.nets.size(); ++m) {
    Eigen::MatrixXd f1, f2;
    emission_terms(ctx.emission, params.alpha_for(static_cast<int>(m)), f1, f2);
    Eigen::MatrixXi active = (lp.allowed1.row(m).transpose() * lp.allowed2.row(m))
                                 .unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; })
                                 .cast<int>();
    detail::check_terms_finite(f1, f2, active);
    detail::e_step_network(ctx.nets[m], f1, f2, lp.log_pi.row(m), lp.log_rho.row(m),
                           lp.allowed1.row(m), lp.allowed2.row(m), out.tau1[m],
                           out.tau2[m], max_rounds, tol);
  }
  return out;
}

inline ModelParams m_step(const NetworkCollection& coll, const VariationalState& state,
                          ModelKind kind, const SupportPair& support,
                          std::vector<std::pair<int, int>>* degenerate = nullptr) {
  auto ctx = detail::EngineContext::build(coll);
  std::vector<detail::NetworkMoments> mom;
  for (std::size_t m = 0; m < ctx.nets.size(); ++m) {
    mom.push_back(detail::compute_moments(ctx.nets[m], state.tau1[m], state.tau2[m]));
  }
  return detail::m_step_from_moments(ctx, mom, kind, support, degenerate);
}

// Evidence lower bound E_R[log p(X,Z,W;θ)] + H(R); unobserved dyads are
// omitted from the conditional term.
inline double elbo(const NetworkCollection& coll, const ModelParams& params,
                   const VariationalState& state) {
  auto ctx = detail::EngineContext::build(coll);
  std::vector<detail::NetworkMoments> mom;
  for (std::size_t m = 0; m < ctx.nets.size(); ++m) {
    mom.push_back(detail::compute_moments(ctx.nets[m], state.tau1[m], state.tau2[m]));
  }
  return detail::elbo_from_moments(ctx, params, state, mom);
}

namespace detail {

// Full VEM loop from a given state. Networks are visited in a seed-shuffled
// order and the shared parameters refreshed after each network's VE update
// (mini-batching); the ELBO is checked once per sweep.
inline FitResult vem_run(const EngineContext& ctx, ModelKind kind,
                         const SupportPair& support, VariationalState state,
                         const FitOptions& opts, std::uint64_t run_seed) {
  const int m_count = static_cast<int>(ctx.nets.size());
  apply_support(state, support);
  std::vector<NetworkMoments> mom(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    mom[static_cast<std::size_t>(m)] = compute_moments(
        ctx.nets[static_cast<std::size_t>(m)], state.tau1[static_cast<std::size_t>(m)],
        state.tau2[static_cast<std::size_t>(m)]);
  }
  FitResult res;
  res.support = support;
  res.seed = run_seed;
  ModelParams params =
      m_step_from_moments(ctx, mom, kind, support, &res.degenerate_pairs);
  double prev = elbo_from_moments(ctx, params, state, mom);
  double cur = prev;
  res.elbo_trace.push_back(prev);

  std::vector<int> order(static_cast<std::size_t>(m_count));
  std::iota(order.begin(), order.end(), 0);
  int it = 0;
  for (it = 1; it <= opts.max_iter; ++it) {
    auto rng = make_rng(run_seed, {kStreamSweep, static_cast<std::uint64_t>(it)});
    std::shuffle(order.begin(), order.end(), rng);
    auto lp = log_proportions(params);
    for (int m : order) {
      std::size_t mi = static_cast<std::size_t>(m);
      Eigen::MatrixXd f1, f2;
      emission_terms(ctx.emission, params.alpha_for(m), f1, f2);
      e_step_network(ctx.nets[mi], f1, f2, lp.log_pi.row(m), lp.log_rho.row(m),
                     lp.allowed1.row(m), lp.allowed2.row(m), state.tau1[mi],
                     state.tau2[mi], opts.max_inner, opts.inner_tol);
      mom[mi] = compute_moments(ctx.nets[mi], state.tau1[mi], state.tau2[mi]);
      params = m_step_from_moments(ctx, mom, kind, support, &res.degenerate_pairs);
      lp = log_proportions(params);
    }
    cur = elbo_from_moments(ctx, params, state, mom);
    res.elbo_trace.push_back(cur);
    double denom = std::max(1.0, std::abs(prev));
    if (std::abs(cur - prev) / denom < opts.tol) {
      res.converged = true;
      prev = cur;
      break;
    }
    prev = cur;
  }
  res.params = std::move(params);
  res.state = std::move(state);
  res.elbo = cur;
  res.n_iterations = std::min(it, opts.max_iter);
  return res;
}

// Resamples ceil(frac * n) distinct node assignments per side uniformly over
// the allowed blocks; at least one node always moves, so small instances
// still get genuinely diverse restarts.
inline void perturb_state(VariationalState& state, const SupportPair& support,
                          double frac, std::mt19937_64& rng) {
  for (int m = 0; m < support.M(); ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    auto scramble = [&](Eigen::MatrixXd& tau, const Eigen::MatrixXi& s) {
      std::vector<int> allowed;
      for (Eigen::Index q = 0; q < tau.cols(); ++q) {
        if (s(m, q) != 0) allowed.push_back(static_cast<int>(q));
      }
      double delta = 0.1 / static_cast<double>(tau.cols());
      std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
      const std::size_t n = static_cast<std::size_t>(tau.rows());
      std::size_t count = static_cast<std::size_t>(
          std::ceil(frac * static_cast<double>(n)));
      count = std::min(std::max<std::size_t>(count, 1), n);
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> rest(k, n - 1);
        std::swap(idx[k], idx[rest(rng)]);
        Eigen::Index i = static_cast<Eigen::Index>(idx[k]);
        int target = allowed[pick(rng)];
        for (Eigen::Index q = 0; q < tau.cols(); ++q) {
          tau(i, q) = (s(m, q) != 0) ? delta : 0.0;
        }
        tau(i, target) = 1.0 - delta * (static_cast<double>(allowed.size()) - 1.0);
      }
    };
    scramble(state.tau1[mi], support.s1);
    scramble(state.tau2[mi], support.s2);
  }
}

// Separate-then-align restart: each network is fitted alone to convergence
// (an M=1 iid run from its own spectral start), and the converged hard
// clusterings are profile-matched across networks. Converged profiles are
// far cleaner than raw spectral ones, so this is the most reliable way to
// hand the joint fit a block-aligned start.
inline VariationalState separate_aligned_init(const NetworkCollection& coll, int q1,
                                              int q2, std::uint64_t seed,
                                              const FitOptions& opts) {
  const int m_count = coll.size();
  std::vector<Eigen::VectorXi> za(static_cast<std::size_t>(m_count));
  std::vector<Eigen::VectorXi> wa(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    NetworkCollection single;
    single.emission = coll.emission;
    single.networks.push_back(coll.networks[mi]);
    std::uint64_t ms = seed_stream(seed, {kStreamSepNetwork, static_cast<std::uint64_t>(m)});
    FitOptions sub = opts;
    sub.seed = ms;
    sub.n_init = std::max(3, opts.n_init / 2);
    FitResult best;
    for (int r = 0; r < sub.n_init; ++r) {
      std::uint64_t rsep = seed_stream(ms, {kStreamRestart, static_cast<std::uint64_t>(r)});
      VariationalState st = init_spectral(single, q1, q2, rsep);
      if (r > 0) {
        auto rng = make_rng(rsep, {kStreamPerturb});
        perturb_state(st, SupportPair::all_ones(1, q1, q2), opts.perturb_frac, rng);
      }
      FitResult fr = vem_run(EngineContext::build(single), ModelKind::Iid,
                             SupportPair::all_ones(1, q1, q2), std::move(st), sub, rsep);
      if (r == 0 || fr.elbo > best.elbo) best = std::move(fr);
    }
    auto argmax_rows = [](const Eigen::MatrixXd& tau) {
      Eigen::VectorXi lab(tau.rows());
      for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        Eigen::Index arg = 0;
        tau.row(i).maxCoeff(&arg);
        lab(i) = static_cast<int>(arg);
      }
      return lab;
    };
    za[mi] = argmax_rows(best.state.tau1[0]);
    wa[mi] = argmax_rows(best.state.tau2[0]);
  }
  // Cross-network alignment. The top matchings by hard-cluster likelihood can
  // tie when the connectivity carries repeated values, so a few alignment
  // candidates are polished with short joint runs and the ELBO arbitrates.
  std::vector<HardClusterStats> stats(static_cast<std::size_t>(m_count));
  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    stats[mi] = hard_cluster_stats(coll.networks[mi], za[mi], wa[mi], q1, q2);
  }
  int ref_net = 0;
  double best_score = -1;
  for (int m = 0; m < m_count; ++m) {
    double s = cluster_distinctness(stats[static_cast<std::size_t>(m)]);
    if (s > best_score) {
      best_score = s;
      ref_net = m;
    }
  }
  std::vector<int> order;
  order.push_back(ref_net);
  for (int m = 0; m < m_count; ++m) {
    if (m != ref_net) order.push_back(m);
  }

  const double delta = 0.1 / std::max(q1, q2);
  auto delta_state = [&](const std::vector<Eigen::VectorXi>& z,
                         const std::vector<Eigen::VectorXi>& w) {
    VariationalState state;
    for (int m = 0; m < m_count; ++m) {
      std::size_t mi = static_cast<std::size_t>(m);
      const auto& net = coll.networks[mi];
      Eigen::MatrixXd tau1 = Eigen::MatrixXd::Constant(net.n1(), q1, delta);
      for (Eigen::Index i = 0; i < net.n1(); ++i) {
        tau1(i, z[mi](i)) = 1.0 - (q1 - 1) * delta;
      }
      Eigen::MatrixXd tau2 = Eigen::MatrixXd::Constant(net.n2(), q2, delta);
      for (Eigen::Index j = 0; j < net.n2(); ++j) {
        tau2(j, w[mi](j)) = 1.0 - (q2 - 1) * delta;
      }
      state.tau1.push_back(std::move(tau1));
      state.tau2.push_back(std::move(tau2));
    }
    return state;
  };

  constexpr int kAlignCandidates = 3;
  auto ctx = EngineContext::build(coll);
  SupportPair ones = SupportPair::all_ones(m_count, q1, q2);
  FitOptions probe = opts;
  probe.max_iter = 3;
  VariationalState best_state;
  double best_probe = -std::numeric_limits<double>::infinity();
  for (int cand = 0; cand < kAlignCandidates; ++cand) {
    std::vector<Eigen::VectorXi> zc = za, wc = wa;
    Eigen::MatrixXd ref_e = Eigen::MatrixXd::Zero(q1, q2);
    Eigen::MatrixXd ref_n = Eigen::MatrixXd::Zero(q1, q2);
    bool first = true;
    for (int m : order) {
      std::size_t mi = static_cast<std::size_t>(m);
      const HardClusterStats& st = stats[mi];
      std::vector<int> row_map, col_map;
      if (first) {
        Eigen::MatrixXd alpha = st.alpha();
        row_map = rank_desc(alpha * (st.size2 / std::max(st.size2.sum(), 1.0)));
        col_map =
            rank_desc(alpha.transpose() * (st.size1 / std::max(st.size1.sum(), 1.0)));
        first = false;
      } else {
        auto top = match_to_reference_topk(st, ref_e, ref_n, coll.emission,
                                           kAlignCandidates);
        const Matching& pick =
            top[static_cast<std::size_t>(std::min(cand, static_cast<int>(top.size()) - 1))];
        row_map = pick.row_map;
        col_map = pick.col_map;
      }
      for (Eigen::Index i = 0; i < zc[mi].size(); ++i) {
        zc[mi](i) = row_map[static_cast<std::size_t>(zc[mi](i))];
      }
      for (Eigen::Index j = 0; j < wc[mi].size(); ++j) {
        wc[mi](j) = col_map[static_cast<std::size_t>(wc[mi](j))];
      }
      for (int q = 0; q < q1; ++q) {
        for (int r = 0; r < q2; ++r) {
          ref_e(row_map[static_cast<std::size_t>(q)],
                col_map[static_cast<std::size_t>(r)]) += st.e(q, r);
          ref_n(row_map[static_cast<std::size_t>(q)],
                col_map[static_cast<std::size_t>(r)]) += st.n(q, r);
        }
      }
    }
    FitResult short_run =
        vem_run(ctx, ModelKind::PiRho, ones, delta_state(zc, wc), probe,
                seed_stream(seed, {kStreamPerturb, static_cast<std::uint64_t>(cand)}));
    if (short_run.elbo > best_probe) {
      best_probe = short_run.elbo;
      best_state = std::move(short_run.state);
    }
    if (m_count == 1) break;
  }
  return best_state;
}

// Anchored restart: one network takes its spectral clustering, every other
// network starts flat (uniform with a little jitter). The anchor's first
// M-step structures the shared alpha and the remaining networks' VE updates
// then label their blocks against it, so the collection starts aligned even
// when per-network marginal ranks tie.
inline VariationalState anchored_init(const NetworkCollection& coll, int q1, int q2,
                                      int anchor, std::uint64_t seed) {
  VariationalState spectral = init_spectral(coll, q1, q2, seed);
  auto rng = make_rng(seed, {kStreamPerturb, 77});
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  VariationalState state;
  for (int m = 0; m < coll.size(); ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    if (m == anchor) {
      state.tau1.push_back(spectral.tau1[mi]);
      state.tau2.push_back(spectral.tau2[mi]);
      continue;
    }
    auto flat = [&](Eigen::Index n, int q) {
      Eigen::MatrixXd tau(n, q);
      for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0;
        for (int c = 0; c < q; ++c) {
          tau(i, c) = 1.0 / q + jitter(rng) / q;
          total += tau(i, c);
        }
        tau.row(i) /= total;
      }
      return tau;
    };
    state.tau1.push_back(flat(coll.networks[mi].n1(), q1));
    state.tau2.push_back(flat(coll.networks[mi].n2(), q2));
  }
  return state;
}

}  // namespace detail

inline FitResult vem_run(const NetworkCollection& coll, ModelKind kind,
                         const SupportPair& support, VariationalState init,
                         const FitOptions& opts) {
  auto ctx = detail::EngineContext::build(coll);
  return detail::vem_run(ctx, kind, support, std::move(init), opts, opts.seed);
}

// Fits the model at fixed (q1, q2) and support: n_init spectral restarts
// (the first unperturbed, the rest with 10% of assignments resampled), plus
// any caller-provided warm states; returns the best ELBO.
inline FitResult fit(const NetworkCollection& coll, ModelKind kind, int q1, int q2,
                     const SupportPair& support, const FitOptions& opts,
                     const std::vector<VariationalState>& warm_inits = {}) {
  if (!support.admissible()) throw std::invalid_argument("support is not admissible");
  if (!support.consistent_with(kind)) {
    throw std::invalid_argument("support is inconsistent with model kind " +
                                to_string(kind));
  }
  if (support.q1() != q1 || support.q2() != q2 || support.M() != coll.size()) {
    throw std::invalid_argument("support dimensions do not match");
  }
  auto ctx = detail::EngineContext::build(coll);

  struct Candidate {
    VariationalState state;
    std::uint64_t run_seed;
  };
  // Restart pool: the separate-then-align start first, then the aligned
  // spectral start, then alternating anchored and perturbed-spectral starts.
  std::vector<Candidate> candidates;
  for (int r = 0; r < opts.n_init; ++r) {
    std::uint64_t rs = seed_stream(
        opts.seed, {kStreamRestart, static_cast<std::uint64_t>(q1),
                    static_cast<std::uint64_t>(q2), static_cast<std::uint64_t>(r)});
    VariationalState st;
    if (coll.size() > 1 && r == 0) {
      st = detail::separate_aligned_init(coll, q1, q2, rs, opts);
    } else if (coll.size() > 1 && r >= 2 && r % 2 == 0) {
      st = detail::anchored_init(coll, q1, q2, (r / 2 - 1) % coll.size(), rs);
    } else {
      st = init_spectral(coll, q1, q2, rs);
      if (r > 1) {
        auto rng = make_rng(rs, {kStreamPerturb});
        detail::perturb_state(st, support, opts.perturb_frac, rng);
      }
    }
    candidates.push_back({std::move(st), rs});
  }
  for (std::size_t w = 0; w < warm_inits.size(); ++w) {
    std::uint64_t rs = seed_stream(
        opts.seed, {kStreamRestart, static_cast<std::uint64_t>(q1),
                    static_cast<std::uint64_t>(q2), 1000 + static_cast<std::uint64_t>(w)});
    candidates.push_back({warm_inits[w], rs});
  }

  std::vector<FitResult> results(candidates.size());
  parallel_for(candidates.size(), opts.threads, [&](std::size_t i) {
    results[i] = detail::vem_run(ctx, kind, support, std::move(candidates[i].state),
                                 opts, candidates[i].run_seed);
  });
  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!std::isfinite(results[i].elbo)) continue;
    if (best < 0 || results[i].elbo > results[static_cast<std::size_t>(best)].elbo) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw std::runtime_error("no restart produced a finite ELBO");
  return std::move(results[static_cast<std::size_t>(best)]);
}

// ---------------------------------------------------------------------------
// MAP memberships and the canonical block order
// ---------------------------------------------------------------------------

// Blocks are reported sorted by decreasing marginal connectivity (row blocks
// by Σ_r alpha_qr ρ̄_r, column blocks by Σ_q π̄_q alpha_qr), the display
// convention for nested structures.
struct MapLabels {
  std::vector<Eigen::VectorXi> rows, cols;          // 1-based labels
  std::vector<std::vector<int>> row_order, col_order;  // canonical -> original block
};

inline MapLabels map_memberships(const FitResult& result) {
  const int m_count = result.support.M();
  const int q1 = result.support.q1();
  const int q2 = result.support.q2();
  MapLabels out;

  // pooled membership mass per block
  Eigen::VectorXd mass1 = Eigen::VectorXd::Zero(q1);
  Eigen::VectorXd mass2 = Eigen::VectorXd::Zero(q2);
  double tot1 = 0, tot2 = 0;
  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    mass1 += result.state.tau1[mi].colwise().sum().transpose();
    mass2 += result.state.tau2[mi].colwise().sum().transpose();
    tot1 += static_cast<double>(result.state.tau1[mi].rows());
    tot2 += static_cast<double>(result.state.tau2[mi].rows());
  }
  Eigen::VectorXd pi_bar = mass1 / std::max(tot1, 1.0);
  Eigen::VectorXd rho_bar = mass2 / std::max(tot2, 1.0);

  auto order_desc = [](const Eigen::VectorXd& score) {
    std::vector<int> idx(static_cast<std::size_t>(score.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return score(a) > score(b); });
    return idx;
  };

  const bool per_network_alpha = result.params.alphas.size() > 1;
  std::vector<int> shared_row_order, shared_col_order;
  if (!per_network_alpha) {
    const Eigen::MatrixXd& a = result.params.alpha();
    shared_row_order = order_desc(a * rho_bar);
    shared_col_order = order_desc(a.transpose() * pi_bar);
  }

  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    std::vector<int> rorder, corder;
    if (per_network_alpha) {
      const Eigen::MatrixXd& a = result.params.alpha_for(m);
      Eigen::VectorXd rb = result.state.tau2[mi].colwise().sum().transpose();
      Eigen::VectorXd pb = result.state.tau1[mi].colwise().sum().transpose();
      rb /= std::max(rb.sum(), 1e-300);
      pb /= std::max(pb.sum(), 1e-300);
      rorder = order_desc(a * rb);
      corder = order_desc(a.transpose() * pb);
    } else {
      rorder = shared_row_order;
      corder = shared_col_order;
    }
    auto label = [](const Eigen::MatrixXd& tau, const std::vector<int>& order) {
      Eigen::VectorXi lab(tau.rows());
      for (Eigen::Index i = 0; i < tau.rows(); ++i) {
        int best = 0;
        for (int pos = 1; pos < static_cast<int>(order.size()); ++pos) {
          if (tau(i, order[static_cast<std::size_t>(pos)]) >
              tau(i, order[static_cast<std::size_t>(best)])) {
            best = pos;
          }
        }
        lab(i) = best + 1;
      }
      return lab;
    };
    out.rows.push_back(label(result.state.tau1[mi], rorder));
    out.cols.push_back(label(result.state.tau2[mi], corder));
    out.row_order.push_back(std::move(rorder));
    out.col_order.push_back(std::move(corder));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Identifiability diagnostics (checkable sufficient conditions only)
// ---------------------------------------------------------------------------

struct IdentifiabilityReport {
  struct Condition {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Condition> conditions;

  bool all_pass() const {
    for (const auto& c : conditions) {
      if (!c.pass) return false;
    }
    return true;
  }
};

namespace detail {

inline bool coordinates_distinct(const Eigen::VectorXd& v, double tol = 1e-8) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    for (Eigen::Index j = i + 1; j < v.size(); ++j) {
      if (std::abs(v(i) - v(j)) <= tol) return false;
    }
  }
  return true;
}

inline std::vector<int> positive_indices(const Eigen::RowVectorXd& p) {
  std::vector<int> idx;
  for (Eigen::Index q = 0; q < p.size(); ++q) {
    if (p(q) > 0.0) idx.push_back(static_cast<int>(q));
  }
  return idx;
}

}  // namespace detail

inline IdentifiabilityReport check_identifiability(const ModelParams& params,
                                                   const NetworkCollection& coll) {
  IdentifiabilityReport rep;
  const int m_count = coll.size();
  const int q1 = params.q1();
  const int q2 = params.q2();
  auto add = [&](std::string name, bool pass, std::string detail_msg = "") {
    rep.conditions.push_back({std::move(name), pass, std::move(detail_msg)});
  };

  auto size_ok_some = [&](int need1, int need2) {
    for (const auto& net : coll.networks) {
      if (net.n1() >= need1 && net.n2() >= need2) return true;
    }
    return false;
  };

  switch (params.kind) {
    case ModelKind::Iid: {
      add("size: exists m with n1 >= 2*Q2-1 and n2 >= 2*Q1-1",
          size_ok_some(2 * q2 - 1, 2 * q1 - 1));
      Eigen::VectorXd ar = params.alpha() * params.rho.row(0).transpose();
      add("coordinates of alpha*rho distinct", detail::coordinates_distinct(ar));
      Eigen::VectorXd pa = params.alpha().transpose() * params.pi.row(0).transpose();
      add("coordinates of pi'*alpha distinct", detail::coordinates_distinct(pa));
      break;
    }
    case ModelKind::Pi: {
      bool rows_all = true;
      for (const auto& net : coll.networks) rows_all &= net.n1() >= 2 * q2 - 1;
      bool cols_some = false;
      for (const auto& net : coll.networks) cols_some |= net.n2() >= 2 * q1 - 1;
      add("size: all m have n1 >= 2*Q2-1; exists m with n2 >= 2*Q1-1",
          rows_all && cols_some);
      Eigen::VectorXd ar = params.alpha() * params.rho.row(0).transpose();
      add("coordinates of alpha*rho distinct", detail::coordinates_distinct(ar));
      bool all_pa = true;
      for (int m = 0; m < m_count; ++m) {
        auto qs = detail::positive_indices(params.pi.row(m));
        Eigen::VectorXd v = Eigen::VectorXd::Zero(q2);
        for (int r = 0; r < q2; ++r) {
          for (int q : qs) v(r) += params.pi(m, q) * params.alpha()(q, r);
        }
        all_pa &= detail::coordinates_distinct(v);
      }
      add("coordinates of restricted pi'*alpha distinct for every network", all_pa);
      add("coordinates of rho distinct",
          detail::coordinates_distinct(params.rho.row(0).transpose()));
      break;
    }
    case ModelKind::Rho: {
      bool cols_all = true;
      for (const auto& net : coll.networks) cols_all &= net.n2() >= 2 * q1 - 1;
      bool rows_some = false;
      for (const auto& net : coll.networks) rows_some |= net.n1() >= 2 * q2 - 1;
      add("size: exists m with n1 >= 2*Q2-1; all m have n2 >= 2*Q1-1",
          cols_all && rows_some);
      bool all_ar = true;
      for (int m = 0; m < m_count; ++m) {
        auto rs = detail::positive_indices(params.rho.row(m));
        Eigen::VectorXd v = Eigen::VectorXd::Zero(q1);
        for (int q = 0; q < q1; ++q) {
          for (int r : rs) v(q) += params.alpha()(q, r) * params.rho(m, r);
        }
        all_ar &= detail::coordinates_distinct(v);
      }
      add("coordinates of restricted alpha*rho distinct for every network", all_ar);
      Eigen::VectorXd pa = params.alpha().transpose() * params.pi.row(0).transpose();
      add("coordinates of pi'*alpha distinct", detail::coordinates_distinct(pa));
      add("coordinates of pi distinct",
          detail::coordinates_distinct(params.pi.row(0).transpose()));
      break;
    }
    case ModelKind::PiRho:
    case ModelKind::Sep: {
      bool sizes = true;
      for (int m = 0; m < m_count; ++m) {
        int q1m = static_cast<int>(detail::positive_indices(params.pi.row(m)).size());
        int q2m = static_cast<int>(detail::positive_indices(params.rho.row(m)).size());
        sizes &= coll.networks[static_cast<std::size_t>(m)].n1() >= 2 * q2m - 1;
        sizes &= coll.networks[static_cast<std::size_t>(m)].n2() >= 2 * q1m - 1;
      }
      add("size: every m has n1 >= 2*Q2^m-1 and n2 >= 2*Q1^m-1", sizes);
      bool all_ar = true, all_pa = true;
      for (int m = 0; m < m_count; ++m) {
        auto qs = detail::positive_indices(params.pi.row(m));
        auto rs = detail::positive_indices(params.rho.row(m));
        const Eigen::MatrixXd& a = params.alpha_for(m);
        Eigen::VectorXd ar(qs.size()), pa(rs.size());
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
          double acc = 0;
          for (int r : rs) acc += a(qs[qi], r) * params.rho(m, r);
          ar(static_cast<Eigen::Index>(qi)) = acc;
        }
        for (std::size_t ri = 0; ri < rs.size(); ++ri) {
          double acc = 0;
          for (int q : qs) acc += params.pi(m, q) * a(q, rs[ri]);
          pa(static_cast<Eigen::Index>(ri)) = acc;
        }
        all_ar &= detail::coordinates_distinct(ar);
        all_pa &= detail::coordinates_distinct(pa);
      }
      add("coordinates of restricted alpha*rho distinct for every network", all_ar);
      add("coordinates of restricted pi'*alpha distinct for every network", all_pa);
      if (params.kind == ModelKind::PiRho) {
        Eigen::Map<const Eigen::VectorXd> flat(params.alpha().data(),
                                               params.alpha().size());
        add("all entries of alpha unique", detail::coordinates_distinct(flat));
      }
      break;
    }
  }
  return rep;
}

}  // namespace colbisbm

#endif  // COLBISBM_VEM_HPP
