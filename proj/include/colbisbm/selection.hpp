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

#ifndef COLBISBM_SELECTION_HPP
#define COLBISBM_SELECTION_HPP

// BIC-L model selection: the criterion is max ELBO - penalty/2 (an ICL that
// does not penalize entropy). Block numbers are explored by a greedy
// split/merge walk followed by a moving window around the incumbent, reusing
// fitted memberships as warm starts. For the models with free supports the
// criterion additionally maximizes over admissible support matrices via
// greedy single-cell zeroing ranked by fitted block mass.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/parallel.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/vem.hpp"

namespace colbisbm {

struct Penalty {
  double pen_pi = 0, pen_rho = 0, pen_alpha = 0, pen_s1 = 0, pen_s2 = 0;
  double total() const { return pen_pi + pen_rho + pen_alpha + pen_s1 + pen_s2; }
};

// N_M: number of entries over all bi-adjacency matrices.
inline long long n_max_entries(const NetworkCollection& coll) {
  if (coll.networks.empty()) throw std::invalid_argument("empty collection");
  long long total = 0;
  for (const auto& net : coll.networks) {
    total += static_cast<long long>(net.n1()) * static_cast<long long>(net.n2());
  }
  return total;
}

inline long long count_params(ModelKind kind, int q1, int q2,
                              const SupportPair& support) {
  if (!support.admissible()) throw std::invalid_argument("support is not admissible");
  const int m_count = support.M();
  Eigen::VectorXi q1m = support.q1_per_network();
  Eigen::VectorXi q2m = support.q2_per_network();
  long long active = static_cast<long long>(support.active_pairs().sum());
  switch (kind) {
    case ModelKind::Iid:
      return (q1 - 1) + (q2 - 1) + static_cast<long long>(q1) * q2;
    case ModelKind::Pi: {
      long long np = q2 - 1 + active;
      for (int m = 0; m < m_count; ++m) np += q1m(m) - 1;
      return np;
    }
    case ModelKind::Rho: {
      long long np = q1 - 1 + active;
      for (int m = 0; m < m_count; ++m) np += q2m(m) - 1;
      return np;
    }
    case ModelKind::PiRho: {
      long long np = active;
      for (int m = 0; m < m_count; ++m) np += (q1m(m) - 1) + (q2m(m) - 1);
      return np;
    }
    case ModelKind::Sep: {
      long long np = 0;
      for (int m = 0; m < m_count; ++m) {
        np += (q1m(m) - 1) + (q2m(m) - 1) +
              static_cast<long long>(q1m(m)) * q2m(m);
      }
      return np;
    }
  }
  return 0;
}

namespace detail {

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

inline Penalty penalty(const NetworkCollection& coll, ModelKind kind,
                       const SupportPair& support) {
  Penalty pen;
  const int m_count = coll.size();
  const int q1 = support.q1();
  const int q2 = support.q2();
  double log_nm = std::log(static_cast<double>(n_max_entries(coll)));
  double sum_n1 = 0, sum_n2 = 0;
  for (const auto& net : coll.networks) {
    sum_n1 += static_cast<double>(net.n1());
    sum_n2 += static_cast<double>(net.n2());
  }
  Eigen::VectorXi q1m = support.q1_per_network();
  Eigen::VectorXi q2m = support.q2_per_network();

  auto pen_pi_pooled = [&] { return (q1 - 1) * std::log(sum_n1); };
  auto pen_rho_pooled = [&] { return (q2 - 1) * std::log(sum_n2); };
  auto pen_pi_per_network = [&] {
    double p = 0;
    for (int m = 0; m < m_count; ++m) {
      p += (q1m(m) - 1) *
           std::log(static_cast<double>(coll.networks[static_cast<std::size_t>(m)].n1()));
    }
    return p;
  };
  auto pen_rho_per_network = [&] {
    double p = 0;
    for (int m = 0; m < m_count; ++m) {
      p += (q2m(m) - 1) *
           std::log(static_cast<double>(coll.networks[static_cast<std::size_t>(m)].n2()));
    }
    return p;
  };
  // -2 log p_Q(S): uniform prior on each network's populated block count and
  // on the placement of the populated blocks.
  auto pen_support = [&](const Eigen::VectorXi& qm, int q_tot) {
    double p = m_count * std::log(static_cast<double>(q_tot));
    for (int m = 0; m < m_count; ++m) p += detail::log_binomial(q_tot, qm(m));
    return 2.0 * p;
  };

  switch (kind) {
    case ModelKind::Iid:
      pen.pen_pi = pen_pi_pooled();
      pen.pen_rho = pen_rho_pooled();
      pen.pen_alpha = static_cast<double>(q1) * q2 * log_nm;
      break;
    case ModelKind::Pi:
      pen.pen_pi = pen_pi_per_network();
      pen.pen_rho = pen_rho_pooled();
      pen.pen_alpha = support.active_pairs().sum() * log_nm;
      pen.pen_s1 = pen_support(q1m, q1);
      break;
    case ModelKind::Rho:
      pen.pen_pi = pen_pi_pooled();
      pen.pen_rho = pen_rho_per_network();
      pen.pen_alpha = support.active_pairs().sum() * log_nm;
      pen.pen_s2 = pen_support(q2m, q2);
      break;
    case ModelKind::PiRho:
      pen.pen_pi = pen_pi_per_network();
      pen.pen_rho = pen_rho_per_network();
      pen.pen_alpha = support.active_pairs().sum() * log_nm;
      pen.pen_s1 = pen_support(q1m, q1);
      pen.pen_s2 = pen_support(q2m, q2);
      break;
    case ModelKind::Sep:
      pen.pen_pi = pen_pi_per_network();
      pen.pen_rho = pen_rho_per_network();
      for (int m = 0; m < m_count; ++m) {
        const auto& net = coll.networks[static_cast<std::size_t>(m)];
        pen.pen_alpha += static_cast<double>(q1m(m)) * q2m(m) *
                         std::log(static_cast<double>(net.n1()) *
                                  static_cast<double>(net.n2()));
      }
      break;
  }
  return pen;
}

inline double bicl(const NetworkCollection& coll, const FitResult& fit_result) {
  Penalty pen = penalty(coll, fit_result.params.kind, fit_result.support);
  return fit_result.elbo - 0.5 * pen.total();
}

struct SelectOptions {
  FitOptions fit;
  int max_ge = 10;  // greedy exploration steps
  int max_mw = 3;   // moving-window passes
  int depth = 1;    // window half-width
  int max_q1 = 10, max_q2 = 10;
  bool support_search = true;
  unsigned threads = 1;  // parallel candidate fits within a step
};

namespace detail {

struct QKey {
  int q1, q2;
  bool operator<(const QKey& o) const {
    return q1 != o.q1 ? q1 < o.q1 : q2 < o.q2;
  }
  bool operator==(const QKey& o) const { return q1 == o.q1 && q2 == o.q2; }
};

// true if a is a strictly better selection than b (BIC-L, then parsimony)
inline bool better_point(double bicl_a, QKey a, double bicl_b, QKey b) {
  if (bicl_a != bicl_b) return bicl_a > bicl_b;
  if (a.q1 + a.q2 != b.q1 + b.q2) return a.q1 + a.q2 < b.q1 + b.q2;
  return a.q1 < b.q1;
}

// Split warm start: bisect the tau mass of the largest-entropy block on one
// side, moving a random 70/30 share of each node's mass to the new block.
inline VariationalState split_state(const FitResult& src, bool rows,
                                    std::uint64_t seed) {
  VariationalState st = src.state;
  auto& taus = rows ? st.tau1 : st.tau2;
  const int q = static_cast<int>(taus[0].cols());
  Eigen::VectorXd ent = Eigen::VectorXd::Zero(q);
  for (const auto& tau : taus) {
    for (int c = 0; c < q; ++c) {
      ent(c) -= (tau.col(c).array() > 0)
                    .select(tau.col(c).array() * tau.col(c).array().max(1e-300).log(), 0.0)
                    .sum();
    }
  }
  int target = 0;
  ent.maxCoeff(&target);
  auto rng = make_rng(seed, {kStreamSplit, static_cast<std::uint64_t>(rows ? 1 : 2)});
  std::uniform_int_distribution<int> coin(0, 1);
  for (auto& tau : taus) {
    Eigen::MatrixXd wide(tau.rows(), q + 1);
    wide.leftCols(q) = tau;
    wide.col(q).setZero();
    for (Eigen::Index i = 0; i < tau.rows(); ++i) {
      double share = coin(rng) ? 0.7 : 0.3;
      wide(i, q) = share * wide(i, target);
      wide(i, target) *= (1.0 - share);
    }
    tau = std::move(wide);
  }
  return st;
}

inline VariationalState merge_pair(const FitResult& src, bool rows, int keep,
                                   int drop) {
  VariationalState st = src.state;
  auto& taus = rows ? st.tau1 : st.tau2;
  const int q = static_cast<int>(taus[0].cols());
  for (auto& tau : taus) {
    Eigen::MatrixXd narrow(tau.rows(), q - 1);
    int out = 0;
    for (int c = 0; c < q; ++c) {
      if (c == drop) continue;
      narrow.col(out) = tau.col(c);
      if (c == keep) narrow.col(out) += tau.col(drop);
      ++out;
    }
    tau = std::move(narrow);
  }
  return st;
}

// Merge warm starts: pairs ranked by the distance between their connectivity
// profiles, compared only over block pairs the support makes active for both
// (inactive alpha entries are placeholders). Two blocks that never co-occur
// are the strongest merge candidates: they are one role duplicated across
// disjoint network subsets.
inline std::vector<VariationalState> merge_states(const FitResult& src, bool rows,
                                                  int max_candidates) {
  const Eigen::MatrixXd& alpha = src.params.alpha_for(0);
  Eigen::MatrixXi active = src.support.active_pairs();
  const int q = rows ? static_cast<int>(alpha.rows()) : static_cast<int>(alpha.cols());
  const int other = rows ? static_cast<int>(alpha.cols()) : static_cast<int>(alpha.rows());
  struct Pair {
    int a, b;
    double dist;
  };
  std::vector<Pair> pairs;
  for (int a = 0; a < q; ++a) {
    for (int b = a + 1; b < q; ++b) {
      double acc = 0;
      int common = 0;
      for (int r = 0; r < other; ++r) {
        bool act_a = rows ? active(a, r) != 0 : active(r, a) != 0;
        bool act_b = rows ? active(b, r) != 0 : active(r, b) != 0;
        if (!act_a || !act_b) continue;
        double da = rows ? alpha(a, r) - alpha(b, r) : alpha(r, a) - alpha(r, b);
        acc += da * da;
        ++common;
      }
      pairs.push_back({a, b, common > 0 ? acc / common : -1.0});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<VariationalState> out;
  for (std::size_t i = 0; i < pairs.size() && static_cast<int>(i) < max_candidates; ++i) {
    out.push_back(merge_pair(src, rows, pairs[i].a, pairs[i].b));
  }
  return out;
}

inline SupportPair pad_support(const SupportPair& s, int dq1, int dq2) {
  SupportPair out;
  out.s1 = Eigen::MatrixXi::Ones(s.M(), s.q1() + dq1);
  out.s2 = Eigen::MatrixXi::Ones(s.M(), s.q2() + dq2);
  return out;
}

}  // namespace detail

// Greedy support search for the free-support models. Starts from the
// all-ones support (or a caller-provided base fit) and repeatedly zeroes the
// admissible cell with the smallest fitted block mass whose removal improves
// BIC-L, refitting warm from the incumbent.
inline std::pair<SupportPair, FitResult> search_support(
    const NetworkCollection& coll, ModelKind kind, int q1, int q2,
    const SelectOptions& opts, const FitResult* base_fit = nullptr) {
  if (kind != ModelKind::Pi && kind != ModelKind::Rho && kind != ModelKind::PiRho) {
    throw std::invalid_argument("support search applies to pi/rho/pirho models only");
  }
  const int m_count = coll.size();
  FitResult best;
  if (base_fit != nullptr) {
    best = *base_fit;
  } else {
    best = fit(coll, kind, q1, q2, SupportPair::all_ones(m_count, q1, q2), opts.fit);
  }
  best.bicl = bicl(coll, best);

  const bool search_rows = (kind == ModelKind::Pi || kind == ModelKind::PiRho);
  const bool search_cols = (kind == ModelKind::Rho || kind == ModelKind::PiRho);

  for (;;) {
    struct Candidate {
      int side, m, block;
      double mass;
    };
    std::vector<Candidate> cands;
    auto gather = [&](int side, const Eigen::MatrixXi& s) {
      for (int m = 0; m < m_count; ++m) {
        std::size_t mi = static_cast<std::size_t>(m);
        const Eigen::MatrixXd& tau =
            side == 1 ? best.state.tau1[mi] : best.state.tau2[mi];
        for (int b = 0; b < s.cols(); ++b) {
          if (s(m, b) == 0) continue;
          if (s.row(m).sum() <= 1) continue;     // network must keep a block
          if (s.col(b).sum() <= 1) continue;     // block must stay populated somewhere
          cands.push_back({side, m, b, tau.col(b).sum()});
        }
      }
    };
    if (search_rows) gather(1, best.support.s1);
    if (search_cols) gather(2, best.support.s2);
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.mass != b.mass) return a.mass < b.mass;
      if (a.side != b.side) return a.side < b.side;
      if (a.m != b.m) return a.m < b.m;
      return a.block < b.block;
    });

    bool improved = false;
    for (const auto& cand : cands) {
      SupportPair trial = best.support;
      (cand.side == 1 ? trial.s1 : trial.s2)(cand.m, cand.block) = 0;
      VariationalState warm = best.state;
      FitResult refit = vem_run(coll, kind, trial, std::move(warm), opts.fit);
      refit.bicl = bicl(coll, refit);
      if (refit.bicl > best.bicl) {
        best = std::move(refit);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {best.support, best};
}

struct SelectionResult {
  FitResult best;  // bicl filled
  std::map<std::pair<int, int>, double> grid;
  std::map<std::pair<int, int>, FitResult> fits;
  std::pair<int, int> chosen_q{1, 1};
  SupportPair chosen_support;
  ModelKind kind = ModelKind::Iid;
  std::vector<SelectionResult> sep_parts;  // per-network selections for Sep
};

namespace detail {

inline bool support_searchable(const NetworkCollection& coll, ModelKind kind, int q1,
                               int q2, const SelectOptions& opts) {
  if (!opts.support_search || coll.size() < 2) return false;
  return (kind == ModelKind::Pi && q1 > 1) || (kind == ModelKind::Rho && q2 > 1) ||
         (kind == ModelKind::PiRho && (q1 > 1 || q2 > 1));
}

inline FitResult fit_grid_point(const NetworkCollection& coll, ModelKind kind, int q1,
                                int q2, const SelectOptions& opts,
                                const std::vector<VariationalState>& warms) {
  SupportPair ones = SupportPair::all_ones(coll.size(), q1, q2);
  FitResult base = fit(coll, kind, q1, q2, ones, opts.fit, warms);
  base.bicl = bicl(coll, base);
  if (support_searchable(coll, kind, q1, q2, opts)) {
    auto [support, best] = search_support(coll, kind, q1, q2, opts, &base);
    (void)support;
    return best;
  }
  return base;
}

// Warm-only refinement of an already fitted grid point: rerun from the given
// state (all-ones support) and redo the support search if that applies.
inline FitResult refine_grid_point(const NetworkCollection& coll, ModelKind kind,
                                   int q1, int q2, const SelectOptions& opts,
                                   const VariationalState& warm) {
  SupportPair ones = SupportPair::all_ones(coll.size(), q1, q2);
  FitResult refit = vem_run(coll, kind, ones, warm, opts.fit);
  refit.bicl = bicl(coll, refit);
  if (support_searchable(coll, kind, q1, q2, opts)) {
    auto [support, best] = search_support(coll, kind, q1, q2, opts, &refit);
    (void)support;
    return best;
  }
  return refit;
}

}  // namespace detail

inline SelectionResult select_blocks(const NetworkCollection& coll, ModelKind kind,
                                     const SelectOptions& opts);

namespace detail {

// Sep: one independent selection per network (an M=1 iid model is a plain
// biSBM), stitched into a padded FitResult so downstream scoring is uniform.
inline SelectionResult select_blocks_sep(const NetworkCollection& coll,
                                         const SelectOptions& opts) {
  const int m_count = coll.size();
  SelectionResult out;
  out.kind = ModelKind::Sep;
  int q1_max = 1, q2_max = 1;
  for (int m = 0; m < m_count; ++m) {
    NetworkCollection single;
    single.emission = coll.emission;
    single.networks.push_back(coll.networks[static_cast<std::size_t>(m)]);
    SelectOptions sub = opts;
    sub.fit.seed =
        seed_stream(opts.fit.seed, {kStreamSepNetwork, static_cast<std::uint64_t>(m)});
    out.sep_parts.push_back(select_blocks(single, ModelKind::Iid, sub));
    q1_max = std::max(q1_max, out.sep_parts.back().chosen_q.first);
    q2_max = std::max(q2_max, out.sep_parts.back().chosen_q.second);
  }

  FitResult stitched;
  stitched.params.kind = ModelKind::Sep;
  stitched.params.emission = coll.emission;
  stitched.params.pi = Eigen::MatrixXd::Zero(m_count, q1_max);
  stitched.params.rho = Eigen::MatrixXd::Zero(m_count, q2_max);
  stitched.support.s1 = Eigen::MatrixXi::Zero(m_count, q1_max);
  stitched.support.s2 = Eigen::MatrixXi::Zero(m_count, q2_max);
  stitched.elbo = 0;
  stitched.converged = true;
  stitched.seed = opts.fit.seed;
  const double neutral = coll.emission == Emission::Bernoulli ? 0.5 : 1.0;
  for (int m = 0; m < m_count; ++m) {
    const auto& part = out.sep_parts[static_cast<std::size_t>(m)].best;
    int pq1 = part.params.q1();
    int pq2 = part.params.q2();
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Constant(q1_max, q2_max, neutral);
    alpha.topLeftCorner(pq1, pq2) = part.params.alpha();
    stitched.params.alphas.push_back(std::move(alpha));
    stitched.params.pi.row(m).head(pq1) = part.params.pi.row(0);
    stitched.params.rho.row(m).head(pq2) = part.params.rho.row(0);
    stitched.support.s1.row(m).head(pq1).setOnes();
    stitched.support.s2.row(m).head(pq2).setOnes();
    Eigen::MatrixXd t1 =
        Eigen::MatrixXd::Zero(part.state.tau1[0].rows(), q1_max);
    t1.leftCols(pq1) = part.state.tau1[0];
    Eigen::MatrixXd t2 =
        Eigen::MatrixXd::Zero(part.state.tau2[0].rows(), q2_max);
    t2.leftCols(pq2) = part.state.tau2[0];
    stitched.state.tau1.push_back(std::move(t1));
    stitched.state.tau2.push_back(std::move(t2));
    stitched.elbo += part.elbo;
    stitched.converged = stitched.converged && part.converged;
    stitched.n_iterations = std::max(stitched.n_iterations, part.n_iterations);
  }
  stitched.bicl = bicl(coll, stitched);
  out.best = std::move(stitched);
  out.chosen_q = {q1_max, q2_max};
  out.chosen_support = out.best.support;
  out.grid[{q1_max, q2_max}] = out.best.bicl;
  return out;
}

}  // namespace detail

// Algorithm-1 style block-number selection: greedy split/merge exploration
// from the (1,2) and (2,1) seeds, then moving-window passes around the
// incumbent; every candidate is warm-started from its fitted neighbor and
// the argmax BIC-L over everything fitted is returned.
inline SelectionResult select_blocks(const NetworkCollection& coll, ModelKind kind,
                                     const SelectOptions& opts) {
  if (kind == ModelKind::Sep) return detail::select_blocks_sep(coll, opts);

  int q1_cap = opts.max_q1, q2_cap = opts.max_q2;
  for (const auto& net : coll.networks) {
    q1_cap = std::min(q1_cap, static_cast<int>(net.n1()));
    q2_cap = std::min(q2_cap, static_cast<int>(net.n2()));
  }
  auto legal = [&](detail::QKey q) {
    return q.q1 >= 1 && q.q2 >= 1 && q.q1 <= q1_cap && q.q2 <= q2_cap;
  };

  std::map<detail::QKey, FitResult> grid;
  auto bicl_at = [&](detail::QKey q) { return grid.at(q).bicl; };
  auto argmax_key = [&] {
    detail::QKey best{0, 0};
    bool first = true;
    for (const auto& [key, fr] : grid) {
      if (first || detail::better_point(fr.bicl, key, bicl_at(best), best)) {
        best = key;
        first = false;
      }
    }
    return best;
  };
  auto warm_from = [&](detail::QKey src, detail::QKey dst)
      -> std::vector<VariationalState> {
    auto it = grid.find(src);
    if (it == grid.end()) return {};
    const FitResult& f = it->second;
    if (dst.q1 == src.q1 + 1 && dst.q2 == src.q2) {
      return {detail::split_state(f, true, opts.fit.seed)};
    }
    if (dst.q1 == src.q1 && dst.q2 == src.q2 + 1) {
      return {detail::split_state(f, false, opts.fit.seed)};
    }
    if (dst.q1 == src.q1 - 1 && dst.q2 == src.q2 && src.q1 >= 2) {
      return detail::merge_states(f, true, 2);
    }
    if (dst.q1 == src.q1 && dst.q2 == src.q2 - 1 && src.q2 >= 2) {
      return detail::merge_states(f, false, 2);
    }
    return {};
  };
  // Fits an unvisited point (spectral restarts plus the warm move), or
  // refines a visited one with the warm move when the source fit scores
  // higher; cross-Q warm moves are how a well-fitted neighbor repairs a
  // point stuck in a block-misaligned optimum.
  auto visit = [&](detail::QKey dst, std::optional<detail::QKey> src) {
    if (!legal(dst)) return;
    std::vector<VariationalState> warms;
    if (src) warms = warm_from(*src, dst);
    auto it = grid.find(dst);
    if (it == grid.end()) {
      grid.emplace(dst, detail::fit_grid_point(coll, kind, dst.q1, dst.q2, opts, warms));
      return;
    }
    if (warms.empty() || grid.at(*src).bicl <= it->second.bicl) return;
    for (const auto& warm : warms) {
      FitResult refined =
          detail::refine_grid_point(coll, kind, dst.q1, dst.q2, opts, warm);
      if (refined.bicl > it->second.bicl) it->second = std::move(refined);
    }
  };

  // seeds
  for (detail::QKey seed : {detail::QKey{1, 2}, detail::QKey{2, 1}}) {
    visit(seed, std::nullopt);
  }
  if (grid.empty()) visit({1, 1}, std::nullopt);
  if (grid.empty()) throw std::runtime_error("no legal block configuration to fit");

  // greedy exploration
  for (detail::QKey start : {detail::QKey{1, 2}, detail::QKey{2, 1}}) {
    if (!grid.count(start)) continue;
    detail::QKey current = start;
    for (int step = 0; step <= opts.max_ge; ++step) {
      std::vector<detail::QKey> moves = {{current.q1 + 1, current.q2},
                                         {current.q1, current.q2 + 1},
                                         {current.q1 - 1, current.q2},
                                         {current.q1, current.q2 - 1}};
      for (auto mv : moves) visit(mv, current);
      detail::QKey best = argmax_key();
      if (best == current ||
          !detail::better_point(bicl_at(best), best, bicl_at(current), current)) {
        break;
      }
      current = best;
    }
  }

  // moving window around the incumbent
  detail::QKey center = argmax_key();
  double best_score = bicl_at(center);
  for (int pass = 0; pass <= opts.max_mw; ++pass) {
    std::vector<detail::QKey> window;
    for (int a = center.q1 - opts.depth; a <= center.q1 + opts.depth; ++a) {
      for (int b = center.q2 - opts.depth; b <= center.q2 + opts.depth; ++b) {
        if (legal({a, b})) window.push_back({a, b});
      }
    }
    for (auto p : window) {  // forward pass: splits
      if (!grid.count(p)) continue;
      visit({p.q1 + 1, p.q2}, p);
      visit({p.q1, p.q2 + 1}, p);
    }
    for (auto it = window.rbegin(); it != window.rend(); ++it) {  // backward: merges
      detail::QKey p = *it;
      if (!grid.count(p)) continue;
      visit({p.q1 - 1, p.q2}, p);
      visit({p.q1, p.q2 - 1}, p);
    }
    detail::QKey next = argmax_key();
    if (bicl_at(next) > best_score) {
      best_score = bicl_at(next);
      center = next;
    } else {
      break;
    }
  }

  detail::QKey chosen = argmax_key();
  SelectionResult out;
  out.kind = kind;
  out.best = grid.at(chosen);
  out.chosen_q = {chosen.q1, chosen.q2};
  out.chosen_support = out.best.support;
  for (const auto& [key, fr] : grid) {
    out.grid[{key.q1, key.q2}] = fr.bicl;
    out.fits.emplace(std::make_pair(key.q1, key.q2), fr);
  }
  return out;
}

// Ranks model kinds by their selected BIC-L; Sep is always appended as the
// reference. The collection is declared to share a structure when some
// col model beats the separate fits.
struct StructureComparison {
  struct Row {
    ModelKind kind;
    double bicl;
  };
  std::vector<Row> table;  // sorted by decreasing BIC-L
  bool shared_structure = false;
  std::map<ModelKind, SelectionResult> results;
};

inline StructureComparison compare_structure(const NetworkCollection& coll,
                                             std::vector<ModelKind> kinds,
                                             const SelectOptions& opts) {
  if (kinds.empty()) throw std::invalid_argument("no model kinds given");
  bool has_sep = false;
  for (auto k : kinds) has_sep |= (k == ModelKind::Sep);
  if (!has_sep) kinds.push_back(ModelKind::Sep);

  StructureComparison cmp;
  for (ModelKind kind : kinds) {
    if (cmp.results.count(kind)) continue;
    cmp.results.emplace(kind, select_blocks(coll, kind, opts));
  }
  double sep_score = cmp.results.at(ModelKind::Sep).best.bicl;
  double best_col = -std::numeric_limits<double>::infinity();
  for (const auto& [kind, sel] : cmp.results) {
    cmp.table.push_back({kind, sel.best.bicl});
    if (kind != ModelKind::Sep) best_col = std::max(best_col, sel.best.bicl);
  }
  std::stable_sort(cmp.table.begin(), cmp.table.end(),
                   [](const auto& a, const auto& b) { return a.bicl > b.bicl; });
  cmp.shared_structure = best_col > sep_score;
  return cmp;
}

}  // namespace colbisbm

#endif  // COLBISBM_SELECTION_HPP
