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

#ifndef COLBISBM_PARTITION_HPP
#define COLBISBM_PARTITION_HPP

// Partitioning a collection into sub-collections with shared mesoscale
// structure. A partition G is scored by Sc(G) = Σ_g max BIC-L of the
// sub-collection g; splits come from average-linkage clustering of a
// parameter-based dissimilarity between networks and are accepted only when
// the score strictly improves.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/selection.hpp"
#include "colbisbm/vem.hpp"

namespace colbisbm {

inline constexpr double kScoreSlack = 1e-6;

// Pairwise dissimilarity between networks under a joint fit:
//   D(m,m') = Σ_qr max(π̃_q^m, π̃_q^m') (α̃_qr^m − α̃_qr^m')² max(ρ̃_r^m, ρ̃_r^m')
// with per-network empirical parameters computed from tau over observed
// dyads; an empty block pair gets α̃ = 0.
inline Eigen::MatrixXd dissimilarity(const NetworkCollection& coll,
                                     const FitResult& fit_result) {
  const int m_count = coll.size();
  const int q1 = fit_result.support.q1();
  const int q2 = fit_result.support.q2();
  std::vector<Eigen::MatrixXd> alpha_t(static_cast<std::size_t>(m_count));
  Eigen::MatrixXd pi_t(m_count, q1), rho_t(m_count, q2);
  for (int m = 0; m < m_count; ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    const auto& net = coll.networks[mi];
    const Eigen::MatrixXd& tau1 = fit_result.state.tau1[mi];
    const Eigen::MatrixXd& tau2 = fit_result.state.tau2[mi];
    Eigen::MatrixXd x = net.values.array() * net.observed.array();
    Eigen::MatrixXd e = tau1.transpose() * (x * tau2);
    Eigen::MatrixXd n = tau1.transpose() * (net.observed * tau2);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(q1, q2);
    for (int q = 0; q < q1; ++q) {
      for (int r = 0; r < q2; ++r) {
        if (n(q, r) > 0) a(q, r) = e(q, r) / n(q, r);
      }
    }
    alpha_t[mi] = std::move(a);
    pi_t.row(m) = tau1.colwise().sum() / static_cast<double>(net.n1());
    rho_t.row(m) = tau2.colwise().sum() / static_cast<double>(net.n2());
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m_count, m_count);
  for (int m = 0; m < m_count; ++m) {
    for (int mp = m + 1; mp < m_count; ++mp) {
      double acc = 0;
      for (int q = 0; q < q1; ++q) {
        for (int r = 0; r < q2; ++r) {
          double da = alpha_t[static_cast<std::size_t>(m)](q, r) -
                      alpha_t[static_cast<std::size_t>(mp)](q, r);
          acc += std::max(pi_t(m, q), pi_t(mp, q)) * da * da *
                 std::max(rho_t(m, r), rho_t(mp, r));
        }
      }
      d(m, mp) = acc;
      d(mp, m) = acc;
    }
  }
  return d;
}

namespace detail {

// Average-linkage agglomeration down to two clusters; returns 0/1 labels.
inline std::vector<int> average_linkage_cut2(const Eigen::MatrixXd& d) {
  const int n = static_cast<int>(d.rows());
  if (n < 2) throw std::invalid_argument("cannot split fewer than two items");
  std::vector<std::vector<int>> clusters(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) clusters[static_cast<std::size_t>(i)] = {i};
  auto linkage = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double s = 0;
    for (int i : a) {
      for (int j : b) s += d(i, j);
    }
    return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  while (clusters.size() > 2) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double l = linkage(clusters[i], clusters[j]);
        if (l < best) {
          best = l;
          bi = i;
          bj = j;
        }
      }
    }
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  for (int i : clusters[1]) labels[static_cast<std::size_t>(i)] = 1;
  return labels;
}

inline NetworkCollection subcollection(const NetworkCollection& coll,
                                       const std::vector<int>& group) {
  NetworkCollection sub;
  sub.emission = coll.emission;
  for (int m : group) sub.networks.push_back(coll.networks.at(static_cast<std::size_t>(m)));
  return sub;
}

inline std::uint64_t group_tag(const std::vector<int>& group) {
  std::uint64_t h = 0x51ed270b0f4a92c5ULL;
  for (int m : group) h = mix64(h ^ static_cast<std::uint64_t>(m + 1));
  return h;
}

inline SelectOptions group_options(const SelectOptions& opts,
                                   const std::vector<int>& group) {
  SelectOptions sub = opts;
  sub.fit.seed = seed_stream(opts.fit.seed, {kStreamGroup, group_tag(group)});
  return sub;
}

}  // namespace detail

// Splits one group in two: joint fit, dissimilarity, average-linkage cut.
inline std::pair<std::vector<int>, std::vector<int>> split_once(
    const NetworkCollection& coll, const std::vector<int>& group, ModelKind kind,
    const SelectOptions& opts) {
  if (group.size() < 2) throw std::invalid_argument("cannot split a singleton group");
  NetworkCollection sub = detail::subcollection(coll, group);
  SelectionResult sel = select_blocks(sub, kind, detail::group_options(opts, group));
  Eigen::MatrixXd d = dissimilarity(sub, sel.best);
  std::vector<int> labels = detail::average_linkage_cut2(d);
  std::vector<int> a, b;
  for (std::size_t i = 0; i < group.size(); ++i) {
    (labels[i] == 0 ? a : b).push_back(group[i]);
  }
  return {a, b};
}

struct CollectionPartition {
  std::vector<std::vector<int>> groups;
  std::vector<SelectionResult> group_results;
  double score = 0;
  std::vector<double> trajectory;  // score after each accepted refinement
  std::size_t n_partitions_scored = 0;  // exhaustive search only
};

// Recursive splitting from the trivial partition; a split sticks only when
// the summed sub-collection BIC-L strictly improves on the group's score.
inline CollectionPartition recursive_partition(const NetworkCollection& coll,
                                               ModelKind kind,
                                               const SelectOptions& opts) {
  struct Pending {
    std::vector<int> group;
    SelectionResult sel;
  };
  auto score_group = [&](const std::vector<int>& group) {
    NetworkCollection sub = detail::subcollection(coll, group);
    return select_blocks(sub, kind, detail::group_options(opts, group));
  };

  std::vector<int> all(static_cast<std::size_t>(coll.size()));
  std::iota(all.begin(), all.end(), 0);
  CollectionPartition out;
  std::vector<Pending> todo;
  todo.push_back({all, score_group(all)});
  out.trajectory.push_back(todo[0].sel.best.bicl);

  double current_score = todo[0].sel.best.bicl;
  while (!todo.empty()) {
    Pending cur = std::move(todo.back());
    todo.pop_back();
    if (cur.group.size() >= 2) {
      NetworkCollection sub = detail::subcollection(coll, cur.group);
      Eigen::MatrixXd d = dissimilarity(sub, cur.sel.best);
      std::vector<int> labels = detail::average_linkage_cut2(d);
      std::vector<int> ga, gb;
      for (std::size_t i = 0; i < cur.group.size(); ++i) {
        (labels[i] == 0 ? ga : gb).push_back(cur.group[i]);
      }
      if (!ga.empty() && !gb.empty()) {
        SelectionResult sa = score_group(ga);
        SelectionResult sb = score_group(gb);
        if (sa.best.bicl + sb.best.bicl > cur.sel.best.bicl + kScoreSlack) {
          current_score += sa.best.bicl + sb.best.bicl - cur.sel.best.bicl;
          out.trajectory.push_back(current_score);
          todo.push_back({std::move(ga), std::move(sa)});
          todo.push_back({std::move(gb), std::move(sb)});
          continue;
        }
      }
    }
    out.groups.push_back(std::move(cur.group));
    out.group_results.push_back(std::move(cur.sel));
  }
  out.score = 0;
  for (const auto& r : out.group_results) out.score += r.best.bicl;
  return out;
}

namespace detail {

// Enumerates all set partitions of {0..n-1} via restricted growth strings.
inline void enumerate_partitions(int n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> rgs(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int max_used) {
    if (i == n) {
      visit(rgs);
      return;
    }
    for (int g = 0; g <= max_used + 1; ++g) {
      rgs[static_cast<std::size_t>(i)] = g;
      rec(i + 1, std::max(max_used, g));
    }
  };
  rec(0, -1);
}

}  // namespace detail

// Scores every set partition (Bell-number many; guarded at M <= 8). Group
// scores are memoized by subset, so at most 2^M - 1 selections run.
inline CollectionPartition exhaustive_partition(const NetworkCollection& coll,
                                                ModelKind kind,
                                                const SelectOptions& opts) {
  const int m_count = coll.size();
  if (m_count > 8) {
    throw std::invalid_argument("exhaustive partition limited to M <= 8 networks");
  }
  std::map<std::uint32_t, SelectionResult> cache;
  auto score_subset = [&](std::uint32_t mask) -> const SelectionResult& {
    auto it = cache.find(mask);
    if (it != cache.end()) return it->second;
    std::vector<int> group;
    for (int m = 0; m < m_count; ++m) {
      if (mask & (1u << m)) group.push_back(m);
    }
    NetworkCollection sub = detail::subcollection(coll, group);
    auto sel = select_blocks(sub, kind, detail::group_options(opts, group));
    return cache.emplace(mask, std::move(sel)).first->second;
  };

  CollectionPartition best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  detail::enumerate_partitions(m_count, [&](const std::vector<int>& rgs) {
    ++count;
    int n_groups = *std::max_element(rgs.begin(), rgs.end()) + 1;
    std::vector<std::uint32_t> masks(static_cast<std::size_t>(n_groups), 0);
    for (int m = 0; m < m_count; ++m) {
      masks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(m)])] |= (1u << m);
    }
    double score = 0;
    for (auto mask : masks) score += score_subset(mask).best.bicl;
    if (score > best_score) {
      best_score = score;
      best.groups.clear();
      best.group_results.clear();
      for (auto mask : masks) {
        std::vector<int> group;
        for (int m = 0; m < m_count; ++m) {
          if (mask & (1u << m)) group.push_back(m);
        }
        best.groups.push_back(std::move(group));
        best.group_results.push_back(score_subset(mask));
      }
      best.score = score;
    }
  });
  best.n_partitions_scored = count;
  best.trajectory = {best.score};
  return best;
}

}  // namespace colbisbm

#endif  // COLBISBM_PARTITION_HPP
