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

#ifndef COLBISBM_SIMULATE_HPP
#define COLBISBM_SIMULATE_HPP

// Synthetic-collection generators for the benchmark designs, plus the
// adjusted Rand index and its pooled across-network variant.

#include <Eigen/Core>
#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/rng.hpp"
#include "colbisbm/vem.hpp"

namespace colbisbm {

enum class AlphaPattern {
  EpsGrid4,        // 0.25 + eps * structured 4x4 pattern
  PiRhoFixed3,     // fixed 3x3 matrix of the proportion-variation design
  Modular,         // community structure
  Nested,          // generalist/specialist structure
  Assortative,     // 0.3 + eps * assortative 3x3
  Disassortative,  // 0.3 + eps * disassortative 3x3
  CorePeriphery,   // 0.3 + eps * layered core-periphery 3x3
};

inline Eigen::MatrixXd build_alpha(AlphaPattern pattern, double epsilon = 0.0) {
  Eigen::MatrixXd a;
  switch (pattern) {
    case AlphaPattern::EpsGrid4: {
      Eigen::MatrixXd p(4, 4);
      p << 3, 2, 1, -1,
           2, 2, -1, 1,
           1, -1, 1, 2,
          -1, 1, 2, 0;
      a = 0.25 + (epsilon * p.array());
      break;
    }
    case AlphaPattern::PiRhoFixed3: {
      a.resize(3, 3);
      a << 0.73, 0.57, 0.41,
           0.57, 0.57, 0.09,
           0.41, 0.09, 0.41;
      break;
    }
    case AlphaPattern::Modular: {
      a.resize(3, 3);
      a << 0.9, 0.05, 0.05,
           0.05, 0.2, 0.05,
           0.05, 0.05, 0.8;
      break;
    }
    case AlphaPattern::Nested: {
      a.resize(3, 3);
      a << 0.9, 0.65, 0.1,
           0.35, 0.15, 0.05,
           0.1, 0.05, 0.05;
      break;
    }
    case AlphaPattern::Assortative: {
      Eigen::MatrixXd p(3, 3);
      p << 1, -0.5, -0.5,
          -0.5, 1, -0.5,
          -0.5, -0.5, 1;
      a = 0.3 + (epsilon * p.array());
      break;
    }
    case AlphaPattern::Disassortative: {
      Eigen::MatrixXd p(3, 3);
      p << -0.5, 1, 1,
           1, -0.5, 1,
           1, 1, -0.5;
      a = 0.3 + (epsilon * p.array());
      break;
    }
    case AlphaPattern::CorePeriphery: {
      Eigen::MatrixXd p(3, 3);
      p << 1.5, 1, 0.5,
           1, 0.5, 0,
           0.5, 0, -0.5;
      a = 0.3 + (epsilon * p.array());
      break;
    }
  }
  if ((a.array() < 0.0).any() || (a.array() > 1.0).any()) {
    throw std::invalid_argument("epsilon drives a Bernoulli probability out of [0,1]");
  }
  return a;
}

enum class DesignKind {
  EpsAlphaGrid,
  EpsPiRhoGrid,
  TransferModular,
  TransferNested,
  PartitionTriple,
  Custom,
};

struct SimDesign {
  DesignKind design = DesignKind::Custom;
  double epsilon = 0;
  double eps_pi = 0, eps_rho = 0;
  ModelKind variant = ModelKind::Iid;  // proportion variation across networks
  bool shared_sigma = false;           // reuse the row permutation for columns

  // Custom design description (also filled in by the factories)
  std::vector<std::pair<int, int>> sizes;
  std::vector<Eigen::MatrixXd> alphas;  // size 1 (shared) or one per network
  Eigen::MatrixXd pis;                  // M x Q1 planted proportions
  Eigen::MatrixXd rhos;                 // M x Q2
  std::vector<int> group_ids;

  static SimDesign eps_alpha(double eps) {
    SimDesign d;
    d.design = DesignKind::EpsAlphaGrid;
    d.epsilon = eps;
    return d;
  }
  static SimDesign eps_pi_rho(double ep, double er) {
    SimDesign d;
    d.design = DesignKind::EpsPiRhoGrid;
    d.eps_pi = ep;
    d.eps_rho = er;
    return d;
  }
  static SimDesign transfer(DesignKind which, ModelKind variant = ModelKind::Iid) {
    if (which != DesignKind::TransferModular && which != DesignKind::TransferNested) {
      throw std::invalid_argument("transfer design must be modular or nested");
    }
    SimDesign d;
    d.design = which;
    d.variant = variant;
    return d;
  }
  static SimDesign partition_triple(double eps, ModelKind variant = ModelKind::Iid) {
    SimDesign d;
    d.design = DesignKind::PartitionTriple;
    d.epsilon = eps;
    d.variant = variant;
    return d;
  }
};

struct SimulatedCollection {
  NetworkCollection coll;
  std::vector<Eigen::VectorXi> row_blocks;  // planted memberships, 0-based
  std::vector<Eigen::VectorXi> col_blocks;
  std::vector<int> group_ids;
  SupportPair planted_support;
};

namespace detail {

inline std::vector<int> random_permutation(int n, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline Eigen::RowVectorXd permute(const Eigen::RowVectorXd& v,
                                  const std::vector<int>& sigma) {
  Eigen::RowVectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(i) = v(sigma[static_cast<std::size_t>(i)]);
  }
  return out;
}

// Categorical draws; positive-proportion blocks are resampled until each is
// nonempty (up to 100 attempts); the final draw is kept regardless.
inline Eigen::VectorXi sample_memberships(const Eigen::RowVectorXd& prop, int n,
                                          std::mt19937_64& rng) {
  std::discrete_distribution<int> cat(prop.data(), prop.data() + prop.size());
  Eigen::VectorXi z(n);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int i = 0; i < n; ++i) z(i) = cat(rng);
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(prop.size());
    for (int i = 0; i < n; ++i) counts(z(i))++;
    bool ok = true;
    for (Eigen::Index q = 0; q < prop.size(); ++q) {
      if (prop(q) > 0 && counts(q) == 0) ok = false;
    }
    if (ok) break;
  }
  return z;
}

// Resolves the built-in designs into the explicit Custom description.
inline SimDesign materialize(const SimDesign& design, std::uint64_t seed) {
  SimDesign d = design;
  auto sigma_rng = [&](std::uint64_t tag) { return make_rng(seed, {kStreamSigma, tag}); };
  switch (design.design) {
    case DesignKind::EpsAlphaGrid: {
      d.sizes.assign(2, {240, 240});
      d.alphas = {build_alpha(AlphaPattern::EpsGrid4, design.epsilon)};
      Eigen::RowVectorXd pi1(4), unif(4), rho2(4);
      pi1 << 0.2, 0.4, 0.4, 0.0;
      unif << 0.25, 0.25, 0.25, 0.25;
      rho2 << 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
      auto r1 = sigma_rng(1);
      auto r2 = sigma_rng(2);
      d.pis.resize(2, 4);
      d.pis.row(0) = permute(pi1, random_permutation(4, r1));
      d.pis.row(1) = unif;
      d.rhos.resize(2, 4);
      d.rhos.row(0) = unif;
      d.rhos.row(1) = permute(rho2, random_permutation(4, r2));
      d.group_ids = {0, 0};
      break;
    }
    case DesignKind::EpsPiRhoGrid: {
      d.sizes.assign(3, {90, 90});
      d.alphas = {build_alpha(AlphaPattern::PiRhoFixed3)};
      double third = 1.0 / 3.0;
      Eigen::RowVectorXd base(3), lo_pi(3), hi_pi(3), lo_rho(3), hi_rho(3);
      base << third, third, third;
      lo_pi << third - design.eps_pi, third, third + design.eps_pi;
      hi_pi << third + design.eps_pi, third, third - design.eps_pi;
      lo_rho << third - design.eps_rho, third, third + design.eps_rho;
      hi_rho << third + design.eps_rho, third, third - design.eps_rho;
      auto r1 = sigma_rng(1);
      std::vector<int> sig_pi = random_permutation(3, r1);
      std::vector<int> sig_rho;
      if (design.shared_sigma) {
        sig_rho = sig_pi;
      } else {
        auto r2 = sigma_rng(2);
        sig_rho = random_permutation(3, r2);
      }
      d.pis.resize(3, 3);
      d.rhos.resize(3, 3);
      d.pis.row(0) = base;
      d.rhos.row(0) = base;
      d.pis.row(1) = permute(lo_pi, sig_pi);
      d.rhos.row(1) = permute(lo_rho, sig_rho);
      d.pis.row(2) = permute(hi_pi, sig_pi);
      d.rhos.row(2) = permute(hi_rho, sig_rho);
      d.group_ids = {0, 0, 0};
      break;
    }
    case DesignKind::TransferModular:
    case DesignKind::TransferNested: {
      d.sizes = {{20, 20}, {120, 120}};
      d.alphas = {build_alpha(design.design == DesignKind::TransferModular
                                  ? AlphaPattern::Modular
                                  : AlphaPattern::Nested)};
      Eigen::RowVectorXd base(3);
      base << 0.5, 0.3, 0.2;
      d.pis.resize(2, 3);
      d.rhos.resize(2, 3);
      bool vary_pi = design.variant == ModelKind::Pi || design.variant == ModelKind::PiRho;
      bool vary_rho = design.variant == ModelKind::Rho || design.variant == ModelKind::PiRho;
      for (int m = 0; m < 2; ++m) {
        auto r1 = sigma_rng(10 + static_cast<std::uint64_t>(m));
        auto r2 = sigma_rng(20 + static_cast<std::uint64_t>(m));
        std::vector<int> s1 = random_permutation(3, r1);
        std::vector<int> s2 = design.shared_sigma ? s1 : random_permutation(3, r2);
        d.pis.row(m) = vary_pi ? permute(base, s1) : base;
        d.rhos.row(m) = vary_rho ? permute(base, s2) : base;
      }
      d.group_ids = {0, 0};
      break;
    }
    case DesignKind::PartitionTriple: {
      const int per_group = 10;
      d.sizes.assign(3 * per_group, {75, 75});
      d.alphas = {build_alpha(AlphaPattern::Assortative, design.epsilon),
                  build_alpha(AlphaPattern::Disassortative, design.epsilon),
                  build_alpha(AlphaPattern::CorePeriphery, design.epsilon)};
      Eigen::RowVectorXd base(3);
      base << 0.2, 0.3, 0.5;
      d.pis.resize(3 * per_group, 3);
      d.rhos.resize(3 * per_group, 3);
      d.group_ids.clear();
      bool vary_pi = design.variant == ModelKind::Pi || design.variant == ModelKind::PiRho;
      bool vary_rho = design.variant == ModelKind::Rho || design.variant == ModelKind::PiRho;
      for (int m = 0; m < 3 * per_group; ++m) {
        auto r1 = sigma_rng(10 + static_cast<std::uint64_t>(m));
        auto r2 = sigma_rng(1000 + static_cast<std::uint64_t>(m));
        std::vector<int> s1 = random_permutation(3, r1);
        std::vector<int> s2 = design.shared_sigma ? s1 : random_permutation(3, r2);
        d.pis.row(m) = (vary_pi && m > 0) ? permute(base, s1) : base;
        d.rhos.row(m) = (vary_rho && m > 0) ? permute(base, s2) : base;
        d.group_ids.push_back(m / per_group);
      }
      break;
    }
    case DesignKind::Custom:
      break;
  }
  if (d.sizes.empty() || d.pis.size() == 0 || d.rhos.size() == 0 || d.alphas.empty()) {
    throw std::invalid_argument("incomplete simulation design");
  }
  if (d.group_ids.empty()) d.group_ids.assign(d.sizes.size(), 0);
  return d;
}

}  // namespace detail

// Samples Z, W categorically from the design's proportions, then
// X_ij ~ Bernoulli(alpha_{Z_i W_j}).
inline SimulatedCollection sample_collection(const SimDesign& design,
                                             std::uint64_t seed) {
  SimDesign d = detail::materialize(design, seed);
  const int m_count = static_cast<int>(d.sizes.size());
  SimulatedCollection out;
  out.coll.emission = Emission::Bernoulli;
  out.group_ids = d.group_ids;
  out.planted_support.s1 = (d.pis.array() > 0.0).cast<int>();
  out.planted_support.s2 = (d.rhos.array() > 0.0).cast<int>();

  for (int m = 0; m < m_count; ++m) {
    auto [n1, n2] = d.sizes[static_cast<std::size_t>(m)];
    const Eigen::MatrixXd& alpha =
        d.alphas.size() == 1
            ? d.alphas[0]
            : d.alphas[static_cast<std::size_t>(
                  d.group_ids[static_cast<std::size_t>(m)] %
                  static_cast<int>(d.alphas.size()))];
    auto rng_z = make_rng(seed, {kStreamSample, static_cast<std::uint64_t>(m), 1});
    auto rng_w = make_rng(seed, {kStreamSample, static_cast<std::uint64_t>(m), 2});
    Eigen::VectorXi z = detail::sample_memberships(d.pis.row(m), n1, rng_z);
    Eigen::VectorXi w = detail::sample_memberships(d.rhos.row(m), n2, rng_w);
    auto rng_x = make_rng(seed, {kStreamEdges, static_cast<std::uint64_t>(m)});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd values(n1, n2);
    for (int i = 0; i < n1; ++i) {
      for (int j = 0; j < n2; ++j) {
        values(i, j) = unif(rng_x) < alpha(z(i), w(j)) ? 1.0 : 0.0;
      }
    }
    out.coll.networks.push_back(
        make_network("net" + std::to_string(m + 1), std::move(values), {}));
    out.row_blocks.push_back(std::move(z));
    out.col_blocks.push_back(std::move(w));
  }
  return out;
}

// Hubert-Arabie adjusted Rand index. Returns 1 when both partitions induce
// the same equivalence classes, including the degenerate both-trivial case.
template <class LabelsA, class LabelsB>
double ari(const LabelsA& a, const LabelsB& b) {
  const std::size_t n = static_cast<std::size_t>(a.size());
  if (n != static_cast<std::size_t>(b.size())) {
    throw std::invalid_argument("label vectors differ in length");
  }
  if (n < 2) throw std::invalid_argument("ari needs at least two items");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> row_sum, col_sum;
  for (std::size_t i = 0; i < n; ++i) {
    int la = static_cast<int>(a[i]);
    int lb = static_cast<int>(b[i]);
    cells[{la, lb}] += 1;
    row_sum[la] += 1;
    col_sum[lb] += 1;
  }
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_cells = 0, sum_rows = 0, sum_cols = 0;
  for (const auto& [key, v] : cells) sum_cells += comb2(v);
  for (const auto& [key, v] : row_sum) sum_rows += comb2(v);
  for (const auto& [key, v] : col_sum) sum_cols += comb2(v);
  double total = comb2(static_cast<double>(n));
  double expected = sum_rows * sum_cols / total;
  double max_index = 0.5 * (sum_rows + sum_cols);
  double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (sum_cells - expected) / denom;
}

// Concatenates labels across networks before comparing; detects block
// misalignment across networks that per-network ARI cannot see.
inline double pooled_ari(const std::vector<std::vector<int>>& a,
                         const std::vector<std::vector<int>>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("network counts differ");
  std::vector<int> ca, cb;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (a[m].size() != b[m].size()) {
      throw std::invalid_argument("per-network label lengths differ");
    }
    ca.insert(ca.end(), a[m].begin(), a[m].end());
    cb.insert(cb.end(), b[m].begin(), b[m].end());
  }
  return ari(ca, cb);
}

inline std::vector<int> to_vector(const Eigen::VectorXi& v) {
  return std::vector<int>(v.data(), v.data() + v.size());
}

}  // namespace colbisbm

#endif  // COLBISBM_SIMULATE_HPP
