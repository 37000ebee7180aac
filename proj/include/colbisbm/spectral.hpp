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

#ifndef COLBISBM_SPECTRAL_HPP
#define COLBISBM_SPECTRAL_HPP

#include <Eigen/Core>
#include <Eigen/SVD>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "colbisbm/net_model.hpp"
#include "colbisbm/rng.hpp"

namespace colbisbm {
namespace detail {

// Lloyd's algorithm with k-means++ seeding; a handful of restarts keeps the
// initialization stable on the small embeddings used here.
inline Eigen::VectorXi kmeans(const Eigen::MatrixXd& points, int k,
                              std::mt19937_64& rng, int n_restart = 4,
                              int max_iter = 50) {
  const Eigen::Index n = points.rows();
  if (k <= 1 || n <= 1) return Eigen::VectorXi::Zero(n);
  if (k > n) throw std::invalid_argument("kmeans: more clusters than points");

  Eigen::VectorXi best_assign = Eigen::VectorXi::Zero(n);
  double best_cost = std::numeric_limits<double>::infinity();
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int restart = 0; restart < n_restart; ++restart) {
    Eigen::MatrixXd centers(k, points.cols());
    // k-means++ seeding
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    centers.row(0) = points.row(pick(rng));
    Eigen::VectorXd d2 =
        (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      double total = d2.sum();
      Eigen::Index chosen = 0;
      if (total > 0) {
        double target = unif(rng) * total;
        double acc = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          acc += d2(i);
          if (acc >= target) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = pick(rng);
      }
      centers.row(c) = points.row(chosen);
      d2 = d2.cwiseMin(
          (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    Eigen::VectorXi assign(n);
    for (int iter = 0; iter < max_iter; ++iter) {
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        int arg = 0;
        double best = (points.row(i) - centers.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          double d = (points.row(i) - centers.row(c)).squaredNorm();
          if (d < best) {
            best = d;
            arg = c;
          }
        }
        if (iter == 0 || assign(i) != arg) changed = true;
        assign(i) = arg;
      }
      if (!changed && iter > 0) break;
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
      Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.row(assign(i)) += points.row(i);
        counts(assign(i)) += 1.0;
      }
      for (int c = 0; c < k; ++c) {
        if (counts(c) > 0) {
          centers.row(c) = sums.row(c) / counts(c);
        } else {
          // re-seed an emptied cluster at the farthest point
          Eigen::Index far = 0;
          double fd = -1;
          for (Eigen::Index i = 0; i < n; ++i) {
            double d = (points.row(i) - centers.row(assign(i))).squaredNorm();
            if (d > fd) {
              fd = d;
              far = i;
            }
          }
          centers.row(c) = points.row(far);
        }
      }
    }
    double cost = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      cost += (points.row(i) - centers.row(assign(i))).squaredNorm();
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_assign = assign;
    }
  }
  return best_assign;
}

// Regularized spectral embedding of the mask-imputed bi-adjacency matrix.
// Missing dyads are imputed at the observed mean; degrees are regularized by
// the mean degree so sparse networks do not blow up the normalization.
struct SpectralEmbedding {
  Eigen::MatrixXd rows;  // n1 x k
  Eigen::MatrixXd cols;  // n2 x k
};

inline SpectralEmbedding spectral_embedding(const BipartiteNetwork& net, int k) {
  const Eigen::Index n1 = net.n1();
  const Eigen::Index n2 = net.n2();
  k = static_cast<int>(std::min<Eigen::Index>(k, std::min(n1, n2)));
  double n_obs = net.observed.sum();
  double mean = 0.0;
  if (n_obs > 0) {
    mean = (net.values.array() * net.observed.array()).sum() / n_obs;
  }
  Eigen::MatrixXd a = net.values.array() * net.observed.array() +
                      mean * (1.0 - net.observed.array());
  Eigen::VectorXd d1 = a.rowwise().sum();
  Eigen::VectorXd d2 = a.colwise().sum();
  double reg1 = std::max(d1.mean(), 1e-12);
  double reg2 = std::max(d2.mean(), 1e-12);
  Eigen::VectorXd s1 = (d1.array() + reg1).rsqrt();
  Eigen::VectorXd s2 = (d2.array() + reg2).rsqrt();
  Eigen::MatrixXd an = s1.asDiagonal() * a * s2.asDiagonal();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(an, Eigen::ComputeThinU | Eigen::ComputeThinV);
  // scale coordinates by the singular values so near-noise dimensions
  // (rank-deficient block structure) do not sway the clustering
  Eigen::VectorXd scale = svd.singularValues().head(k);
  SpectralEmbedding emb;
  emb.rows = s1.asDiagonal() * svd.matrixU().leftCols(k) * scale.asDiagonal();
  emb.cols = s2.asDiagonal() * svd.matrixV().leftCols(k) * scale.asDiagonal();
  return emb;
}

}  // namespace detail
}  // namespace colbisbm

#endif  // COLBISBM_SPECTRAL_HPP
