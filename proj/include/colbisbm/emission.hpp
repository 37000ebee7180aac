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

#ifndef COLBISBM_EMISSION_HPP
#define COLBISBM_EMISSION_HPP

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace colbisbm {

enum class Emission { Bernoulli, Poisson };

// Connectivity estimates are clamped away from the boundary so that log
// densities stay finite when an empty block pair yields a ratio of 0 or 1.
inline constexpr double kAlphaClamp = 1e-6;

inline std::string to_string(Emission e) {
  return e == Emission::Bernoulli ? "bernoulli" : "poisson";
}

inline Emission emission_from_string(const std::string& s) {
  if (s == "bernoulli") return Emission::Bernoulli;
  if (s == "poisson") return Emission::Poisson;
  throw std::invalid_argument("unknown emission: " + s);
}

inline double clamp_alpha(Emission kind, double alpha_raw) {
  if (kind == Emission::Bernoulli) {
    return std::min(std::max(alpha_raw, kAlphaClamp), 1.0 - kAlphaClamp);
  }
  return std::max(alpha_raw, kAlphaClamp);
}

// log f(x; alpha) for one dyad.
//   Bernoulli: x log(a) + (1-x) log(1-a),  x in {0,1}, a in (0,1)
//   Poisson:   -a + x log(a) - log(x!),    x in N,     a > 0
inline double log_density(Emission kind, double x, double alpha) {
  if (x < 0 || x != std::floor(x)) {
    throw std::invalid_argument("emission value must be a nonnegative integer");
  }
  if (kind == Emission::Bernoulli) {
    if (alpha <= 0.0 || alpha >= 1.0) {
      throw std::invalid_argument("Bernoulli alpha must lie in (0,1)");
    }
    if (x != 0.0 && x != 1.0) {
      throw std::invalid_argument("Bernoulli value must be 0 or 1");
    }
    return x * std::log(alpha) + (1.0 - x) * std::log1p(-alpha);
  }
  if (alpha <= 0.0) {
    throw std::invalid_argument("Poisson alpha must be positive");
  }
  return -alpha + x * std::log(alpha) - std::lgamma(x + 1.0);
}

// Splits the log density into terms linear in x:
//   log f(x; a) = x * f1(a) + f2(a) + c(x)
// with c(x) = 0 for Bernoulli and -log(x!) for Poisson. The VE-step and the
// ELBO then reduce to matrix products against the data and its mask.
inline void emission_terms(Emission kind, const Eigen::MatrixXd& alpha,
                           Eigen::MatrixXd& f1, Eigen::MatrixXd& f2) {
  if (kind == Emission::Bernoulli) {
    f1 = alpha.array().log() - (1.0 - alpha.array()).log();
    f2 = (1.0 - alpha.array()).log();
  } else {
    f1 = alpha.array().log();
    f2 = -alpha;
  }
}

inline double emission_constant(Emission kind, double x) {
  return kind == Emission::Poisson ? -std::lgamma(x + 1.0) : 0.0;
}

}  // namespace colbisbm

#endif  // COLBISBM_EMISSION_HPP
