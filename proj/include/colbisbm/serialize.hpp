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

#ifndef COLBISBM_SERIALIZE_HPP
#define COLBISBM_SERIALIZE_HPP

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "colbisbm/net_model.hpp"
#include "colbisbm/partition.hpp"
#include "colbisbm/selection.hpp"
#include "colbisbm/vem.hpp"

namespace colbisbm {

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.size(), j.empty() ? 0 : j[0].size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

inline nlohmann::json int_matrix_to_json(const Eigen::MatrixXi& m) {
  return matrix_to_json(m.cast<double>());
}

inline Eigen::MatrixXi int_matrix_from_json(const nlohmann::json& j) {
  return matrix_from_json(j).cast<int>();
}

}  // namespace detail

// Fit result with parameters, supports, tau and MAP labels keyed by node
// label; everything predict needs to re-score the collection.
inline nlohmann::json fit_to_json(const FitResult& fit_result,
                                  const NetworkCollection& coll) {
  nlohmann::json doc;
  doc["kind"] = to_string(fit_result.params.kind);
  doc["emission"] = to_string(fit_result.params.emission);
  doc["q1"] = fit_result.support.q1();
  doc["q2"] = fit_result.support.q2();
  doc["elbo"] = fit_result.elbo;
  doc["bicl"] = fit_result.bicl;
  doc["n_iterations"] = fit_result.n_iterations;
  doc["converged"] = fit_result.converged;
  doc["seed"] = fit_result.seed;
  doc["support_s1"] = detail::int_matrix_to_json(fit_result.support.s1);
  doc["support_s2"] = detail::int_matrix_to_json(fit_result.support.s2);
  doc["pi"] = detail::matrix_to_json(fit_result.params.pi);
  doc["rho"] = detail::matrix_to_json(fit_result.params.rho);
  doc["alphas"] = nlohmann::json::array();
  for (const auto& a : fit_result.params.alphas) {
    doc["alphas"].push_back(detail::matrix_to_json(a));
  }
  MapLabels labels = map_memberships(fit_result);
  doc["networks"] = nlohmann::json::array();
  for (int m = 0; m < coll.size(); ++m) {
    std::size_t mi = static_cast<std::size_t>(m);
    const auto& net = coll.networks[mi];
    nlohmann::json jn;
    jn["name"] = net.name;
    nlohmann::json rb = nlohmann::json::object();
    for (Eigen::Index i = 0; i < net.n1(); ++i) {
      rb[net.row_labels[static_cast<std::size_t>(i)]] = labels.rows[mi](i);
    }
    nlohmann::json cb = nlohmann::json::object();
    for (Eigen::Index j = 0; j < net.n2(); ++j) {
      cb[net.col_labels[static_cast<std::size_t>(j)]] = labels.cols[mi](j);
    }
    jn["row_blocks"] = std::move(rb);
    jn["col_blocks"] = std::move(cb);
    jn["tau1"] = detail::matrix_to_json(fit_result.state.tau1[mi]);
    jn["tau2"] = detail::matrix_to_json(fit_result.state.tau2[mi]);
    doc["networks"].push_back(std::move(jn));
  }
  return doc;
}

inline FitResult fit_from_json(const nlohmann::json& doc) {
  FitResult fr;
  fr.params.kind = model_kind_from_string(doc.at("kind").get<std::string>());
  fr.params.emission = emission_from_string(doc.at("emission").get<std::string>());
  fr.elbo = doc.at("elbo").get<double>();
  fr.bicl = doc.at("bicl").get<double>();
  fr.n_iterations = doc.at("n_iterations").get<int>();
  fr.converged = doc.at("converged").get<bool>();
  fr.seed = doc.at("seed").get<std::uint64_t>();
  fr.support.s1 = detail::int_matrix_from_json(doc.at("support_s1"));
  fr.support.s2 = detail::int_matrix_from_json(doc.at("support_s2"));
  fr.params.pi = detail::matrix_from_json(doc.at("pi"));
  fr.params.rho = detail::matrix_from_json(doc.at("rho"));
  for (const auto& a : doc.at("alphas")) {
    fr.params.alphas.push_back(detail::matrix_from_json(a));
  }
  for (const auto& jn : doc.at("networks")) {
    fr.state.tau1.push_back(detail::matrix_from_json(jn.at("tau1")));
    fr.state.tau2.push_back(detail::matrix_from_json(jn.at("tau2")));
  }
  return fr;
}

inline nlohmann::json selection_to_json(const SelectionResult& sel,
                                        const NetworkCollection& coll) {
  nlohmann::json doc;
  doc["kind"] = to_string(sel.kind);
  doc["chosen_q1"] = sel.chosen_q.first;
  doc["chosen_q2"] = sel.chosen_q.second;
  doc["best"] = fit_to_json(sel.best, coll);
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& [key, value] : sel.grid) {
    grid.push_back({{"q1", key.first}, {"q2", key.second}, {"bicl", value}});
  }
  doc["grid"] = std::move(grid);
  return doc;
}

inline nlohmann::json partition_to_json(const CollectionPartition& part,
                                        const NetworkCollection& coll) {
  nlohmann::json doc;
  doc["score"] = part.score;
  doc["trajectory"] = part.trajectory;
  doc["groups"] = nlohmann::json::array();
  for (std::size_t g = 0; g < part.groups.size(); ++g) {
    nlohmann::json jg;
    nlohmann::json names = nlohmann::json::array();
    for (int m : part.groups[g]) {
      names.push_back(coll.networks[static_cast<std::size_t>(m)].name);
    }
    jg["networks"] = std::move(names);
    const auto& sel = part.group_results[g];
    jg["q1"] = sel.chosen_q.first;
    jg["q2"] = sel.chosen_q.second;
    jg["bicl"] = sel.best.bicl;
    jg["alpha"] = detail::matrix_to_json(sel.best.params.alpha_for(0));
    doc["groups"].push_back(std::move(jg));
  }
  return doc;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json doc;
  in >> doc;
  return doc;
}

}  // namespace colbisbm

#endif  // COLBISBM_SERIALIZE_HPP
