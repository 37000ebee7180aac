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

#ifndef COLBISBM_NET_MODEL_HPP
#define COLBISBM_NET_MODEL_HPP

#include <Eigen/Core>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "colbisbm/emission.hpp"

namespace colbisbm {

enum class ModelKind { Sep, Iid, Pi, Rho, PiRho };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Sep: return "sep";
    case ModelKind::Iid: return "iid";
    case ModelKind::Pi: return "pi";
    case ModelKind::Rho: return "rho";
    case ModelKind::PiRho: return "pirho";
  }
  return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
  if (s == "sep") return ModelKind::Sep;
  if (s == "iid") return ModelKind::Iid;
  if (s == "pi") return ModelKind::Pi;
  if (s == "rho") return ModelKind::Rho;
  if (s == "pirho") return ModelKind::PiRho;
  throw std::invalid_argument("unknown model kind: " + s);
}

// One bipartite network: bi-adjacency values plus an observation mask.
// observed(i,j) == 0 marks a missing dyad (NA); its value is ignored by every
// computation in the library. Instances are immutable after construction.
struct BipartiteNetwork {
  std::string name;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Eigen::MatrixXd values;    // nonnegative integers
  Eigen::MatrixXd observed;  // 1.0 observed, 0.0 missing

  Eigen::Index n1() const { return values.rows(); }
  Eigen::Index n2() const { return values.cols(); }
};

struct NetworkCollection {
  std::vector<BipartiteNetwork> networks;
  Emission emission = Emission::Bernoulli;

  int size() const { return static_cast<int>(networks.size()); }
};

namespace detail {

inline std::vector<std::string> default_labels(const char* prefix, Eigen::Index n) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    out.push_back(std::string(prefix) + std::to_string(i + 1));
  }
  return out;
}

inline void check_unique(const std::vector<std::string>& labels, const char* side,
                         const std::string& name) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw std::invalid_argument("network '" + name + "': duplicate " + side +
                                  " label '" + l + "'");
    }
  }
}

}  // namespace detail

inline void validate_network(const BipartiteNetwork& net) {
  if (net.values.rows() < 1 || net.values.cols() < 1) {
    throw std::invalid_argument("network '" + net.name + "' is empty");
  }
  if (net.observed.rows() != net.values.rows() ||
      net.observed.cols() != net.values.cols()) {
    throw std::invalid_argument("network '" + net.name +
                                "': mask and value dimensions differ");
  }
  if (static_cast<Eigen::Index>(net.row_labels.size()) != net.n1() ||
      static_cast<Eigen::Index>(net.col_labels.size()) != net.n2()) {
    throw std::invalid_argument("network '" + net.name +
                                "': label count does not match matrix size");
  }
  detail::check_unique(net.row_labels, "row", net.name);
  detail::check_unique(net.col_labels, "column", net.name);
  for (Eigen::Index i = 0; i < net.n1(); ++i) {
    for (Eigen::Index j = 0; j < net.n2(); ++j) {
      double o = net.observed(i, j);
      if (o != 0.0 && o != 1.0) {
        throw std::invalid_argument("network '" + net.name +
                                    "': mask entries must be 0 or 1");
      }
      if (o == 1.0) {
        double v = net.values(i, j);
        if (v < 0 || v != std::floor(v)) {
          throw std::invalid_argument("network '" + net.name +
                                      "': observed values must be nonnegative integers");
        }
      }
    }
  }
}

inline BipartiteNetwork make_network(std::string name, Eigen::MatrixXd values,
                                     Eigen::MatrixXd observed,
                                     std::vector<std::string> row_labels = {},
                                     std::vector<std::string> col_labels = {}) {
  BipartiteNetwork net;
  net.name = std::move(name);
  net.values = std::move(values);
  net.observed = std::move(observed);
  if (net.observed.size() == 0) {
    net.observed = Eigen::MatrixXd::Ones(net.values.rows(), net.values.cols());
  }
  net.row_labels = row_labels.empty() ? detail::default_labels("r", net.values.rows())
                                      : std::move(row_labels);
  net.col_labels = col_labels.empty() ? detail::default_labels("c", net.values.cols())
                                      : std::move(col_labels);
  validate_network(net);
  return net;
}

inline void validate_collection(const NetworkCollection& coll) {
  if (coll.networks.empty()) {
    throw std::invalid_argument("collection has no networks");
  }
  for (const auto& net : coll.networks) {
    validate_network(net);
    if (coll.emission == Emission::Bernoulli) {
      for (Eigen::Index i = 0; i < net.n1(); ++i) {
        for (Eigen::Index j = 0; j < net.n2(); ++j) {
          if (net.observed(i, j) == 1.0 && net.values(i, j) != 0.0 &&
              net.values(i, j) != 1.0) {
            throw std::invalid_argument(
                "network '" + net.name +
                "': non-binary value under Bernoulli emission");
          }
        }
      }
    }
  }
}

// Fraction of observed dyads that carry an interaction.
inline double density(const BipartiteNetwork& net) {
  double n_obs = net.observed.sum();
  if (n_obs == 0.0) {
    throw std::invalid_argument("network '" + net.name + "': all dyads missing");
  }
  double nonzero = ((net.values.array() != 0.0).cast<double>() *
                    net.observed.array())
                       .sum();
  return nonzero / n_obs;
}

// ---------------------------------------------------------------------------
// File formats.
//
// Dense TSV: one matrix row per line, tab separated, "NA" for a missing dyad.
// Edge list CSV: header "row,col,value"; row/col are node labels, value "NA"
// records a missing dyad; unlisted dyads are observed zeros. Optional label
// files (one label per line) pin node order and carry isolated nodes.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

inline std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path.string());
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    line = strip(line);
    if (!line.empty()) labels.push_back(line);
  }
  return labels;
}

inline double parse_count(const std::string& tok, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric value '" + tok + "' in " + path.string());
  }
}

}  // namespace detail

inline BipartiteNetwork load_dense_tsv(const std::filesystem::path& path,
                                       const std::string& name,
                                       std::vector<std::string> row_labels = {},
                                       std::vector<std::string> col_labels = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::strip(line).empty()) continue;
    rows.push_back(detail::split(line, '\t'));
  }
  if (rows.empty()) throw std::runtime_error("empty network file: " + path.string());
  std::size_t n1 = rows.size();
  std::size_t n2 = rows[0].size();
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(n1, n2);
  Eigen::MatrixXd observed = Eigen::MatrixXd::Ones(n1, n2);
  for (std::size_t i = 0; i < n1; ++i) {
    if (rows[i].size() != n2) {
      throw std::runtime_error("ragged matrix in " + path.string());
    }
    for (std::size_t j = 0; j < n2; ++j) {
      std::string tok = detail::strip(rows[i][j]);
      if (tok == "NA") {
        observed(i, j) = 0.0;
      } else {
        values(i, j) = detail::parse_count(tok, path);
      }
    }
  }
  return make_network(name, std::move(values), std::move(observed),
                      std::move(row_labels), std::move(col_labels));
}

inline BipartiteNetwork load_edgelist_csv(const std::filesystem::path& path,
                                          const std::string& name,
                                          std::vector<std::string> row_labels = {},
                                          std::vector<std::string> col_labels = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty network file: " + path.string());
  }
  auto header = detail::split(detail::strip(line), ',');
  if (header.size() < 3 || detail::strip(header[0]) != "row" ||
      detail::strip(header[1]) != "col" || detail::strip(header[2]) != "value") {
    throw std::runtime_error("edge list must start with 'row,col,value': " +
                             path.string());
  }
  struct Entry {
    std::string row, col, value;
  };
  std::vector<Entry> entries;
  while (std::getline(in, line)) {
    line = detail::strip(line);
    if (line.empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 3) throw std::runtime_error("bad edge record in " + path.string());
    entries.push_back({detail::strip(f[0]), detail::strip(f[1]), detail::strip(f[2])});
  }

  auto index_of = [](std::vector<std::string>& labels,
                     std::unordered_map<std::string, std::size_t>& idx,
                     const std::string& label, bool fixed,
                     const std::filesystem::path& p) {
    auto it = idx.find(label);
    if (it != idx.end()) return it->second;
    if (fixed) {
      throw std::runtime_error("label '" + label + "' not in label file for " +
                               p.string());
    }
    labels.push_back(label);
    idx.emplace(label, labels.size() - 1);
    return labels.size() - 1;
  };

  bool rows_fixed = !row_labels.empty();
  bool cols_fixed = !col_labels.empty();
  std::unordered_map<std::string, std::size_t> ridx, cidx;
  for (std::size_t i = 0; i < row_labels.size(); ++i) ridx.emplace(row_labels[i], i);
  for (std::size_t j = 0; j < col_labels.size(); ++j) cidx.emplace(col_labels[j], j);
  std::vector<std::tuple<std::size_t, std::size_t, std::string>> parsed;
  for (const auto& e : entries) {
    std::size_t i = index_of(row_labels, ridx, e.row, rows_fixed, path);
    std::size_t j = index_of(col_labels, cidx, e.col, cols_fixed, path);
    parsed.emplace_back(i, j, e.value);
  }
  if (row_labels.empty() || col_labels.empty()) {
    throw std::runtime_error("edge list yields an empty side in " + path.string());
  }
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(row_labels.size(), col_labels.size());
  Eigen::MatrixXd observed = Eigen::MatrixXd::Ones(row_labels.size(), col_labels.size());
  for (const auto& [i, j, tok] : parsed) {
    if (tok == "NA") {
      observed(i, j) = 0.0;
      values(i, j) = 0.0;
    } else {
      values(i, j) = detail::parse_count(tok, path);
    }
  }
  return make_network(name, std::move(values), std::move(observed),
                      std::move(row_labels), std::move(col_labels));
}

// Manifest schema:
//   { "emission": "bernoulli"|"poisson",
//     "networks": [ { "name": str, "format": "edgelist"|"dense", "path": str,
//                     "row_labels": str (optional), "col_labels": str (optional) } ] }
// Relative paths resolve against the manifest's directory.
inline NetworkCollection load_collection(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error("manifest is not valid JSON: " + std::string(e.what()));
  }
  NetworkCollection coll;
  coll.emission = emission_from_string(doc.at("emission").get<std::string>());
  auto base = manifest_path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  for (const auto& entry : doc.at("networks")) {
    std::string name = entry.at("name").get<std::string>();
    std::string format = entry.at("format").get<std::string>();
    std::filesystem::path data = resolve(entry.at("path").get<std::string>());
    std::vector<std::string> rl, cl;
    if (entry.contains("row_labels")) {
      rl = detail::read_label_file(resolve(entry["row_labels"].get<std::string>()));
    }
    if (entry.contains("col_labels")) {
      cl = detail::read_label_file(resolve(entry["col_labels"].get<std::string>()));
    }
    if (format == "dense") {
      coll.networks.push_back(load_dense_tsv(data, name, std::move(rl), std::move(cl)));
    } else if (format == "edgelist") {
      coll.networks.push_back(load_edgelist_csv(data, name, std::move(rl), std::move(cl)));
    } else {
      throw std::runtime_error("unknown network format: " + format);
    }
  }
  validate_collection(coll);
  return coll;
}

namespace detail {

inline std::string format_count(double v) {
  std::ostringstream os;
  os << static_cast<long long>(v);
  return os.str();
}

}  // namespace detail

// Writes dense TSV data plus label files and a manifest; reloading
// reproduces values, masks and labels exactly.
inline std::filesystem::path save_collection(const NetworkCollection& coll,
                                             const std::filesystem::path& dir,
                                             const std::string& manifest_name = "manifest.json") {
  std::filesystem::create_directories(dir);
  nlohmann::json doc;
  doc["emission"] = to_string(coll.emission);
  doc["networks"] = nlohmann::json::array();
  for (const auto& net : coll.networks) {
    std::string stem = net.name;
    for (auto& c : stem) {
      if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    }
    std::string data_file = stem + ".tsv";
    std::ofstream out(dir / data_file);
    for (Eigen::Index i = 0; i < net.n1(); ++i) {
      for (Eigen::Index j = 0; j < net.n2(); ++j) {
        if (j > 0) out << '\t';
        if (net.observed(i, j) == 0.0) {
          out << "NA";
        } else {
          out << detail::format_count(net.values(i, j));
        }
      }
      out << '\n';
    }
    std::string row_file = stem + ".rows.txt";
    std::string col_file = stem + ".cols.txt";
    std::ofstream rf(dir / row_file);
    for (const auto& l : net.row_labels) rf << l << '\n';
    std::ofstream cf(dir / col_file);
    for (const auto& l : net.col_labels) cf << l << '\n';
    doc["networks"].push_back({{"name", net.name},
                               {"format", "dense"},
                               {"path", data_file},
                               {"row_labels", row_file},
                               {"col_labels", col_file}});
  }
  auto manifest = dir / manifest_name;
  std::ofstream mf(manifest);
  mf << doc.dump(2) << '\n';
  return manifest;
}

}  // namespace colbisbm

#endif  // COLBISBM_NET_MODEL_HPP
