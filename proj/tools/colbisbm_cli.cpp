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

// Command-line front end: fit / select / partition / predict / simulate with
// machine-readable JSON and CSV outputs. All randomness flows from --seed.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "colbisbm/colbisbm.hpp"

namespace fs = std::filesystem;
using namespace colbisbm;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string manifest;
  std::string kind = "iid";
  std::string emission;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int restarts = 5;
  int max_ge = 10, max_mw = 3, depth = 1;
  int max_q1 = 10, max_q2 = 10;
  std::string out = ".";
  unsigned threads = 0;
};

// Tracks artifacts so a failing run leaves nothing half-written behind:
// files are removed on destruction unless the run committed.
struct OutputTracker {
  std::vector<fs::path> written;
  bool committed = false;

  ~OutputTracker() {
    if (committed) return;
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
  std::ofstream open(const fs::path& p) {
    if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
    written.push_back(p);
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    return out;
  }
  void note(const fs::path& p) { written.push_back(p); }
  void commit() { committed = true; }
};

unsigned opts_threads(const Common& c) {
  return c.threads == 0 ? default_threads() : c.threads;
}

SelectOptions make_select_options(const Common& c) {
  SelectOptions opts;
  opts.fit.seed = c.seed;
  opts.fit.tol = c.tol;
  opts.fit.n_init = c.restarts;
  opts.fit.threads = opts_threads(c);
  opts.max_ge = c.max_ge;
  opts.max_mw = c.max_mw;
  opts.depth = c.depth;
  opts.max_q1 = c.max_q1;
  opts.max_q2 = c.max_q2;
  opts.threads = opts_threads(c);
  return opts;
}

NetworkCollection load_and_check(const Common& c) {
  if (c.manifest.empty()) throw std::runtime_error("--manifest is required");
  NetworkCollection coll = load_collection(c.manifest);
  if (!c.emission.empty() &&
      emission_from_string(c.emission) != coll.emission) {
    throw std::runtime_error("--emission disagrees with the manifest");
  }
  return coll;
}

void write_run_log(OutputTracker& tracker, const fs::path& dir, const std::string& cmd,
                   const Common& c, double wall_seconds) {
  json log;
  log["command"] = cmd;
  log["seed"] = c.seed;
  log["tol"] = c.tol;
  log["restarts"] = c.restarts;
  log["threads"] = opts_threads(c);
  log["version"] = kVersion;
  log["wall_time_s"] = wall_seconds;
  log["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  auto out = tracker.open(dir / "run_log.json");
  out << log.dump(2) << '\n';
}

void write_grid_csv(OutputTracker& tracker, const fs::path& path,
                    const std::map<ModelKind, SelectionResult>& results,
                    const NetworkCollection& coll, std::uint64_t seed) {
  auto out = tracker.open(path);
  out << "# seed=" << seed << "\n";
  out << "q1,q2,kind,bicl,elbo,pen_pi,pen_rho,pen_alpha,pen_s1,pen_s2\n";
  for (const auto& [kind, sel] : results) {
    for (const auto& [key, fit_result] : sel.fits) {
      Penalty pen = penalty(coll, fit_result.params.kind, fit_result.support);
      out << key.first << ',' << key.second << ',' << to_string(kind) << ','
          << fit_result.bicl << ',' << fit_result.elbo << ',' << pen.pen_pi << ','
          << pen.pen_rho << ',' << pen.pen_alpha << ',' << pen.pen_s1 << ','
          << pen.pen_s2 << '\n';
    }
    if (sel.fits.empty()) {  // Sep keeps only the stitched best
      Penalty pen = penalty(coll, sel.best.params.kind, sel.best.support);
      out << sel.chosen_q.first << ',' << sel.chosen_q.second << ','
          << to_string(kind) << ',' << sel.best.bicl << ',' << sel.best.elbo << ','
          << pen.pen_pi << ',' << pen.pen_rho << ',' << pen.pen_alpha << ','
          << pen.pen_s1 << ',' << pen.pen_s2 << '\n';
    }
  }
}

int run_fit(const Common& c, int q1, int q2) {
  auto start = std::chrono::steady_clock::now();
  NetworkCollection coll = load_and_check(c);
  ModelKind kind = model_kind_from_string(c.kind);
  FitOptions opts;
  opts.seed = c.seed;
  opts.tol = c.tol;
  opts.n_init = c.restarts;
  opts.threads = opts_threads(c);
  FitResult fr =
      fit(coll, kind, q1, q2, SupportPair::all_ones(coll.size(), q1, q2), opts);
  fr.bicl = bicl(coll, fr);
  OutputTracker tracker;
  fs::path dir(c.out);
  fs::create_directories(dir);
  auto out = tracker.open(dir / "model.json");
  out << fit_to_json(fr, coll).dump(2) << '\n';
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_log(tracker, dir, "fit", c, wall);
  tracker.commit();
  std::cout << "fit: kind=" << to_string(kind) << " q=(" << q1 << "," << q2
            << ") elbo=" << fr.elbo << " bicl=" << fr.bicl << "\n";
  return 0;
}

int run_select(const Common& c) {
  auto start = std::chrono::steady_clock::now();
  NetworkCollection coll = load_and_check(c);
  SelectOptions opts = make_select_options(c);
  std::map<ModelKind, SelectionResult> results;
  const SelectionResult* best_sel = nullptr;
  if (c.kind == "all") {
    auto cmp = compare_structure(
        coll, {ModelKind::Iid, ModelKind::Pi, ModelKind::Rho, ModelKind::PiRho}, opts);
    results = std::move(cmp.results);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [kind, sel] : results) {
      if (sel.best.bicl > best) {
        best = sel.best.bicl;
        best_sel = &sel;
      }
    }
  } else {
    ModelKind kind = model_kind_from_string(c.kind);
    results.emplace(kind, select_blocks(coll, kind, opts));
    best_sel = &results.at(kind);
  }
  OutputTracker tracker;
  fs::path dir(c.out);
  fs::create_directories(dir);
  write_grid_csv(tracker, dir / "grid.csv", results, coll, c.seed);
  auto out = tracker.open(dir / "model.json");
  out << selection_to_json(*best_sel, coll).dump(2) << '\n';
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_log(tracker, dir, "select", c, wall);
  tracker.commit();
  std::cout << "select: kind=" << to_string(best_sel->kind) << " chosen=("
            << best_sel->chosen_q.first << "," << best_sel->chosen_q.second
            << ") bicl=" << best_sel->best.bicl << "\n";
  return 0;
}

int run_partition(const Common& c, bool exhaustive) {
  auto start = std::chrono::steady_clock::now();
  NetworkCollection coll = load_and_check(c);
  ModelKind kind = model_kind_from_string(c.kind);
  SelectOptions opts = make_select_options(c);
  CollectionPartition part = exhaustive ? exhaustive_partition(coll, kind, opts)
                                        : recursive_partition(coll, kind, opts);
  OutputTracker tracker;
  fs::path dir(c.out);
  fs::create_directories(dir);
  auto out = tracker.open(dir / "partition.json");
  json doc = partition_to_json(part, coll);
  doc["seed"] = c.seed;
  doc["kind"] = to_string(kind);
  out << doc.dump(2) << '\n';
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_log(tracker, dir, "partition", c, wall);
  tracker.commit();
  std::cout << "partition: groups=" << part.groups.size() << " score=" << part.score
            << "\n";
  return 0;
}

std::vector<std::tuple<int, int, int>> read_targets(const fs::path& path,
                                                    const NetworkCollection& coll) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open targets: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty targets file");
  std::vector<std::tuple<int, int, int>> targets;
  while (std::getline(in, line)) {
    line = detail::strip(line);
    if (line.empty()) continue;
    auto f = detail::split(line, ',');
    if (f.size() != 3) throw std::runtime_error("bad target row: " + line);
    std::string name = detail::strip(f[0]);
    int m = -1;
    for (int k = 0; k < coll.size(); ++k) {
      if (coll.networks[static_cast<std::size_t>(k)].name == name) m = k;
    }
    if (m < 0) throw std::runtime_error("unknown network in targets: " + name);
    const auto& net = coll.networks[static_cast<std::size_t>(m)];
    auto row_it = std::find(net.row_labels.begin(), net.row_labels.end(),
                            detail::strip(f[1]));
    auto col_it = std::find(net.col_labels.begin(), net.col_labels.end(),
                            detail::strip(f[2]));
    if (row_it == net.row_labels.end() || col_it == net.col_labels.end()) {
      throw std::runtime_error("unknown node label in targets: " + line);
    }
    targets.push_back({m, static_cast<int>(row_it - net.row_labels.begin()),
                       static_cast<int>(col_it - net.col_labels.begin())});
  }
  return targets;
}

int run_predict(const Common& c, const std::string& model_path,
                const std::string& targets_path, double p_mis,
                const std::string& mode, int target_network) {
  auto start = std::chrono::steady_clock::now();
  NetworkCollection coll = load_and_check(c);
  OutputTracker tracker;
  fs::path dir(c.out);
  fs::create_directories(dir);

  if (p_mis > 0.0) {
    // degradation protocol: degrade one network, refit, score the altered set
    DegradeMode dm = mode == "links" ? DegradeMode::MissingLinks : DegradeMode::MissingDyads;
    auto [degraded, truth] =
        degrade(coll.networks.at(static_cast<std::size_t>(target_network)), dm, p_mis,
                c.seed);
    NetworkCollection working = coll;
    working.networks[static_cast<std::size_t>(target_network)] = degraded;
    SelectOptions opts = make_select_options(c);
    ModelKind kind = model_kind_from_string(c.kind);
    SelectionResult sel = select_blocks(working, kind, opts);
    std::vector<std::tuple<int, int, int>> targets;
    for (const auto& t : truth) targets.push_back({target_network, t.row, t.col});
    auto preds = predict_dyads(sel.best, working, targets);
    std::vector<double> scores;
    std::vector<int> labels;
    auto out = tracker.open(dir / "predictions.csv");
    out << "# seed=" << c.seed << "\n";
    out << "network,row,col,score,truth,label\n";
    const auto& net = coll.networks[static_cast<std::size_t>(target_network)];
    for (std::size_t k = 0; k < preds.size(); ++k) {
      int lab = truth[k].value != 0.0 ? 1 : 0;
      scores.push_back(preds[k].score);
      labels.push_back(lab);
      out << net.name << ',' << net.row_labels[static_cast<std::size_t>(truth[k].row)]
          << ',' << net.col_labels[static_cast<std::size_t>(truth[k].col)] << ','
          << preds[k].score << ',' << truth[k].value << ',' << lab << '\n';
    }
    double auc = roc_auc(scores, labels);
    json extra;
    extra["auc"] = auc;
    extra["p_mis"] = p_mis;
    extra["mode"] = mode;
    extra["chosen_q1"] = sel.chosen_q.first;
    extra["chosen_q2"] = sel.chosen_q.second;
    auto sout = tracker.open(dir / "scores.json");
    sout << extra.dump(2) << '\n';
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_run_log(tracker, dir, "predict", c, wall);
  tracker.commit();
    std::cout << "predict: auc=" << auc << " over " << preds.size() << " dyads\n";
    return 0;
  }

  if (model_path.empty() || targets_path.empty()) {
    throw std::runtime_error("predict needs --model and --targets (or --p-mis)");
  }
  FitResult fr = fit_from_json(read_json(model_path));
  auto targets = read_targets(targets_path, coll);
  auto preds = predict_dyads(fr, coll, targets);
  auto out = tracker.open(dir / "predictions.csv");
  out << "# seed=" << c.seed << "\n";
  out << "network,row,col,score\n";
  for (const auto& p : preds) {
    const auto& net = coll.networks[static_cast<std::size_t>(p.network)];
    out << net.name << ',' << net.row_labels[static_cast<std::size_t>(p.row)] << ','
        << net.col_labels[static_cast<std::size_t>(p.col)] << ',' << p.score << '\n';
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_log(tracker, dir, "predict", c, wall);
  tracker.commit();
  std::cout << "predict: " << preds.size() << " dyads scored\n";
  return 0;
}

int run_simulate(const Common& c, const std::string& design_name, double epsilon,
                 double eps_pi, double eps_rho, const std::string& variant) {
  auto start = std::chrono::steady_clock::now();
  SimDesign design;
  if (design_name == "eps-alpha") {
    design = SimDesign::eps_alpha(epsilon);
  } else if (design_name == "eps-pirho") {
    design = SimDesign::eps_pi_rho(eps_pi, eps_rho);
  } else if (design_name == "transfer-modular") {
    design = SimDesign::transfer(DesignKind::TransferModular,
                                 model_kind_from_string(variant));
  } else if (design_name == "transfer-nested") {
    design = SimDesign::transfer(DesignKind::TransferNested,
                                 model_kind_from_string(variant));
  } else if (design_name == "partition-triple") {
    design = SimDesign::partition_triple(epsilon, model_kind_from_string(variant));
  } else {
    throw std::runtime_error("unknown design: " + design_name);
  }
  if (!c.emission.empty() && emission_from_string(c.emission) != Emission::Bernoulli) {
    throw std::runtime_error("builtin designs sample Bernoulli interactions");
  }
  SimulatedCollection sim = sample_collection(design, c.seed);
  OutputTracker tracker;
  fs::path dir(c.out);
  fs::create_directories(dir);
  auto manifest = save_collection(sim.coll, dir);
  tracker.note(manifest);
  json truth;
  truth["seed"] = c.seed;
  truth["design"] = design_name;
  truth["group_ids"] = sim.group_ids;
  truth["support_s1"] = detail::int_matrix_to_json(sim.planted_support.s1);
  truth["support_s2"] = detail::int_matrix_to_json(sim.planted_support.s2);
  truth["row_blocks"] = json::array();
  truth["col_blocks"] = json::array();
  for (int m = 0; m < sim.coll.size(); ++m) {
    truth["row_blocks"].push_back(to_vector(sim.row_blocks[static_cast<std::size_t>(m)]));
    truth["col_blocks"].push_back(to_vector(sim.col_blocks[static_cast<std::size_t>(m)]));
  }
  auto out = tracker.open(dir / "truth.json");
  out << truth.dump(2) << '\n';
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_run_log(tracker, dir, "simulate", c, wall);
  tracker.commit();
  std::cout << "simulate: " << sim.coll.size() << " networks written to " << dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint stochastic block models for collections of bipartite networks"};
  app.require_subcommand(1);

  Common c;
  int q1 = 1, q2 = 1;
  std::string model_path, targets_path;
  double p_mis = 0.0;
  std::string mode = "dyads";
  int target_network = 0;
  bool exhaustive = false;
  std::string design_name = "eps-alpha";
  double epsilon = 0.0, eps_pi = 0.0, eps_rho = 0.0;
  std::string variant = "iid";

  auto add_common = [&](CLI::App* sub, bool needs_manifest) {
    if (needs_manifest) {
      sub->add_option("--manifest", c.manifest, "collection manifest JSON");
    }
    sub->add_option("--kind", c.kind, "sep|iid|pi|rho|pirho (select also: all)");
    sub->add_option("--emission", c.emission, "bernoulli|poisson (validated)");
    sub->add_option("--seed", c.seed, "root seed");
    sub->add_option("--tol", c.tol, "relative ELBO tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--restarts", c.restarts, "VEM restarts per fit");
    sub->add_option("--max-ge", c.max_ge, "greedy exploration steps");
    sub->add_option("--max-mw", c.max_mw, "moving window passes");
    sub->add_option("--depth", c.depth, "moving window half-width");
    sub->add_option("--max-q1", c.max_q1, "largest row block count");
    sub->add_option("--max-q2", c.max_q2, "largest column block count");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  };

  auto* fit_cmd = app.add_subcommand("fit", "fit one model at fixed block counts");
  add_common(fit_cmd, true);
  fit_cmd->add_option("--q1", q1, "row blocks")->required();
  fit_cmd->add_option("--q2", q2, "column blocks")->required();

  auto* select_cmd = app.add_subcommand("select", "search block counts by BIC-L");
  add_common(select_cmd, true);

  auto* partition_cmd =
      app.add_subcommand("partition", "split the collection into sub-collections");
  add_common(partition_cmd, true);
  partition_cmd->add_flag("--exhaustive", exhaustive,
                          "score every partition (M <= 8)");

  auto* predict_cmd = app.add_subcommand("predict", "score dyads from a fitted model");
  add_common(predict_cmd, true);
  predict_cmd->add_option("--model", model_path, "fitted model JSON");
  predict_cmd->add_option("--targets", targets_path, "CSV network,row,col");
  predict_cmd->add_option("--p-mis", p_mis, "degradation protocol: fraction altered");
  predict_cmd->add_option("--mode", mode, "links|dyads");
  predict_cmd->add_option("--target-network", target_network,
                          "network index to degrade");

  auto* simulate_cmd = app.add_subcommand("simulate", "write a synthetic collection");
  add_common(simulate_cmd, false);
  simulate_cmd->add_option("--design", design_name,
                           "eps-alpha|eps-pirho|transfer-modular|transfer-nested|"
                           "partition-triple");
  simulate_cmd->add_option("--epsilon", epsilon, "structure strength");
  simulate_cmd->add_option("--eps-pi", eps_pi, "row proportion shift");
  simulate_cmd->add_option("--eps-rho", eps_rho, "column proportion shift");
  simulate_cmd->add_option("--variant", variant, "proportion variation model kind");

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_cmd->parsed()) return run_fit(c, q1, q2);
    if (select_cmd->parsed()) return run_select(c);
    if (partition_cmd->parsed()) return run_partition(c, exhaustive);
    if (predict_cmd->parsed()) {
      return run_predict(c, model_path, targets_path, p_mis, mode, target_network);
    }
    if (simulate_cmd->parsed()) {
      return run_simulate(c, design_name, epsilon, eps_pi, eps_rho, variant);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
