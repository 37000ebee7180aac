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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "colbisbm/selection.hpp"
#include "colbisbm/simulate.hpp"

using namespace colbisbm;

namespace {

NetworkCollection zeros_collection(const std::vector<std::pair<int, int>>& sizes) {
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  int idx = 0;
  for (auto [a, b] : sizes) {
    coll.networks.push_back(
        make_network("n" + std::to_string(idx++), Eigen::MatrixXd::Zero(a, b), {}));
  }
  return coll;
}

}  // namespace

TEST_CASE("n_max_entries sums matrix sizes") {
  CHECK(n_max_entries(zeros_collection({{180, 193}, {129, 137}, {126, 154}, {167, 156}})) ==
        97869);
  CHECK(n_max_entries(zeros_collection({{1, 1}})) == 1);
  CHECK(n_max_entries(zeros_collection({{10, 20}, {10, 20}})) == 400);
}

TEST_CASE("count_params per model family") {
  CHECK(count_params(ModelKind::Iid, 4, 4, SupportPair::all_ones(1, 4, 4)) == 22);
  CHECK(count_params(ModelKind::PiRho, 2, 2, SupportPair::all_ones(2, 2, 2)) == 8);

  SupportPair partial;
  partial.s1.resize(2, 3);
  partial.s1 << 1, 1, 1, 1, 1, 0;
  partial.s2 = Eigen::MatrixXi::Ones(2, 1);
  CHECK(count_params(ModelKind::PiRho, 3, 1, partial) == 6);

  // full supports attain the Table upper bound M(Q1-1) + M(Q2-1) + Q1 Q2
  for (int m : {2, 3}) {
    for (int q1 : {2, 3}) {
      for (int q2 : {2, 4}) {
        CHECK(count_params(ModelKind::PiRho, q1, q2, SupportPair::all_ones(m, q1, q2)) ==
              m * (q1 - 1) + m * (q2 - 1) + q1 * q2);
      }
    }
  }
  CHECK(count_params(ModelKind::Sep, 2, 2, SupportPair::all_ones(2, 2, 2)) ==
        2 * (1 + 1 + 4));
  SupportPair bad;
  bad.s1 = Eigen::MatrixXi::Zero(2, 2);
  bad.s2 = Eigen::MatrixXi::Ones(2, 2);
  CHECK_THROWS(count_params(ModelKind::PiRho, 2, 2, bad));
}

TEST_CASE("penalty arithmetic matches hand-computed values") {
  SECTION("trivial iid fit") {
    auto coll = zeros_collection({{2, 2}});
    Penalty pen = penalty(coll, ModelKind::Iid, SupportPair::all_ones(1, 1, 1));
    CHECK(pen.pen_pi == 0.0);
    CHECK(pen.pen_rho == 0.0);
    CHECK(std::abs(pen.pen_alpha - std::log(4.0)) < 1e-12);
    CHECK(pen.pen_s1 == 0.0);
    FitResult fr;
    fr.params.kind = ModelKind::Iid;
    fr.support = SupportPair::all_ones(1, 1, 1);
    fr.elbo = 4.0 * std::log(0.5);
    CHECK(std::abs(bicl(coll, fr) - (4.0 * std::log(0.5) - 0.5 * std::log(4.0))) <
          1e-12);
    CHECK(bicl(coll, fr) == Catch::Approx(-3.4657).margin(1e-4));
  }
  SECTION("support prior term") {
    auto coll = zeros_collection({{9, 9}, {9, 9}});
    SupportPair supp;
    supp.s1.resize(2, 3);
    supp.s1 << 1, 1, 1, 1, 1, 0;
    supp.s2 = Eigen::MatrixXi::Ones(2, 3);
    Penalty pen = penalty(coll, ModelKind::PiRho, supp);
    double expected_s1 = 2.0 * (2.0 * std::log(3.0) + 0.0 + std::log(3.0));
    CHECK(std::abs(pen.pen_s1 - expected_s1) < 1e-12);
    CHECK(pen.pen_s1 == Catch::Approx(6.5917).margin(1e-4));
    // every network populates all blocks on the column side
    CHECK(std::abs(pen.pen_s2 - 2.0 * 2.0 * std::log(3.0)) < 1e-12);
  }
  SECTION("pirho with full supports shares the iid alpha penalty") {
    auto coll = zeros_collection({{10, 12}, {14, 8}});
    Penalty iid = penalty(coll, ModelKind::Iid, SupportPair::all_ones(2, 3, 2));
    Penalty pirho = penalty(coll, ModelKind::PiRho, SupportPair::all_ones(2, 3, 2));
    CHECK(std::abs(iid.pen_alpha - pirho.pen_alpha) < 1e-12);
  }
  SECTION("bicl decreases when the penalty grows at fixed elbo") {
    auto coll = zeros_collection({{30, 30}, {30, 30}});
    FitResult small, big;
    small.params.kind = ModelKind::Iid;
    small.support = SupportPair::all_ones(2, 2, 2);
    small.elbo = -100.0;
    big = small;
    big.support = SupportPair::all_ones(2, 4, 4);
    CHECK(bicl(coll, small) > bicl(coll, big));
  }
}

TEST_CASE("bicl formulas are symmetric under transposition") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0, 1);
  auto sim = sample_collection(SimDesign::partition_triple(0.3), 3);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[0], sim.coll.networks[10]};
  FitOptions fo;
  fo.seed = 5;
  fo.n_init = 2;
  fo.max_iter = 20;
  SupportPair supp = SupportPair::all_ones(2, 3, 2);
  supp.s1(0, 2) = 0;
  for (ModelKind kind : {ModelKind::Pi, ModelKind::PiRho}) {
    auto fr = fit(coll, kind, 3, 2, supp, fo);
    fr.bicl = bicl(coll, fr);

    // transpose everything by hand
    NetworkCollection tcoll;
    tcoll.emission = Emission::Bernoulli;
    for (const auto& net : coll.networks) {
      tcoll.networks.push_back(make_network(net.name + "_t", net.values.transpose(),
                                            net.observed.transpose()));
    }
    FitResult tfr;
    tfr.params.kind = kind == ModelKind::Pi ? ModelKind::Rho : kind;
    tfr.params.emission = Emission::Bernoulli;
    tfr.params.pi = fr.params.rho;
    tfr.params.rho = fr.params.pi;
    tfr.params.alphas = {fr.params.alpha().transpose()};
    tfr.support.s1 = fr.support.s2;
    tfr.support.s2 = fr.support.s1;
    for (std::size_t m = 0; m < 2; ++m) {
      tfr.state.tau1.push_back(fr.state.tau2[m]);
      tfr.state.tau2.push_back(fr.state.tau1[m]);
    }
    tfr.elbo = elbo(tcoll, tfr.params, tfr.state);
    CHECK(std::abs(tfr.elbo - fr.elbo) < 1e-8);
    tfr.bicl = bicl(tcoll, tfr);
    CHECK(std::abs(tfr.bicl - fr.bicl) < 1e-8);
  }
}

TEST_CASE("search_support prunes a planted empty block") {
  auto sim = sample_collection(SimDesign::eps_alpha(0.22), 77);
  SelectOptions opts;
  opts.fit.seed = 11;
  opts.fit.n_init = 3;
  auto [supp, fr] = search_support(sim.coll, ModelKind::PiRho, 4, 4, opts);
  // network 1 populates three row blocks, network 2 three column blocks
  CHECK(supp.s1.row(0).sum() == 3);
  CHECK(supp.s1.row(1).sum() == 4);
  CHECK(supp.s2.row(0).sum() == 4);
  CHECK(supp.s2.row(1).sum() == 3);
  CHECK(supp.admissible());
  CHECK(fr.bicl > bicl(sim.coll, fit(sim.coll, ModelKind::PiRho, 4, 4,
                                     SupportPair::all_ones(2, 4, 4), opts.fit)) -
                      1e-9);
}

TEST_CASE("search_support rejects fixed-support kinds and trivial sizes") {
  auto sim = sample_collection(SimDesign::partition_triple(0.3), 5);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[0]};
  SelectOptions opts;
  opts.fit.n_init = 1;
  CHECK_THROWS(search_support(coll, ModelKind::Iid, 2, 2, opts));
  CHECK_THROWS(search_support(coll, ModelKind::Sep, 2, 2, opts));
  // q1 = q2 = 1 on one network: the all-ones support is the only admissible one
  auto [supp, fr] = search_support(coll, ModelKind::PiRho, 1, 1, opts);
  CHECK(supp.s1 == Eigen::MatrixXi::Ones(1, 1));
  CHECK(supp.s2 == Eigen::MatrixXi::Ones(1, 1));
}

TEST_CASE("select_blocks collapses an Erdos-Renyi collection to one block") {
  auto sim = sample_collection(SimDesign::eps_alpha(0.0), 31);
  // shrink for speed: ER carries no structure at any size
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  for (const auto& net : sim.coll.networks) {
    coll.networks.push_back(make_network(net.name, net.values.topLeftCorner(80, 80),
                                         net.observed.topLeftCorner(80, 80)));
  }
  SelectOptions opts;
  opts.fit.seed = 3;
  opts.fit.n_init = 2;
  opts.max_q1 = 4;
  opts.max_q2 = 4;
  auto sel = select_blocks(coll, ModelKind::Iid, opts);
  CHECK(sel.chosen_q.first == 1);
  CHECK(sel.chosen_q.second == 1);
}

TEST_CASE("select_blocks argmax contract and grid bookkeeping") {
  auto sim = sample_collection(SimDesign::partition_triple(0.4), 9);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[0], sim.coll.networks[1]};
  SelectOptions opts;
  opts.fit.seed = 21;
  opts.fit.n_init = 2;
  opts.max_q1 = 5;
  opts.max_q2 = 5;
  auto sel = select_blocks(coll, ModelKind::Iid, opts);
  CHECK(sel.chosen_q.first == 3);
  CHECK(sel.chosen_q.second == 3);
  for (const auto& [key, value] : sel.grid) {
    CHECK(sel.best.bicl >= value - 1e-12);
  }
  CHECK(sel.grid.at(sel.chosen_q) == sel.best.bicl);
}

TEST_CASE("warm starts never lose to cold starts at the same point") {
  auto sim = sample_collection(SimDesign::partition_triple(0.35), 13);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[3], sim.coll.networks[4]};
  SelectOptions opts;
  opts.fit.seed = 8;
  opts.fit.n_init = 2;
  opts.max_q1 = 4;
  opts.max_q2 = 4;

  auto sel = select_blocks(coll, ModelKind::Iid, opts);
  for (const auto& [key, warm_fit] : sel.fits) {
    SupportPair ones = SupportPair::all_ones(2, key.first, key.second);
    FitResult cold = fit(coll, ModelKind::Iid, key.first, key.second, ones, opts.fit);
    cold.bicl = bicl(coll, cold);
    CHECK(warm_fit.bicl >= cold.bicl - 1e-6);
  }
}

TEST_CASE("compare_structure on one network makes col and sep coincide") {
  auto sim = sample_collection(SimDesign::partition_triple(0.4), 2);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[0]};
  // equal fits: compute both criteria on the same fitted state
  SelectOptions opts;
  opts.fit.seed = 14;
  opts.fit.n_init = 2;
  auto fr = fit(coll, ModelKind::Iid, 2, 3, SupportPair::all_ones(1, 2, 3), opts.fit);
  FitResult sep = fr;
  sep.params.kind = ModelKind::Sep;
  CHECK(std::abs(bicl(coll, fr) - bicl(coll, sep)) <= 1e-6);
}

TEST_CASE("compare_structure prefers the joint model on a shared collection") {
  auto sim = sample_collection(SimDesign::partition_triple(0.4), 19);
  NetworkCollection coll;
  coll.emission = Emission::Bernoulli;
  coll.networks = {sim.coll.networks[0], sim.coll.networks[1], sim.coll.networks[2]};
  SelectOptions opts;
  opts.fit.seed = 6;
  opts.fit.n_init = 2;
  opts.max_q1 = 4;
  opts.max_q2 = 4;
  auto cmp = compare_structure(coll, {ModelKind::Iid}, opts);
  REQUIRE(cmp.table.size() == 2);
  CHECK(cmp.shared_structure);
  CHECK(cmp.results.at(ModelKind::Iid).best.bicl >
        cmp.results.at(ModelKind::Sep).best.bicl);
  // Sep result is the sum of the per-network selections
  double sum = 0;
  for (const auto& part : cmp.results.at(ModelKind::Sep).sep_parts) {
    sum += part.best.bicl;
  }
  CHECK(cmp.results.at(ModelKind::Sep).best.bicl == Catch::Approx(sum).margin(1e-9));
}
