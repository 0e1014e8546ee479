#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "ivgl/simulate.hpp"

using ivgl::CellSummary;
using ivgl::gen_dataset;
using ivgl::LaplacianKind;
using ivgl::Method;
using ivgl::quantile_type7;
using ivgl::ReplicateRecord;
using ivgl::run_replications;
using ivgl::SimConfig;
using ivgl::SimData;
using ivgl::summarize;
using ivgl::SummaryTable;

namespace {

// Small-but-valid configuration so generator tests stay fast.
SimConfig tiny_config(int setup) {
  SimConfig cfg;
  cfg.setup = setup;
  cfg.n = 30;
  cfg.p = 12;
  cfg.q = 40;
  cfg.s0 = 4;
  cfg.si = 1.0;
  cfg.n_invalid = 5;
  return cfg;
}

int column_nonzeros(const Eigen::MatrixXd& m, int col) {
  int count = 0;
  for (int i = 0; i < m.rows(); ++i)
    if (m(i, col) != 0.0) ++count;
  return count;
}

}  // namespace

TEST_CASE("setup 1 dataset has documented shapes and ring structure") {
  SimConfig cfg = tiny_config(1);
  SimData sd = gen_dataset(cfg, 7);

  CHECK(sd.dataset.X.rows() == cfg.n);
  CHECK(sd.dataset.X.cols() == cfg.p);
  CHECK(sd.dataset.Z.rows() == cfg.n);
  CHECK(sd.dataset.Z.cols() == cfg.q);
  CHECK(sd.dataset.Y.size() == cfg.n);
  CHECK(sd.truth.beta0.size() == cfg.p);
  CHECK(sd.truth.alpha0.size() == cfg.q);
  CHECK(sd.truth.A0.rows() == cfg.q);
  CHECK(sd.truth.A0.cols() == cfg.p);
  CHECK(sd.truth.U.size() == cfg.n);
  CHECK(sd.seed == 7);

  // Valid-instrument protocol: no direct effects, first s0 nodes active.
  CHECK(sd.truth.alpha0.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(sd.truth.S0.size() == static_cast<size_t>(cfg.s0));
  for (int j = 0; j < cfg.s0; ++j) CHECK(sd.truth.S0[j] == j);

  // Ring: every node has exactly its two cycle neighbors.
  CHECK(sd.truth.graph.node_count() == cfg.p);
  CHECK(static_cast<int>(sd.truth.graph.edges().size()) == cfg.p);
  for (int j = 0; j < cfg.p; ++j) CHECK(sd.truth.graph.degrees()[j] == doctest::Approx(2.0));
  CHECK(sd.truth.laplacian_kind == LaplacianKind::normalized);
  CHECK(sd.truth.coords.size() == 0);
}

TEST_CASE("first-stage matrix density is ceil(density * q) per exposure") {
  SimConfig cfg = tiny_config(1);
  cfg.first_stage_density = 0.10;
  SimData sd = gen_dataset(cfg, 3);
  const int expected = static_cast<int>(std::ceil(0.10 * cfg.q));
  for (int j = 0; j < cfg.p; ++j) CHECK(column_nonzeros(sd.truth.A0, j) == expected);

  // Density 1 fills every entry.
  cfg.first_stage_density = 1.0;
  SimData full = gen_dataset(cfg, 3);
  for (int j = 0; j < cfg.p; ++j) CHECK(column_nonzeros(full.truth.A0, j) == cfg.q);
}

TEST_CASE("true coefficients sit in the signed intensity band") {
  for (double si : {1.0, 3.0}) {
    SimConfig cfg = tiny_config(1);
    cfg.si = si;
    SimData sd = gen_dataset(cfg, 11);
    std::vector<bool> active(cfg.p, false);
    for (int j : sd.truth.S0) active[j] = true;
    for (int j = 0; j < cfg.p; ++j) {
      if (active[j]) {
        const double mag = std::abs(sd.truth.beta0[j]);
        CHECK(mag >= 0.5 * si);
        CHECK(mag <= 1.0 * si);
      } else {
        CHECK(sd.truth.beta0[j] == 0.0);
      }
    }
  }
}

TEST_CASE("confounder loadings respect the configured range") {
  SimConfig cfg = tiny_config(2);
  SimData sd = gen_dataset(cfg, 5);
  CHECK(std::abs(sd.truth.gamma_y) >= cfg.gamma_min);
  CHECK(std::abs(sd.truth.gamma_y) <= cfg.gamma_max);
  for (int j = 0; j < cfg.p; ++j) {
    CHECK(std::abs(sd.truth.gamma_x[j]) >= cfg.gamma_min);
    CHECK(std::abs(sd.truth.gamma_x[j]) <= cfg.gamma_max);
  }
}

TEST_CASE("same seed regenerates the dataset bit for bit") {
  for (int setup : {1, 2}) {
    SimConfig cfg = tiny_config(setup);
    SimData a = gen_dataset(cfg, 42);
    SimData b = gen_dataset(cfg, 42);
    CHECK((a.dataset.X - b.dataset.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.dataset.Z - b.dataset.Z).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.dataset.Y - b.dataset.Y).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.truth.beta0 - b.truth.beta0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.truth.A0 - b.truth.A0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.truth.S0 == b.truth.S0);

    SimData c = gen_dataset(cfg, 43);
    CHECK((a.dataset.Y - c.dataset.Y).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("setup 2 places invalid instruments and a connected support") {
  SimConfig cfg = tiny_config(2);
  cfg.distance_threshold = 60.0;  // keep the sparse random graph well connected
  SimData sd = gen_dataset(cfg, 9);

  // First n_invalid instruments carry the constant direct effect.
  for (int l = 0; l < cfg.q; ++l) {
    if (l < cfg.n_invalid)
      CHECK(sd.truth.alpha0[l] == doctest::Approx(cfg.alpha_value));
    else
      CHECK(sd.truth.alpha0[l] == 0.0);
  }

  // Coordinates live in the cube and define the distance graph.
  REQUIRE(sd.truth.coords.rows() == cfg.p);
  REQUIRE(sd.truth.coords.cols() == 3);
  CHECK(sd.truth.coords.minCoeff() >= 0.0);
  CHECK(sd.truth.coords.maxCoeff() <= cfg.coord_max);
  for (const auto& e : sd.truth.graph.edges()) {
    double d = (sd.truth.coords.row(e.src) - sd.truth.coords.row(e.dst)).norm();
    CHECK(d < cfg.distance_threshold);
  }
  CHECK(sd.truth.laplacian_kind == LaplacianKind::unnormalized);

  // Support is sorted, duplicate-free, and connected within the graph.
  REQUIRE(sd.truth.S0.size() == static_cast<size_t>(cfg.s0));
  CHECK(std::is_sorted(sd.truth.S0.begin(), sd.truth.S0.end()));
  CHECK(std::adjacent_find(sd.truth.S0.begin(), sd.truth.S0.end()) == sd.truth.S0.end());

  std::vector<bool> in_s(cfg.p, false), seen(cfg.p, false);
  for (int j : sd.truth.S0) in_s[j] = true;
  std::queue<int> frontier;
  frontier.push(sd.truth.S0[0]);
  seen[sd.truth.S0[0]] = true;
  int reached = 0;
  while (!frontier.empty()) {
    int j = frontier.front();
    frontier.pop();
    ++reached;
    for (int k : sd.truth.graph.neighbors()[j]) {
      if (in_s[k] && !seen[k]) {
        seen[k] = true;
        frontier.push(k);
      }
    }
  }
  CHECK(reached == cfg.s0);
}

TEST_CASE("generator rejects out-of-range configurations") {
  SimConfig bad = tiny_config(1);
  bad.setup = 3;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.s0 = 0;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.s0 = bad.p + 1;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.si = 0.0;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.first_stage_density = 0.0;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.first_stage_density = 1.5;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(1);
  bad.gamma_min = 0.9;  // min above max
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);

  bad = tiny_config(2);
  bad.n_invalid = bad.q + 1;
  CHECK_THROWS_AS(gen_dataset(bad, 0), std::invalid_argument);
}

TEST_CASE("type-7 quantile interpolates linearly") {
  std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_type7(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile_type7(v, 1.0) == doctest::Approx(4.0));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_type7(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile_type7(v, 0.75) == doctest::Approx(3.25));

  // Order of the input must not matter.
  std::vector<double> shuffled{4.0, 1.0, 3.0, 2.0};
  CHECK(quantile_type7(shuffled, 0.25) == doctest::Approx(1.75));

  std::vector<double> one{5.0};
  CHECK(quantile_type7(one, 0.0) == doctest::Approx(5.0));
  CHECK(quantile_type7(one, 1.0) == doctest::Approx(5.0));

  std::vector<double> odd{10.0, 20.0, 40.0};
  CHECK(quantile_type7(odd, 0.5) == doctest::Approx(20.0));
  CHECK(quantile_type7(odd, 0.25) == doctest::Approx(15.0));

  CHECK_THROWS_AS(quantile_type7(v, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(quantile_type7(v, 1.1), std::invalid_argument);
  CHECK_THROWS_AS(quantile_type7({}, 0.5), std::invalid_argument);
}

TEST_CASE("summarize aggregates successful replicates per method") {
  SimConfig cfg = tiny_config(1);
  std::vector<ReplicateRecord> records;
  for (int r = 0; r < 3; ++r) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.method = Method::IVGL;
    rec.ok = true;
    rec.mse = 0.1 * (r + 1);       // 0.1, 0.2, 0.3
    rec.mcc_value = 0.5 + 0.1 * r;  // 0.5, 0.6, 0.7
    records.push_back(rec);
  }
  ReplicateRecord failed;
  failed.replicate = 3;
  failed.method = Method::IVGL;
  failed.ok = false;
  failed.mse = 99.0;  // must be ignored
  records.push_back(failed);

  std::vector<CellSummary> cells = summarize(cfg, records, {Method::IVGL});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].n_ok == 3);
  CHECK(cells[0].mean_mse == doctest::Approx(0.2));
  // SE of {0.1, 0.2, 0.3}: sd = 0.1, / sqrt(3).
  CHECK(cells[0].se_mse == doctest::Approx(0.1 / std::sqrt(3.0)));
  CHECK(cells[0].median_mcc == doctest::Approx(0.6));
  CHECK(cells[0].mcc_q1 == doctest::Approx(0.55));
  CHECK(cells[0].mcc_q3 == doctest::Approx(0.65));

  // A single successful replicate has no spread to estimate.
  std::vector<CellSummary> solo = summarize(cfg, {records[0]}, {Method::IVGL});
  REQUIRE(solo.size() == 1);
  CHECK(solo[0].n_ok == 1);
  CHECK(std::isnan(solo[0].se_mse));
}

TEST_CASE("replication harness output does not depend on the job count") {
  SimConfig cfg = tiny_config(1);
  cfg.n_replicates = 4;
  cfg.base_seed = 17;
  cfg.solver.lambda_grid_size = 20;
  cfg.solver.cv_folds = 3;

  SummaryTable serial = run_replications(cfg, {Method::GL}, 1);
  SummaryTable threaded = run_replications(cfg, {Method::GL}, 3);

  REQUIRE(serial.records.size() == 4);
  REQUIRE(threaded.records.size() == 4);
  for (size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].seed == threaded.records[i].seed);
    CHECK(serial.records[i].mse == threaded.records[i].mse);
    CHECK(serial.records[i].mcc_value == threaded.records[i].mcc_value);
    CHECK(serial.records[i].lambda1 == threaded.records[i].lambda1);
  }
  for (size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].seed == cfg.base_seed + i);
  }
}
