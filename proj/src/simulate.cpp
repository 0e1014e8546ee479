#include "ivgl/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "ivgl/metrics.hpp"
#include "ivgl/rng.hpp"

namespace ivgl {

namespace {

// Named draw streams; each simulated quantity owns one so the generated data
// do not depend on the order components are filled in.
enum Stream : std::uint64_t {
  kZ = 1,
  kA0 = 2,
  kU = 3,
  kGammaX = 4,
  kGammaY = 5,
  kBeta = 6,
  kEpsX = 7,
  kEpsY = 8,
  kCoords = 9,
  kSeedNode = 10,
};

void validate_sim_config(const SimConfig& cfg) {
  if (cfg.setup != 1 && cfg.setup != 2) {
    throw std::invalid_argument("simulate: setup must be 1 or 2");
  }
  if (cfg.n < 2) throw std::invalid_argument("simulate: n must be >= 2");
  if (cfg.p < 3) throw std::invalid_argument("simulate: p must be >= 3");
  if (cfg.q < 1) throw std::invalid_argument("simulate: q must be >= 1");
  if (cfg.s0 < 1 || cfg.s0 > cfg.p) {
    throw std::invalid_argument("simulate: s0 must be in [1, p]");
  }
  if (!(cfg.si > 0.0)) throw std::invalid_argument("simulate: si must be positive");
  if (!(cfg.first_stage_density > 0.0) || cfg.first_stage_density > 1.0) {
    throw std::invalid_argument("simulate: first_stage_density must be in (0, 1]");
  }
  if (!(cfg.gamma_min >= 0.0) || !(cfg.gamma_max >= cfg.gamma_min)) {
    throw std::invalid_argument("simulate: invalid confounding range");
  }
  if (cfg.n_replicates < 1) {
    throw std::invalid_argument("simulate: n_replicates must be >= 1");
  }
  if (cfg.setup == 2) {
    if (cfg.n_invalid < 0 || cfg.n_invalid > cfg.q) {
      throw std::invalid_argument("simulate: n_invalid must be in [0, q]");
    }
    if (!(cfg.coord_max > 0.0)) {
      throw std::invalid_argument("simulate: coord_max must be positive");
    }
    if (!(cfg.distance_threshold > 0.0)) {
      throw std::invalid_argument("simulate: distance_threshold must be positive");
    }
  }
}

Eigen::MatrixXd draw_normal_matrix(Philox& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

double signed_uniform(Philox& rng, double lo, double hi) {
  double mag = rng.uniform(lo, hi);
  return rng.uniform() < 0.5 ? -mag : mag;
}

/// Parts shared by both setups: instruments, first stage, confounder,
/// loadings, exposure noise, X itself.
struct CommonDraws {
  Eigen::MatrixXd Z;
  Eigen::MatrixXd A0;
  Eigen::VectorXd U;
  Eigen::VectorXd gamma_x;
  double gamma_y = 0.0;
  Eigen::MatrixXd X;
};

CommonDraws draw_common(const SimConfig& cfg, std::uint64_t seed) {
  CommonDraws d;
  Philox base(seed);

  Philox rng_z = base.stream(kZ);
  d.Z = draw_normal_matrix(rng_z, cfg.n, cfg.q);

  const int per_column = static_cast<int>(std::ceil(cfg.first_stage_density * cfg.q));
  Philox rng_a = base.stream(kA0);
  d.A0 = Eigen::MatrixXd::Zero(cfg.q, cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    std::vector<int> rows = rng_a.sample_without_replacement(cfg.q, per_column);
    for (int r : rows) d.A0(r, j) = rng_a.normal();
  }

  Philox rng_u = base.stream(kU);
  d.U.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) d.U[i] = rng_u.normal();

  Philox rng_gx = base.stream(kGammaX);
  d.gamma_x.resize(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    d.gamma_x[j] = signed_uniform(rng_gx, cfg.gamma_min, cfg.gamma_max);
  }

  Philox rng_gy = base.stream(kGammaY);
  d.gamma_y = signed_uniform(rng_gy, cfg.gamma_min, cfg.gamma_max);

  Philox rng_ex = base.stream(kEpsX);
  Eigen::MatrixXd eps_x = draw_normal_matrix(rng_ex, cfg.n, cfg.p);

  d.X = d.Z * d.A0 + d.U * d.gamma_x.transpose() + eps_x;
  return d;
}

Eigen::VectorXd draw_beta0(const SimConfig& cfg, std::uint64_t seed,
                           const std::vector<int>& S0) {
  Philox rng(seed);
  Philox rng_b = rng.stream(kBeta);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(cfg.p);
  for (int j : S0) {  // S0 ascending: value assignment order is part of the protocol
    beta0[j] = cfg.si * signed_uniform(rng_b, 0.5, 1.0);
  }
  return beta0;
}

Eigen::VectorXd draw_eps_y(const SimConfig& cfg, std::uint64_t seed) {
  Philox rng(seed);
  Philox rng_ey = rng.stream(kEpsY);
  Eigen::VectorXd e(cfg.n);
  for (int i = 0; i < cfg.n; ++i) e[i] = rng_ey.normal();
  return e;
}

}  // namespace

SimData gen_setup1(const SimConfig& cfg, std::uint64_t seed) {
  validate_sim_config(cfg);
  CommonDraws d = draw_common(cfg, seed);

  SimData out;
  out.seed = seed;
  SimTruth& t = out.truth;
  t.graph = build_ring(cfg.p);
  t.laplacian_kind = LaplacianKind::normalized;
  t.S0.resize(cfg.s0);
  for (int j = 0; j < cfg.s0; ++j) t.S0[j] = j;  // contiguous on the ring
  t.beta0 = draw_beta0(cfg, seed, t.S0);
  t.alpha0 = Eigen::VectorXd::Zero(cfg.q);
  t.A0 = std::move(d.A0);
  t.gamma_x = std::move(d.gamma_x);
  t.gamma_y = d.gamma_y;
  t.U = std::move(d.U);

  Dataset& ds = out.dataset;
  ds.Z = std::move(d.Z);
  ds.X = std::move(d.X);
  ds.Y = ds.X * t.beta0 + t.gamma_y * t.U + draw_eps_y(cfg, seed);
  return out;
}

SimData gen_setup2(const SimConfig& cfg, std::uint64_t seed) {
  validate_sim_config(cfg);
  CommonDraws d = draw_common(cfg, seed);
  Philox base(seed);

  SimData out;
  out.seed = seed;
  SimTruth& t = out.truth;

  Philox rng_c = base.stream(kCoords);
  t.coords.resize(cfg.p, 3);
  for (int j = 0; j < cfg.p; ++j) {
    for (int a = 0; a < 3; ++a) t.coords(j, a) = rng_c.uniform(0.0, cfg.coord_max);
  }
  t.graph = build_distance_graph(t.coords, cfg.distance_threshold);
  t.laplacian_kind = LaplacianKind::unnormalized;

  Philox rng_s = base.stream(kSeedNode);
  int seed_node = static_cast<int>(rng_s.bounded(cfg.p));
  t.S0 = contiguous_cluster(t.graph, seed_node, cfg.s0);
  std::sort(t.S0.begin(), t.S0.end());

  t.beta0 = draw_beta0(cfg, seed, t.S0);
  t.alpha0 = Eigen::VectorXd::Zero(cfg.q);
  for (int l = 0; l < cfg.n_invalid; ++l) t.alpha0[l] = cfg.alpha_value;
  t.A0 = std::move(d.A0);
  t.gamma_x = std::move(d.gamma_x);
  t.gamma_y = d.gamma_y;
  t.U = std::move(d.U);

  Dataset& ds = out.dataset;
  ds.Z = std::move(d.Z);
  ds.X = std::move(d.X);
  ds.Y = ds.X * t.beta0 + ds.Z * t.alpha0 + t.gamma_y * t.U + draw_eps_y(cfg, seed);
  return out;
}

SimData gen_dataset(const SimConfig& cfg, std::uint64_t seed) {
  return cfg.setup == 1 ? gen_setup1(cfg, seed) : gen_setup2(cfg, seed);
}

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  double h = (values.size() - 1) * q;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

namespace {

void run_one_replicate(const SimConfig& cfg, const std::vector<Method>& methods,
                       int replicate, ReplicateRecord* out) {
  std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(replicate);
  for (std::size_t m = 0; m < methods.size(); ++m) {
    out[m] = ReplicateRecord{};
    out[m].replicate = replicate;
    out[m].seed = seed;
    out[m].method = methods[m];
    out[m].mse = std::numeric_limits<double>::quiet_NaN();
    out[m].mcc_value = std::numeric_limits<double>::quiet_NaN();
    out[m].irrep = std::numeric_limits<double>::quiet_NaN();
  }

  SimData data;
  Laplacian L;
  try {
    data = gen_dataset(cfg, seed);
    L = laplacian(data.truth.graph, data.truth.laplacian_kind);
  } catch (const std::exception& e) {
    for (std::size_t m = 0; m < methods.size(); ++m) out[m].error = e.what();
    return;
  }

  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.rng_seed = seed;

  bool need_stage1 = false;
  for (Method m : methods) {
    if (m != Method::GL) need_stage1 = true;
  }
  Stage1Fit stage1;
  std::string stage1_error;
  if (need_stage1) {
    try {
      stage1 = stage1_fit(data.dataset.Z, data.dataset.X, solver_cfg);
    } catch (const std::exception& e) {
      stage1_error = e.what();
    }
  }

  Eigen::VectorXd truth_signs(data.truth.S0.size());
  for (std::size_t i = 0; i < data.truth.S0.size(); ++i) {
    truth_signs[i] = data.truth.beta0[data.truth.S0[i]] >= 0.0 ? 1.0 : -1.0;
  }

  for (std::size_t m = 0; m < methods.size(); ++m) {
    ReplicateRecord& rec = out[m];
    Method method = methods[m];
    if (method != Method::GL && !stage1_error.empty()) {
      rec.error = stage1_error;
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    try {
      FitResult fit;
      switch (method) {
        case Method::GL:
          fit = gl_fit(data.dataset, L, solver_cfg, cfg.lambda2_grid);
          break;
        case Method::IVL:
          fit = ivl_fit_with_stage1(data.dataset, stage1, solver_cfg);
          break;
        case Method::IVGL:
          fit = ivgl_fit_with_stage1(data.dataset, L, stage1, solver_cfg, cfg.lambda2_grid);
          break;
        case Method::IVGLS: {
          IvglsOptions opts = cfg.ivgls;
          opts.lambda2_grid = cfg.lambda2_grid;
          fit = ivgls_fit_with_stage1(data.dataset, L, stage1, solver_cfg, opts);
          break;
        }
      }
      rec.ok = true;
      rec.mse = mse(fit.beta, data.truth.beta0);
      rec.mcc_value = mcc(selection_outcome(fit.beta, data.truth.beta0));
      rec.sign_ok = sign_recovery(fit.beta, data.truth.beta0);
      rec.support_size = static_cast<int>(fit.support.size());
      rec.lambda1 = fit.lambda1;
      rec.lambda2 = fit.lambda2;
      rec.lambda3 = fit.lambda3;
      rec.converged = fit.converged;
      rec.kkt = fit.max_kkt;
      if (method == Method::IVGLS && cfg.n_invalid > 0) {
        rec.invalid_detected = true;
        for (int l = 0; l < cfg.n_invalid; ++l) {
          if (fit.alpha.size() <= l || fit.alpha[l] == 0.0) rec.invalid_detected = false;
        }
      }
      try {
        const Eigen::MatrixXd& design = method == Method::GL ? data.dataset.X : stage1.X_hat;
        rec.irrep = irrepresentability(design, L, fit.lambda2, data.truth.S0, truth_signs);
      } catch (const std::exception&) {
        // leave NaN: diagnostic unavailable for this replicate
      }
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.runtime_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
}

}  // namespace

std::vector<CellSummary> summarize(const SimConfig& cfg,
                                   const std::vector<ReplicateRecord>& records,
                                   const std::vector<Method>& methods) {
  std::vector<CellSummary> cells;
  for (Method method : methods) {
    CellSummary cell;
    cell.setup = cfg.setup;
    cell.si = cfg.si;
    cell.s0 = cfg.s0;
    cell.method = method;
    std::vector<double> mses, mccs;
    for (const ReplicateRecord& rec : records) {
      if (rec.method == method && rec.ok) {
        mses.push_back(rec.mse);
        mccs.push_back(rec.mcc_value);
      }
    }
    cell.n_ok = static_cast<int>(mses.size());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (cell.n_ok == 0) {
      cell.mean_mse = cell.se_mse = cell.median_mcc = cell.mcc_q1 = cell.mcc_q3 = nan;
    } else {
      double mean = 0.0;
      for (double v : mses) mean += v;
      mean /= cell.n_ok;
      cell.mean_mse = mean;
      if (cell.n_ok >= 2) {
        double ss = 0.0;
        for (double v : mses) ss += (v - mean) * (v - mean);
        cell.se_mse = std::sqrt(ss / (cell.n_ok - 1) / cell.n_ok);
      } else {
        cell.se_mse = nan;
      }
      cell.median_mcc = quantile_type7(mccs, 0.5);
      cell.mcc_q1 = quantile_type7(mccs, 0.25);
      cell.mcc_q3 = quantile_type7(mccs, 0.75);
    }
    cells.push_back(cell);
  }
  return cells;
}

SummaryTable run_replications(const SimConfig& cfg, const std::vector<Method>& methods,
                              int jobs) {
  validate_sim_config(cfg);
  if (methods.empty()) throw std::invalid_argument("run_replications: no methods given");
  if (jobs < 1) {
    unsigned hc = std::thread::hardware_concurrency();
    jobs = hc > 0 ? static_cast<int>(hc) : 1;
  }
  jobs = std::min(jobs, cfg.n_replicates);

  SummaryTable table;
  table.config = cfg;
  table.records.resize(static_cast<std::size_t>(cfg.n_replicates) * methods.size());

  if (jobs <= 1) {
    for (int r = 1; r <= cfg.n_replicates; ++r) {
      run_one_replicate(cfg, methods, r,
                        table.records.data() + static_cast<std::size_t>(r - 1) * methods.size());
    }
  } else {
    std::atomic<int> next{1};
    auto worker = [&]() {
      for (;;) {
        int r = next.fetch_add(1);
        if (r > cfg.n_replicates) return;
        run_one_replicate(cfg, methods, r,
                          table.records.data() + static_cast<std::size_t>(r - 1) * methods.size());
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  table.cells = summarize(cfg, table.records, methods);
  return table;
}

}  // namespace ivgl
