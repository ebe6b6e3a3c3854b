#include "stochwave/ensemble.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stochwave;
namespace fs = std::filesystem;

namespace {

EnsembleConfig noisy(int paths, double eps = 0.2) {
  EnsembleConfig c;
  SimConfig& s = c.base;
  s.modes = 8;
  s.exponents = {2.0, 4.0, 1};
  s.dt = 2e-3;
  s.horizon = 0.5;
  const SpectralBasis b = build_basis(s.domain, 8, default_grid_size(8));
  s.noise.lambda = make_spectrum(b, 1.0, 1.0);
  s.noise.eps = eps;
  s.noise.kappa = 0.5;
  s.noise.sigma0 = FieldProfile::sine(1.0);
  s.u0 = FieldProfile::modal({0.3, 0.1});
  c.paths = paths;
  c.master_seed = 99;
  c.record_stride = 10;
  return c;
}

StopInfo stopped_at(double t) { return {StopReason::threshold, t, static_cast<std::int64_t>(t * 100)}; }

std::string slurp(const fs::path& f) {
  std::ifstream is(f, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("stochwave_test_ensemble_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("a single path has zero standard error") {
  const EnsembleResult r = run_ensemble(noisy(1), 1);
  REQUIRE(r.records.size() == 1);
  for (const SeriesStat& s : r.stats.series) {
    for (double se : s.se) CHECK(se == 0.0);
  }
  CHECK(r.stats.column("calE").mean.front() == r.records[0].rows.front().calE);
}

TEST_CASE("without noise all paths coincide") {
  const EnsembleResult r = run_ensemble(noisy(5, 0.0), 2);
  for (std::size_t k = 1; k < r.records.size(); ++k) {
    REQUIRE(r.records[k].rows.size() == r.records[0].rows.size());
    for (std::size_t i = 0; i < r.records[0].rows.size(); ++i) {
      CHECK(r.records[k].rows[i].calE == r.records[0].rows[i].calE);
    }
  }
  for (double se : r.stats.column("grad_u_sq").se) CHECK(se == doctest::Approx(0.0));
}

TEST_CASE("path seeds are distinct and reproducible") {
  CHECK(derive_path_seed(1, 0) == derive_path_seed(1, 0));
  CHECK(derive_path_seed(1, 0) != derive_path_seed(1, 1));
  CHECK(derive_path_seed(1, 0) != derive_path_seed(2, 0));
  const EnsembleResult r = run_ensemble(noisy(3), 1);
  for (std::uint64_t k = 0; k < 3; ++k) CHECK(r.records[k].seed == derive_path_seed(99, k));
}

TEST_CASE("results do not depend on the worker count") {
  const EnsembleConfig c = noisy(12);
  const EnsembleResult one = run_ensemble(c, 1);
  const EnsembleResult four = run_ensemble(c, 4);
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(one.records[k].rows.back().calE == four.records[k].rows.back().calE);
    CHECK(one.records[k].sup_e == four.records[k].sup_e);
  }
  for (std::size_t c2 = 0; c2 < kTrajectoryColumns.size(); ++c2) {
    CHECK(one.stats.series[c2].mean == four.stats.series[c2].mean);
    CHECK(one.stats.series[c2].se == four.stats.series[c2].se);
  }
}

TEST_CASE("aggregate matches a direct mean and standard error") {
  const EnsembleResult r = run_ensemble(noisy(7), 2);
  const std::size_t g = 20;
  double sum = 0.0;
  for (const auto& rec : r.records) sum += rec.rows[g].v_l2_sq;
  const double mean = sum / 7.0;
  double ss = 0.0;
  for (const auto& rec : r.records) ss += std::pow(rec.rows[g].v_l2_sq - mean, 2);
  CHECK(r.stats.column("v_l2_sq").mean[g] == doctest::Approx(mean).epsilon(1e-14));
  CHECK(r.stats.column("v_l2_sq").se[g] == doctest::Approx(std::sqrt(ss / 6.0 / 7.0)).epsilon(1e-12));
  CHECK(r.stats.step[g] == 200);
  CHECK(r.stats.t[g] == doctest::Approx(0.4));
  CHECK(r.stats.alive[g] == 7);
}

TEST_CASE("stopped paths leave the grid and raise the blow-up fraction") {
  TrajectoryRecord done;
  TrajectoryRecord early;
  for (std::int64_t k = 0; k <= 10; ++k) {
    TrajectoryRow row;
    row.step = k;
    row.t = 0.1 * static_cast<double>(k);
    row.calE = 1.0;
    done.rows.push_back(row);
    if (k <= 4) {
      row.calE = 3.0;
      early.rows.push_back(row);
    }
  }
  done.stop = {StopReason::completed, 1.0, 10};
  early.stop = {StopReason::threshold, 0.4, 4};
  early.sup_e = 1e9;
  done.sup_e = 2.0;
  const std::vector<TrajectoryRecord> recs{done, early};
  const EnsembleStats st = aggregate(recs, 10, 0.1, 1);
  CHECK(st.alive[4] == 2);
  CHECK(st.alive[5] == 1);
  CHECK(st.column("calE").mean[4] == doctest::Approx(2.0));
  CHECK(st.column("calE").mean[5] == doctest::Approx(1.0));
  for (std::size_t g = 1; g < st.blowup_fraction.size(); ++g) {
    CHECK(st.blowup_fraction[g] >= st.blowup_fraction[g - 1]);
  }
  CHECK(st.blowup_fraction[3] == 0.0);
  CHECK(st.blowup_fraction[4] == 0.5);

  const SupEnergy se = sup_energy_estimate(st);
  CHECK(se.used == 1);
  CHECK(se.excluded == 1);
  CHECK(se.mean == 2.0);
}

TEST_CASE("blow-up proportion with a normal-approximation interval") {
  EnsembleStats st;
  st.paths = 100;
  for (int k = 0; k < 100; ++k) st.path_stop.push_back(k < 30 ? stopped_at(0.5) : StopInfo{});
  const Proportion p = estimate_blowup_probability(st, 1.0);
  CHECK(p.phat == doctest::Approx(0.30));
  CHECK(p.half_width == doctest::Approx(0.0898).epsilon(1e-3));
  CHECK(estimate_blowup_probability(st, 0.25).phat == 0.0);
}

TEST_CASE("trajectory CSV round trip is exact") {
  const EnsembleResult r = run_ensemble(noisy(1), 1);
  const fs::path d = scratch_dir("roundtrip");
  write_trajectory_csv(d / "p.csv", r.records[0]);
  const TrajectoryRecord back = read_trajectory_csv(d / "p.csv");
  CHECK(back.seed == r.records[0].seed);
  CHECK(back.sup_e == r.records[0].sup_e);
  CHECK(back.stop.reason == r.records[0].stop.reason);
  REQUIRE(back.rows.size() == r.records[0].rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].step == r.records[0].rows[i].step);
    for (const auto& [name, member] : kTrajectoryColumns) CHECK(back.rows[i].*member == r.records[0].rows[i].*member);
  }
  const std::string text = slurp(d / "p.csv");
  CHECK(text.rfind("# stochwave-trajectory v1 seed=", 0) == 0);
  CHECK(text.find("\nstep,t,v_l2_sq,grad_u_sq,u_lp_p,v_lq_q,u_dot_v,e_energy,calE,damping_int,source_work_int,"
                  "stoch_int,ito_corr_int,noise_qv\n") != std::string::npos);

  std::ofstream(d / "bad.csv") << "step,t\n0,0\n";
  CHECK_THROWS_AS(read_trajectory_csv(d / "bad.csv"), std::runtime_error);
  CHECK_THROWS_AS(read_trajectory_csv(d / "missing.csv"), std::runtime_error);
  fs::remove_all(d);
}

TEST_CASE("run directories are byte identical across worker counts") {
  const EnsembleConfig c = noisy(6);
  const fs::path a = scratch_dir("a");
  const fs::path b = scratch_dir("b");
  write_ensemble_outputs(a, run_ensemble(c, 1));
  write_ensemble_outputs(b, run_ensemble(c, 3));
  CHECK(slurp(a / "aggregate.csv") == slurp(b / "aggregate.csv"));
  for (int k = 0; k < 6; ++k) {
    const std::string name = "path_" + std::to_string(k) + ".csv";
    CHECK(slurp(a / "paths" / name) == slurp(b / "paths" / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum s;
  s.add(1e16);
  for (int k = 0; k < 1000; ++k) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
  double naive = 1e16;
  for (int k = 0; k < 1000; ++k) naive += 1.0;
  CHECK(naive - 1e16 != 1000.0);
}

TEST_CASE("invalid ensembles are rejected") {
  EnsembleConfig c = noisy(0);
  CHECK_THROWS_AS(validate_ensemble(c), std::invalid_argument);
  c.paths = 2;
  c.record_stride = 0;
  CHECK_THROWS_AS(run_ensemble(c, 1), std::invalid_argument);
}
