#include "stochwave/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stochwave {

namespace fs = std::filesystem;

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

const SeriesStat& EnsembleStats::column(std::string_view name) const {
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    if (kTrajectoryColumns[c].first == name) return series.at(c);
  }
  throw std::out_of_range("unknown trajectory column '" + std::string(name) + "'");
}

std::uint64_t derive_path_seed(std::uint64_t master_seed, std::uint64_t path_index) {
  return mix_seed(master_seed, path_index + 0x5851f42d4c957f2dULL);
}

int default_worker_count() {
  if (const char* env = std::getenv("STOCHWAVE_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void validate_ensemble(const EnsembleConfig& cfg) {
  if (cfg.paths < 1) throw std::invalid_argument("ensemble.paths must be >= 1");
  if (cfg.record_stride < 1) throw std::invalid_argument("ensemble.record_stride must be >= 1");
}

EnsembleResult run_ensemble(const EnsembleConfig& cfg, int workers) {
  validate_ensemble(cfg);
  const GalerkinModel model(cfg.base);
  return run_ensemble(model, cfg, workers);
}

EnsembleResult run_ensemble(const GalerkinModel& model, const EnsembleConfig& cfg, int workers) {
  validate_ensemble(cfg);
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, cfg.paths);

  EnsembleResult out;
  out.records.resize(static_cast<std::size_t>(cfg.paths));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (int k = next.fetch_add(1); k < cfg.paths; k = next.fetch_add(1)) {
      try {
        out.records[static_cast<std::size_t>(k)] =
            model.simulate_path(derive_path_seed(cfg.master_seed, static_cast<std::uint64_t>(k)), cfg.record_stride);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  out.stats = aggregate(out.records, model.steps(), model.dt(), cfg.record_stride);
  return out;
}

GridRows rows_on_grid(std::span<const TrajectoryRecord> records, const std::vector<std::int64_t>& grid_steps) {
  const std::size_t ng = grid_steps.size();
  GridRows at(ng, std::vector<const TrajectoryRow*>(records.size(), nullptr));
  for (std::size_t pi = 0; pi < records.size(); ++pi) {
    std::size_t g = 0;
    for (const TrajectoryRow& row : records[pi].rows) {
      while (g < ng && grid_steps[g] < row.step) ++g;
      if (g == ng) break;
      if (grid_steps[g] == row.step) at[g][pi] = &row;
    }
  }
  return at;
}

EnsembleStats aggregate(std::span<const TrajectoryRecord> records, std::int64_t total_steps, double dt,
                        int record_stride) {
  EnsembleStats st;
  st.paths = static_cast<int>(records.size());
  for (std::int64_t k = 0; k <= total_steps; k += record_stride) st.step.push_back(k);
  if (st.step.back() != total_steps) st.step.push_back(total_steps);

  const std::size_t ng = st.step.size();
  const std::size_t nc = kTrajectoryColumns.size();
  st.t.resize(ng);
  st.alive.assign(ng, 0);
  st.blowup_fraction.assign(ng, 0.0);
  st.series.assign(nc, SeriesStat{std::vector<double>(ng, 0.0), std::vector<double>(ng, 0.0)});

  for (const TrajectoryRecord& r : records) {
    st.path_sup_e.push_back(r.sup_e);
    st.path_stop.push_back(r.stop);
  }

  const GridRows at = rows_on_grid(records, st.step);

  for (std::size_t g = 0; g < ng; ++g) {
    st.t[g] = static_cast<double>(st.step[g]) * dt;
    int stopped = 0;
    for (const TrajectoryRecord& r : records) {
      if (r.stop.reason != StopReason::completed && r.stop.step <= st.step[g]) ++stopped;
    }
    st.blowup_fraction[g] = records.empty() ? 0.0 : static_cast<double>(stopped) / static_cast<double>(records.size());

    int n = 0;
    for (const TrajectoryRow* row : at[g]) n += row != nullptr;
    st.alive[g] = n;
    if (n == 0) {
      for (auto& s : st.series) {
        s.mean[g] = std::numeric_limits<double>::quiet_NaN();
        s.se[g] = std::numeric_limits<double>::quiet_NaN();
      }
      continue;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      const auto member = kTrajectoryColumns[c].second;
      CompensatedSum sum;
      for (const TrajectoryRow* row : at[g]) {
        if (row) sum.add(row->*member);
      }
      const double mean = sum.value() / n;
      CompensatedSum sq;
      for (const TrajectoryRow* row : at[g]) {
        if (row) {
          const double d = row->*member - mean;
          sq.add(d * d);
        }
      }
      st.series[c].mean[g] = mean;
      st.series[c].se[g] = n > 1 ? std::sqrt(sq.value() / (n - 1) / n) : 0.0;
    }
  }
  return st;
}

Proportion estimate_blowup_probability(const EnsembleStats& stats, double T) {
  if (stats.paths == 0) return {};
  int stopped = 0;
  for (const StopInfo& s : stats.path_stop) {
    if (s.reason != StopReason::completed && s.t <= T) ++stopped;
  }
  Proportion p;
  p.phat = static_cast<double>(stopped) / stats.paths;
  p.half_width = 1.96 * std::sqrt(p.phat * (1.0 - p.phat) / stats.paths);
  return p;
}

SupEnergy sup_energy_estimate(const EnsembleStats& stats) {
  SupEnergy out;
  CompensatedSum sum;
  std::vector<double> used;
  for (std::size_t k = 0; k < stats.path_sup_e.size(); ++k) {
    if (stats.path_stop[k].reason != StopReason::completed) {
      ++out.excluded;
      continue;
    }
    used.push_back(stats.path_sup_e[k]);
    sum.add(stats.path_sup_e[k]);
  }
  out.used = static_cast<int>(used.size());
  if (used.empty()) return out;
  out.mean = sum.value() / out.used;
  CompensatedSum sq;
  for (double x : used) sq.add((x - out.mean) * (x - out.mean));
  out.se = out.used > 1 ? std::sqrt(sq.value() / (out.used - 1) / out.used) : 0.0;
  return out;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(const fs::path& file, const TrajectoryRecord& rec) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << "# stochwave-trajectory v1 seed=" << rec.seed << " stop=" << to_string(rec.stop.reason)
     << " t_stop=" << format_double(rec.stop.t) << " step_stop=" << rec.stop.step
     << " sup_e=" << format_double(rec.sup_e) << '\n';
  os << "step";
  for (const auto& [name, member] : kTrajectoryColumns) os << ',' << name;
  os << '\n';
  for (const TrajectoryRow& r : rec.rows) {
    os << r.step;
    for (const auto& [name, member] : kTrajectoryColumns) os << ',' << format_double(r.*member);
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed for " + file.string());
}

TrajectoryRecord read_trajectory_csv(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  TrajectoryRecord rec;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# stochwave-trajectory v1", 0) != 0) {
    throw std::runtime_error(file.string() + ": not a stochwave trajectory file");
  }
  std::istringstream meta(line.substr(std::string("# stochwave-trajectory v1").size()));
  std::string kv;
  while (meta >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    if (key == "seed") rec.seed = std::stoull(val);
    else if (key == "stop") rec.stop.reason = stop_reason_from_string(val);
    else if (key == "t_stop") rec.stop.t = std::stod(val);
    else if (key == "step_stop") rec.stop.step = std::stoll(val);
    else if (key == "sup_e") rec.sup_e = std::stod(val);
  }
  std::getline(is, line);  // column header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    TrajectoryRow row;
    std::getline(ls, cell, ',');
    row.step = std::stoll(cell);
    for (const auto& [name, member] : kTrajectoryColumns) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error(file.string() + ": short row");
      row.*member = std::stod(cell);
    }
    rec.rows.push_back(row);
  }
  return rec;
}

void write_aggregate_csv(const fs::path& file, const EnsembleStats& st) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << "# stochwave-aggregate v1 paths=" << st.paths << '\n';
  os << "step,t,alive,blowup_fraction";
  for (std::size_t c = 1; c < kTrajectoryColumns.size(); ++c) {
    os << ",mean_" << kTrajectoryColumns[c].first << ",se_" << kTrajectoryColumns[c].first;
  }
  os << '\n';
  for (std::size_t g = 0; g < st.step.size(); ++g) {
    os << st.step[g] << ',' << format_double(st.t[g]) << ',' << st.alive[g] << ','
       << format_double(st.blowup_fraction[g]);
    for (std::size_t c = 1; c < kTrajectoryColumns.size(); ++c) {
      os << ',' << format_double(st.series[c].mean[g]) << ',' << format_double(st.series[c].se[g]);
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed for " + file.string());
}

void write_ensemble_outputs(const fs::path& dir, const EnsembleResult& result) {
  std::error_code ec;
  fs::create_directories(dir / "paths", ec);
  if (ec) throw std::runtime_error("cannot create " + (dir / "paths").string() + ": " + ec.message());
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    write_trajectory_csv(dir / "paths" / ("path_" + std::to_string(k) + ".csv"), result.records[k]);
  }
  write_aggregate_csv(dir / "aggregate.csv", result.stats);
}

}  // namespace stochwave
