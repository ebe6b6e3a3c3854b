#pragma once

#include "stochwave/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stochwave {

struct EnsembleConfig {
  SimConfig base;
  int paths = 1;
  std::uint64_t master_seed = 0;
  int record_stride = 1;
};

/// Per-grid-point mean and standard error over the paths alive at that point.
struct SeriesStat {
  std::vector<double> mean;
  std::vector<double> se;
};

struct EnsembleStats {
  int paths = 0;
  std::vector<std::int64_t> step;
  std::vector<double> t;
  std::vector<int> alive;
  std::vector<double> blowup_fraction;  // fraction of paths stopped at or before t
  std::vector<SeriesStat> series;       // indexed like kTrajectoryColumns
  std::vector<double> path_sup_e;
  std::vector<StopInfo> path_stop;

  const SeriesStat& column(std::string_view name) const;
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<TrajectoryRecord> records;
};

/// Seed of path k; identical for every worker count and completion order.
std::uint64_t derive_path_seed(std::uint64_t master_seed, std::uint64_t path_index);

/// Worker count from STOCHWAVE_WORKERS, falling back to hardware concurrency.
int default_worker_count();

void validate_ensemble(const EnsembleConfig& cfg);

/// Runs cfg.paths independent paths on `workers` threads and reduces them in path order.
EnsembleResult run_ensemble(const EnsembleConfig& cfg, int workers = 0);
EnsembleResult run_ensemble(const GalerkinModel& model, const EnsembleConfig& cfg, int workers = 0);

/// Row of each path at each grid step (outer index: grid point), nullptr once the path has stopped.
using GridRows = std::vector<std::vector<const TrajectoryRow*>>;
GridRows rows_on_grid(std::span<const TrajectoryRecord> records, const std::vector<std::int64_t>& grid_steps);

/// Reduction of finished paths; the output depends only on the order of `records`.
EnsembleStats aggregate(std::span<const TrajectoryRecord> records, std::int64_t total_steps, double dt,
                        int record_stride);

struct Proportion {
  double phat = 0.0;
  double half_width = 0.0;  // 95% normal-approximation half width
};

Proportion estimate_blowup_probability(const EnsembleStats& stats, double T);

struct SupEnergy {
  double mean = 0.0;
  double se = 0.0;
  int used = 0;
  int excluded = 0;  // paths that stopped before the horizon
};

/// Sample mean of max_t e(u(t)) over paths that completed.
SupEnergy sup_energy_estimate(const EnsembleStats& stats);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Persistence.
std::string format_double(double x);
void write_trajectory_csv(const std::filesystem::path& file, const TrajectoryRecord& rec);
TrajectoryRecord read_trajectory_csv(const std::filesystem::path& file);
void write_aggregate_csv(const std::filesystem::path& file, const EnsembleStats& stats);
/// Writes paths/path_<k>.csv and aggregate.csv under `dir`.
void write_ensemble_outputs(const std::filesystem::path& dir, const EnsembleResult& result);

}  // namespace stochwave
