#pragma once

#include "stochwave/analysis.hpp"
#include "stochwave/dynamics.hpp"
#include "stochwave/ensemble.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stochwave {

inline constexpr std::string_view kVersion = "stochwave 0.1.0";

/// Invalid run configuration. `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Either lambda0 * mu_i^-gamma or an explicit list of eigenvalues.
struct SpectrumSpec {
  double lambda0 = 1.0;
  double gamma = 1.0;
  std::optional<std::vector<double>> values;
};

struct RunConfig {
  EnsembleConfig ensemble;  // ensemble.base.noise.lambda is filled from `spectrum`
  SpectrumSpec spectrum;
  std::optional<double> alpha;  // none: alpha_select(p, q)
  double mu = 1e-3;
  double beta = 0.1;
  std::optional<double> K;

  const SimConfig& sim() const { return ensemble.base; }
  /// Blow-up parameters with alpha resolved; throws std::invalid_argument for p <= q without alpha.
  BlowupParams blowup() const;
};

/// Parses and validates a JSON document. Unknown keys are rejected.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& file);

/// Recomputes the noise spectrum after mode count or spectrum changes, then validates.
void resolve(RunConfig& cfg);

/// Canonical JSON of the configuration. With a model, a "resolved" block records the
/// grid, step size, step count and spectrum actually used, plus the code version.
std::string dump_run_config(const RunConfig& cfg, const GalerkinModel* model = nullptr);

}  // namespace stochwave
