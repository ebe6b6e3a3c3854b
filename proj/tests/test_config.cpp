#include "stochwave/config.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <string>

using namespace stochwave;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST_CASE("empty document takes the documented defaults") {
  const RunConfig c = parse_run_config("{}");
  const SimConfig& s = c.sim();
  CHECK(s.domain.kind == Domain::Kind::interval);
  CHECK(s.domain.lx == 1.0);
  CHECK(s.modes == 16);
  CHECK(s.grid == 0);
  CHECK(s.exponents.p == 4.0);
  CHECK(s.exponents.q == 2.0);
  CHECK_FALSE(s.cutoff.has_value());
  CHECK_FALSE(s.yosida_lambda.has_value());
  CHECK(s.dt == 0.0);
  CHECK(s.horizon == 1.0);
  CHECK(s.blowup_threshold == 1e6);
  CHECK(s.noise.eps == 0.0);
  CHECK(s.noise.kappa == 0.0);
  CHECK(s.noise.lambda.size() == 16);
  CHECK(c.ensemble.paths == 1);
  CHECK(c.ensemble.master_seed == 0);
  CHECK(c.ensemble.record_stride == 1);
  CHECK_FALSE(c.alpha.has_value());
  CHECK(c.mu == 1e-3);
  CHECK(c.beta == 0.1);
  CHECK_FALSE(c.K.has_value());
  CHECK(c.blowup().alpha == doctest::Approx(0.125));
}

TEST_CASE("unknown keys and bad values name the offending field") {
  CHECK(field_of(R"({"mode": 8})") == "mode");
  CHECK(field_of(R"({"noise": {"eps": 0.1, "sigma": 1}})") == "noise.sigma");
  CHECK(field_of(R"({"initial": {"u0": {"kind": "sine", "amp": 2}}})") == "initial.u0.amp");
  CHECK(field_of(R"({"initial": {"u0": {"kind": "gauss"}}})") == "initial.u0.kind");
  CHECK(field_of(R"({"exponents": {"p": 2}})") == "exponents");
  CHECK(field_of(R"({"exponents": {"p": 3, "q": 1.5}})") == "exponents");
  CHECK(field_of(R"({"ensemble": {"paths": 0}})") == "ensemble.paths");
  CHECK(field_of(R"({"ensemble": {"master_seed": -1}})") == "ensemble.master_seed");
  CHECK(field_of(R"({"ensemble": {"record_stride": 1.5}})") == "ensemble.record_stride");
  CHECK(field_of(R"({"modes": 4, "grid": 8})") == "grid");
  CHECK(field_of(R"({"dt": -1})") == "dt");
  CHECK(field_of(R"({"horizon": "long"})") == "horizon");
  CHECK(field_of(R"({"blowup": {"alpha": 0.3}})") == "blowup.alpha");
  CHECK(field_of(R"({"blowup": {"K": 0}})") == "blowup.K");
  CHECK(field_of(R"({"modes": 2, "noise": {"spectrum": {"values": [1, 2, 3]}}})") == "noise.spectrum.values");
  CHECK(field_of(R"({"modes": 2, "initial": {"u0": {"kind": "modes", "coeffs": [1, 2, 3]}}})") ==
        "initial.u0.coeffs");
  CHECK(field_of(R"({"domain": {"kind": "interval", "length": 0}})") == "domain.length");
  CHECK(field_of("[1, 2]") == "<root>");
  CHECK_THROWS_AS(parse_run_config("{"), ConfigError);
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST_CASE("p <= 2 is rejected with the exponent condition in the message") {
  try {
    parse_run_config(R"({"exponents": {"p": 2, "q": 2}})");
    FAIL("accepted p = 2");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("p > 2") != std::string::npos);
  }
}

TEST_CASE("spectrum from a power law or explicit values") {
  const RunConfig pl = parse_run_config(R"({"modes": 4, "noise": {"spectrum": {"lambda0": 2, "gamma": 1}}})");
  CHECK(pl.sim().noise.lambda[0] == doctest::Approx(2.0 / (M_PI * M_PI)));
  CHECK(pl.sim().noise.lambda[3] == doctest::Approx(2.0 / (16.0 * M_PI * M_PI)));
  const RunConfig ex = parse_run_config(R"({"modes": 2, "noise": {"spectrum": {"values": [0.5, 0.25]}}})");
  CHECK(ex.sim().noise.lambda == std::vector<double>{0.5, 0.25});

  RunConfig grown = pl;
  grown.ensemble.base.modes = 6;
  resolve(grown);
  CHECK(grown.sim().noise.lambda.size() == 6);
}

TEST_CASE("dump round trips through the parser") {
  const std::string text = R"({
    "domain": {"kind": "rectangle", "lengths": [1.0, 2.0]},
    "modes": 3, "grid": 9,
    "exponents": {"p": 3.5, "q": 2.5},
    "cutoff": 4.0, "yosida_lambda": 0.01,
    "dt": 1e-3, "horizon": 2.0, "blowup_threshold": 1e5,
    "initial": {"u0": {"kind": "modes", "coeffs": [0.5, -0.25]}, "u1": {"kind": "constant", "value": 0.1}},
    "noise": {"eps": 0.3, "kappa": 2.0, "sigma0": {"kind": "sine", "amplitude": 1.5},
              "spectrum": {"lambda0": 0.5, "gamma": 1.5}},
    "ensemble": {"paths": 12, "master_seed": 18446744073709551615, "record_stride": 7},
    "blowup": {"alpha": 0.05, "mu": 0.002, "beta": 0.2, "K": 3.0}
  })";
  const RunConfig a = parse_run_config(text);
  const std::string once = dump_run_config(a);
  const RunConfig b = parse_run_config(once);
  CHECK(dump_run_config(b) == once);
  CHECK(b.ensemble.master_seed == 18446744073709551615ULL);
  CHECK(b.sim().domain.ly == 2.0);
  CHECK(b.sim().cutoff->N == 4.0);
  CHECK(*b.K == 3.0);
  CHECK(b.sim().noise.lambda == a.sim().noise.lambda);

  const GalerkinModel model(a.sim());
  const std::string with_model = dump_run_config(a, &model);
  const auto j = nlohmann::json::parse(with_model);
  CHECK(j["resolved"]["version"] == std::string(kVersion));
  CHECK(j["resolved"]["grid"] == 9);
  CHECK(j["resolved"]["steps"] == 2000);
  CHECK(j["resolved"]["spectrum"].size() == 9);
  // A dumped run config with its resolved block parses back to the same config.
  CHECK(dump_run_config(parse_run_config(with_model)) == once);
}
