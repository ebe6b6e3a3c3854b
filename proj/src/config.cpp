#include "stochwave/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace stochwave {

using nlohmann::json;

namespace {

// Object view that records the dotted path for error messages and rejects unknown keys.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items()) {
      bool known = false;
      for (std::string_view a : keys) known = known || a == k;
      if (!known) throw ConfigError(field(k), "unknown key");
    }
  }

  bool has(std::string_view key) const {
    const auto it = j_.find(key);
    return it != j_.end() && !it->is_null();
  }

  double number(std::string_view key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  std::optional<double> optional_number(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  long long integer(std::string_view key, long long fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(std::string_view key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(field(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(std::string_view key, std::string fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(std::string_view key) const {
    const json& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<Node> child(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    return Node(j_.at(key), field(key));
  }

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

 private:
  const json& j_;
  std::string path_;
};

FieldProfile parse_profile(const Node& n) {
  const std::string kind = n.string("kind", "zero");
  if (kind == "zero") {
    n.allow({"kind"});
    return FieldProfile::zero();
  }
  if (kind == "constant") {
    n.allow({"kind", "value"});
    return FieldProfile::constant(n.number("value", 0.0));
  }
  if (kind == "sine") {
    n.allow({"kind", "amplitude"});
    return FieldProfile::sine(n.number("amplitude", 0.0));
  }
  if (kind == "modes") {
    n.allow({"kind", "coeffs"});
    if (!n.has("coeffs")) throw ConfigError(n.field("coeffs"), "required for kind \"modes\"");
    return FieldProfile::modal(n.numbers("coeffs"));
  }
  throw ConfigError(n.field("kind"), "expected one of zero, constant, sine, modes (got \"" + kind + "\")");
}

json profile_json(const FieldProfile& p) {
  switch (p.kind) {
    case FieldProfile::Kind::zero:
      return {{"kind", "zero"}};
    case FieldProfile::Kind::constant:
      return {{"kind", "constant"}, {"value", p.value}};
    case FieldProfile::Kind::sine:
      return {{"kind", "sine"}, {"amplitude", p.value}};
    case FieldProfile::Kind::modes:
      return {{"kind", "modes"}, {"coeffs", p.coeffs}};
  }
  return nullptr;
}

int checked_int(const Node& n, std::string_view key, long long fallback) {
  const long long v = n.integer(key, fallback);
  if (v < 0 || v > 1'000'000'000) throw ConfigError(n.field(key), "out of range");
  return static_cast<int>(v);
}

}  // namespace

BlowupParams RunConfig::blowup() const {
  BlowupParams b;
  b.alpha = alpha ? *alpha : alpha_select(sim().exponents.p, sim().exponents.q);
  b.mu = mu;
  b.beta = beta;
  b.K = K;
  return b;
}

RunConfig parse_run_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  const Node root(doc, "");
  root.allow({"domain", "modes", "grid", "exponents", "cutoff", "yosida_lambda", "dt", "horizon", "blowup_threshold",
              "initial", "noise", "ensemble", "blowup", "resolved"});

  RunConfig cfg;
  SimConfig& s = cfg.ensemble.base;

  if (const auto d = root.child("domain")) {
    const std::string kind = d->string("kind", "interval");
    if (kind == "interval") {
      d->allow({"kind", "length"});
      const double len = d->number("length", 1.0);
      if (!(len > 0.0) || !std::isfinite(len)) throw ConfigError(d->field("length"), "must be > 0");
      s.domain = Domain::interval(len);
    } else if (kind == "rectangle") {
      d->allow({"kind", "lengths"});
      std::vector<double> len{1.0, 1.0};
      if (d->has("lengths")) len = d->numbers("lengths");
      if (len.size() != 2) throw ConfigError(d->field("lengths"), "expected two lengths");
      for (double l : len) {
        if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError(d->field("lengths"), "must be > 0");
      }
      s.domain = Domain::rectangle(len[0], len[1]);
    } else {
      throw ConfigError(d->field("kind"), "expected interval or rectangle (got \"" + kind + "\")");
    }
  }
  s.exponents.d = s.domain.dimension();

  s.modes = checked_int(root, "modes", s.modes);
  if (s.modes < 1) throw ConfigError("modes", "must be >= 1");
  s.grid = checked_int(root, "grid", 0);
  if (s.grid != 0 && s.grid < 2 * s.modes + 1) throw ConfigError("grid", "must be 0 (auto) or >= 2*modes+1");

  if (const auto e = root.child("exponents")) {
    e->allow({"p", "q"});
    s.exponents.p = e->number("p", s.exponents.p);
    s.exponents.q = e->number("q", s.exponents.q);
  }
  try {
    validate_exponents(s.exponents);
  } catch (const std::invalid_argument& err) {
    throw ConfigError("exponents", err.what());
  }

  if (const auto c = root.optional_number("cutoff")) {
    if (!(*c > 0.0)) throw ConfigError("cutoff", "must be > 0");
    s.cutoff = CutoffLevel{*c};
  }
  if (const auto y = root.optional_number("yosida_lambda")) {
    if (!(*y > 0.0)) throw ConfigError("yosida_lambda", "must be > 0");
    s.yosida_lambda = *y;
  }
  s.dt = root.number("dt", 0.0);
  if (s.dt < 0.0) throw ConfigError("dt", "must be >= 0 (0 selects the default)");
  s.horizon = root.number("horizon", s.horizon);
  if (!(s.horizon > 0.0)) throw ConfigError("horizon", "must be > 0");
  s.blowup_threshold = root.number("blowup_threshold", s.blowup_threshold);
  if (!(s.blowup_threshold > 0.0)) throw ConfigError("blowup_threshold", "must be > 0");

  if (const auto init = root.child("initial")) {
    init->allow({"u0", "u1"});
    if (const auto u0 = init->child("u0")) s.u0 = parse_profile(*u0);
    if (const auto u1 = init->child("u1")) s.u1 = parse_profile(*u1);
  }

  if (const auto n = root.child("noise")) {
    n->allow({"eps", "kappa", "sigma0", "spectrum"});
    s.noise.eps = n->number("eps", 0.0);
    if (s.noise.eps < 0.0) throw ConfigError(n->field("eps"), "must be >= 0");
    s.noise.kappa = n->number("kappa", 0.0);
    if (s.noise.kappa < 0.0) throw ConfigError(n->field("kappa"), "must be >= 0");
    if (const auto sg = n->child("sigma0")) s.noise.sigma0 = parse_profile(*sg);
    if (const auto sp = n->child("spectrum")) {
      if (sp->has("values")) {
        sp->allow({"values"});
        cfg.spectrum.values = sp->numbers("values");
        for (double v : *cfg.spectrum.values) {
          if (!(v >= 0.0)) throw ConfigError(sp->field("values"), "eigenvalues must be >= 0");
        }
      } else {
        sp->allow({"lambda0", "gamma"});
        cfg.spectrum.lambda0 = sp->number("lambda0", 1.0);
        if (!(cfg.spectrum.lambda0 > 0.0)) throw ConfigError(sp->field("lambda0"), "must be > 0");
        cfg.spectrum.gamma = sp->number("gamma", 1.0);
      }
    }
  }

  if (const auto e = root.child("ensemble")) {
    e->allow({"paths", "master_seed", "record_stride"});
    const long long paths = e->integer("paths", 1);
    if (paths < 1 || paths > 100'000'000) throw ConfigError(e->field("paths"), "must be >= 1");
    cfg.ensemble.paths = static_cast<int>(paths);
    cfg.ensemble.master_seed = e->unsigned_integer("master_seed", 0);
    const long long stride = e->integer("record_stride", 1);
    if (stride < 1 || stride > 1'000'000'000) throw ConfigError(e->field("record_stride"), "must be >= 1");
    cfg.ensemble.record_stride = static_cast<int>(stride);
  }

  if (const auto b = root.child("blowup")) {
    b->allow({"alpha", "mu", "beta", "K"});
    cfg.alpha = b->optional_number("alpha");
    if (cfg.alpha && !alpha_admissible(*cfg.alpha, s.exponents.p, s.exponents.q)) {
      throw ConfigError(b->field("alpha"), "must lie in (0, min{1/2, (p-q)/(pq)})");
    }
    cfg.mu = b->number("mu", cfg.mu);
    if (!(cfg.mu > 0.0)) throw ConfigError(b->field("mu"), "must be > 0");
    cfg.beta = b->number("beta", cfg.beta);
    if (!(cfg.beta > 0.0)) throw ConfigError(b->field("beta"), "must be > 0");
    cfg.K = b->optional_number("K");
    if (cfg.K && !(*cfg.K > 0.0)) throw ConfigError(b->field("K"), "must be > 0");
  }

  resolve(cfg);
  return cfg;
}

void resolve(RunConfig& cfg) {
  SimConfig& s = cfg.ensemble.base;
  const SpectralBasis basis = build_basis(s.domain, s.modes, 2 * s.modes + 1);
  if (cfg.spectrum.values) {
    if (static_cast<Eigen::Index>(cfg.spectrum.values->size()) != basis.size()) {
      throw ConfigError("noise.spectrum.values",
                        "expected " + std::to_string(basis.size()) + " eigenvalues (one per mode)");
    }
    s.noise.lambda = *cfg.spectrum.values;
  } else {
    s.noise.lambda = make_spectrum(basis, cfg.spectrum.gamma, cfg.spectrum.lambda0);
  }
  if (s.u0.kind == FieldProfile::Kind::modes && static_cast<Eigen::Index>(s.u0.coeffs.size()) > basis.size()) {
    throw ConfigError("initial.u0.coeffs", "more coefficients than modes");
  }
  if (s.u1.kind == FieldProfile::Kind::modes && static_cast<Eigen::Index>(s.u1.coeffs.size()) > basis.size()) {
    throw ConfigError("initial.u1.coeffs", "more coefficients than modes");
  }
  try {
    validate_config(s);
    validate_ensemble(cfg.ensemble);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("", "cannot read config file " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg, const GalerkinModel* model) {
  const SimConfig& s = cfg.sim();
  json j;
  if (s.domain.kind == Domain::Kind::interval) {
    j["domain"] = {{"kind", "interval"}, {"length", s.domain.lx}};
  } else {
    j["domain"] = {{"kind", "rectangle"}, {"lengths", {s.domain.lx, s.domain.ly}}};
  }
  j["modes"] = s.modes;
  j["grid"] = s.grid;
  j["exponents"] = {{"p", s.exponents.p}, {"q", s.exponents.q}};
  j["cutoff"] = s.cutoff ? json(s.cutoff->N) : json(nullptr);
  j["yosida_lambda"] = s.yosida_lambda ? json(*s.yosida_lambda) : json(nullptr);
  j["dt"] = s.dt;
  j["horizon"] = s.horizon;
  j["blowup_threshold"] = s.blowup_threshold;
  j["initial"] = {{"u0", profile_json(s.u0)}, {"u1", profile_json(s.u1)}};
  json spectrum = cfg.spectrum.values ? json{{"values", *cfg.spectrum.values}}
                                      : json{{"lambda0", cfg.spectrum.lambda0}, {"gamma", cfg.spectrum.gamma}};
  j["noise"] = {{"eps", s.noise.eps}, {"kappa", s.noise.kappa}, {"sigma0", profile_json(s.noise.sigma0)},
                {"spectrum", spectrum}};
  j["ensemble"] = {{"paths", cfg.ensemble.paths},
                   {"master_seed", cfg.ensemble.master_seed},
                   {"record_stride", cfg.ensemble.record_stride}};
  j["blowup"] = {{"alpha", cfg.alpha ? json(*cfg.alpha) : json(nullptr)},
                 {"mu", cfg.mu},
                 {"beta", cfg.beta},
                 {"K", cfg.K ? json(*cfg.K) : json(nullptr)}};
  if (model) {
    j["resolved"] = {{"version", kVersion},
                     {"grid", model->basis().grid_per_axis()},
                     {"dt", model->dt()},
                     {"steps", model->steps()},
                     {"spectrum", s.noise.lambda}};
  }
  return j.dump(2) + "\n";
}

}  // namespace stochwave
