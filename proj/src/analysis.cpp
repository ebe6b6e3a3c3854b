#include "stochwave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stochwave {

namespace {

struct PairStat {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};

PairStat mean_se(const std::vector<double>& xs) {
  PairStat out;
  out.n = static_cast<int>(xs.size());
  if (xs.empty()) return out;
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  out.mean = sum.value() / out.n;
  if (out.n > 1) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - out.mean) * (x - out.mean));
    out.se = std::sqrt(sq.value() / (out.n - 1) / out.n);
  }
  return out;
}

GridRows grid_rows(const EnsembleResult& ens) {
  return rows_on_grid(ens.records, ens.stats.step);
}

}  // namespace

bool alpha_admissible(double alpha, double p, double q) {
  if (!(p > q)) return false;
  const double upper = std::min(0.5, (p - q) / (p * q));
  return alpha > 0.0 && alpha < upper;
}

double alpha_select(double p, double q) {
  if (!(p > q)) throw std::invalid_argument("blow-up analysis needs p > q");
  if (q < 2.0) throw std::invalid_argument("blow-up analysis needs q >= 2");
  return 0.5 * std::min(0.5, (p - q) / (p * q));
}

Certificate certificate(const GalerkinModel& model, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  Certificate c;
  c.E0 = model.energy(model.initial_state()).E_val;
  const NoiseSpec& noise = model.config().noise;
  if (noise.eps > 0.0 && noise.trace() > 0.0) {
    const E1Bound b = e1_bound(noise, model.basis());
    c.E1 = b.exact;
    c.E1_coarse = b.coarse;
  }
  c.satisfied = c.E0 <= -(1.0 + beta) * c.E1;
  c.satisfied_coarse = c.E0 <= -(1.0 + beta) * c.E1_coarse;
  return c;
}

HSeries h_series(const EnsembleResult& ens, const GalerkinModel& model, double tol) {
  const EnsembleStats& st = ens.stats;
  // Grid points after every path has stopped carry no data.
  std::size_t ng = 0;
  while (ng < st.t.size() && st.alive[ng] > 0) ++ng;
  HSeries h;
  const auto prefix = [ng](const std::vector<double>& v) { return std::vector<double>(v.begin(), v.begin() + ng); };
  h.t = prefix(st.t);
  const SeriesStat& calE = st.column("calE");
  h.mean_uv = prefix(st.column("u_dot_v").mean);
  h.mean_vq = prefix(st.column("v_lq_q").mean);
  h.F.resize(ng);
  h.H.resize(ng);
  h.H_se = prefix(calE.se);
  for (std::size_t g = 0; g < ng; ++g) {
    h.F[g] = injected_energy(model.config().noise, st.t[g], model.basis(), NoiseTrace::galerkin);
    h.H[g] = h.F[g] - calE.mean[g];
  }
  h.H0_above_one = ng > 0 && h.H[0] > 1.0;
  if (ng < 2) return h;

  const GridRows at = grid_rows(ens);
  int matched = 0;
  int compared = 0;
  std::vector<double> gaps;
  std::vector<double> dEs;
  std::vector<double> rates;
  for (std::size_t g = 0; g + 1 < ng; ++g) {
    const double dt = st.t[g + 1] - st.t[g];
    const double dF = h.F[g + 1] - h.F[g];
    gaps.clear();
    dEs.clear();
    rates.clear();
    for (std::size_t pi = 0; pi < ens.records.size(); ++pi) {
      const TrajectoryRow* a = at[g][pi];
      const TrajectoryRow* b = at[g + 1][pi];
      if (!a || !b) continue;
      const double dE = b->calE - a->calE;
      const double rate = (b->damping_int - a->damping_int) / dt;
      dEs.push_back(dE);
      rates.push_back(rate);
      gaps.push_back((dF - dE) / dt - rate);
    }
    const PairStat gap = mean_se(gaps);
    const PairStat de = mean_se(dEs);
    const PairStat r = mean_se(rates);
    const double dH = h.H[g + 1] - h.H[g];
    h.dH_dt.push_back(dH / dt);
    h.dissipation_rate.push_back(r.mean);
    h.rate_gap_se.push_back(gap.se);
    h.dH_se.push_back(de.se);
    if (gap.n == 0) {
      h.rate_match.push_back(false);
      h.no_decrease.push_back(true);
      continue;
    }
    const bool match = std::abs(gap.mean) <= 3.0 * gap.se + tol;
    const bool nodec = dH >= -3.0 * de.se - tol;
    h.rate_match.push_back(match);
    h.no_decrease.push_back(nodec);
    ++compared;
    matched += match;
    if (!nodec) h.nondecreasing = false;
  }
  h.match_fraction = compared > 0 ? static_cast<double>(matched) / compared : 0.0;
  return h;
}

LSeries l_series(const EnsembleResult& ens, const HSeries& h, const BlowupParams& params, double tol) {
  const std::size_t ng = h.t.size();
  for (std::size_t g = 0; g < ng; ++g) {
    if (!(h.H[g] > 0.0)) {
      throw std::domain_error("L(t) needs H > 0; H(" + format_double(h.t[g]) + ") = " + format_double(h.H[g]));
    }
  }
  const double a = params.alpha;
  LSeries l;
  l.t = h.t;
  l.L.resize(ng);
  for (std::size_t g = 0; g < ng; ++g) l.L[g] = std::pow(h.H[g], 1.0 - a) + params.mu * h.mean_uv[g];
  l.positive_start = ng > 0 && l.L[0] > 0.0;
  l.nondecreasing = true;

  const GridRows at = grid_rows(ens);
  std::vector<double> inc;
  for (std::size_t g = 0; g + 1 < ng; ++g) {
    const double slope = (1.0 - a) * std::pow(h.H[g], -a);
    inc.clear();
    for (std::size_t pi = 0; pi < ens.records.size(); ++pi) {
      const TrajectoryRow* x = at[g][pi];
      const TrajectoryRow* y = at[g + 1][pi];
      if (!x || !y) continue;
      inc.push_back(-slope * (y->calE - x->calE) + params.mu * (y->u_dot_v - x->u_dot_v));
    }
    const double se = mean_se(inc).se;
    l.dL_se.push_back(se);
    if (l.nondecreasing && l.L[g + 1] - l.L[g] < -3.0 * se - tol) {
      l.nondecreasing = false;
      l.first_decrease = g;
    }
  }
  return l;
}

double blowup_time_closed_form(double L0, double K, double alpha) {
  if (!(L0 > 0.0) || !(K > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("blowup_time_closed_form needs L0 > 0, K > 0, 0 < alpha < 1");
  }
  return (1.0 - alpha) / (alpha * K * std::pow(L0, alpha / (1.0 - alpha)));
}

double blowup_time_numeric(double L0, double K, double alpha) {
  if (!(L0 > 0.0) || !(K > 0.0) || !(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("blowup_time_numeric needs L0 > 0, K > 0, 0 < alpha < 1");
  }
  // y = ln L obeys y' = K exp((r-1) y) with r = 1/(1-alpha).
  const double c = 1.0 / (1.0 - alpha) - 1.0;
  const auto f = [&](double y) { return K * std::exp(c * y); };
  const double y_stop = std::log(1e300);
  double y = std::log(L0);
  double t = 0.0;
  while (y < y_stop) {
    const double h = 0.01 / (c * f(y));
    const double k1 = f(y);
    const double k2 = f(y + 0.5 * h * k1);
    const double k3 = f(y + 0.5 * h * k2);
    const double k4 = f(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return t;
}

LifespanBound lifespan_bound(double E0, std::optional<double> L0, const BlowupParams& params) {
  LifespanBound out;
  if (!params.K) {
    out.note = "K not supplied; the constant depends on embedding constants that are not computed";
    return out;
  }
  const double K = *params.K;
  if (!(K > 0.0)) throw std::invalid_argument("K must be > 0");
  const double a = params.alpha;
  const auto T0 = [&](double arg) { return (1.0 - a) / (a * K * std::pow(arg, a / (1.0 - a))); };
  if (std::abs(E0) > 0.0) {
    out.from_energy = T0(std::abs(E0));
  } else {
    out.note = "E(0) = 0 makes the energy variant unbounded";
  }
  if (L0 && *L0 > 0.0) out.from_L0 = T0(*L0);
  return out;
}

MomentBoundReport moment_bound_check(const EnsembleResult& ens, double p, double s) {
  if (!(s >= 2.0 && s <= p)) throw std::invalid_argument("moment_bound_check needs 2 <= s <= p");
  const EnsembleStats& st = ens.stats;
  const GridRows at = grid_rows(ens);
  const SeriesStat& calE = st.column("calE");
  const SeriesStat& v2 = st.column("v_l2_sq");
  const SeriesStat& up = st.column("u_lp_p");
  MomentBoundReport rep;
  for (std::size_t g = 0; g < st.t.size(); ++g) {
    if (st.alive[g] == 0) continue;
    CompensatedSum lhs_sum;
    int n = 0;
    for (const TrajectoryRow* row : at[g]) {
      if (!row) continue;
      lhs_sum.add(std::pow(row->u_lp_p, s / p));
      ++n;
    }
    const double lhs = lhs_sum.value() / n;
    const double rhs = calE.mean[g] - v2.mean[g] + up.mean[g];
    ++rep.points;
    if (rhs > 0.0) {
      rep.C = std::max(rep.C, lhs / rhs);
    } else if (lhs > 0.0) {
      ++rep.violations;
    } else {
      ++rep.degenerate;
    }
  }
  return rep;
}

}  // namespace stochwave
