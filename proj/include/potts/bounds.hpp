#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "potts/errors.hpp"

namespace potts {

// Closed-form thresholds and mixing-time bounds.  Everything here works in
// natural-log space with doubles: constants like 2^(r^2+8r+3) overflow every
// native type immediately, logs do not.

// --- temperature conversions ---

inline double beta_to_lambda(double beta, double coupling = 1.0) {
  return std::exp(beta * coupling);
}

inline double lambda_to_beta(double lambda, double coupling = 1.0) {
  if (!(lambda > 0)) throw ParameterError("lambda_to_beta: activity must be positive");
  if (coupling == 0) throw ParameterError("lambda_to_beta: coupling must be nonzero");
  return std::log(lambda) / coupling;
}

// --- single-site rapid mixing ---

// q* = maxdeg * lambda^maxdeg + 1: with q >= q* the single-site dynamics
// contracts and mixes in (maxdeg+1) n log(n/eps) steps.
inline double rapid_threshold_glauber(int maxdeg, double lambda) {
  if (maxdeg < 2 || !(lambda > 1)) throw ParameterError("rapid_threshold_glauber: need maxdeg >= 2, lambda > 1");
  return maxdeg * std::pow(lambda, maxdeg) + 1;
}

inline double glauber_mixing_bound(int maxdeg, long n, double eps) {
  if (n < 1 || !(eps > 0)) throw ParameterError("glauber_mixing_bound: bad n or eps");
  return (maxdeg + 1) * static_cast<double>(n) * std::log(static_cast<double>(n) / eps);
}

// --- block dynamics ---

// log q* = (s+1) log(2s) + log partial+ + log Psi + mu+ log lambda.
inline double block_threshold_log(int s, double log_partial_plus, double psi, double mu_plus,
                                  double lambda) {
  if (s < 1 || !(psi > 0) || !(lambda > 1))
    throw ParameterError("block_threshold_log: bad parameters");
  return (s + 1) * std::log(2.0 * s) + log_partial_plus + std::log(psi) +
         mu_plus * std::log(lambda);
}

inline double block_mixing_bound(double psi_min, long n, double eps) {
  if (!(psi_min > 0) || n < 1 || !(eps > 0)) throw ParameterError("block_mixing_bound: bad parameters");
  return 2.0 / psi_min * std::log(static_cast<double>(n) / eps);
}

// log q* for k-block systems: 2^(k+1) maxdeg^(2k) k^(2k+1) lambda^(maxdeg-1+1/k).
inline double kblock_threshold_log(int maxdeg, int k, double lambda) {
  if (k < 2) throw ParameterError("kblock_threshold_log: k must be at least 2");
  if (maxdeg < 1 || !(lambda > 1)) throw ParameterError("kblock_threshold_log: bad parameters");
  return (k + 1) * std::log(2.0) + 2.0 * k * std::log(static_cast<double>(maxdeg)) +
         (2.0 * k + 1) * std::log(static_cast<double>(k)) +
         (maxdeg - 1 + 1.0 / k) * std::log(lambda);
}

// log q* for all r x r subgrids: 2^(r^2+8r+3) r^(2r^2+4r+1) lambda^(2+2/r).
inline double grid_threshold_log(int r, double lambda) {
  if (r < 1 || !(lambda > 1)) throw ParameterError("grid_threshold_log: bad parameters");
  return (r * r + 8.0 * r + 3) * std::log(2.0) + (2.0 * r * r + 4.0 * r + 1) * std::log(static_cast<double>(r)) +
         (2.0 + 2.0 / r) * std::log(lambda);
}

inline double grid_block_mixing_bound(long n, int r, double eps) {
  if (n < 1 || r < 1 || !(eps > 0)) throw ParameterError("grid_block_mixing_bound: bad parameters");
  return 2.0 * static_cast<double>(n) * std::log(static_cast<double>(n) / eps) / (r * r);
}

// --- comparison bounds (log-space) ---

// 2 s q^(s+1) lambda^(maxdeg (s+1)) tau' n (n log(q lambda^(maxdeg/2)) + log(1/eps)).
inline double comparison_bound_log(int s, double log_q, double lambda, int maxdeg, long n,
                                   double eps, double tau_block) {
  if (s < 1 || !(lambda > 1) || n < 1 || !(eps > 0) || !(tau_block > 0))
    throw ParameterError("comparison_bound_log: bad parameters");
  const double log_lambda = std::log(lambda);
  const double tail = n * (log_q + 0.5 * maxdeg * log_lambda) + std::log(1.0 / eps);
  return std::log(2.0) + std::log(static_cast<double>(s)) + (s + 1) * log_q +
         maxdeg * (s + 1.0) * log_lambda + std::log(tau_block) + std::log(static_cast<double>(n)) +
         std::log(tail);
}

// Piecewise corollary: contraction bound when q clears the single-site
// threshold, otherwise the comparison bound with q replaced by maxdeg lambda^maxdeg.
inline double comparison_corollary_log(int s, double q, double lambda, int maxdeg, long n,
                                       double eps, double tau_block) {
  const double threshold = rapid_threshold_glauber(maxdeg, lambda);
  if (q >= threshold) return std::log(glauber_mixing_bound(maxdeg, n, eps));
  const double log_lambda = std::log(lambda);
  const double tail = n * (std::log(static_cast<double>(maxdeg)) + 1.5 * maxdeg * log_lambda) +
                      std::log(1.0 / eps);
  return std::log(2.0) + std::log(static_cast<double>(s)) +
         (s + 1.0) * (std::log(static_cast<double>(maxdeg)) + 2.0 * maxdeg * log_lambda) +
         std::log(tau_block) + std::log(static_cast<double>(n)) + std::log(tail);
}

// 4 k (maxdeg lambda^(2 maxdeg))^(k+1) n^2 log(2 e n) (n log(maxdeg lambda^(3 maxdeg/2)) + log(1/eps)).
inline double glauber_compare_bound_log(int k, int maxdeg, double lambda, long n, double eps) {
  if (k < 1 || maxdeg < 1 || !(lambda > 1) || n < 1 || !(eps > 0))
    throw ParameterError("glauber_compare_bound_log: bad parameters");
  const double log_lambda = std::log(lambda);
  const double tail = n * (std::log(static_cast<double>(maxdeg)) + 1.5 * maxdeg * log_lambda) +
                      std::log(1.0 / eps);
  return std::log(4.0) + std::log(static_cast<double>(k)) +
         (k + 1.0) * (std::log(static_cast<double>(maxdeg)) + 2.0 * maxdeg * log_lambda) +
         2.0 * std::log(static_cast<double>(n)) + std::log(std::log(2.0 * std::exp(1.0) * n)) +
         std::log(tail);
}

// 4 (4 lambda^8)^(r^2+1) n^2 log(2 e n) (n log(4 lambda^6) + log(1/eps)).
inline double glauber_grid_bound_log(int r, double lambda, long n, double eps) {
  if (r < 1 || !(lambda > 1) || n < 1 || !(eps > 0))
    throw ParameterError("glauber_grid_bound_log: bad parameters");
  const double log_lambda = std::log(lambda);
  const double tail = n * (std::log(4.0) + 6.0 * log_lambda) + std::log(1.0 / eps);
  return std::log(4.0) + (static_cast<double>(r) * r + 1) * (std::log(4.0) + 8.0 * log_lambda) +
         2.0 * std::log(static_cast<double>(n)) + std::log(std::log(2.0 * std::exp(1.0) * n)) +
         std::log(tail);
}

// --- slow mixing -------------------------------------------------------------

// beta = (1/2) e^-(1+2/(kappa-1)) (maxdeg/(2 kappa))^-(1+1/(kappa-1)).
inline double slow_beta(double kappa, int maxdeg) {
  if (maxdeg < 3) throw ParameterError("slow_beta: maxdeg must be at least 3");
  if (!(kappa > 1) || !(kappa <= maxdeg / 2.0))
    throw ParameterError("slow_beta: kappa must lie in (1, maxdeg/2]");
  return 0.5 * std::exp(-(1 + 2 / (kappa - 1))) *
         std::pow(maxdeg / (2 * kappa), -(1 + 1 / (kappa - 1)));
}

// Largest admissible q for the conductance argument:
// q - 1 <= (beta^2 / (256 e^2)) lambda^(maxdeg - kappa - kappa^2/(maxdeg-kappa)).
// Returned as log(q_max - 1); q_max < 2 means the regime is empty.
struct SlowQThreshold {
  double log_q_minus_1;
  double q_max;        // 1 + exp(log_q_minus_1); +inf if overflowing
  bool empty_regime;   // no integer q >= 2 admissible
};

inline SlowQThreshold slow_q_threshold(double beta, double lambda, int maxdeg, double kappa) {
  if (!(beta > 0) || !(lambda > 1)) throw ParameterError("slow_q_threshold: bad beta or lambda");
  if (maxdeg < 3) throw ParameterError("slow_q_threshold: maxdeg must be at least 3");
  if (!(kappa > 1) || !(kappa <= maxdeg / 2.0))
    throw ParameterError("slow_q_threshold: kappa must lie in (1, maxdeg/2]");
  const double exponent = maxdeg - kappa - kappa * kappa / (maxdeg - kappa);
  const double log_val = 2 * std::log(beta) - std::log(256.0) - 2 + exponent * std::log(lambda);
  SlowQThreshold out;
  out.log_q_minus_1 = log_val;
  out.q_max = log_val > 700 ? std::numeric_limits<double>::infinity() : 1 + std::exp(log_val);
  out.empty_regime = out.q_max < 2;
  return out;
}

// tau >= 2^(beta n - 4), returned as log2 of the bound.
inline double slow_mixing_lower_log2(double beta, long n) {
  if (!(beta > 0) || n < 1) throw ParameterError("slow_mixing_lower_log2: bad parameters");
  return beta * static_cast<double>(n) - 4;
}

// Phi <= (2 / sqrt(2 pi r)) 2^-r.
inline double conductance_upper(long r) {
  if (r < 1) throw ParameterError("conductance_upper: r must be positive");
  return 2.0 / std::sqrt(2.0 * M_PI * static_cast<double>(r)) * std::exp2(-static_cast<double>(r));
}

// --- headline constants -------------------------------------------------------

// c1, c2 from the general-graph thresholds, c3..c5 their maxdeg = 4 and grid
// specializations; all as natural logs.
struct MainConstants {
  double log_c1, log_c2, log_c3, log_c4, log_c5;
  int k_rapid;   // ceil(1/eta)
  int k_grid;    // ceil(2/eta)
  double kappa;  // 1 + eta/5
};

inline MainConstants main_constants(double eta, int maxdeg) {
  if (!(eta > 0) || !(eta < 1)) throw ParameterError("main_constants: eta must lie in (0,1)");
  if (maxdeg < 3) throw ParameterError("main_constants: maxdeg must be at least 3 for c2");
  MainConstants mc;
  mc.k_rapid = static_cast<int>(std::ceil(1.0 / eta));
  mc.k_grid = static_cast<int>(std::ceil(2.0 / eta));
  mc.kappa = 1 + eta / 5;

  auto log_c1_of = [&](int d) {
    const double k = mc.k_rapid;
    return std::log(k) + (k + 1) * std::log(2.0) + 2 * k * std::log(static_cast<double>(d) * k);
  };
  auto log_c2_of = [&](int d) {
    const double t = 1 + 1 / (mc.kappa - 1);
    return -std::log(1024.0) - 4 * t - 2 * t * std::log(d / (2 * mc.kappa));
  };
  mc.log_c1 = log_c1_of(maxdeg);
  mc.log_c2 = log_c2_of(maxdeg);
  mc.log_c3 = log_c1_of(4);
  mc.log_c5 = log_c2_of(4);
  const double k = mc.k_grid;
  mc.log_c4 = std::log(8 * k - 1) + (k * k + 8 * k) * std::log(2.0) +
              (2 * k * k + 4 * k) * std::log(k);
  return mc;
}

// --- verdicts -----------------------------------------------------------------

enum class Verdict { RapidGuaranteed, SlowGuaranteed, Indeterminate };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::RapidGuaranteed: return "rapid-guaranteed";
    case Verdict::SlowGuaranteed: return "slow-guaranteed";
    default: return "indeterminate";
  }
}

// Verdicts for one (maxdeg, lambda, q) point at tolerance parameter eta.
struct ThresholdReport {
  int maxdeg = 0;
  double lambda = 0;
  double q = 0;
  double eta = 0;
  double log_q = 0;
  double log_threshold_single_site = 0;  // log(maxdeg lambda^maxdeg)  (q-1 compares against it)
  double log_threshold_rapid = 0;        // log(c1 lambda^(maxdeg-1+eta))
  double log_threshold_slow = 0;         // log(c2 lambda^(maxdeg-1-1/(maxdeg-1)-eta))
  Verdict verdict_single_site = Verdict::Indeterminate;
  Verdict verdict_rapid = Verdict::Indeterminate;
  Verdict verdict_slow = Verdict::Indeterminate;
};

inline ThresholdReport threshold_report(int maxdeg, double lambda, double q, double eta) {
  if (q < 2) throw ParameterError("threshold_report: q must be at least 2");
  if (maxdeg < 3 || !(lambda > 1)) throw ParameterError("threshold_report: bad maxdeg or lambda");
  const MainConstants mc = main_constants(eta, maxdeg);
  ThresholdReport r;
  r.maxdeg = maxdeg;
  r.lambda = lambda;
  r.q = q;
  r.eta = eta;
  r.log_q = std::log(q);
  r.log_threshold_single_site = std::log(static_cast<double>(maxdeg)) + maxdeg * std::log(lambda);
  r.log_threshold_rapid = mc.log_c1 + (maxdeg - 1 + eta) * std::log(lambda);
  r.log_threshold_slow =
      mc.log_c2 + (maxdeg - 1 - 1.0 / (maxdeg - 1) - eta) * std::log(lambda);
  // q >= maxdeg lambda^maxdeg + 1  <=>  log(q-1) >= log threshold
  if (std::log(q - 1) >= r.log_threshold_single_site) r.verdict_single_site = Verdict::RapidGuaranteed;
  if (r.log_q > r.log_threshold_rapid) r.verdict_rapid = Verdict::RapidGuaranteed;
  if (r.log_q < r.log_threshold_slow) r.verdict_slow = Verdict::SlowGuaranteed;
  return r;
}

// Existence witness for the gap between the grid rapid-mixing regime and the
// random-regular slow regime at maxdeg 4: a point (log lambda, log q) with
// c4 lambda^(2+eta) < q < c5 lambda^(8/3-eta), found by scanning a log-lambda
// grid.  Values are astronomically large, hence log-space only.
struct GapWitness {
  double log_lambda;
  double log_q;
  double log_lower;  // log(c4 lambda^(2+eta))
  double log_upper;  // log(c5 lambda^(8/3-eta))
};

inline std::optional<GapWitness> grid_vs_regular_gap(double eta, double log_lambda_max = 1e6,
                                                     int grid_points = 4096) {
  const MainConstants mc = main_constants(eta, 4);
  for (int i = 1; i <= grid_points; ++i) {
    const double log_lambda = log_lambda_max * i / grid_points;
    const double lo = mc.log_c4 + (2 + eta) * log_lambda;
    const double hi = mc.log_c5 + (8.0 / 3 - eta) * log_lambda;
    // an integer q exists when the interval is nonempty and reaches past 2
    if (lo < hi && hi > std::log(2.0) && hi - lo > 1e-9) {
      GapWitness w;
      w.log_lambda = log_lambda;
      w.log_lower = lo;
      w.log_upper = hi;
      w.log_q = (std::max(lo, std::log(2.0)) + hi) / 2;
      return w;
    }
  }
  return std::nullopt;
}

// --- phase transition points ---------------------------------------------------

// Wu point for the 2D grid: q = (lambda - 1)^2.
inline double wu_critical_lambda(double q) {
  if (q < 0) throw ParameterError("wu_critical_lambda: q must be nonnegative");
  return 1 + std::sqrt(q);
}
inline double wu_critical_q(double lambda) {
  if (!(lambda > 0)) throw ParameterError("wu_critical_q: lambda must be positive");
  return (lambda - 1) * (lambda - 1);
}

// f(x) = (q-1) x^maxdeg + (2 - B - q) x^(maxdeg-1) + B x - 1.
inline double haggstrom_f(double x, double q, int maxdeg, double B) {
  return (q - 1) * std::pow(x, maxdeg) + (2 - B - q) * std::pow(x, maxdeg - 1) + B * x - 1;
}

// Location of the double root of f in (0,1), plus the activity B and
// beta0 = log B.  B is eliminated linearly through f(x) = 0 and the
// derivative is bisected in long double.
struct PhasePoint {
  double q = 0;
  int maxdeg = 0;
  double B = 0;
  double x_star = 0;
  double beta0 = 0;
  double residual_f = 0;
  double residual_fprime = 0;
};

namespace detail {

inline long double haggstrom_B_of_x(long double x, long double q, int maxdeg) {
  // from f(x) = 0: B (x - x^(maxdeg-1)) = 1 - (q-1) x^maxdeg - (2-q) x^(maxdeg-1)
  const long double xd1 = std::pow(x, static_cast<long double>(maxdeg - 1));
  return (1 - (q - 1) * xd1 * x - (2 - q) * xd1) / (x - xd1);
}

inline long double haggstrom_fprime(long double x, long double q, int maxdeg, long double B) {
  return maxdeg * (q - 1) * std::pow(x, static_cast<long double>(maxdeg - 1)) +
         (maxdeg - 1) * (2 - B - q) * std::pow(x, static_cast<long double>(maxdeg - 2)) + B;
}

inline long double haggstrom_g(long double x, long double q, int maxdeg) {
  return haggstrom_fprime(x, q, maxdeg, haggstrom_B_of_x(x, q, maxdeg));
}

}  // namespace detail

inline PhasePoint double_root(double q, int maxdeg) {
  if (maxdeg < 3) throw ParameterError("double_root: maxdeg must be at least 3");
  if (q < 2) throw ParameterError("double_root: q must be at least 2");
  const long double qq = q;
  // scan for a sign change of g(x) = f'(x; B(x)) inside (0, 1)
  const int grid = 10000;
  const long double x_hi = 1.0L - 1e-6L;
  long double prev_x = x_hi / grid;
  long double prev_g = detail::haggstrom_g(prev_x, qq, maxdeg);
  long double lo = 0, hi = 0;
  bool found = false;
  for (int i = 2; i <= grid; ++i) {
    const long double x = x_hi * i / grid;
    const long double gx = detail::haggstrom_g(x, qq, maxdeg);
    if ((prev_g <= 0 && gx >= 0) || (prev_g >= 0 && gx <= 0)) {
      lo = prev_x;
      hi = x;
      found = true;
      break;
    }
    prev_x = x;
    prev_g = gx;
  }
  if (!found)
    throw ParameterError("double_root: no sign change of f' on the scanned bracket (0, 1-1e-6] "
                         "with " + std::to_string(grid) + " points");
  long double g_lo = detail::haggstrom_g(lo, qq, maxdeg);
  for (int iter = 0; iter < 200 && hi - lo > 1e-19L * hi; ++iter) {
    const long double mid = (lo + hi) / 2;
    const long double g_mid = detail::haggstrom_g(mid, qq, maxdeg);
    if ((g_lo <= 0) == (g_mid <= 0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  const long double x_star = (lo + hi) / 2;
  const long double B = detail::haggstrom_B_of_x(x_star, qq, maxdeg);
  PhasePoint pp;
  pp.q = q;
  pp.maxdeg = maxdeg;
  pp.x_star = static_cast<double>(x_star);
  pp.B = static_cast<double>(B);
  if (!(B > 0)) throw ParameterError("double_root: eliminated activity is not positive");
  pp.beta0 = static_cast<double>(std::log(B));
  const long double f_res = (qq - 1) * std::pow(x_star, static_cast<long double>(maxdeg)) +
                            (2 - B - qq) * std::pow(x_star, static_cast<long double>(maxdeg - 1)) +
                            B * x_star - 1;
  pp.residual_f = static_cast<double>(std::fabs(static_cast<long double>(f_res)));
  pp.residual_fprime =
      static_cast<double>(std::fabs(detail::haggstrom_fprime(x_star, qq, maxdeg, B)));
  return pp;
}

}  // namespace potts
