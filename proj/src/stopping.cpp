#include "comet/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace comet {
namespace {

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0, 1)");
}

bool is_one_tailed(StopRule rule) {
  return rule == StopRule::G1 || rule == StopRule::G1FPC;
}

bool has_fpc(StopRule rule) {
  return rule == StopRule::G1FPC || rule == StopRule::G2FPC;
}

double glee_z(const StopConfig& cfg) {
  const double tail = is_one_tailed(cfg.rule) ? cfg.alpha : cfg.alpha / 2.0;
  return normal_quantile(1.0 - tail);
}

double fpc_factor(int n, int m) {
  if (n <= static_cast<double>(m) * 0.05) return 1.0;
  return std::sqrt(static_cast<double>(m - n) / (m - 1));
}

// Standard normal CDF, for the quantile refinement step.
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::string to_string(StopRule rule) {
  switch (rule) {
    case StopRule::G1: return "g1";
    case StopRule::G2: return "g2";
    case StopRule::G1FPC: return "g1-fpc";
    case StopRule::G2FPC: return "g2-fpc";
    case StopRule::MLEE: return "mlee";
    case StopRule::FULL: return "full";
  }
  return "?";
}

StopRule parse_rule(const std::string& name) {
  if (name == "g1") return StopRule::G1;
  if (name == "g2") return StopRule::G2;
  if (name == "g1-fpc") return StopRule::G1FPC;
  if (name == "g2-fpc") return StopRule::G2FPC;
  if (name == "mlee") return StopRule::MLEE;
  if (name == "full") return StopRule::FULL;
  throw std::invalid_argument("unknown rule: " + name);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");

  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the erfc-based CDF pushes absolute error
  // below 1e-12.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * 3.14159265358979323846) *
                   std::exp(x * x / 2.0);
  x -= u / (1.0 + x * u / 2.0);
  return x;
}

int min_votes(double alpha) {
  validate_alpha(alpha);
  if (alpha >= 1e-2) return 15;
  if (alpha >= 1e-3) return 30;
  return 45;
}

bool glee_should_stop(int v_lead, int v_run, const StopConfig& cfg) {
  const int m = cfg.ensemble_size;
  const int n = v_lead + v_run;
  if (v_lead < v_run)
    throw std::invalid_argument("glee_should_stop: v_lead < v_run");
  if (n > m) throw std::invalid_argument("glee_should_stop: n > m");
  if (n == m) return true;  // full ensemble voted
  if (n < min_votes(cfg.alpha)) return false;

  const double p_hat = static_cast<double>(v_lead) / n;
  const double sigma = std::sqrt(p_hat * (1.0 - p_hat));
  const double delta = glee_z(cfg) * sigma / std::sqrt(static_cast<double>(n));
  const double rho = has_fpc(cfg.rule) ? fpc_factor(n, m) : 1.0;
  return p_hat - rho * delta > 0.5;
}

int glee_threshold_closed_form(int n, const StopConfig& cfg) {
  const int m = cfg.ensemble_size;
  if (n >= m) return (m + 1) / 2;
  if (n < min_votes(cfg.alpha)) return n + 1;

  const double z = glee_z(cfg);
  const double rho = has_fpc(cfg.rule) ? fpc_factor(n, m) : 1.0;
  // Stop iff p-hat > p* where (p* - 0.5)^2 = c2 p*(1 - p*), c2 = (rho z)^2/n.
  const double c2 = rho * z * rho * z / n;
  const double p_star = 0.5 + 0.5 * std::sqrt(c2 / (1.0 + c2));

  int k = static_cast<int>(std::floor(n * p_star)) + 1;
  k = std::max(k, n / 2 + 1);
  // Settle float boundary cases against the exact inequality.
  while (k - 1 > n - (k - 1) && glee_should_stop(k - 1, n - (k - 1), cfg)) --k;
  while (k <= n && !glee_should_stop(k, n - k, cfg)) ++k;
  return k;  // n + 1 means no count short of exhaustion stops
}

double mlee_prob_leading_wins(int v_lead, int v_run, int m) {
  if (v_lead < 0 || v_run < 0 || v_lead + v_run > m)
    throw std::invalid_argument("mlee_prob_leading_wins: bad tallies");
  const int n = v_lead + v_run;
  const int r = m - n;
  // Strict majority needed: v_lead + j > m/2.
  const int j_min = m / 2 + 1 - v_lead;
  if (j_min <= 0) return 1.0;
  if (j_min > r) return 0.0;

  // J ~ BetaBinomial(r; a, b) with the uniform-prior posterior Beta(a, b).
  const double a = v_lead + 1.0;
  const double b = v_run + 1.0;

  // Relative weights w_j computed outward from the mode via the pmf ratio
  //   w_{j+1}/w_j = ((r-j)(a+j)) / ((j+1)(b+r-j-1)),
  // then normalized by their total. Scaling from the mode keeps every
  // weight <= ~1, so nothing overflows and far-tail underflow is harmless.
  const int j_mode =
      std::clamp(static_cast<int>(r * (a / (a + b))), 0, r);

  auto ratio = [&](int j) {
    // w_{j+1} / w_j
    return (static_cast<double>(r - j) * (a + j)) /
           (static_cast<double>(j + 1) * (b + r - j - 1));
  };

  double total = 1.0;
  double tail = j_mode >= j_min ? 1.0 : 0.0;
  double w = 1.0;
  for (int j = j_mode; j < r; ++j) {
    w *= ratio(j);
    total += w;
    if (j + 1 >= j_min) tail += w;
  }
  w = 1.0;
  for (int j = j_mode; j > 0; --j) {
    w /= ratio(j - 1);
    total += w;
    if (j - 1 >= j_min) tail += w;
  }
  return tail / total;
}

bool mlee_should_stop(int v_lead, int v_run, const StopConfig& cfg) {
  const int m = cfg.ensemble_size;
  const int n = v_lead + v_run;
  if (v_lead < v_run)
    throw std::invalid_argument("mlee_should_stop: v_lead < v_run");
  if (n > m) throw std::invalid_argument("mlee_should_stop: n > m");
  if (n == m) return true;
  if (n < min_votes(cfg.alpha)) return false;
  return mlee_prob_leading_wins(v_lead, v_run, m) >= 1.0 - cfg.alpha;
}

bool should_stop(int v_lead, int v_run, const StopConfig& cfg) {
  switch (cfg.rule) {
    case StopRule::FULL:
      return v_lead + v_run >= cfg.ensemble_size;
    case StopRule::MLEE:
      return mlee_should_stop(v_lead, v_run, cfg);
    default:
      return glee_should_stop(v_lead, v_run, cfg);
  }
}

StoppingTable build_table(const StopConfig& cfg) {
  const int m = cfg.ensemble_size;
  if (m < 1) throw std::invalid_argument("build_table: m must be >= 1");

  StoppingTable table;
  table.cfg = cfg;
  table.k_min.assign(static_cast<std::size_t>(m) + 1, StoppingTable::kNever);

  if (cfg.rule == StopRule::FULL) {
    table.n_min = m;
    return table;
  }

  validate_alpha(cfg.alpha);
  table.n_min = min_votes(cfg.alpha);
  if (table.n_min > m) {
    table.n_min = m;
    table.k_min[m] = (m + 1) / 2;
    return table;
  }

  for (int n = table.n_min; n < m; ++n) {
    // Monotone in v_lead for fixed n, so binary-search the threshold.
    int lo = n / 2 + 1;  // stopping needs a strict majority
    int hi = n;
    if (!should_stop(hi, n - hi, cfg)) {
      continue;  // never stops at this n
    }
    while (lo < hi) {
      const int mid = lo + (hi - lo) / 2;
      if (should_stop(mid, n - mid, cfg))
        hi = mid;
      else
        lo = mid + 1;
    }
    table.k_min[n] = lo;
  }
  table.k_min[m] = (m + 1) / 2;  // any majority (or exact tie) at exhaustion
  return table;
}

void export_table_csv(const StoppingTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "n,k_min\n";
  for (int n = table.n_min; n <= table.m(); ++n) {
    const int k = table.k_min[n];
    out << n << ",";
    if (k != StoppingTable::kNever) out << k;
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace comet
