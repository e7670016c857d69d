#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace comet {

enum class StopRule { G1, G2, G1FPC, G2FPC, MLEE, FULL };

std::string to_string(StopRule rule);
StopRule parse_rule(const std::string& name);

struct StopConfig {
  StopRule rule = StopRule::G1FPC;
  double alpha = 0.01;
  int ensemble_size = 0;  // m
};

// Inverse standard normal CDF (upper-tail critical value is
// normal_quantile(1 - alpha)). Acklam's rational approximation refined by one
// Halley step against erfc; absolute error well under 1e-9.
double normal_quantile(double p);

// Minimum votes before any stopping decision: 15 / 30 / 45 depending on alpha.
int min_votes(double alpha);

// Gaussian stopping decision from the leading and runner-up tallies.
// Requires v_lead >= v_run and v_lead + v_run <= m. Always true at n == m.
bool glee_should_stop(int v_lead, int v_run, const StopConfig& cfg);

// Closed-form threshold: smallest v_lead at which glee_should_stop holds for
// n total votes, or n + 1 if no count short of exhaustion stops. Solves the
// quadratic in p-hat directly; must agree with the binary-search route.
int glee_threshold_closed_form(int n, const StopConfig& cfg);

// Posterior probability (Beta-Binomial over the r = m - n remaining votes,
// uniform prior) that the leading class ends with a strict majority.
// Binary classification only.
double mlee_prob_leading_wins(int v_lead, int v_run, int m);

bool mlee_should_stop(int v_lead, int v_run, const StopConfig& cfg);

// Unified direct rule (dispatches on cfg.rule; FULL never stops early).
bool should_stop(int v_lead, int v_run, const StopConfig& cfg);

// Per-vote-count stopping thresholds. k_min[n] (indexed n in [n_min, m]) is
// the smallest leading-class count that permits stopping after n votes;
// kNever marks entries where only exhaustion stops.
struct StoppingTable {
  StopConfig cfg;
  int n_min = 0;
  std::vector<int> k_min;  // size m + 1; entries < n_min unused

  static constexpr int kNever = -1;

  int m() const { return cfg.ensemble_size; }

  // True when voting may stop with v_lead leading votes out of n cast.
  bool stop(int v_lead, int n) const {
    if (n >= cfg.ensemble_size) return true;
    if (n < n_min) return false;
    const int k = k_min[static_cast<std::size_t>(n)];
    return k != kNever && v_lead >= k;
  }
};

// Builds the threshold table. GLEE rows cost O(log n) each (binary search
// over the monotone rule); MLEE rows cost O(m) each. FULL yields an
// all-kNever table.
StoppingTable build_table(const StopConfig& cfg);

// CSV export, columns `n,k_min` (k_min empty string for never-stop rows).
void export_table_csv(const StoppingTable& table, const std::string& path);

}  // namespace comet
