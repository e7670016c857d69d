#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comet/stopping.hpp"

namespace comet {

struct SimConfig {
  int ensemble_size = 10000;  // m
  double alpha = 0.01;
  StopRule rule = StopRule::G1FPC;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct SimReport {
  double mean_fraction_evaluated = 0.0;
  double lazy_accuracy = 0.0;
  double full_accuracy = 0.0;
  double relative_error = 0.0;
  std::vector<std::uint64_t> stop_histogram;  // votes_used -> count
  std::uint64_t trials = 0;
};

// Relative increase in error rate from lazy evaluation: 1 - lazy/full.
double relative_error(double lazy_acc, double full_acc);

// Monte-Carlo vote simulation. Per trial: p ~ U[0,1]; true label 1 iff
// p >= 0.5; each member votes Bernoulli(p); the lazy rule consumes votes
// until its table stops it, and the full prediction comes from the complete
// m-vote realization of the same stream (paired comparison).
SimReport simulate(const SimConfig& cfg);

// Variant reusing an already built table (cfg.rule/alpha/m must match).
SimReport simulate_with_table(const SimConfig& cfg, const StoppingTable& table);

struct SweepRow {
  StopRule rule;
  int m;
  double alpha;
  SimReport report;
};

std::vector<SweepRow> sweep(const std::vector<StopRule>& rules,
                            const std::vector<int>& m_values,
                            const std::vector<double>& alphas,
                            std::uint64_t trials, std::uint64_t seed,
                            int workers = 1);

// CSV with columns rule,m,alpha,frac_evaluated,rel_error,lazy_acc,full_acc.
void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path);

// CSV with columns votes_used,count (zero-count rows omitted).
void write_histogram_csv(const SimReport& report, const std::string& path);

}  // namespace comet
