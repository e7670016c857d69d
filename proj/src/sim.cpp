#include "comet/sim.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "comet/random.hpp"

namespace comet {
namespace {

struct Accumulator {
  std::uint64_t votes_used_total = 0;
  std::uint64_t lazy_correct = 0;
  std::uint64_t full_correct = 0;
  std::vector<std::uint64_t> histogram;

  explicit Accumulator(int m) : histogram(static_cast<std::size_t>(m) + 1, 0) {}

  void merge(const Accumulator& other) {
    votes_used_total += other.votes_used_total;
    lazy_correct += other.lazy_correct;
    full_correct += other.full_correct;
    for (std::size_t i = 0; i < histogram.size(); ++i)
      histogram[i] += other.histogram[i];
  }
};

void run_trials(const SimConfig& cfg, const StoppingTable& table,
                std::uint64_t trials, std::uint64_t seed, Accumulator& acc) {
  const int m = cfg.ensemble_size;
  Rng rng(seed);

  for (std::uint64_t t = 0; t < trials; ++t) {
    const double p = rng.uniform_double();
    const int true_label = p >= 0.5 ? 1 : 0;

    // Votes are consumed lazily; the full tally is completed from the same
    // stream (the unconsumed remainder summed as one binomial draw).
    int ones = 0;
    int n = 0;
    int lazy_pred = 0;
    bool stopped = false;
    while (n < m) {
      ones += rng.bernoulli(p) ? 1 : 0;
      ++n;
      const int lead = ones * 2 >= n ? ones : n - ones;
      if (n < m && table.stop(lead, n)) {
        lazy_pred = ones * 2 >= n ? 1 : 0;  // argmax, ties to class 0
        if (ones * 2 == n) lazy_pred = 0;
        stopped = true;
        break;
      }
    }

    int full_ones = ones;
    if (stopped) {
      full_ones += static_cast<int>(
          rng.binomial(static_cast<std::uint64_t>(m - n), p));
    }
    const int full_pred = full_ones * 2 > m ? 1 : 0;
    if (!stopped) lazy_pred = full_pred;

    acc.votes_used_total += static_cast<std::uint64_t>(n);
    ++acc.histogram[static_cast<std::size_t>(n)];
    if (lazy_pred == true_label) ++acc.lazy_correct;
    if (full_pred == true_label) ++acc.full_correct;
  }
}

}  // namespace

double relative_error(double lazy_acc, double full_acc) {
  if (full_acc <= 0.0)
    throw std::invalid_argument("relative_error: full accuracy is zero");
  return 1.0 - lazy_acc / full_acc;
}

SimReport simulate_with_table(const SimConfig& cfg,
                              const StoppingTable& table) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (table.m() != cfg.ensemble_size)
    throw std::invalid_argument("table built for different m");

  const int workers = std::max(1, cfg.workers);
  std::vector<Accumulator> accs(workers, Accumulator(cfg.ensemble_size));
  std::vector<std::thread> pool;
  const std::uint64_t chunk = cfg.trials / workers;

  for (int w = 0; w < workers; ++w) {
    const std::uint64_t count =
        w == workers - 1 ? cfg.trials - chunk * (workers - 1) : chunk;
    const std::uint64_t seed =
        cfg.seed + 0x51ed2701u * static_cast<std::uint64_t>(w + 1);
    if (w == workers - 1) {
      run_trials(cfg, table, count, seed, accs[w]);
    } else {
      pool.emplace_back([&, w, count, seed]() {
        run_trials(cfg, table, count, seed, accs[w]);
      });
    }
  }
  for (auto& th : pool) th.join();
  for (int w = 1; w < workers; ++w) accs[0].merge(accs[w]);

  const auto& acc = accs[0];
  SimReport report;
  report.trials = cfg.trials;
  report.mean_fraction_evaluated =
      static_cast<double>(acc.votes_used_total) /
      (static_cast<double>(cfg.trials) * cfg.ensemble_size);
  report.lazy_accuracy = static_cast<double>(acc.lazy_correct) / cfg.trials;
  report.full_accuracy = static_cast<double>(acc.full_correct) / cfg.trials;
  report.relative_error =
      relative_error(report.lazy_accuracy, report.full_accuracy);
  report.stop_histogram = acc.histogram;
  return report;
}

SimReport simulate(const SimConfig& cfg) {
  StopConfig sc{cfg.rule, cfg.alpha, cfg.ensemble_size};
  const auto table = build_table(sc);
  return simulate_with_table(cfg, table);
}

std::vector<SweepRow> sweep(const std::vector<StopRule>& rules,
                            const std::vector<int>& m_values,
                            const std::vector<double>& alphas,
                            std::uint64_t trials, std::uint64_t seed,
                            int workers) {
  std::vector<SweepRow> rows;
  for (const auto rule : rules) {
    for (const int m : m_values) {
      for (const double alpha : alphas) {
        SimConfig cfg;
        cfg.ensemble_size = m;
        cfg.alpha = alpha;
        cfg.rule = rule;
        cfg.trials = trials;
        cfg.seed = seed;
        cfg.workers = workers;
        rows.push_back({rule, m, alpha, simulate(cfg)});
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "rule,m,alpha,frac_evaluated,rel_error,lazy_acc,full_acc\n";
  for (const auto& row : rows) {
    out << to_string(row.rule) << "," << row.m << "," << row.alpha << ","
        << row.report.mean_fraction_evaluated << ","
        << row.report.relative_error << "," << row.report.lazy_accuracy << ","
        << row.report.full_accuracy << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_histogram_csv(const SimReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "votes_used,count\n";
  for (std::size_t n = 0; n < report.stop_histogram.size(); ++n) {
    if (report.stop_histogram[n] == 0) continue;
    out << n << "," << report.stop_histogram[n] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace comet
