#include "comet/metrics.hpp"

#include <chrono>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "comet/random.hpp"

namespace comet {
namespace {

void check_test_block(const Block& test, int num_features) {
  if (test.examples.empty()) throw std::invalid_argument("empty test block");
  if (test.num_features != num_features)
    throw std::invalid_argument("test block dimension mismatch");
}

}  // namespace

EvalReport evaluate_full(const Ensemble& ensemble, const Block& test) {
  check_test_block(test, ensemble.num_features);
  const int c = ensemble.num_classes;

  EvalReport report;
  report.confusion.assign(static_cast<std::size_t>(c) * c, 0);
  report.test_size = test.size();

  std::uint64_t correct = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& ex : test.examples) {
    const int pred = full_evaluate(ensemble, ex.features);
    ++report.confusion[static_cast<std::size_t>(ex.label) * c + pred];
    if (pred == ex.label) ++correct;
  }
  const auto t1 = std::chrono::steady_clock::now();

  report.accuracy = static_cast<double>(correct) / test.size();
  report.mean_votes_used = static_cast<double>(ensemble.size());
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return report;
}

EvalReport evaluate_lazy(const PermutedEnsemble& ensemble, const Block& test,
                         const StoppingTable& table, std::uint64_t seed) {
  const Ensemble& e = ensemble.ensemble();
  check_test_block(test, e.num_features);
  const int c = e.num_classes;

  EvalReport report;
  report.confusion.assign(static_cast<std::size_t>(c) * c, 0);
  report.test_size = test.size();

  Rng rng(seed);
  std::uint64_t correct = 0;
  std::uint64_t votes = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& ex : test.examples) {
    const auto start = rng.uniform_index(e.size());
    const auto result = lazy_evaluate(ensemble, ex.features, table, start);
    votes += static_cast<std::uint64_t>(result.votes_used);
    ++report.confusion[static_cast<std::size_t>(ex.label) * c + result.predicted];
    if (result.predicted == ex.label) ++correct;
  }
  const auto t1 = std::chrono::steady_clock::now();

  report.accuracy = static_cast<double>(correct) / test.size();
  report.mean_votes_used = static_cast<double>(votes) / test.size();
  report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return report;
}

std::vector<BiteSweepRow> bite_size_sweep(const Block& train,
                                          const Block& test,
                                          const std::vector<int>& sizes,
                                          int iterations, std::uint64_t seed) {
  std::vector<BiteSweepRow> rows;
  for (const int b : sizes) {
    if (b < 2 || b % 2 != 0)
      throw std::invalid_argument("bite sizes must be positive even integers");
    IVoteParams params;
    params.ensemble_size = iterations;
    params.bite_size = b;
    params.seed = seed;
    const auto ensemble = ivote(train, params);
    rows.push_back({b, evaluate_full(ensemble, test).accuracy});
  }
  return rows;
}

void write_bite_sweep_csv(const std::vector<BiteSweepRow>& rows,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "bite_size,accuracy\n";
  for (const auto& row : rows) out << row.bite_size << "," << row.accuracy << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace comet
