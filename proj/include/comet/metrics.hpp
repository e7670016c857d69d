#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comet/ivoting.hpp"
#include "comet/lazy.hpp"
#include "comet/stopping.hpp"
#include "comet/tree.hpp"

namespace comet {

struct EvalReport {
  double accuracy = 0.0;
  double mean_votes_used = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::uint64_t> confusion;  // c x c, row = true, col = predicted
  std::size_t test_size = 0;

  std::uint64_t confusion_at(int truth, int pred, int c) const {
    return confusion[static_cast<std::size_t>(truth) * c + pred];
  }
};

// Full-ensemble evaluation over a test block.
EvalReport evaluate_full(const Ensemble& ensemble, const Block& test);

// Lazy evaluation with the given table; one start-index draw per example
// from the seeded stream.
EvalReport evaluate_lazy(const PermutedEnsemble& ensemble, const Block& test,
                         const StoppingTable& table, std::uint64_t seed);

struct BiteSweepRow {
  int bite_size;
  double accuracy;
};

// Trains one IVoting ensemble per bite size on `train` and scores it on
// `test` with full evaluation.
std::vector<BiteSweepRow> bite_size_sweep(const Block& train,
                                          const Block& test,
                                          const std::vector<int>& sizes,
                                          int iterations, std::uint64_t seed);

void write_bite_sweep_csv(const std::vector<BiteSweepRow>& rows,
                          const std::string& path);

}  // namespace comet
