#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "comet/random.hpp"
#include "comet/stopping.hpp"
#include "comet/tree.hpp"

namespace comet {

struct LazyResult {
  int predicted = 0;
  int votes_used = 0;
  bool stopped_early = false;
};

enum class CommitteeStage { Subcommittee, Full };

struct CommitteeResult {
  int predicted = 0;
  CommitteeStage stage = CommitteeStage::Subcommittee;
  int votes_used = 0;
};

// An ensemble wrapped with a fixed load-time permutation of its trees.
// Evaluations start at a caller-chosen index and wrap, so a single random
// number per input suffices for without-replacement sampling.
class PermutedEnsemble {
 public:
  PermutedEnsemble(const Ensemble& ensemble, std::uint64_t permutation_seed);

  const Ensemble& ensemble() const { return *ensemble_; }
  const std::vector<std::uint32_t>& order() const { return order_; }

  const DecisionTree& tree_at(std::size_t slot) const {
    return ensemble_->trees[order_[slot]];
  }

 private:
  const Ensemble* ensemble_;
  std::vector<std::uint32_t> order_;
};

// Tallies votes in permutation order from start_index until the table allows
// stopping or the ensemble is exhausted. Ties predict the lowest class index.
LazyResult lazy_evaluate(const PermutedEnsemble& ensemble,
                         std::span<const double> x,
                         const StoppingTable& table, std::size_t start_index);

// Exact majority over all trees.
int full_evaluate(const Ensemble& ensemble, std::span<const double> x);

// Two-stage committee evaluation: lazily evaluate one randomly chosen
// partition; if it is not confident, re-tally every tree across all
// partitions from scratch.
CommitteeResult committee_evaluate(
    std::span<const PermutedEnsemble> partitions, std::span<const double> x,
    const StoppingTable& table_sub, Rng& rng);

}  // namespace comet
