#pragma once

#include <cstdint>
#include <vector>

#include "comet/tree.hpp"

namespace comet {

// Running out-of-bag vote matrix: counts[j][z] is the number of prior trees
// for which example j was out-of-bag and which predicted class z on it.
class OOBTally {
 public:
  OOBTally(std::size_t num_examples, int num_classes)
      : num_classes_(num_classes),
        counts_(num_examples * static_cast<std::size_t>(num_classes), 0) {}

  void add_vote(std::size_t example, int predicted) {
    ++counts_[example * num_classes_ + static_cast<std::size_t>(predicted)];
  }

  std::uint32_t count(std::size_t example, int cls) const {
    return counts_[example * num_classes_ + static_cast<std::size_t>(cls)];
  }

  // True iff the label holds the strict argmax of the example's OOB row.
  // Ties and the all-zero row count as incorrect.
  bool is_correct(std::size_t example, int label) const;

 private:
  std::size_t num_classes_;
  std::vector<std::uint32_t> counts_;
};

struct IVoteParams {
  int ensemble_size = 100;  // m
  int bite_size = 0;        // b; 0 = 10% of block, capped at 10000, made even
  TreeParams tree;
  std::uint64_t seed = 0;
};

// Resolves bite_size 0 to the default for a block of the given size.
int resolve_bite_size(const IVoteParams& params, std::size_t block_size);

// IVoting: m sequential iterations, each drawing b/2 examples with
// replacement from the currently-correct set and b/2 from the currently-
// incorrect set (per OOB votes), training a tree on the bite, then updating
// the OOB tally for all out-of-bag examples.
Ensemble ivote(const Block& block, const IVoteParams& params);

// Bagging baseline: each tree trained on b uniform with-replacement draws.
// Attribute subsampling stays active.
Ensemble bag(const Block& block, const IVoteParams& params);

}  // namespace comet
