#include "comet/ivoting.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "comet/random.hpp"

namespace comet {
namespace {

void draw_with_replacement(const std::vector<std::uint32_t>& pool, int k,
                           Rng& rng, std::vector<std::uint32_t>& out) {
  for (int i = 0; i < k; ++i) {
    out.push_back(pool[rng.uniform_index(pool.size())]);
  }
}

Ensemble make_ensemble(const Block& block) {
  Ensemble e;
  e.num_features = block.num_features;
  e.num_classes = block.num_classes;
  return e;
}

void validate(const Block& block, const IVoteParams& params) {
  if (block.examples.empty()) throw std::invalid_argument("empty block");
  if (params.ensemble_size < 1)
    throw std::invalid_argument("ensemble_size must be >= 1");
}

}  // namespace

bool OOBTally::is_correct(std::size_t example, int label) const {
  const std::uint32_t own = count(example, label);
  if (own == 0) return false;
  for (int z = 0; z < static_cast<int>(num_classes_); ++z) {
    if (z == label) continue;
    if (count(example, z) >= own) return false;  // tie counts against
  }
  return true;
}

int resolve_bite_size(const IVoteParams& params, std::size_t block_size) {
  int b = params.bite_size;
  if (b <= 0) {
    b = static_cast<int>(std::min<std::size_t>(block_size / 10, 10000));
  }
  if (b % 2 != 0) ++b;
  return std::max(b, 2);
}

Ensemble ivote(const Block& block, const IVoteParams& params) {
  validate(block, params);
  const int b = resolve_bite_size(params, block.size());
  const std::size_t n = block.size();

  Rng rng(params.seed);
  OOBTally tally(n, block.num_classes);

  std::vector<std::uint32_t> correct(n), incorrect(n);
  std::iota(correct.begin(), correct.end(), 0);
  std::iota(incorrect.begin(), incorrect.end(), 0);

  Ensemble ensemble = make_ensemble(block);
  ensemble.trees.reserve(params.ensemble_size);

  std::vector<std::uint32_t> bite;
  std::vector<char> in_bag(n);

  for (int i = 0; i < params.ensemble_size; ++i) {
    bite.clear();
    // Half from each partition; if one side is empty the whole bite comes
    // from the other.
    const auto& a = correct.empty() ? incorrect : correct;
    const auto& z = incorrect.empty() ? correct : incorrect;
    draw_with_replacement(a, b / 2, rng, bite);
    draw_with_replacement(z, b - b / 2, rng, bite);

    TreeParams tp = params.tree;
    tp.seed = rng.next_u64();
    const auto tree = train_tree(block, bite, tp);

    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (const auto j : bite) in_bag[j] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_bag[j]) continue;
      tally.add_vote(j, predict_tree(tree, block.examples[j].features));
    }

    correct.clear();
    incorrect.clear();
    for (std::uint32_t j = 0; j < n; ++j) {
      if (tally.is_correct(j, block.examples[j].label))
        correct.push_back(j);
      else
        incorrect.push_back(j);
    }

    ensemble.trees.push_back(tree);
    ensemble.trees.back().tree_id = i;
    ensemble.trees.back().block_id = block.block_id;
  }
  return ensemble;
}

Ensemble bag(const Block& block, const IVoteParams& params) {
  validate(block, params);
  const int b = resolve_bite_size(params, block.size());

  Rng rng(params.seed);
  std::vector<std::uint32_t> all(block.size());
  std::iota(all.begin(), all.end(), 0);

  Ensemble ensemble = make_ensemble(block);
  ensemble.trees.reserve(params.ensemble_size);

  std::vector<std::uint32_t> bite;
  for (int i = 0; i < params.ensemble_size; ++i) {
    bite.clear();
    draw_with_replacement(all, b, rng, bite);
    TreeParams tp = params.tree;
    tp.seed = rng.next_u64();
    ensemble.trees.push_back(train_tree(block, bite, tp));
    ensemble.trees.back().tree_id = i;
    ensemble.trees.back().block_id = block.block_id;
  }
  return ensemble;
}

}  // namespace comet
