#include "comet/lazy.hpp"

#include <numeric>
#include <stdexcept>

namespace comet {
namespace {

int argmax_lowest(const std::vector<int>& votes) {
  int best = 0;
  for (std::size_t z = 1; z < votes.size(); ++z) {
    if (votes[z] > votes[best]) best = static_cast<int>(z);
  }
  return best;
}

void check_dims(const Ensemble& ensemble, std::span<const double> x) {
  if (static_cast<int>(x.size()) != ensemble.num_features)
    throw std::invalid_argument("input dimension mismatch");
}

}  // namespace

PermutedEnsemble::PermutedEnsemble(const Ensemble& ensemble,
                                   std::uint64_t permutation_seed)
    : ensemble_(&ensemble), order_(ensemble.trees.size()) {
  std::iota(order_.begin(), order_.end(), 0u);
  Rng rng(permutation_seed);
  for (std::size_t i = order_.size(); i > 1; --i) {
    std::swap(order_[i - 1], order_[rng.uniform_index(i)]);
  }
}

LazyResult lazy_evaluate(const PermutedEnsemble& ensemble,
                         std::span<const double> x,
                         const StoppingTable& table, std::size_t start_index) {
  const Ensemble& e = ensemble.ensemble();
  check_dims(e, x);
  const int m = static_cast<int>(e.size());
  if (table.m() != m)
    throw std::invalid_argument("stopping table built for different m");

  std::vector<int> votes(e.num_classes, 0);
  LazyResult result;
  for (int n = 1; n <= m; ++n) {
    const auto slot = (start_index + n - 1) % m;
    ++votes[predict_tree(ensemble.tree_at(slot), x)];
    const int lead = argmax_lowest(votes);
    if (n < m && table.stop(votes[lead], n)) {
      result.predicted = lead;
      result.votes_used = n;
      result.stopped_early = true;
      return result;
    }
  }
  result.predicted = argmax_lowest(votes);
  result.votes_used = m;
  result.stopped_early = false;
  return result;
}

int full_evaluate(const Ensemble& ensemble, std::span<const double> x) {
  check_dims(ensemble, x);
  std::vector<int> votes(ensemble.num_classes, 0);
  for (const auto& tree : ensemble.trees) ++votes[predict_tree(tree, x)];
  return argmax_lowest(votes);
}

CommitteeResult committee_evaluate(
    std::span<const PermutedEnsemble> partitions, std::span<const double> x,
    const StoppingTable& table_sub, Rng& rng) {
  if (partitions.empty())
    throw std::invalid_argument("committee_evaluate: no partitions");

  const auto pick = rng.uniform_index(partitions.size());
  const auto start =
      rng.uniform_index(partitions[pick].ensemble().size());
  const auto lazy = lazy_evaluate(partitions[pick], x, table_sub, start);

  CommitteeResult result;
  if (lazy.stopped_early) {
    result.predicted = lazy.predicted;
    result.stage = CommitteeStage::Subcommittee;
    result.votes_used = lazy.votes_used;
    return result;
  }

  // Unconfident: every base model across all partitions votes once.
  const int c = partitions.front().ensemble().num_classes;
  std::vector<int> votes(c, 0);
  int total = 0;
  for (const auto& part : partitions) {
    for (const auto& tree : part.ensemble().trees) {
      ++votes[predict_tree(tree, x)];
      ++total;
    }
  }
  result.predicted = argmax_lowest(votes);
  result.stage = CommitteeStage::Full;
  result.votes_used = total;
  return result;
}

}  // namespace comet
