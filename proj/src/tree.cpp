#include "comet/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "comet/random.hpp"

namespace comet {
namespace {

double entropy_bits(const std::vector<std::uint32_t>& counts,
                    std::uint32_t total) {
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Sample k distinct feature indices from [0, d), returned sorted ascending
// so the tie-break order is deterministic.
std::vector<int> sample_features(int d, int k, Rng& rng) {
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j =
        i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct Builder {
  const Block& block;
  TreeParams params;
  int attrs_per_node;
  Rng rng;
  std::vector<TreeNode> nodes;

  Builder(const Block& b, const TreeParams& p)
      : block(b),
        params(p),
        attrs_per_node(p.attrs_per_node > 0
                           ? std::min(p.attrs_per_node, b.num_features)
                           : attr_sample_size(b.num_features)),
        rng(p.seed) {}

  std::vector<std::uint32_t> class_counts(
      std::span<const std::uint32_t> indices) const {
    std::vector<std::uint32_t> counts(block.num_classes, 0);
    for (const auto i : indices) ++counts[block.examples[i].label];
    return counts;
  }

  // Returns the subtree's node count.
  std::uint32_t build(std::vector<std::uint32_t>& indices) {
    auto counts = class_counts(indices);
    const auto nonzero =
        std::count_if(counts.begin(), counts.end(),
                      [](std::uint32_t c) { return c > 0; });
    const bool pure = nonzero <= 1;
    const bool too_small =
        indices.size() < static_cast<std::size_t>(params.min_leaf_size);

    std::optional<SplitChoice> split;
    if (!pure && !too_small) {
      const auto features = sample_features(block.num_features, attrs_per_node, rng);
      split = best_split(block, indices, features);
    }

    if (!split) {
      TreeNode leaf;
      leaf.class_counts = std::move(counts);
      nodes.push_back(std::move(leaf));
      return 1;
    }

    const auto self = nodes.size();
    TreeNode node;
    node.feature = split->feature;
    node.threshold = split->threshold;
    nodes.push_back(std::move(node));

    std::vector<std::uint32_t> left, right;
    for (const auto i : indices) {
      if (block.examples[i].features[split->feature] < split->threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    const auto left_size = build(left);
    nodes[self].skip = left_size;
    const auto right_size = build(right);
    return 1 + left_size + right_size;
  }
};

}  // namespace

int attr_sample_size(int d) {
  if (d < 1) throw std::invalid_argument("attr_sample_size: d must be >= 1");
  const int k = static_cast<int>(std::floor(1.0 + std::log2(static_cast<double>(d))));
  return std::clamp(k, 1, d);
}

std::optional<SplitChoice> best_split(
    const Block& block, std::span<const std::uint32_t> indices,
    std::span<const int> feature_subset) {
  if (indices.empty()) throw std::invalid_argument("best_split: empty node");
  if (feature_subset.empty())
    throw std::invalid_argument("best_split: empty feature subset");

  const int c = block.num_classes;
  const std::uint32_t total = static_cast<std::uint32_t>(indices.size());

  std::vector<std::uint32_t> totals(c, 0);
  for (const auto i : indices) ++totals[block.examples[i].label];
  const double parent_entropy = entropy_bits(totals, total);

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, int>> values;  // (feature value, label)
  values.reserve(indices.size());

  for (const int f : feature_subset) {
    values.clear();
    for (const auto i : indices) {
      values.emplace_back(block.examples[i].features[f],
                          block.examples[i].label);
    }
    std::sort(values.begin(), values.end());

    std::vector<std::uint32_t> left_counts(c, 0);
    std::uint32_t n_left = 0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      ++left_counts[values[k].second];
      ++n_left;
      if (values[k].first == values[k + 1].first) continue;

      const double threshold =
          values[k].first + (values[k + 1].first - values[k].first) / 2.0;
      const std::uint32_t n_right = total - n_left;

      std::vector<std::uint32_t> right_counts(c);
      for (int z = 0; z < c; ++z) right_counts[z] = totals[z] - left_counts[z];

      const double child_entropy =
          (n_left * entropy_bits(left_counts, n_left) +
           n_right * entropy_bits(right_counts, n_right)) /
          total;
      const double gain = parent_entropy - child_entropy;
      if (gain <= 0.0) continue;
      // Tie-break: higher gain, then lower feature index (iteration order
      // already ascending), then lower threshold.
      if (!best || gain > best->gain) best = SplitChoice{f, threshold, gain};
    }
  }
  return best;
}

DecisionTree train_tree(const Block& block,
                        std::span<const std::uint32_t> bite,
                        const TreeParams& params) {
  if (bite.empty()) throw std::invalid_argument("train_tree: empty bite");
  Builder builder(block, params);
  std::vector<std::uint32_t> indices(bite.begin(), bite.end());
  builder.build(indices);
  DecisionTree tree;
  tree.nodes = std::move(builder.nodes);
  tree.seed = params.seed;
  return tree;
}

int predict_tree(const DecisionTree& tree, std::span<const double> x) {
  std::size_t i = 0;
  while (true) {
    const TreeNode& node = tree.nodes[i];
    if (node.is_leaf()) {
      int best = 0;
      for (std::size_t z = 1; z < node.class_counts.size(); ++z) {
        if (node.class_counts[z] > node.class_counts[best])
          best = static_cast<int>(z);
      }
      return best;
    }
    if (static_cast<std::size_t>(node.feature) >= x.size())
      throw std::invalid_argument("predict_tree: feature dimension mismatch");
    i = x[node.feature] < node.threshold ? i + 1 : i + 1 + node.skip;
  }
}

}  // namespace comet
