#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "comet/data.hpp"

namespace comet {

// Nodes are stored in preorder with the left subtree first. An internal
// node's left child is the next node; `skip` is the left subtree's node
// count, so the right child sits at index + 1 + skip.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::uint32_t skip = 0;
  std::vector<std::uint32_t> class_counts;  // leaf only

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int tree_id = 0;
  int block_id = 0;
  std::uint64_t seed = 0;
};

struct Ensemble {
  std::vector<DecisionTree> trees;
  int num_features = 0;
  int num_classes = 2;

  std::size_t size() const { return trees.size(); }
};

struct TreeParams {
  int min_leaf_size = 10;
  int attrs_per_node = 0;  // 0 = use attr_sample_size(d)
  std::uint64_t seed = 0;
};

// Random-forest attribute subsample size, floor(1 + log2(d)) clamped to [1, d].
int attr_sample_size(int d);

struct SplitChoice {
  int feature;
  double threshold;
  double gain;  // bits
};

// Best information-gain split over the given feature subset. Thresholds are
// midpoints between consecutive distinct sorted values; ties break toward the
// lowest feature index, then the lowest threshold. Returns nullopt when no
// candidate has strictly positive gain. Convention: feature < threshold goes
// left, >= threshold goes right.
std::optional<SplitChoice> best_split(
    const Block& block, std::span<const std::uint32_t> indices,
    std::span<const int> feature_subset);

// Grows a full tree on the bite (indices into block). Leaves form when the
// node is pure, has fewer than min_leaf_size examples, or no split gains.
DecisionTree train_tree(const Block& block,
                        std::span<const std::uint32_t> bite,
                        const TreeParams& params);

// Descends by threshold comparisons; leaf argmax, ties to the lowest class.
int predict_tree(const DecisionTree& tree, std::span<const double> x);

}  // namespace comet
