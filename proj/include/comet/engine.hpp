#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "comet/ivoting.hpp"
#include "comet/tree.hpp"

namespace comet {

enum class Sampler { IVoting, Bagging };

struct TrainConfig {
  std::vector<std::string> block_paths;
  Sampler sampler = Sampler::IVoting;
  int trees_per_block = 100;  // m_local
  int bite_size = 0;          // 0 = per-block default
  TreeParams tree;
  int partitions = 1;  // p
  std::uint64_t base_seed = 0;
  int workers = 1;
  std::string out_dir;
  int num_classes_override = 0;
};

struct BlockTrainStat {
  int block_id = 0;
  int trees = 0;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<std::string> partition_paths;  // part-1 .. part-p
  std::vector<BlockTrainStat> stats;
  int total_trees = 0;
};

// Trains one local ensemble per block (in parallel up to cfg.workers, seed =
// base_seed XOR block_id), assigns each tree a uniform random partition key
// from the block's own stream, and writes p partition files. Deterministic
// given cfg; the trained trees do not depend on p.
TrainResult train_distributed(const TrainConfig& cfg);

// Concatenates partition files into one flat ensemble (file order, then
// within-file order). Throws on feature/class header mismatch.
Ensemble merge_partitions(const std::vector<std::string>& paths);

// Line-oriented text format, canonical and byte-stable: save-load-save is
// the identity. Doubles use shortest round-trip decimals.
void save_ensemble(const Ensemble& ensemble, const std::string& path);
Ensemble load_ensemble(const std::string& path);

}  // namespace comet
