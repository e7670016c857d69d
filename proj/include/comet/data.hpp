#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace comet {

struct Example {
  std::vector<double> features;
  int label = 0;
};

// An in-memory partition of labeled examples; the unit one worker trains on.
struct Block {
  std::vector<Example> examples;
  int num_features = 0;
  int num_classes = 2;
  int block_id = 0;

  std::size_t size() const { return examples.size(); }
};

// Parses a CSV block. Header row required; the column named "label" holds
// integer class indices, every other column is a numeric feature in header
// order. Throws std::runtime_error naming the offending line on bad input.
Block load_block(const std::string& path, int num_classes_override = 0);

// Writes a block back out in the same CSV dialect load_block reads.
void write_block(const Block& block, const std::string& path);

// Streams `input` into `num_blocks` CSV files under `out_dir`, assigning each
// row to a uniformly random block. Deterministic given (input, B, seed).
// Returns the paths of the files written, in block order.
std::vector<std::string> shuffle_split(const std::string& input,
                                       int num_blocks, std::uint64_t seed,
                                       const std::string& out_dir);

struct SynthSpec {
  std::size_t n = 0;
  int d = 0;
  int c = 2;
  double class_separation = 1.0;
  double noise_rate = 0.0;
};

// Mixture-of-Gaussians classification data: c unit-variance clusters whose
// centers are class_separation apart per dimension, labels flipped to a
// random other class with probability noise_rate.
Block synth_generate(const SynthSpec& spec, std::uint64_t seed);

}  // namespace comet
