#include "comet/engine.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "comet/data.hpp"
#include "comet/random.hpp"

namespace comet {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("ensemble parse error at line " +
                             std::to_string(line_no) + ": bad number '" + s +
                             "'");
  return v;
}

long parse_long(const std::string& s, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("ensemble parse error at line " +
                             std::to_string(line_no) + ": bad integer '" + s +
                             "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t line_no) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("ensemble parse error at line " +
                             std::to_string(line_no) + ": bad integer '" + s +
                             "'");
  return v;
}

// Expects "key=value", returns value.
std::string kv(const std::string& token, const std::string& key,
               std::size_t line_no) {
  const auto prefix = key + "=";
  if (token.rfind(prefix, 0) != 0)
    throw std::runtime_error("ensemble parse error at line " +
                             std::to_string(line_no) + ": expected " + key +
                             "=...");
  return token.substr(prefix.size());
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

void write_tree(std::ostream& out, const DecisionTree& tree) {
  out << "TREE id=" << tree.tree_id << " block=" << tree.block_id
      << " seed=" << tree.seed << " nodes=" << tree.nodes.size() << "\n";
  for (const auto& node : tree.nodes) {
    if (node.is_leaf()) {
      out << "L";
      for (const auto c : node.class_counts) out << " " << c;
      out << "\n";
    } else {
      out << "N " << node.feature << " " << format_double(node.threshold)
          << " skip=" << node.skip << "\n";
    }
  }
}

}  // namespace

void save_ensemble(const Ensemble& ensemble, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "COMET-ENSEMBLE v1 trees=" << ensemble.trees.size()
      << " features=" << ensemble.num_features
      << " classes=" << ensemble.num_classes << "\n";
  for (const auto& tree : ensemble.trees) write_tree(out, tree);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty ensemble file");
  auto header = tokens_of(line);
  if (header.size() != 5 || header[0] != "COMET-ENSEMBLE" || header[1] != "v1")
    throw std::runtime_error(path + ": bad header (line 1)");

  Ensemble ensemble;
  const long num_trees = parse_long(kv(header[2], "trees", 1), 1);
  ensemble.num_features =
      static_cast<int>(parse_long(kv(header[3], "features", 1), 1));
  ensemble.num_classes =
      static_cast<int>(parse_long(kv(header[4], "classes", 1), 1));
  ensemble.trees.reserve(num_trees);

  for (long t = 0; t < num_trees; ++t) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated at line " +
                               std::to_string(line_no + 1));
    ++line_no;
    auto head = tokens_of(line);
    if (head.size() != 5 || head[0] != "TREE")
      throw std::runtime_error("ensemble parse error at line " +
                               std::to_string(line_no) + ": expected TREE");
    DecisionTree tree;
    tree.tree_id = static_cast<int>(parse_long(kv(head[1], "id", line_no), line_no));
    tree.block_id =
        static_cast<int>(parse_long(kv(head[2], "block", line_no), line_no));
    tree.seed = parse_u64(kv(head[3], "seed", line_no), line_no);
    const long num_nodes = parse_long(kv(head[4], "nodes", line_no), line_no);
    tree.nodes.reserve(num_nodes);

    for (long k = 0; k < num_nodes; ++k) {
      if (!std::getline(in, line))
        throw std::runtime_error(path + ": truncated at line " +
                                 std::to_string(line_no + 1));
      ++line_no;
      auto toks = tokens_of(line);
      if (toks.empty())
        throw std::runtime_error("ensemble parse error at line " +
                                 std::to_string(line_no) + ": empty node");
      TreeNode node;
      if (toks[0] == "N") {
        if (toks.size() != 4)
          throw std::runtime_error("ensemble parse error at line " +
                                   std::to_string(line_no) +
                                   ": internal node needs 4 fields");
        node.feature = static_cast<int>(parse_long(toks[1], line_no));
        node.threshold = parse_double(toks[2], line_no);
        node.skip = static_cast<std::uint32_t>(
            parse_long(kv(toks[3], "skip", line_no), line_no));
        if (node.feature < 0 || node.feature >= ensemble.num_features)
          throw std::runtime_error("ensemble parse error at line " +
                                   std::to_string(line_no) +
                                   ": feature index out of range");
      } else if (toks[0] == "L") {
        if (static_cast<int>(toks.size()) != 1 + ensemble.num_classes)
          throw std::runtime_error("ensemble parse error at line " +
                                   std::to_string(line_no) +
                                   ": leaf arity mismatch");
        for (int z = 0; z < ensemble.num_classes; ++z) {
          node.class_counts.push_back(static_cast<std::uint32_t>(
              parse_long(toks[1 + z], line_no)));
        }
      } else {
        throw std::runtime_error("ensemble parse error at line " +
                                 std::to_string(line_no) +
                                 ": unknown node kind '" + toks[0] + "'");
      }
      tree.nodes.push_back(std::move(node));
    }
    ensemble.trees.push_back(std::move(tree));
  }
  return ensemble;
}

Ensemble merge_partitions(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::invalid_argument("no partition files");
  Ensemble merged = load_ensemble(paths[0]);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    Ensemble part = load_ensemble(paths[i]);
    if (part.num_features != merged.num_features ||
        part.num_classes != merged.num_classes) {
      throw std::runtime_error(paths[i] +
                               ": header mismatch with earlier partitions");
    }
    for (auto& tree : part.trees) merged.trees.push_back(std::move(tree));
  }
  return merged;
}

TrainResult train_distributed(const TrainConfig& cfg) {
  if (cfg.partitions < 1) throw std::invalid_argument("partitions must be >= 1");
  if (cfg.trees_per_block < 1)
    throw std::invalid_argument("trees_per_block must be >= 1");
  if (cfg.block_paths.empty()) throw std::invalid_argument("no block paths");

  const int num_blocks = static_cast<int>(cfg.block_paths.size());

  struct BlockOutput {
    Ensemble ensemble;
    std::vector<int> keys;  // partition key per tree, 1-based
    double seconds = 0.0;
    int num_features = 0;
    int num_classes = 0;
  };
  std::vector<BlockOutput> outputs(num_blocks);
  std::vector<std::string> failures(num_blocks);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= num_blocks) return;
      try {
        Block block = load_block(cfg.block_paths[i], cfg.num_classes_override);
        block.block_id = i;
        IVoteParams params;
        params.ensemble_size = cfg.trees_per_block;
        params.bite_size = cfg.bite_size;
        params.tree = cfg.tree;
        params.seed = cfg.base_seed ^ static_cast<std::uint64_t>(i);

        const auto t0 = std::chrono::steady_clock::now();
        outputs[i].ensemble = cfg.sampler == Sampler::IVoting
                                  ? ivote(block, params)
                                  : bag(block, params);
        const auto t1 = std::chrono::steady_clock::now();
        outputs[i].seconds = std::chrono::duration<double>(t1 - t0).count();

        // Reducer keys come from the block's own stream, drawn after all
        // trees exist so the trained models do not depend on p.
        Rng key_rng(params.seed ^ 0x9e3779b97f4a7c15ull);
        for (int t = 0; t < cfg.trees_per_block; ++t) {
          outputs[i].keys.push_back(
              1 + static_cast<int>(key_rng.uniform_index(
                      static_cast<std::uint64_t>(cfg.partitions))));
        }
        outputs[i].num_features = block.num_features;
        outputs[i].num_classes = block.num_classes;
      } catch (const std::exception& ex) {
        failures[i] = std::string(ex.what());
      }
    }
  };

  const int workers = std::max(1, std::min(cfg.workers, num_blocks));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (int i = 0; i < num_blocks; ++i) {
    if (!failures[i].empty())
      throw std::runtime_error("block " + cfg.block_paths[i] +
                               " failed: " + failures[i]);
  }

  int num_features = outputs[0].num_features;
  int num_classes = 0;
  for (const auto& out : outputs)
    num_classes = std::max(num_classes, out.num_classes);
  for (const auto& out : outputs) {
    if (out.num_features != num_features)
      throw std::runtime_error("blocks disagree on feature count");
  }

  // Assemble partitions in block order, single-writer.
  std::vector<Ensemble> partitions(cfg.partitions);
  for (auto& p : partitions) {
    p.num_features = num_features;
    p.num_classes = num_classes;
  }
  TrainResult result;
  for (int i = 0; i < num_blocks; ++i) {
    auto& out = outputs[i];
    for (std::size_t t = 0; t < out.ensemble.trees.size(); ++t) {
      auto& tree = out.ensemble.trees[t];
      if (num_classes > out.num_classes) {
        for (auto& node : tree.nodes) {
          if (node.is_leaf()) node.class_counts.resize(num_classes, 0);
        }
      }
      partitions[out.keys[t] - 1].trees.push_back(std::move(tree));
    }
    result.stats.push_back({i, static_cast<int>(out.keys.size()), out.seconds});
    result.total_trees += static_cast<int>(out.keys.size());
  }

  std::filesystem::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  try {
    for (int r = 0; r < cfg.partitions; ++r) {
      auto path = (std::filesystem::path(cfg.out_dir) /
                   ("part-" + std::to_string(r + 1) + ".ensemble"))
                      .string();
      save_ensemble(partitions[r], path);
      written.push_back(path);
      result.partition_paths.push_back(std::move(path));
    }
  } catch (...) {
    for (const auto& p : written) std::filesystem::remove(p);
    throw;
  }
  return result;
}

}  // namespace comet
