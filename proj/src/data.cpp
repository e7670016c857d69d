#include "comet/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "comet/random.hpp"

namespace comet {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_feature(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": non-numeric feature '" + s + "'");
  }
}

int parse_label(const std::string& s, std::size_t line_no) {
  int v = 0;
  const auto* begin = s.data();
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end || v < 0) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": bad label '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

Block load_block(const std::string& path, int num_classes_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  strip_cr(line);
  const auto header = split_csv_line(line);

  int label_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "label") label_col = static_cast<int>(i);
  }
  if (label_col < 0)
    throw std::runtime_error(path + ": header has no 'label' column");

  Block block;
  block.num_features = static_cast<int>(header.size()) - 1;
  if (block.num_features < 1)
    throw std::runtime_error(path + ": no feature columns");

  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    Example ex;
    ex.features.reserve(block.num_features);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (static_cast<int>(i) == label_col) {
        ex.label = parse_label(fields[i], line_no);
      } else {
        ex.features.push_back(parse_feature(fields[i], line_no));
      }
    }
    max_label = std::max(max_label, ex.label);
    block.examples.push_back(std::move(ex));
  }

  if (block.examples.empty()) throw std::runtime_error(path + ": empty block");

  block.num_classes =
      num_classes_override > 0 ? num_classes_override : max_label + 1;
  if (block.num_classes < 2) block.num_classes = 2;
  if (max_label >= block.num_classes) {
    throw std::runtime_error(path + ": label " + std::to_string(max_label) +
                             " exceeds declared class count " +
                             std::to_string(block.num_classes));
  }
  return block;
}

void write_block(const Block& block, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int i = 0; i < block.num_features; ++i) out << "f" << i << ",";
  out << "label\n";
  for (const auto& ex : block.examples) {
    for (const double v : ex.features) out << format_double(v) << ",";
    out << ex.label << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> shuffle_split(const std::string& input,
                                       int num_blocks, std::uint64_t seed,
                                       const std::string& out_dir) {
  if (num_blocks < 1) throw std::invalid_argument("num_blocks must be >= 1");

  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(input + ": empty file");
  strip_cr(header);

  std::filesystem::create_directories(out_dir);
  std::vector<std::string> paths;
  std::vector<std::ofstream> outs;
  for (int b = 0; b < num_blocks; ++b) {
    auto path =
        (std::filesystem::path(out_dir) / ("block-" + std::to_string(b) + ".csv"))
            .string();
    outs.emplace_back(path);
    if (!outs.back()) throw std::runtime_error("cannot write " + path);
    outs.back() << header << "\n";
    paths.push_back(std::move(path));
  }

  Rng rng(seed);
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto b = rng.uniform_index(static_cast<std::uint64_t>(num_blocks));
    outs[b] << line << "\n";
  }
  for (auto& out : outs) {
    out.close();
    if (!out) throw std::runtime_error("write failed under " + out_dir);
  }
  return paths;
}

Block synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.n < 1) throw std::invalid_argument("synth: n must be >= 1");
  if (spec.d < 1) throw std::invalid_argument("synth: d must be >= 1");
  if (spec.c < 2) throw std::invalid_argument("synth: c must be >= 2");
  if (spec.noise_rate < 0.0 || spec.noise_rate >= 1.0)
    throw std::invalid_argument("synth: noise_rate must be in [0, 1)");

  Rng rng(seed);
  Block block;
  block.num_features = spec.d;
  block.num_classes = spec.c;
  block.examples.reserve(spec.n);

  for (std::size_t i = 0; i < spec.n; ++i) {
    const int cluster = static_cast<int>(
        rng.uniform_index(static_cast<std::uint64_t>(spec.c)));
    Example ex;
    ex.features.resize(spec.d);
    for (int j = 0; j < spec.d; ++j) {
      ex.features[j] = cluster * spec.class_separation + rng.normal();
    }
    ex.label = cluster;
    if (spec.noise_rate > 0.0 && rng.bernoulli(spec.noise_rate)) {
      // Flip to a uniformly random other class.
      const int shift = 1 + static_cast<int>(rng.uniform_index(
                                static_cast<std::uint64_t>(spec.c - 1)));
      ex.label = (cluster + shift) % spec.c;
    }
    block.examples.push_back(std::move(ex));
  }
  return block;
}

}  // namespace comet
