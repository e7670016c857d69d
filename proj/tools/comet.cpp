#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comet/data.hpp"
#include "comet/engine.hpp"
#include "comet/lazy.hpp"
#include "comet/metrics.hpp"
#include "comet/sim.hpp"
#include "comet/stopping.hpp"

namespace {

int worker_count(int flag_value) {
  if (const char* env = std::getenv("COMET_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return flag_value > 0 ? flag_value : 1;
}

std::vector<comet::StopRule> all_rules() {
  using comet::StopRule;
  return {StopRule::G1, StopRule::G2, StopRule::G1FPC, StopRule::G2FPC,
          StopRule::MLEE};
}

void print_sim_report(const comet::SimReport& r) {
  std::cout << "trials=" << r.trials
            << " frac_evaluated=" << r.mean_fraction_evaluated
            << " rel_error=" << r.relative_error
            << " lazy_acc=" << r.lazy_accuracy
            << " full_acc=" << r.full_accuracy << "\n";
}

void run_predict(const std::vector<std::string>& ensembles,
                 const std::string& test_path, const std::string& rule_name,
                 double alpha, std::uint64_t seed, bool committee,
                 const std::string& out_path) {
  const auto rule = comet::parse_rule(rule_name);
  const auto test = comet::load_block(test_path);

  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << "id,prediction,votes_used,stage\n";
  }

  std::uint64_t correct = 0;
  std::uint64_t votes = 0;
  const auto t0 = std::chrono::steady_clock::now();

  if (committee) {
    std::vector<comet::Ensemble> parts;
    for (const auto& path : ensembles) parts.push_back(comet::load_ensemble(path));
    const auto sub_size = parts.front().size();
    for (const auto& p : parts) {
      if (p.size() != sub_size)
        throw std::invalid_argument(
            "committee mode requires equally sized partitions");
      if (p.num_features != parts.front().num_features ||
          p.num_classes != parts.front().num_classes)
        throw std::invalid_argument("partition header mismatch");
    }
    comet::StopConfig sc{rule, alpha, static_cast<int>(sub_size)};
    const auto table = comet::build_table(sc);
    std::vector<comet::PermutedEnsemble> permuted;
    for (std::size_t i = 0; i < parts.size(); ++i)
      permuted.emplace_back(parts[i], seed + i);
    comet::Rng rng(seed);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto r = comet::committee_evaluate(permuted, test.examples[i].features,
                                               table, rng);
      votes += r.votes_used;
      if (r.predicted == test.examples[i].label) ++correct;
      if (out) {
        out << i << "," << r.predicted << "," << r.votes_used << ","
            << (r.stage == comet::CommitteeStage::Subcommittee ? "subcommittee"
                                                               : "full")
            << "\n";
      }
    }
  } else {
    const auto ensemble = comet::merge_partitions(ensembles);
    comet::StopConfig sc{rule, alpha, static_cast<int>(ensemble.size())};
    const auto table = comet::build_table(sc);
    const comet::PermutedEnsemble permuted(ensemble, seed);
    comet::Rng rng(seed + 1);
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto start = rng.uniform_index(ensemble.size());
      const auto r = comet::lazy_evaluate(permuted, test.examples[i].features,
                                          table, start);
      votes += r.votes_used;
      if (r.predicted == test.examples[i].label) ++correct;
      if (out) {
        out << i << "," << r.predicted << "," << r.votes_used << ",single\n";
      }
    }
  }

  const auto t1 = std::chrono::steady_clock::now();
  std::cout << "examples=" << test.size()
            << " accuracy=" << static_cast<double>(correct) / test.size()
            << " mean_votes="
            << static_cast<double>(votes) / test.size() << " wall_s="
            << std::chrono::duration<double>(t1 - t0).count() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"COMET: partition-parallel IVoting random forests with lazy "
               "ensemble evaluation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic CSV dataset");
  comet::SynthSpec synth_spec;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--n", synth_spec.n, "number of examples")->required();
  synth->add_option("--d", synth_spec.d, "number of features")->required();
  synth->add_option("--c", synth_spec.c, "number of classes");
  synth->add_option("--separation", synth_spec.class_separation,
                    "cluster separation per dimension");
  synth->add_option("--noise", synth_spec.noise_rate, "label flip probability");
  synth->add_option("--seed", synth_seed, "rng seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // shuffle
  auto* shuffle = app.add_subcommand("shuffle",
                                     "Randomly repartition a CSV into blocks");
  std::string shuffle_input, shuffle_out_dir;
  int shuffle_blocks = 1;
  std::uint64_t shuffle_seed = 0;
  shuffle->add_option("--input", shuffle_input)->required();
  shuffle->add_option("--blocks", shuffle_blocks, "number of blocks")
      ->check(CLI::PositiveNumber)
      ->required();
  shuffle->add_option("--seed", shuffle_seed);
  shuffle->add_option("--out-dir", shuffle_out_dir)->required();

  // train
  auto* train = app.add_subcommand("train",
                                   "Train per-block ensembles and emit "
                                   "partition files");
  std::string train_blocks_dir, train_sampler = "ivoting", train_out_dir;
  comet::TrainConfig tc;
  int train_workers = 1;
  train->add_option("--blocks-dir", train_blocks_dir)->required();
  train->add_option("--sampler", train_sampler)
      ->check(CLI::IsMember({"ivoting", "bagging"}));
  train->add_option("--trees-per-block", tc.trees_per_block)
      ->check(CLI::PositiveNumber);
  train->add_option("--bite-size", tc.bite_size);
  train->add_option("--min-leaf", tc.tree.min_leaf_size);
  train->add_option("--partitions", tc.partitions)->check(CLI::PositiveNumber);
  train->add_option("--seed", tc.base_seed);
  train->add_option("--workers", train_workers);
  train->add_option("--classes", tc.num_classes_override,
                    "override class count");
  train->add_option("--out-dir", train_out_dir)->required();

  // predict
  auto* predict = app.add_subcommand("predict", "Evaluate an ensemble on a "
                                                "test CSV");
  std::vector<std::string> pred_ensembles;
  std::string pred_test, pred_rule = "full", pred_out;
  double pred_alpha = 0.01;
  std::uint64_t pred_seed = 0;
  bool pred_committee = false;
  predict->add_option("--ensemble", pred_ensembles, "ensemble/partition files")
      ->required();
  predict->add_option("--test", pred_test)->required();
  predict->add_option("--rule", pred_rule)
      ->check(CLI::IsMember({"full", "g1", "g2", "g1-fpc", "g2-fpc", "mlee"}));
  predict->add_option("--alpha", pred_alpha);
  predict->add_option("--seed", pred_seed);
  predict->add_flag("--committee", pred_committee,
                    "two-stage lazy committee evaluation");
  predict->add_option("--out", pred_out, "per-example predictions CSV");

  // simulate
  auto* simulate = app.add_subcommand("simulate",
                                      "Monte-Carlo comparison of lazy rules");
  int sim_m = 10000;
  double sim_alpha = 0.01;
  std::string sim_rule = "g1-fpc", sim_out, sim_hist_out, sim_preset;
  std::uint64_t sim_trials = 1000000, sim_seed = 0;
  int sim_workers = 1;
  simulate->add_option("--m", sim_m)->check(CLI::PositiveNumber);
  simulate->add_option("--alpha", sim_alpha);
  simulate->add_option("--rule", sim_rule,
                       "g1|g2|g1-fpc|g2-fpc|mlee|full|all");
  simulate->add_option("--trials", sim_trials)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--workers", sim_workers);
  simulate->add_option("--out", sim_out, "sweep CSV output");
  simulate->add_option("--hist-out", sim_hist_out,
                       "stopping histogram CSV (single-config runs)");
  simulate->add_option("--preset", sim_preset,
                       "paper-sim: all rules, m in {100,500,1000,10000}, "
                       "alpha in {1e-2,1e-3,1e-4}")
      ->check(CLI::IsMember({"paper-sim"}));

  // table
  auto* table_cmd = app.add_subcommand("table",
                                       "Build and export a stopping table");
  int table_m = 10000;
  double table_alpha = 0.01;
  std::string table_rule = "g1-fpc", table_out;
  bool table_force = false;
  table_cmd->add_option("--m", table_m)->check(CLI::PositiveNumber);
  table_cmd->add_option("--alpha", table_alpha);
  table_cmd->add_option("--rule", table_rule)
      ->check(CLI::IsMember({"g1", "g2", "g1-fpc", "g2-fpc", "mlee"}));
  table_cmd->add_option("--out", table_out)->required();
  table_cmd->add_flag("--force", table_force,
                      "allow hours-scale MLEE builds (m > 100000)");

  // bench-table
  auto* bench = app.add_subcommand("bench-table",
                                   "Time stopping-table construction");
  std::vector<int> bench_ms;
  std::vector<std::string> bench_rules;
  double bench_alpha = 0.01;
  bench->add_option("--m-list", bench_ms)->required()->delimiter(',');
  bench->add_option("--rules", bench_rules)->required()->delimiter(',');
  bench->add_option("--alpha", bench_alpha);

  // bite-sweep
  auto* bite = app.add_subcommand("bite-sweep",
                                  "IVoting accuracy across bite sizes");
  std::string bite_train, bite_test, bite_out;
  std::vector<int> bite_sizes;
  int bite_iters = 1000;
  std::uint64_t bite_seed = 0;
  bite->add_option("--train", bite_train)->required();
  bite->add_option("--test", bite_test)->required();
  bite->add_option("--sizes", bite_sizes)->required()->delimiter(',');
  bite->add_option("--iterations", bite_iters)->check(CLI::PositiveNumber);
  bite->add_option("--seed", bite_seed);
  bite->add_option("--out", bite_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const auto block = comet::synth_generate(synth_spec, synth_seed);
      comet::write_block(block, synth_out);
      std::cout << synth_out << ": " << block.size() << " examples, d="
                << block.num_features << " c=" << block.num_classes << "\n";
    } else if (*shuffle) {
      const auto paths = comet::shuffle_split(shuffle_input, shuffle_blocks,
                                              shuffle_seed, shuffle_out_dir);
      for (const auto& p : paths) std::cout << p << "\n";
    } else if (*train) {
      std::vector<std::string> blocks;
      for (const auto& entry :
           std::filesystem::directory_iterator(train_blocks_dir)) {
        if (entry.path().extension() == ".csv")
          blocks.push_back(entry.path().string());
      }
      std::sort(blocks.begin(), blocks.end());
      if (blocks.empty())
        throw std::invalid_argument("no .csv blocks in " + train_blocks_dir);
      tc.block_paths = blocks;
      tc.sampler = train_sampler == "bagging" ? comet::Sampler::Bagging
                                              : comet::Sampler::IVoting;
      tc.workers = worker_count(train_workers);
      tc.out_dir = train_out_dir;
      const auto result = comet::train_distributed(tc);
      for (const auto& s : result.stats) {
        std::cout << "block " << s.block_id << ": " << s.trees << " trees in "
                  << s.seconds << "s\n";
      }
      std::cout << "total trees: " << result.total_trees << " across "
                << result.partition_paths.size() << " partition(s)\n";
      for (const auto& p : result.partition_paths) std::cout << p << "\n";
    } else if (*predict) {
      run_predict(pred_ensembles, pred_test, pred_rule, pred_alpha, pred_seed,
                  pred_committee, pred_out);
    } else if (*simulate) {
      const int workers = worker_count(sim_workers);
      if (sim_preset == "paper-sim") {
        const auto rows =
            comet::sweep(all_rules(), {100, 500, 1000, 10000},
                         {1e-2, 1e-3, 1e-4}, sim_trials, sim_seed, workers);
        if (sim_out.empty()) sim_out = "paper-sim.csv";
        comet::write_sweep_csv(rows, sim_out);
        std::cout << "wrote " << rows.size() << " rows to " << sim_out << "\n";
      } else if (sim_rule == "all") {
        const auto rows = comet::sweep(all_rules(), {sim_m}, {sim_alpha},
                                       sim_trials, sim_seed, workers);
        if (!sim_out.empty()) comet::write_sweep_csv(rows, sim_out);
        for (const auto& row : rows) {
          std::cout << comet::to_string(row.rule) << " m=" << row.m
                    << " alpha=" << row.alpha << " ";
          print_sim_report(row.report);
        }
      } else {
        comet::SimConfig cfg;
        cfg.ensemble_size = sim_m;
        cfg.alpha = sim_alpha;
        cfg.rule = comet::parse_rule(sim_rule);
        cfg.trials = sim_trials;
        cfg.seed = sim_seed;
        cfg.workers = workers;
        const auto report = comet::simulate(cfg);
        std::cout << comet::to_string(cfg.rule) << " m=" << sim_m
                  << " alpha=" << sim_alpha << " ";
        print_sim_report(report);
        if (!sim_out.empty()) {
          comet::write_sweep_csv({{cfg.rule, sim_m, sim_alpha, report}}, sim_out);
        }
        if (!sim_hist_out.empty()) comet::write_histogram_csv(report, sim_hist_out);
      }
    } else if (*table_cmd) {
      const auto rule = comet::parse_rule(table_rule);
      if (rule == comet::StopRule::MLEE && table_m > 100000 && !table_force) {
        throw std::invalid_argument(
            "MLEE table build at m > 100000 takes hours; pass --force to "
            "proceed");
      }
      comet::StopConfig sc{rule, table_alpha, table_m};
      const auto t0 = std::chrono::steady_clock::now();
      const auto table = comet::build_table(sc);
      const auto t1 = std::chrono::steady_clock::now();
      comet::export_table_csv(table, table_out);
      std::cout << "built " << table_rule << " table for m=" << table_m
                << " in " << std::chrono::duration<double>(t1 - t0).count()
                << "s -> " << table_out << "\n";
    } else if (*bench) {
      std::cout << "rule,m,seconds\n";
      for (const auto& rule_name : bench_rules) {
        const auto rule = comet::parse_rule(rule_name);
        for (const int m : bench_ms) {
          comet::StopConfig sc{rule, bench_alpha, m};
          const auto t0 = std::chrono::steady_clock::now();
          const auto table = comet::build_table(sc);
          const auto t1 = std::chrono::steady_clock::now();
          (void)table;
          std::cout << rule_name << "," << m << ","
                    << std::chrono::duration<double>(t1 - t0).count() << "\n";
        }
      }
    } else if (*bite) {
      const auto train_block = comet::load_block(bite_train);
      const auto test_block = comet::load_block(bite_test);
      const auto rows = comet::bite_size_sweep(train_block, test_block,
                                               bite_sizes, bite_iters, bite_seed);
      comet::write_bite_sweep_csv(rows, bite_out);
      for (const auto& row : rows)
        std::cout << "b=" << row.bite_size << " accuracy=" << row.accuracy << "\n";
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
