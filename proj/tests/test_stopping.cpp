#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "comet/stopping.hpp"
#include "oracles.hpp"

using namespace comet;

TEST_CASE("normal_quantile matches tabulated critical values") {
  // Textbook values to 9 decimals.
  CHECK(normal_quantile(0.99) == doctest::Approx(2.326347874).epsilon(1e-8));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.575829304).epsilon(1e-8));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.9999) == doctest::Approx(3.719016485).epsilon(1e-8));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("normal_quantile round-trips through the CDF to 1e-9") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unif(1e-6, 1.0 - 1e-6);
  for (int i = 0; i < 1000; ++i) {
    const double p = unif(gen);
    CHECK(std::abs(oracles::normal_cdf(normal_quantile(p)) - p) < 1e-9);
  }
}

TEST_CASE("min_votes thresholds") {
  CHECK(min_votes(0.05) == 15);
  CHECK(min_votes(1e-2) == 15);
  CHECK(min_votes(1e-3) == 30);
  CHECK(min_votes(5e-3) == 30);
  CHECK(min_votes(1e-4) == 45);
  CHECK_THROWS_AS(min_votes(0.0), std::invalid_argument);
  CHECK_THROWS_AS(min_votes(1.5), std::invalid_argument);
}

TEST_CASE("glee_should_stop matches hand-evaluated G1-FPC cases") {
  StopConfig cfg{StopRule::G1FPC, 0.01, 1000};
  // p-hat 29/30, sigma 0.17951, z 2.3263, delta 0.07624, rho 1 (n <= 0.05m)
  CHECK(glee_should_stop(29, 1, cfg));
  // p-hat 16/30, lower bound 0.32144
  CHECK_FALSE(glee_should_stop(16, 14, cfg));
}

TEST_CASE("glee stops unconditionally when the whole ensemble voted") {
  for (auto rule : {StopRule::G1, StopRule::G2, StopRule::G1FPC,
                    StopRule::G2FPC}) {
    StopConfig cfg{rule, 0.01, 100};
    CHECK(glee_should_stop(50, 50, cfg));
  }
}

TEST_CASE("FPC factor engages above the 5% threshold") {
  // m=100, n=20 > 5: rho = sqrt(80/99) = 0.89893. Compare against a
  // no-FPC evaluation at a tally where the correction flips the decision.
  StopConfig fpc{StopRule::G1FPC, 0.01, 100};
  StopConfig plain{StopRule::G1, 0.01, 100};
  int flipped = 0;
  for (int n = 15; n < 100; ++n) {
    for (int v_lead = n / 2 + 1; v_lead <= n; ++v_lead) {
      const bool with = glee_should_stop(v_lead, n - v_lead, fpc);
      const bool without = glee_should_stop(v_lead, n - v_lead, plain);
      if (with != without) {
        ++flipped;
        CHECK(with);  // FPC shrinks the interval, never widens it
      }
    }
  }
  CHECK(flipped > 0);
}

TEST_CASE("glee rejects inconsistent tallies") {
  StopConfig cfg{StopRule::G1, 0.01, 100};
  CHECK_THROWS_AS(glee_should_stop(10, 20, cfg), std::invalid_argument);
  CHECK_THROWS_AS(glee_should_stop(80, 30, cfg), std::invalid_argument);
}

TEST_CASE("unanimous votes stop exactly at n_min; even split never stops") {
  for (auto rule :
       {StopRule::G1, StopRule::G2, StopRule::G1FPC, StopRule::G2FPC}) {
    for (double alpha : {1e-2, 1e-3, 1e-4}) {
      StopConfig cfg{rule, alpha, 10000};
      const int n_min = min_votes(alpha);
      CHECK_FALSE(glee_should_stop(n_min - 1, 0, cfg));
      CHECK(glee_should_stop(n_min, 0, cfg));  // p-hat = 1, delta = 0
      for (int n = n_min; n <= 200; n += 2) {
        CHECK_FALSE(glee_should_stop(n / 2, n / 2, cfg));
      }
    }
  }
}

TEST_CASE("stopping is monotone in evidence for fixed n") {
  for (auto rule : {StopRule::G1, StopRule::G2, StopRule::G1FPC,
                    StopRule::G2FPC, StopRule::MLEE}) {
    StopConfig cfg{rule, 0.01, 200};
    for (int n = 15; n < 200; n += 17) {
      bool seen = false;
      for (int v = (n + 1) / 2; v <= n; ++v) {
        const bool stop = should_stop(v, n - v, cfg);
        if (seen) CHECK(stop);
        seen = seen || stop;
      }
    }
  }
}

TEST_CASE("mlee_prob_leading_wins: hand-derived and boundary cases") {
  // BetaBinomial(2; 3, 1) gives 0.1/0.3/0.6; winning needs j >= 1.
  CHECK(mlee_prob_leading_wins(2, 0, 4) == doctest::Approx(0.9).epsilon(1e-9));
  // Leading class already has a strict majority.
  CHECK(mlee_prob_leading_wins(51, 20, 100) == 1.0);
  // No votes remain, leader ahead.
  CHECK(mlee_prob_leading_wins(60, 40, 100) == 1.0);
  // No votes remain, tie: not a win.
  CHECK(mlee_prob_leading_wins(50, 50, 100) == 0.0);
  CHECK_THROWS_AS(mlee_prob_leading_wins(80, 30, 100), std::invalid_argument);
}

TEST_CASE("mlee matches the log-gamma enumeration oracle") {
  std::mt19937_64 gen(7);
  for (int i = 0; i < 200; ++i) {
    const int m = 2 + static_cast<int>(gen() % 199);
    const int n = static_cast<int>(gen() % (m + 1));
    const int v_lead = static_cast<int>(gen() % (n + 1));
    const double expected =
        oracles::mlee_win_prob_enumeration(v_lead, n - v_lead, m);
    const double actual = mlee_prob_leading_wins(v_lead, n - v_lead, m);
    CHECK(actual == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
    CHECK(actual >= 0.0);
    CHECK(actual <= 1.0);
  }
}

TEST_CASE("beta-binomial pmf normalizes against the integration oracle") {
  const oracles::GaussLegendre gl;
  std::mt19937_64 gen(11);
  for (int i = 0; i < 25; ++i) {
    const int m = 2 + static_cast<int>(gen() % 199);
    const int n = static_cast<int>(gen() % (m + 1));
    const int v_lead = static_cast<int>(gen() % (n + 1));
    const int r = m - n;
    double sum = 0.0;
    for (int j = 0; j <= r; ++j) {
      sum += oracles::beta_binomial_pmf_quadrature(gl, j, r, v_lead + 1.0,
                                                   n - v_lead + 1.0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("table equals the direct rule exhaustively for small m") {
  for (auto rule : {StopRule::G1, StopRule::G2, StopRule::G1FPC,
                    StopRule::G2FPC, StopRule::MLEE}) {
    StopConfig cfg{rule, 0.01, 128};
    const auto table = build_table(cfg);
    for (int n = 1; n <= 128; ++n) {
      for (int v = (n + 1) / 2; v <= n; ++v) {
        CHECK(table.stop(v, n) == should_stop(v, n - v, cfg));
      }
    }
  }
}

TEST_CASE("closed-form GLEE thresholds agree with the binary-search table") {
  for (auto rule : {StopRule::G1, StopRule::G2, StopRule::G1FPC,
                    StopRule::G2FPC}) {
    for (double alpha : {1e-2, 1e-3}) {
      StopConfig cfg{rule, alpha, 512};
      const auto table = build_table(cfg);
      for (int n = table.n_min; n < 512; ++n) {
        const int closed = glee_threshold_closed_form(n, cfg);
        const int tabled = table.k_min[n];
        if (tabled == StoppingTable::kNever) {
          CHECK(closed == n + 1);
        } else {
          CHECK(closed == tabled);
        }
      }
    }
  }
}

TEST_CASE("threshold fraction k_min/n decreases as votes accumulate") {
  StopConfig cfg{StopRule::G1FPC, 0.01, 4000};
  const auto table = build_table(cfg);
  const int n1 = 100, n2 = 200;
  REQUIRE(table.k_min[n1] != StoppingTable::kNever);
  REQUIRE(table.k_min[n2] != StoppingTable::kNever);
  CHECK(static_cast<double>(table.k_min[n2]) / n2 <
        static_cast<double>(table.k_min[n1]) / n1);
}

TEST_CASE("FULL-rule table never stops early") {
  StopConfig cfg{StopRule::FULL, 0.01, 50};
  const auto table = build_table(cfg);
  for (int n = 1; n < 50; ++n) CHECK_FALSE(table.stop(n, n));
  CHECK(table.stop(26, 50));
}

TEST_CASE("table export writes one row per vote count") {
  StopConfig cfg{StopRule::G1, 0.05, 100};
  const auto table = build_table(cfg);
  const auto path = std::string("/tmp/comet_table_test.csv");
  export_table_csv(table, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "n,k_min");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 100 - table.n_min + 1);
}
