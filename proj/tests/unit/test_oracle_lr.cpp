// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "raretype/oracle.hpp"

using namespace raretype;

namespace {

IntegerPartition ip(std::vector<std::size_t> a, std::vector<std::size_t> r) {
  return IntegerPartition(std::move(a), std::move(r));
}

std::vector<std::size_t> block_sizes_of(const IntegerPartition& p) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < p.num_classes(); ++c)
    for (std::size_t k = 0; k < p.multiplicities()[c]; ++k) out.push_back(p.sizes()[c]);
  return out;
}

}  // namespace

TEST_CASE("population frequencies are normalized and ranked") {
  const PopulationFreqs p({1.0, 3.0, 2.0, 2.0});
  CHECK(p.size() == 4);
  CHECK(p[0] == doctest::Approx(0.375));
  CHECK(p[3] == doctest::Approx(0.125));
  CHECK_THROWS_AS(PopulationFreqs({}), DomainError);
  CHECK_THROWS_AS(PopulationFreqs({0.5, 0.0}), DomainError);
}

TEST_CASE("frequency files") {
  const auto path = std::filesystem::temp_directory_path() / "raretype_freqs_test.txt";
  {
    std::ofstream f(path);
    f << "# header\n0.5\n\n0.25\n0.25\n";
  }
  const auto p = PopulationFreqs::load(path);
  CHECK(p.size() == 3);
  {
    std::ofstream f(path);
    f << "0.5\nabc\n";
  }
  try {
    PopulationFreqs::load(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::filesystem::remove(path);
}

TEST_CASE("initial assignment satisfies the class counts") {
  const auto part = ip({1, 2, 3}, {2, 1, 1});
  const auto chi = ChiAssignment::initial(8, part);
  CHECK(chi.satisfies(part));
  CHECK(chi.values() == std::vector<std::uint32_t>{3, 2, 1, 1, 0, 0, 0, 0});
  CHECK_FALSE(ChiAssignment({1, 1, 1, 2, 3, 0, 0, 0}).satisfies(part));
  const PopulationFreqs p({8, 7, 6, 5, 4, 3, 2, 1});
  CHECK(chi_log_weight(chi, p, part) ==
        doctest::Approx(3 * std::log(p[0]) + 2 * std::log(p[1]) + std::log(p[2]) + std::log(p[3])));
  CHECK_THROWS_AS(chi_log_weight(ChiAssignment({1, 1, 1, 2, 3, 0, 0, 0}), p, part), DomainError);
}

TEST_CASE("swap acceptance is the Metropolis ratio") {
  const auto part = ip({1, 2}, {1, 1});
  const PopulationFreqs p({0.4, 0.3, 0.2, 0.1});
  const ChiAssignment chi({2, 1, 0, 0});
  // Swapping positions 0 and 1 moves weight p0^2 p1 to p0 p1^2.
  CHECK(swap_acceptance_probability(chi, p, part, 0, 1) == doctest::Approx(0.75));
  CHECK(swap_acceptance_probability(chi, p, part, 1, 0) == doctest::Approx(0.75));
  CHECK(swap_acceptance_probability(ChiAssignment({1, 2, 0, 0}), p, part, 0, 1) == doctest::Approx(1.0));
  CHECK(swap_acceptance_probability(chi, p, part, 2, 3) == doctest::Approx(1.0));
}

TEST_CASE("assignment count matches brute force") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto part = to_integer_partition(testing::random_rare_type_partition(rng, 5, 4));
    const std::size_t m = 7;
    double brute = 0.0;
    std::vector<std::uint32_t> chi(m, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
      if (i == m) {
        if (ChiAssignment(chi).satisfies(part)) brute += 1.0;
        return;
      }
      for (std::uint32_t v = 0; v <= part.num_classes(); ++v) {
        chi[i] = v;
        rec(i + 1);
      }
    };
    rec(0);
    CHECK(chi_assignment_count(m, part) == doctest::Approx(brute));
  }
}

TEST_CASE("enumeration agrees with an independent injective-map brute force") {
  std::mt19937_64 rng(12);
  std::gamma_distribution<double> g(0.7, 1.0);
  for (int rep = 0; rep < 12; ++rep) {
    std::vector<double> w(7);
    for (auto& x : w) x = g(rng) + 1e-3;
    const PopulationFreqs p(w);
    const auto part = to_integer_partition(testing::random_rare_type_partition(rng, 5, 4));
    const double ref = testing::brute_force_singleton_mass(p.values(), block_sizes_of(part));
    CHECK(enumerate_chi_expectation(p, part) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(true_lr_exact(p, part) ==
          doctest::Approx(static_cast<double>(part.multiplicity_of(1)) / ref).epsilon(1e-12));
  }
}

TEST_CASE("enumeration refuses large instances and partitions without singletons") {
  const PopulationFreqs big(std::vector<double>(500, 1.0));
  try {
    enumerate_chi_expectation(big, ip({1, 2}, {5, 3}));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("10000000") != std::string::npos);
  }
  CHECK_THROWS_WITH(enumerate_chi_expectation(PopulationFreqs({1, 2, 3}), ip({2}, {1})), "no singleton class");
  CHECK_THROWS_AS(enumerate_chi_expectation(PopulationFreqs({1, 2}), ip({1}, {3})), DomainError);
}

TEST_CASE("a single chain state is always valid") {
  const auto part = ip({1, 2, 3}, {2, 1, 1});
  const PopulationFreqs p({9, 7, 5, 4, 3, 2, 2, 1, 1, 1});
  ChiChain chain(p, part, ChiAssignment::initial(p.size(), part));
  Rng rng = make_rng(Seed{1});
  for (int i = 0; i < 2000; ++i) {
    chain.step(rng);
    const auto s = chain.state();
    REQUIRE(s.satisfies(part));
    double mass = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k] == 1) mass += p[k];
    CHECK(chain.singleton_mass() == doctest::Approx(mass).epsilon(1e-12));
    CHECK(chain.log_weight() == doctest::Approx(chi_log_weight(s, p, part)).epsilon(1e-12));
  }
}

TEST_CASE("Metropolis estimate agrees with enumeration") {
  const auto part = ip({1, 2}, {3, 1});
  const PopulationFreqs p({5, 4, 3, 2, 1, 1, 0.5, 0.5});
  const double exact = enumerate_chi_expectation(p, part);
  auto cfg = MhConfig::with_defaults(400'000, Seed{77});
  const auto est = estimate_singleton_mass(p, part, cfg);
  CHECK(std::abs(est.estimate - exact) < 4 * est.mc_std_error);
  CHECK(est.mc_std_error > 0.0);
  CHECK(est.acceptance_rate > 0.0);
  CHECK(est.acceptance_rate <= 1.0);
}

TEST_CASE("Metropolis estimate is independent of the thread count") {
  const auto part = ip({1, 3}, {4, 2});
  const PopulationFreqs p({6, 5, 4, 3, 2, 1, 1, 1, 1, 1, 1, 1});
  auto cfg = MhConfig::with_defaults(50'000, Seed{3});
  cfg.chains = 4;
  const auto a = estimate_singleton_mass(p, part, cfg, 1);
  const auto b = estimate_singleton_mass(p, part, cfg, 3);
  CHECK(a.estimate == b.estimate);
  CHECK(a.mc_std_error == b.mc_std_error);
  CHECK(a.samples == b.samples);
}

TEST_CASE("uniform population gives LR equal to the number of types") {
  for (std::size_t m : {10u, 100u, 1000u}) {
    const PopulationFreqs p(std::vector<double>(m, 1.0));
    const auto t = true_lr(p, ip({1, 2, 4}, {3, 2, 1}), MhConfig::with_defaults(20'000, Seed{m}));
    CHECK(t.lr == doctest::Approx(static_cast<double>(m)).epsilon(1e-9));
    CHECK(t.singletons == 3);
  }
}

TEST_CASE("Metropolis configuration validation") {
  auto cfg = MhConfig::with_defaults(1000, Seed{1});
  CHECK(cfg.burn_in == 100);
  CHECK(cfg.thinning == 10);
  cfg.burn_in = 1000;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = MhConfig::with_defaults(1000, Seed{1});
  cfg.thinning = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK_THROWS_WITH(estimate_singleton_mass(PopulationFreqs({1, 2, 3}), ip({2}, {1}), MhConfig::with_defaults(100, Seed{1})),
                    "no singleton class");
}
