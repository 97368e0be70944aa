// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "raretype/database.hpp"
#include "raretype/partition.hpp"
#include "raretype/random.hpp"

using namespace raretype;

TEST_CASE("restricted growth enumeration matches Bell numbers") {
  for (std::size_t n = 1; n <= 8; ++n) CHECK(testing::all_set_partitions(n).size() == testing::bell_number(n));
  CHECK(testing::bell_number(8) == 4140);
}

TEST_CASE("set partitions are stored canonically") {
  SetPartition p(5, {{5, 2}, {4}, {3, 1}});
  REQUIRE(p.num_blocks() == 3);
  CHECK(p.block(0) == SetPartition::Block{1, 3});
  CHECK(p.block(1) == SetPartition::Block{2, 5});
  CHECK(p.block(2) == SetPartition::Block{4});
  CHECK(p == SetPartition(5, {{1, 3}, {2, 5}, {4}}));
}

TEST_CASE("invalid set partitions are rejected") {
  CHECK_THROWS_AS(SetPartition(3, {{1, 2}}), DomainError);
  CHECK_THROWS_AS(SetPartition(3, {{1, 2}, {2, 3}}), DomainError);
  CHECK_THROWS_AS(SetPartition(3, {{1, 2, 3}, {}}), DomainError);
  CHECK_THROWS_AS(SetPartition(2, {{1, 4}}), DomainError);
  CHECK_THROWS_AS(SetPartition::from_canonical_blocks(3, {{2}, {1, 3}}), DomainError);
}

TEST_CASE("labels map to partitions invariant under relabelling") {
  const std::vector<int> a{7, 3, 7, 1, 3};
  const std::vector<int> b{0, 9, 0, 4, 9};
  CHECK(partition_from_labels(a) == partition_from_labels(b));
  const auto p = partition_from_labels(a);
  CHECK(p.num_blocks() == 3);
  CHECK(p.block_sizes() == std::vector<std::size_t>{2, 2, 1});
  CHECK_THROWS_WITH_AS(partition_from_labels(std::vector<int>{}), "empty sample", DomainError);
}

TEST_CASE("partition of a sample is invariant under element permutation up to relabelling") {
  std::mt19937_64 rng(11);
  std::vector<int> labels(60);
  for (auto& l : labels) l = static_cast<int>(rng() % 9);
  const auto ip = to_integer_partition(partition_from_labels(labels));
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(labels.begin(), labels.end(), rng);
    CHECK(to_integer_partition(partition_from_labels(labels)) == ip);
  }
}

TEST_CASE("table assignments require first-appearance order") {
  const std::vector<std::size_t> ok{0, 1, 0, 2, 1};
  CHECK(partition_from_table_assignment(ok).num_blocks() == 3);
  const std::vector<std::size_t> bad{0, 2, 1};
  CHECK_THROWS_AS(partition_from_table_assignment(bad), DomainError);
}

TEST_CASE("suspect and trace extensions") {
  const SetPartition db(4, {{1, 2}, {3}, {4}});
  const auto plus = extend_with_suspect(db);
  CHECK(plus.n() == 5);
  CHECK(plus.last_is_singleton());
  CHECK(singleton_count(plus) == 3);
  const auto plus2 = extend_with_trace(plus);
  CHECK(plus2.n() == 6);
  CHECK(!plus2.last_is_singleton());
  CHECK(size_multiplicity(plus2, 2) == 2);
  CHECK_THROWS_WITH_AS(extend_with_trace(plus2), "not a rare-type configuration", DomainError);
}

TEST_CASE("integer partitions") {
  const auto ip = to_integer_partition(SetPartition(7, {{1, 2, 3}, {4, 5}, {6}, {7}}));
  CHECK(ip.sizes() == std::vector<std::size_t>{1, 2, 3});
  CHECK(ip.multiplicities() == std::vector<std::size_t>{2, 1, 1});
  CHECK(ip.n() == 7);
  CHECK(ip.num_blocks() == 4);
  CHECK(ip.multiplicity_of(1) == 2);
  CHECK(ip.multiplicity_of(4) == 0);
  const std::vector<std::size_t> sizes{3, 1, 2, 1};
  CHECK(IntegerPartition::from_block_sizes(sizes) == ip);
  CHECK_THROWS_AS(IntegerPartition({2, 1}, {1, 1}), DomainError);
  CHECK_THROWS_AS(IntegerPartition({1, 2}, {1, 0}), DomainError);
  CHECK_THROWS_AS(IntegerPartition({1}, {1, 1}), DomainError);
}

TEST_CASE("sum of block sizes equals n for every enumerated partition") {
  for (const auto& p : testing::all_set_partitions(6)) {
    const auto s = p.block_sizes();
    CHECK(std::accumulate(s.begin(), s.end(), std::size_t{0}) == 6);
    CHECK(to_integer_partition(p).n() == 6);
  }
}

namespace {
const char* kTsv =
    "id\tDYS19\tDYS389I\tDYS389II\tDYS390\tDYS391\tDYS392\tDYS393\tlocation\n"
    "a\t14\t13\t29\t24\t11\t13\t13\tNL\n"
    "b\t14\t13\t29\t24\t11\t13\t13\tNL\n"
    "c\t15\t13\t30\t24\t10\t11\t13\tDE\n"
    "\n"
    "d\t15\t13\t30\t24\t10\t11\t13\tNL\n"
    "e\t14\t13\t29\t23\t11\t13\t13\tNL\n";
}

TEST_CASE("database ingestion groups identical profiles") {
  std::istringstream in(kTsv);
  const auto db = parse_database(in);
  CHECK(db.records.size() == 5);
  CHECK(db.partition == SetPartition(5, {{1, 2}, {3, 4}, {5}}));
  CHECK(db.records[0].id == "a");
  CHECK(db.records[0].key == "14|13|29|24|11|13|13");
}

TEST_CASE("locus subsets coarsen the partition") {
  DatabaseOptions opt;
  opt.loci = parse_locus_list("DYS19, DYS389I");
  std::istringstream in(kTsv);
  const auto db = parse_database(in, opt);
  CHECK(db.partition == SetPartition(5, {{1, 2, 5}, {3, 4}}));
}

TEST_CASE("row filter keeps matching rows in order") {
  DatabaseOptions opt;
  opt.filter = RowFilter{"location", "NL"};
  std::istringstream in(kTsv);
  const auto db = parse_database(in, opt);
  REQUIRE(db.records.size() == 4);
  CHECK(db.records[2].id == "d");
  CHECK(db.partition == SetPartition(4, {{1, 2}, {3}, {4}}));
}

TEST_CASE("malformed databases report the offending line") {
  {
    std::istringstream in("id\tDYS19\n1\t14\n");
    try {
      parse_database(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(std::string(e.what()).find("DYS389I") != std::string::npos);
    }
  }
  {
    DatabaseOptions opt;
    opt.loci = {"A"};
    std::istringstream in("id\tA\n1\t14\n2\n");
    try {
      parse_database(in, opt);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  {
    std::istringstream in("");
    CHECK_THROWS_AS(parse_database(in), ParseError);
  }
  {
    DatabaseOptions opt;
    opt.loci = {"A"};
    std::istringstream in("A\n");
    CHECK_THROWS_AS(parse_database(in, opt), ParseError);
  }
  {
    DatabaseOptions opt;
    opt.loci = {"A"};
    std::istringstream in("A\n1|2\n");
    CHECK_THROWS_AS(parse_database(in, opt), ParseError);
  }
  CHECK_THROWS_AS(ingest_database("/nonexistent/file.tsv"), ParseError);
  CHECK_THROWS_AS(parse_locus_list("DYS19,,DYS390"), DomainError);
}

TEST_CASE("seed derivation is deterministic and stream separated") {
  const Seed master{42};
  CHECK(derive_seed(master, 1).value == derive_seed(master, 1).value);
  CHECK(derive_seed(master, 1).value != derive_seed(master, 2).value);
  CHECK(derive_seed(master, 1, 0).value != derive_seed(master, 1, 1).value);
  Rng a = make_rng(master), b = make_rng(master);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  Rng c = make_rng(Seed{7});
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(c);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}
