// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "raretype/serialize.hpp"
#include "raretype_cli/cli.hpp"

using namespace raretype;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "raretype");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "raretype_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("serialization of partitions") {
  const SetPartition p(4, {{1, 3}, {2}, {4}});
  CHECK(set_partition_from_json(to_json(p)) == p);
  const auto ip = parse_integer_partition("2:1,1:2");
  CHECK(ip == IntegerPartition({1, 2}, {2, 1}));
  CHECK(integer_partition_from_json(to_json(ip)) == ip);
  CHECK_THROWS_AS(parse_integer_partition("1:x"), DomainError);
  CHECK_THROWS_AS(parse_integer_partition("1:2,1:3"), DomainError);
  CHECK_THROWS_AS(set_partition_from_json(nlohmann::json::parse(R"({"n": 3, "blocks": [[1, 2]]})")), DomainError);
}

TEST_CASE("number formatting and hashing") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(242.0) == "242");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(std::nan("")) == "nan");
  const nlohmann::json a{{"x", 1}, {"y", "z"}};
  CHECK(config_hash(a) == config_hash(nlohmann::json{{"y", "z"}, {"x", 1}}));
  CHECK(config_hash(a) != config_hash(nlohmann::json{{"x", 2}, {"y", "z"}}));
  CHECK(config_hash(a).size() == 16);
  std::ostringstream s;
  LrReport r;
  r.lr_plugin = std::nan("");
  write_json(s, to_json(r));
  CHECK(nlohmann::json::parse(s.str()).at("lr_plugin").is_null());
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);
  CHECK(invoke({"fit", "--no-such-flag"}).code == cli::kExitUsage);
  const auto missing = invoke({"fit", "--db", "/no/such/database.tsv"});
  CHECK(missing.code == cli::kExitUsage);
  CHECK(missing.err.find("/no/such/database.tsv") != std::string::npos);
  const auto prior = invoke({"lr", "--partition", "1:3,2:1", "--prior", "product:alpha=2:3"});
  CHECK(prior.code == cli::kExitUsage);
  CHECK(invoke({"lr"}).code == cli::kExitUsage);
}

TEST_CASE("lr with a point-mass prior reproduces the closed form") {
  const auto r = invoke({"lr", "--partition", "1:18925", "--prior", "point-mass:alpha=0.5,theta=216"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("lr_bayes").get<double>() == doctest::Approx(38'284.0).epsilon(1e-12));
  CHECK(j.at("lr_plugin").get<double>() == doctest::Approx(38'284.0).epsilon(1e-12));
  CHECK(j.at("n") == 18'925);
  CHECK(j.at("provenance").contains("config_hash"));
}

TEST_CASE("lr flags an unavailable plug-in unless allowed") {
  CHECK(invoke({"lr", "--partition", "1:4,2:2,3:1"}).code == cli::kExitFlagged);
  CHECK(invoke({"lr", "--partition", "1:4,2:2,3:1", "--allow-boundary"}).code == cli::kExitOk);
}

TEST_CASE("simulate crp output feeds fit") {
  const auto db = scratch() / "crp.tsv";
  const auto sim = invoke({"simulate", "crp", "--n", "50000", "--alpha", "0.5", "--theta", "20", "--seed", "4",
                           "--out", db.string()});
  REQUIRE(sim.code == cli::kExitOk);
  const auto fit = invoke({"fit", "--db", db.string(), "--loci", "table"});
  REQUIRE(fit.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(fit.out);
  CHECK(j.at("n") == 50'000);
  CHECK(std::abs(j.at("mle").at("alpha_hat").get<double>() - 0.5) < 0.05);

  const auto lr = invoke({"lr", "--db", db.string(), "--loci", "table"});
  REQUIRE(lr.code == cli::kExitOk);
  const auto lj = nlohmann::json::parse(lr.out);
  const double bayes = lj.at("lr_bayes").get<double>(), plugin = lj.at("lr_plugin").get<double>();
  CHECK(std::abs(bayes - plugin) / plugin < 0.01);

  const auto degenerate = write_file("single.tsv", "id\ttable\n1\t1\n2\t1\n3\t1\n");
  CHECK(invoke({"fit", "--db", degenerate.string(), "--loci", "table"}).code == cli::kExitFlagged);
  CHECK(invoke({"fit", "--db", degenerate.string(), "--loci", "table", "--allow-boundary"}).code == cli::kExitOk);
  const auto ragged = write_file("ragged.tsv", "id\ttable\n1\t1\n2\n");
  const auto bad = invoke({"fit", "--db", ragged.string(), "--loci", "table"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("line 3") != std::string::npos);
}

TEST_CASE("simulate sticks and diagnostics") {
  const auto sticks = invoke({"simulate", "sticks", "--m", "1000", "--alpha", "0.5", "--theta", "1"});
  REQUIRE(sticks.code == cli::kExitOk);
  std::istringstream lines(sticks.out);
  std::string line;
  std::size_t count = 0;
  std::string last;
  while (std::getline(lines, line)) {
    ++count;
    last = line;
  }
  CHECK(count == 1 + 1000 + 1);
  CHECK(last.rfind("residual,", 0) == 0);

  const auto diag = invoke({"simulate", "diagnostics", "--n", "100000", "--alpha", "0.5", "--theta", "20"});
  REQUIRE(diag.code == cli::kExitOk);
  std::istringstream dl(diag.out);
  std::getline(dl, line);
  CHECK(line == "n,tables,tables_scaled,singleton_fraction");
  long prev = -1;
  while (std::getline(dl, line)) {
    const auto first = line.find(',');
    const long tables = std::stol(line.substr(first + 1, line.find(',', first + 1) - first - 1));
    CHECK(tables >= prev);
    prev = tables;
  }
}

TEST_CASE("oracle command") {
  std::string uniform;
  for (int i = 0; i < 1000; ++i) uniform += "0.001\n";
  const auto freqs = write_file("uniform.txt", uniform);
  const auto r = invoke({"oracle", "--freqs", freqs.string(), "--partition", "1:5,2:3", "--iterations", "20000"});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(r.out).at("lr").get<double>() == doctest::Approx(1000.0).epsilon(1e-9));

  const auto tiny = write_file("tiny.txt", "0.3\n0.2\n0.15\n0.1\n0.1\n0.08\n0.05\n0.02\n");
  const auto exact = invoke({"oracle", "--freqs", tiny.string(), "--partition", "1:2,2:1", "--exhaustive"});
  REQUIRE(exact.code == cli::kExitOk);
  const auto mh = invoke({"oracle", "--freqs", tiny.string(), "--partition", "1:2,2:1", "--iterations", "500000",
                          "--chains", "2", "--threads", "2"});
  REQUIRE(mh.code == cli::kExitOk);
  const auto je = nlohmann::json::parse(exact.out), jm = nlohmann::json::parse(mh.out);
  CHECK(std::abs(je.at("lr").get<double>() - jm.at("lr").get<double>()) < 4 * jm.at("mc_std_error").get<double>());

  const auto big = invoke({"oracle", "--freqs", freqs.string(), "--partition", "1:5,2:3", "--exhaustive"});
  CHECK(big.code == cli::kExitUsage);
  CHECK(big.err.find("10000000") != std::string::npos);
}

TEST_CASE("config files supply defaults that flags override") {
  const auto cfg = write_file("lr.toml", "[lr]\npartition = \"1:10\"\nprior = \"point-mass:alpha=0.5,theta=20\"\n");
  const auto a = invoke({"--config", cfg.string(), "lr"});
  REQUIRE(a.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(a.out).at("lr_bayes").get<double>() == doctest::Approx(31.0 / 0.5));
  const auto b = invoke({"--config", cfg.string(), "lr", "--prior", "point-mass:alpha=0.5,theta=30"});
  REQUIRE(b.code == cli::kExitOk);
  CHECK(nlohmann::json::parse(b.out).at("lr_bayes").get<double>() == doctest::Approx(41.0 / 0.5));
  const auto bad = write_file("bad.toml", "[lr]\npartition = \"1:10\"\nunknown_key = 3\n");
  CHECK(invoke({"--config", bad.string(), "lr"}).code == cli::kExitUsage);
}

TEST_CASE("experiment command") {
  const auto spec = write_file("t3.json", R"({"name": "test3", "source": {"synthetic": {"alpha": 0.5, "theta": 20}},
    "n_population": 500, "n_sample": 100, "n_replicates": 3, "n_populations": 1, "seed": 2,
    "mh": {"iterations": 20000}})");
  const auto out = scratch() / "t3";
  const auto r = invoke({"experiment", spec.string(), "--out", out.string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(fs::exists(out / "test3.csv"));
  CHECK(nlohmann::json::parse(r.out).at("experiment") == "test3");
  const auto bad = write_file("bad.json", R"({"name": "test3", "bogus": 1})");
  CHECK(invoke({"experiment", bad.string()}).code == cli::kExitUsage);
  CHECK(invoke({"experiment", (scratch() / "missing.json").string()}).code == cli::kExitUsage);
}
