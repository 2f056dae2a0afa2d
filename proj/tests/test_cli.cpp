#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "spinlab/cli.hpp"

using namespace spinlab;
namespace fs = std::filesystem;

namespace {

fs::path tmpdir() {
    auto p = fs::temp_directory_path() / "spinlab_cli_test";
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json jload(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("gen is deterministic and writes a manifest") {
    auto dir = tmpdir();
    auto g1 = (dir / "g1.el").string(), g2 = (dir / "g2.el").string();
    CHECK(run_cli({"gen", "--family", "ising-bipartite", "--n", "100", "--delta", "3", "--seed", "7", "--out", g1}) ==
          0);
    CHECK(run_cli({"gen", "--family", "ising-bipartite", "--n", "100", "--delta", "3", "--seed", "7", "--out", g2}) ==
          0);
    CHECK(slurp(g1) == slurp(g2));
    auto manifest = jload(g1 + ".manifest.json");
    CHECK(manifest["command"] == "gen");
    CHECK(manifest["config"]["seed"] == 7);
}

TEST_CASE("exact and count agree on a small critical instance") {
    auto dir = tmpdir();
    auto g = (dir / "count_g.el").string();
    REQUIRE(run_cli({"gen", "--family", "tree-regular", "--delta", "3", "--depth", "2", "--out", g}) == 0);
    auto ej = (dir / "exact.json").string(), cj = (dir / "count.json").string();
    REQUIRE(run_cli({"exact", "--model", "hardcore", "--graph", g, "--lambda", "critical", "--out", ej}) == 0);
    REQUIRE(run_cli({"count", "--model", "hardcore", "--graph", g, "--lambda", "critical", "--theta", "0.5", "--eps",
                     "0.05", "--eps0", "0.05", "--out", cj}) == 0);
    double log_z = jload(ej)["log_Z"];
    double log_z_hat = jload(cj)["log_Z_hat"];
    CHECK(std::fabs(std::exp(log_z_hat - log_z) - 1.0) <= 0.1);
    CHECK(jload(cj).contains("wall_time"));
    CHECK(jload(cj)["k"].get<int>() > 0);
}

TEST_CASE("percolate writes the pmf CSV") {
    auto dir = tmpdir();
    auto csv = (dir / "pmf.csv").string(), js = (dir / "perc.json").string();
    REQUIRE(run_cli({"percolate", "--d", "2", "--p", "0.5", "--pmf-max", "1000", "--out", csv, "--json-out", js,
                     "--extinction"}) == 0);
    auto text = slurp(csv);
    CHECK(text.find("ell,pmf") == 0);
    CHECK(text.find("1,0.25") != std::string::npos);
    CHECK(jload(js)["extinction_probability"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("sample emits deterministic streams") {
    auto dir = tmpdir();
    auto g = (dir / "sample_g.el").string();
    REQUIRE(run_cli({"gen", "--family", "ising-bipartite", "--n", "6", "--delta", "3", "--seed", "1", "--out", g}) == 0);
    auto c1 = (dir / "s1.csv").string(), c2 = (dir / "s2.csv").string();
    auto j1 = (dir / "s1.json").string(), j2 = (dir / "s2.json").string();
    for (auto [c, j] : {std::pair{c1, j1}, std::pair{c2, j2}})
        REQUIRE(run_cli({"sample", "--model", "ising", "--graph", g, "--beta", "critical-antiferro", "--chain",
                         "glauber", "--steps", "2000", "--thin", "10", "--seed", "3", "--out", c, "--summary", j}) == 0);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(jload(j1)["samples"] == jload(j2)["samples"]);
}

TEST_CASE("mix reports the spectral gap") {
    auto dir = tmpdir();
    auto g = (dir / "mix_g.el").string();
    REQUIRE(run_cli({"gen", "--family", "tree-ary", "--delta", "2", "--depth", "1", "--out", g}) == 0);
    auto mj = (dir / "mix.json").string();
    REQUIRE(run_cli({"mix", "--model", "hardcore", "--graph", g, "--lambda", "1.0", "--chain", "glauber", "--out",
                     mj}) == 0);
    auto j = jload(mj);
    CHECK(j["gap"].get<double>() > 0.0);
    CHECK(j["tensorization_constant"].get<double>() > 0.0);
}

TEST_CASE("exit codes: parameter and budget errors") {
    CHECK(run_cli({"gen", "--family", "no-such-family"}) == 2);
    CHECK(run_cli({"no-such-command"}) == 2);
    auto dir = tmpdir();
    auto g = (dir / "big.el").string();
    REQUIRE(run_cli({"gen", "--family", "ising-bipartite", "--n", "40", "--delta", "3", "--seed", "1", "--out", g}) ==
            0);
    // 80 vertices is far beyond the exact-enumeration cap.
    CHECK(run_cli({"exact", "--model", "hardcore", "--graph", g, "--lambda", "1.0"}) == 3);
}

TEST_CASE("config file supplies defaults that flags override") {
    auto dir = tmpdir();
    auto cfg = dir / "run.json";
    {
        std::ofstream out(cfg);
        out << R"({"d": 2, "p": 0.6})";
    }
    auto js = (dir / "cfg_perc.json").string();
    REQUIRE(run_cli({"percolate", "--config", cfg.string(), "--extinction", "--json-out", js}) == 0);
    CHECK(jload(js)["extinction_probability"].get<double>() == doctest::Approx(4.0 / 9.0).epsilon(1e-9));
    // Explicit flag wins over the config value.
    REQUIRE(run_cli({"percolate", "--config", cfg.string(), "--p", "0.5", "--extinction", "--json-out", js}) == 0);
    CHECK(jload(js)["extinction_probability"].get<double>() == doctest::Approx(1.0));
    // A false boolean in the config must not enable the flag.
    auto cfg2 = dir / "run2.json";
    {
        std::ofstream out(cfg2);
        out << R"({"d": 2, "p": 0.6, "extinction": false, "total-mass": true})";
    }
    REQUIRE(run_cli({"percolate", "--config", cfg2.string(), "--json-out", js}) == 0);
    auto j2 = jload(js);
    CHECK(!j2.contains("extinction_probability"));
    CHECK(j2["pmf_total_mass"].get<double>() == doctest::Approx(4.0 / 9.0).epsilon(1e-5));
}

TEST_CASE("spectral subcommand computes SI and the rank-one bound") {
    auto dir = tmpdir();
    auto g = (dir / "spec_g.el").string();
    REQUIRE(run_cli({"gen", "--family", "ising-bipartite", "--n", "7", "--delta", "3", "--seed", "5", "--out", g}) == 0);
    auto js = (dir / "spec.json").string();
    REQUIRE(run_cli({"spectral", "--model", "ising", "--graph", g, "--beta", "critical-antiferro", "--si",
                     "--quadratic", "bipartite-sign", "--rank-one-u", "0.5,0.5", "--out", js}) == 0);
    auto j = jload(js);
    CHECK(j["si_lambda_max"].get<double>() > 0.0);
    CHECK(j["quadratic_exact"].get<double>() <= j["si_lambda_max"].get<double>() + 1e-9);
    CHECK(j["rank_one_si_bound"].get<double>() <= 2.0 + 1e-9);
}

TEST_CASE("lowerbound subcommand") {
    auto dir = tmpdir();
    auto js = (dir / "lb.json").string();
    REQUIRE(run_cli({"lowerbound", "--family", "ising", "--n", "40", "--delta", "3", "--checksum", "--u-critical",
                     "--out", js}) == 0);
    auto j = jload(js);
    CHECK(j["n_checksum"]["summed"].get<double>() ==
          doctest::Approx(j["n_checksum"]["closed_form"].get<double>()).epsilon(1e-9));
    CHECK(j["u_critical_point"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-5));
}
