#include <doctest.h>

#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <mrs/count_matrix.hpp>
#include <mrs/serialize.hpp>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string("'") + MRS_CLI_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, oracle::read_file(out), oracle::read_file(err)};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes three files deterministically") {
    const auto dir = oracle::scratch_dir("cli_sim");
    const auto r = cli("simulate --p 20 --d 1 --n 250 --seed 1 --out " + q(dir / "a"), dir);
    REQUIRE(r.code == 0);
    const auto data = mrs::read_count_csv(dir / "a" / "data.csv");
    CHECK(data.rows() == 250);
    CHECK(data.cols() == 20);
    CHECK(fs::exists(dir / "a" / "truth.json"));
    CHECK(fs::exists(dir / "a" / "params.json"));
    REQUIRE(cli("simulate --p 20 --d 1 --n 250 --seed 1 --out " + q(dir / "b"), dir).code == 0);
    CHECK(oracle::read_file(dir / "a" / "data.csv") == oracle::read_file(dir / "b" / "data.csv"));
    CHECK(cli("simulate --p 20 --d 1 --n 250 --seed 1 --link identity --out " + q(dir / "c"), dir).code == 0);
}

TEST_CASE("usage errors exit with 2") {
    const auto dir = oracle::scratch_dir("cli_usage");
    CHECK(cli("simulate --p 20 --d 25 --n 10 --seed 1 --out " + q(dir / "x"), dir).code == 2);
    CHECK_FALSE(fs::exists(dir / "x"));
    CHECK(cli("", dir).code == 2);
    CHECK(cli("frobnicate", dir).code == 2);
    CHECK(cli("simulate --p 3", dir).code == 2);
    CHECK(cli("bench " + q(dir / "missing.toml"), dir).code == 2);
    CHECK(cli("fit --input " + q(dir / "missing.csv") + " --out " + q(dir / "o"), dir).code == 2);
    CHECK(cli("--help", dir).code == 0);
}

TEST_CASE("fit recovers a simulated chain") {
    const auto dir = oracle::scratch_dir("cli_fit");
    mrs::write_count_csv(dir / "chain.csv", oracle::chain(3, 0.0, -0.7, 5000, 1));
    mrs::write_json_file(dir / "truth.json", mrs::to_json(mrs::Dag(3, {{0, 1}, {1, 2}})));
    const auto r = cli("fit --input " + q(dir / "chain.csv") + " --out " + q(dir / "o") + " --truth " +
                           q(dir / "truth.json"),
                       dir);
    REQUIRE(r.code == 0);
    CHECK(oracle::read_file(dir / "o" / "edges.csv") == "from,to\nX1,X2\nX2,X3\n");
    CHECK(r.out.find("precision 1.0000 recall 1.0000") != std::string::npos);
    const auto result = mrs::read_json_file(dir / "o" / "result.json");
    CHECK(result.at("ordering").size() == 3);

    // The eval subcommand scores the written result against the truth.
    const auto e = cli("eval --estimated " + q(dir / "o" / "result.json") + " --truth " + q(dir / "truth.json"), dir);
    REQUIRE(e.code == 0);
    const auto metrics = mrs::Json::parse(e.out);
    CHECK(metrics.at("dag").at("recall") == 1.0);
    CHECK(metrics.contains("mec"));
    CHECK(metrics.contains("skeleton"));

    CHECK(cli("fit --input " + q(dir / "chain.csv") + " --out " + q(dir / "p") + " --learner pmrf", dir).code == 0);
    CHECK(cli("fit --input " + q(dir / "chain.csv") + " --out " + q(dir / "r") + " --learner oracle", dir).code == 2);
    CHECK(cli("fit --input " + q(dir / "chain.csv") + " --out " + q(dir / "r") + " --learner oracle --truth " +
                  q(dir / "truth.json"),
              dir)
              .code == 0);
}

TEST_CASE("fit reads configs and leave-one-out") {
    const auto dir = oracle::scratch_dir("cli_cfg");
    mrs::write_count_csv(dir / "small.csv", oracle::chain(3, 0.5, 0.4, 25, 2));
    std::ofstream(dir / "cfg.toml") << "[mrs]\nfolds = \"loo\"\ngrid_size = 8\n";
    const auto r = cli("fit --input " + q(dir / "small.csv") + " --out " + q(dir / "o") + " --config " +
                           q(dir / "cfg.toml") + " -v",
                       dir);
    CHECK(r.code == 0);
    CHECK(r.err.find("leave-one-out") != std::string::npos);
    std::ofstream(dir / "bad.toml") << "[mrs]\nfold = 3\n";
    CHECK(cli("fit --input " + q(dir / "small.csv") + " --out " + q(dir / "o") + " --config " + q(dir / "bad.toml"),
              dir)
              .code == 2);
    CHECK(cli("fit --input " + q(dir / "small.csv") + " --out " + q(dir / "o") + " --folds three", dir).code == 2);
}

TEST_CASE("an eighteen-column table runs end to end") {
    const auto dir = oracle::scratch_dir("cli_18");
    mrs::write_count_csv(dir / "wide.csv", oracle::independent(18, 4.0, 120, 3));
    const auto r = cli("fit --input " + q(dir / "wide.csv") + " --out " + q(dir / "o") + " --grid-size 10", dir);
    REQUIRE(r.code == 0);
    CHECK(mrs::read_json_file(dir / "o" / "result.json").at("graph").at("p") == 18);
}

TEST_CASE("ingestion errors and quarantined columns") {
    const auto dir = oracle::scratch_dir("cli_bad");
    std::ofstream(dir / "ragged.csv") << "a,b\n1,2\n3\n";
    const auto r = cli("fit --input " + q(dir / "ragged.csv") + " --out " + q(dir / "o"), dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("line 3") != std::string::npos);

    mrs::CountArray v(200, 3);
    v.leftCols(2) = oracle::chain(2, 0.0, 0.5, 200, 4).values();
    v.col(2).setConstant(7);
    mrs::write_count_csv(dir / "const.csv", mrs::CountMatrix(v));
    const auto c = cli("fit --input " + q(dir / "const.csv") + " --out " + q(dir / "c") + " --grid-size 10", dir);
    CHECK(c.code == 0);
    CHECK(c.err.find("warning: column 3") != std::string::npos);
}

TEST_CASE("bench dry run and a tiny sweep") {
    const auto dir = oracle::scratch_dir("cli_bench");
    std::ofstream(dir / "tiny.toml") << "name = \"tiny\"\np = 4\nn = [60]\ntrials = 2\n[mrs]\ngrid_size = 8\n";
    const auto dry = cli("bench " + q(dir / "tiny.toml") + " --dry-run --out " + q(dir / "out"), dir);
    CHECK(dry.code == 0);
    CHECK(dry.out.find("2 planned rows") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));
    const auto run = cli("bench " + q(dir / "tiny.toml") + " --out " + q(dir / "out"), dir);
    CHECK(run.code == 0);
    CHECK(fs::exists(dir / "out" / "summary.csv"));
    std::ofstream(dir / "bad.toml") << "p = 4\nd = 9\n";
    CHECK(cli("bench " + q(dir / "bad.toml") + " --dry-run", dir).code == 2);
}

}  // TEST_SUITE
