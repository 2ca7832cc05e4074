// Drives the installed binary end to end through std::system; the harness
// passes its location in TAILBLEND_BIN.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

std::string bin() {
    const char* b = std::getenv("TAILBLEND_BIN");
    REQUIRE(b != nullptr);
    return b;
}

fs::path workdir() {
    auto p = fs::temp_directory_path() / "tailblend_cli_tests";
    fs::create_directories(p);
    return p;
}

int run(const std::string& args) {
    std::string cmd = bin() + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("simulate is deterministic for every study preset") {
    auto dir = workdir();
    for (int study : {1, 2, 3, 4}) {
        auto a = dir / ("sim_a_" + std::to_string(study) + ".csv");
        auto b = dir / ("sim_b_" + std::to_string(study) + ".csv");
        REQUIRE(run("simulate --study " + std::to_string(study) + " --seed 42 --out " +
                    a.string()) == 0);
        REQUIRE(run("simulate --study " + std::to_string(study) + " --seed 42 --out " +
                    b.string()) == 0);
        INFO("study " << study);
        CHECK(slurp(a) == slurp(b));
    }
}

TEST_CASE("seed environment override matches the flag") {
    auto dir = workdir();
    auto a = dir / "env_a.csv";
    auto b = dir / "env_b.csv";
    REQUIRE(run("simulate --study 2 --seed 777 --out " + a.string()) == 0);
    std::string cmd = "TAILBLEND_SEED=777 " + bin() + " simulate --study 2 --out " + b.string() +
                      " >/dev/null 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("exit codes distinguish usage, data and fit errors") {
    auto dir = workdir();
    CHECK(run("no-such-subcommand") == 2);
    CHECK(run("tdc-empirical --in /nonexistent.csv") == 3);
    auto csv = dir / "three_rows.csv";
    {
        std::ofstream out(csv);
        out << "y1,y2\n1,2\n2,1\n3,3\n";
    }
    // missing column
    CHECK(run("tdc-empirical --in " + csv.string() + " --columns a,b") == 3);
    // not enough rows for estimation
    CHECK(run("tdc-empirical --in " + csv.string()) == 3);
    // bad method value
    CHECK(run("fit --in " + csv.string() + " --method nope") == 2);
}

TEST_CASE("custom simulate emits usable data") {
    auto dir = workdir();
    auto csv = dir / "custom.csv";
    REQUIRE(run("simulate --copula survival_clayton --theta 1.3 --n 400 --seed 3 "
                "--margin1 gamma:2,1 --margin2 gamma:3,1 --out " +
                csv.string()) == 0);
    auto text = slurp(csv);
    CHECK(text.rfind("y1,y2\n", 0) == 0);
    auto rep = dir / "custom_emp.json";
    REQUIRE(run("tdc-empirical --in " + csv.string() + " --out " + rep.string()) == 0);
    auto j = nlohmann::json::parse(slurp(rep));
    REQUIRE(j.contains("empirical"));
    CHECK(j["empirical"].size() == 10); // 5 estimators, both tails
}

TEST_CASE("pipeline simulate-fit-bma brackets the study-II blend") {
    auto dir = workdir();
    int inside = 0;
    const int seeds = 20;
    for (int s = 1; s <= seeds; ++s) {
        auto csv = dir / ("p_" + std::to_string(s) + ".csv");
        auto fits = dir / ("p_" + std::to_string(s) + "_fits.json");
        auto rep = dir / ("p_" + std::to_string(s) + "_bma.json");
        REQUIRE(run("simulate --study 2 --seed " + std::to_string(s) + " --out " + csv.string()) ==
                0);
        REQUIRE(run("fit --in " + csv.string() + " --out " + fits.string()) == 0);
        REQUIRE(run("bma --in " + csv.string() + " --fits " + fits.string() +
                    " --method 1 --out " + rep.string()) == 0);
        auto j = nlohmann::json::parse(slurp(rep));
        double lu = j["method1"]["lambda_upper"].get<double>();
        if (lu >= 0.40 && lu <= 0.60) ++inside;
    }
    CHECK(inside == seeds);
}

TEST_CASE("bma method 2 emits distances and estimator summaries") {
    auto dir = workdir();
    auto csv = dir / "m2.csv";
    auto fits = dir / "m2_fits.json";
    auto rep = dir / "m2_rep.json";
    REQUIRE(run("simulate --study 2 --n 400 --seed 9 --out " + csv.string()) == 0);
    REQUIRE(run("fit --in " + csv.string() + " --out " + fits.string()) == 0);
    REQUIRE(run("bma --in " + csv.string() + " --fits " + fits.string() +
                " --method 2 --reps 25 --seed 9 --out " + rep.string()) == 0);
    auto j = nlohmann::json::parse(slurp(rep));
    REQUIRE(j.contains("method2"));
    CHECK(j["method2"]["reps"] == 25);
    CHECK(j["method2"]["estimates"].size() == 10);
    CHECK(j["method2"]["distances"].contains("bma"));
    CHECK(j["method2"]["distances"].contains("best_single"));
    double w = j["method2"]["distances"]["bma"]["wasserstein"].get<double>();
    CHECK(w > 0.0);
    CHECK(w < 1.0);
}

TEST_CASE("mixture subcommand reports ranking and classification") {
    auto dir = workdir();
    auto csv = dir / "mix.csv";
    auto rep = dir / "mix_rep.json";
    REQUIRE(run("simulate --study 4 --seed 11 --out " + csv.string()) == 0);
    REQUIRE(run("mixture --in " + csv.string() +
                " --covariates x1,x2 --labels label --g 2 --families gumbel,frank --seed 11 "
                "--out " +
                rep.string()) == 0);
    auto j = nlohmann::json::parse(slurp(rep));
    REQUIRE(j.contains("mixture"));
    CHECK(j["mixture"]["g"] == 2);
    CHECK(j["mixture"]["n_models"] == 4);
    REQUIRE(j["mixture"].contains("classification"));
    double mis = j["mixture"]["classification"]["misclassification"].get<double>();
    CHECK(mis < 0.5);
    // report merge keeps blocks and validates round trip
    auto merged = dir / "merged.json";
    REQUIRE(run("report --in " + rep.string() + " --out " + merged.string()) == 0);
    auto m = nlohmann::json::parse(slurp(merged));
    CHECK(m["mixture"] == j["mixture"]);
}

TEST_CASE("report output is byte-identical across runs") {
    auto dir = workdir();
    auto csv = dir / "det.csv";
    auto f1 = dir / "det_f1.json";
    auto f2 = dir / "det_f2.json";
    REQUIRE(run("simulate --study 2 --n 300 --seed 13 --out " + csv.string()) == 0);
    REQUIRE(run("fit --in " + csv.string() + " --out " + f1.string()) == 0);
    REQUIRE(run("fit --in " + csv.string() + " --out " + f2.string()) == 0);
    CHECK(slurp(f1) == slurp(f2));
}
