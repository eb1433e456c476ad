#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

#include "hardy_blowup/cli.hpp"

using hardy::cli::Json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "hardy_blowup");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hardy::cli::dispatch(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) { return std::string(HARDY_TEST_DATA_DIR) + "/" + name; }

} // namespace

TEST_CASE("regime verdicts", "[cli]") {
    auto r = run({"regime", "--mu", "0", "--p", "3", "--s", "0"});
    REQUIRE(r.code == 0);
    auto j = Json::parse(r.out);
    CHECK(j["verdict"] == "Existence");
    CHECK(j["ko_exponent"].get<double>() == Catch::Approx(-1.0));

    r = run({"regime", "--mu", "0.3", "--p", "2", "--s", "0"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["verdict"] == "NoSuperharmonics");

    r = run({"regime", "--mu", "0", "--p", "3", "--s", "3"});
    CHECK(Json::parse(r.out)["verdict"] == "Nonexistence");
}

TEST_CASE("exit codes", "[cli]") {
    CHECK(run({}).code == 64);
    CHECK(run({"regime", "--mu", "0"}).code == 64);
    CHECK(run({"frobnicate"}).code == 64);
    CHECK(run({"--help"}).code == 0);

    const auto bad = run({"regime", "--mu", "0", "--p", "0.5", "--s", "0"});
    CHECK(bad.code == 1);
    CHECK(Json::parse(bad.err)["error"] == "DomainError");

    // the correction exponent 1/2 is inadmissible at mu = 0.2
    CHECK(run({"barrier", "verify", "--mu", "0.2", "--eps", "0.5"}).code == 1);
    CHECK(run({"barrier", "verify", "--mu", "0.2"}).code == 0);
    // the log barriers lose their sign well before delta = 1
    CHECK(run({"barrier", "verify", "--mu", "0.25", "--delta-max", "0.99"}).code == 2);
}

TEST_CASE("barrier table", "[cli]") {
    const auto r = run({"barrier", "--family", "h_bar", "--mu", "0", "--p", "2", "--s", "0", "--samples", "20"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "delta,value,residual");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);
}

TEST_CASE("output is deterministic", "[cli]") {
    const std::vector<std::string> args = {"sweep", "--mu", "0", "--p", "3", "--s", "2", "--kappas", "1,0.1"};
    const auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK_FALSE(a.out.empty());
}

TEST_CASE("config file with command-line override", "[cli]") {
    const auto path = temp_path("cli_config.json");
    {
        std::ofstream f(path);
        f << R"({"mu": 0, "p": 3, "s": 3})";
    }
    auto r = run({"regime", "--config", path});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["verdict"] == "Nonexistence");
    r = run({"regime", "--config", path, "--s", "0"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["verdict"] == "Existence");

    const auto arr = temp_path("cli_batch.json");
    {
        std::ofstream f(arr);
        f << R"([[0, 3, 0], {"mu": 0, "p": 3, "s": 3}])";
    }
    r = run({"regime", "--config", arr});
    REQUIRE(r.code == 0);
    const auto j = Json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[1]["verdict"] == "Nonexistence");
    CHECK(run({"sweep", "--config", arr}).code == 64);
}

TEST_CASE("classify a written profile", "[cli]") {
    const auto path = temp_path("cli_profile.csv");
    {
        std::ofstream f(path);
        f << "delta,u\n";
        for (int i = 0; i <= 100; ++i) {
            const double d = 1e-5 * std::pow(1e4, i / 100.0);
            f << hardy::cli::num(d) << "," << hardy::cli::num(std::sqrt(2.0) / d) << "\n";
        }
    }
    const auto r = run({"classify", "--mu", "0", "--p", "3", "--s", "0", "--input", path, "--window", "1e-4,1e-2"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["verdict"] == "XXL");
}

TEST_CASE("reproduce the threshold suite", "[cli]") {
    const auto r = run({"reproduce", "--suite", "thresholds"});
    CHECK(r.code == 0);
    const auto j = Json::parse(r.out);
    CHECK(j.dump().find("\"passed\":true") != std::string::npos);
    CHECK(run({"reproduce", "--suite", "nope"}).code != 0);
}
