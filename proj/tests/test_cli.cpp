#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mvsr/errors.hpp"
#include "mvsr/experiment.hpp"

// Subprocess checks against the built binary; the path comes from the
// MVSR_CLI environment variable set by ctest.

using namespace mvsr;
namespace fs = std::filesystem;

namespace {

const char* cli_path() { return std::getenv("MVSR_CLI"); }

int run_cli(const std::string& args) {
    std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("flag list syntax") {
    CHECK(parse_size_list("5:25:2") ==
          std::vector<int>{5, 7, 9, 11, 13, 15, 17, 19, 21, 23, 25});
    CHECK(parse_size_list("5,9,13") == std::vector<int>{5, 9, 13});
    CHECK(parse_size_list("7") == std::vector<int>{7});
    CHECK_THROWS_AS(parse_size_list("9:5:2"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("5:25:0"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("5:25"), ConfigError);
    CHECK_THROWS_AS(parse_size_list("big"), ConfigError);
    CHECK_THROWS_AS(parse_size_list(""), ConfigError);

    CHECK(parse_noise_list("0,0.033,0.066,0.1") ==
          std::vector<double>{0.0, 0.033, 0.066, 0.1});
    CHECK_THROWS_AS(parse_noise_list("lots"), ConfigError);
    CHECK_THROWS_AS(parse_noise_list(""), ConfigError);
}

TEST_CASE("cli exit codes") {
    if (!cli_path()) return;  // driven through ctest; skip under a bare binary
    auto dir = fs::temp_directory_path() / "mvsr_test_cli";
    fs::create_directories(dir);

    CHECK(run_cli("run --benchmark f1_views --population 20 --budget 40 --seeds 1 "
                  "--search-iterations 2 --refit-iterations 5 --out " +
                  (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "results.csv"));

    CHECK(run_cli("run --benchmark f9 --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("run --benchmark f1_views --budget 10 --population 100 --out " +
                  (dir / "x").string()) == 2);
    CHECK(run_cli("run --data " + (dir / "absent.csv").string() + " --out " +
                  (dir / "x").string()) == 3);
    CHECK(run_cli("score --model \"x0 + \" --data whatever.csv") == 2);
    CHECK(run_cli("rank --results " + (dir / "absent.csv").string()) == 3);
    CHECK(run_cli("sweep --benchmark f1_views --sizes 9:5:1 --out " +
                  (dir / "x").string()) == 2);
    CHECK(run_cli("bogus") == 2);
    CHECK(run_cli("--help") == 0);
}
