#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, std::string* out = nullptr) {
    const fs::path log = fs::temp_directory_path() / "mmdq_unit_cli.log";
    const std::string cmd = std::string(MMDQ_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (out) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *out = ss.str();
    }
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mmdq_unit_cli_" + name);
    fs::remove_all(p);
    return p;
}

const std::string kSmall =
    "--set target.n_samples=200 --set kernel.bandwidth=5 --set algorithm.max_iterations=10 "
    "--set init.strategy=from_data";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("quantize succeeds and writes outputs") {
    const fs::path out = fresh("quantize");
    CHECK(run("quantize " + kSmall + " --output " + out.string()) == 0);
    CHECK(fs::exists(out / "summary.csv"));
    CHECK(fs::exists(out / "config.resolved.ini"));
    CHECK(fs::exists(out / "seed_0" / "trace.csv"));
}

TEST_CASE("benchmark over several seeds") {
    const fs::path out = fresh("bench");
    CHECK(run("benchmark " + kSmall + " --n-seeds 3 --base-seed 7 --threads 2 --output " + out.string()) == 0);
    for (const char* s : {"seed_7", "seed_8", "seed_9"}) {
        CHECK(fs::exists(out / s / "final_state.csv"));
    }
}

TEST_CASE("config file plus overrides") {
    const fs::path dir = fresh("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << "[algorithm]\nname = lloyd\nparticles = 4\n[kernel]\nbandwidth = 2\n";
    CHECK(run("quantize --config " + (dir / "run.ini").string() + " " + kSmall + " --output " + (dir / "out").string()) ==
          0);
    std::ifstream in(dir / "out" / "config.resolved.ini");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("name = lloyd") != std::string::npos);
    CHECK(ss.str().find("bandwidth = 5") != std::string::npos);
}

TEST_CASE("config errors exit with 2") {
    CHECK(run("quantize --set kernel.bandwith=5") == 2);
    CHECK(run("quantize --set algorithm.name=ift") == 2);
    CHECK(run("quantize --set kernel.bandwidth=abc") == 2);
    CHECK(run("quantize --config /nonexistent/run.ini") == 2);
    CHECK(run("quantize --set noequals") == 2);
}

TEST_CASE("all seeds failing exits with 1") {
    const fs::path out = fresh("allfail");
    CHECK(run("benchmark " + kSmall +
              " --set msip.path=general --set init.strategy=uniform_box --set init.lo=500,500 --set init.hi=501,501"
              " --n-seeds 2 --output " +
              out.string()) == 1);
    CHECK(fs::exists(out / "seed_0" / "error.txt"));
}

TEST_CASE("eigbench, mmd and plot") {
    const fs::path dir = fresh("tools");
    fs::create_directories(dir);
    std::string text;
    CHECK(run("eigbench --set kernel.bandwidth=5 --set target.n_samples=200 --max-m 5 --output " +
                  (dir / "eig.csv").string(),
              &text) == 0);
    CHECK(fs::exists(dir / "eig.csv"));

    std::ofstream(dir / "pts.csv") << "x1,x2\n0,0\n1,1\n-3,2\n";
    CHECK(run("mmd --set kernel.bandwidth=5 --set target.n_samples=200 --points " + (dir / "pts.csv").string(), &text) ==
          0);
    CHECK(text.find("uniform") != std::string::npos);
    CHECK(text.find("optimal") != std::string::npos);
    std::ofstream(dir / "bad.csv") << "x1\n0\n";
    CHECK(run("mmd --points " + (dir / "bad.csv").string()) == 2);

    const fs::path out = dir / "run";
    REQUIRE(run("quantize " + kSmall + " --output " + out.string()) == 0);
    CHECK(run("plot --kind mmd --input " + (out / "seed_0" / "trace.csv").string() + " --output " +
              (dir / "curve.svg").string()) == 0);
    CHECK(run("plot --kind scatter --input " + (out / "seed_0" / "final_state.csv").string() + " --output " +
              (dir / "scatter.svg").string()) == 0);
    CHECK(fs::exists(dir / "curve.svg"));
    CHECK(fs::exists(dir / "scatter.svg"));
}

}
