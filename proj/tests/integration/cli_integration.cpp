#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "tnar/util/hash.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "tnar_cli_integration";

int run(const std::string& args) {
    const std::string cmd = std::string(TNAR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& f) { return (kDir / f).string(); }
std::string bytes(const std::string& f) { return tnar::util::read_file(p(f)); }

struct Setup {
    Setup() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
};
const Setup setup_once;

}  // namespace

TEST_CASE("flag errors exit with 2") {
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("gen-data") == 2);
    CHECK(run("gen-data --out " + p("x.csv") + " --noise-sigma abc") == 2);
    CHECK(run("gen-data --out " + p("x.csv") + " --noise-sigma -1") == 2);
    CHECK(run("boundary --model m --out o --bbox 1,2,3") == 2);
    CHECK(run("train --set nokey") == 2);
    CHECK(run("--help") == 0);
}

TEST_CASE("pipeline outputs are byte-identical across runs") {
    const std::string common_train = " --data " + p("d.csv") + " --eval-data " + p("d.csv") +
                                     " --set total_updates=40 --set lr_decay_start=20 --set hidden=10"
                                     " --set log_every=10 --set unlabeled_batch=32";
    const std::vector<std::string> outputs = {"d.csv", "c.chart", "c.chart.metrics", "v.chart",
                                              "v.chart.metrics", "t.model", "t.report", "l.model",
                                              "w.model", "e.rec", "g.csv"};
    for (const std::string tag : {"a", "b"}) {
        REQUIRE(run("gen-data --n-unlabeled 300 --seed 4 --out " + p("d.csv")) == 0);
        REQUIRE(run("train-manifold --kind ae --hidden 8 --steps 60 --data " + p("d.csv") + " --out " +
                    p("c.chart")) == 0);
        REQUIRE(run("train-manifold --kind vae --hidden 8 --steps 60 --data " + p("d.csv") + " --out " +
                    p("v.chart")) == 0);
        REQUIRE(run("train --method tnar --chart oracle-rings --model-out " + p("t.model") +
                    " --report-out " + p("t.report") + common_train) == 0);
        REQUIRE(run("train --method tar --chart " + p("c.chart") + " --model-out " + p("l.model") +
                    common_train) == 0);
        REQUIRE(run("train --method vat --model-out " + p("w.model") + common_train) == 0);
        REQUIRE(run("eval --model " + p("t.model") + " --data " + p("d.csv") + " --record-out " +
                    p("e.rec")) == 0);
        REQUIRE(run("boundary --resolution 11 --model " + p("t.model") + " --out " + p("g.csv")) == 0);
        for (const auto& f : outputs) {
            fs::copy_file(p(f), p(tag + "_" + f), fs::copy_options::overwrite_existing);
            fs::remove(p(f));
        }
    }
    for (const auto& f : outputs) {
        INFO(f);
        CHECK(bytes("a_" + f) == bytes("b_" + f));
    }
    CHECK(bytes("a_t.model").find("# config.method=tnar") != std::string::npos);
}

TEST_CASE("command error codes") {
    REQUIRE(run("gen-data --n-unlabeled 50 --out " + p("small.csv")) == 0);
    const std::string base = " --data " + p("small.csv") + " --set total_updates=3 --set lr_decay_start=3";
    CHECK(run("train --method tnar --model-out " + p("z.model") + base) == 5);
    CHECK(run("train --method vat --model-out " + p("z.model") + base) == 0);
    CHECK(run("train --method vat --model-out " + p("z.model") + base + " --set lr=1e300") == 4);
    CHECK(run("train --method vat --model-out /nonexistent/z.model" + base) == 3);
    CHECK(run("gen-data --out /nonexistent/dir/x.csv") == 3);
    CHECK(run("eval --model " + p("small.csv") + " --data " + p("small.csv")) == 6);
    CHECK(run("eval --model " + p("missing.model") + " --data " + p("small.csv")) == 3);
}

TEST_CASE("repro smoke run") {
    const std::string args = "repro-two-rings --seeds 2 --test-points 100 --total-updates 20 --out-dir ";
    for (const std::string tag : {"ra", "rb"}) {
        fs::remove_all(p("r"));
        REQUIRE(run(args + p("r")) == 0);
        fs::remove_all(p(tag));
        fs::rename(p("r"), p(tag));
    }
    CHECK(bytes("ra/summary.csv") == bytes("rb/summary.csv"));
    CHECK(bytes("ra/summary.csv").rfind("method,mean,std,errors\nsupervised,", 0) == 0);
    CHECK(bytes("ra/seed_1/tnar-oracle-ent.report") == bytes("rb/seed_1/tnar-oracle-ent.report"));
}
