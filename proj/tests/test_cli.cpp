#include <doctest.h>

#include <cstdlib>
#include <string>

#include "redwatch/engine.hpp"
#include "redwatch/kde.hpp"
#include "test_util.hpp"

namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(REDWATCH_BIN) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("simulate") == 2);  // missing required --out
    CHECK(run_cli("select-features --traces /nonexistent.csv --out r.csv") == 2);
    CHECK(run_cli("simulate --out /tmp/x --no-such-flag") == 2);
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("detect --help") == 0);
}

TEST_CASE("simulate is byte-idempotent for a fixed seed") {
    testutil::TempDir tmp;
    const std::string a = tmp.dir() + "/a";
    const std::string b = tmp.dir() + "/b";
    REQUIRE(run_cli("simulate --out " + a + " --samples 40 --seed 5") == 0);
    REQUIRE(run_cli("simulate --out " + b + " --samples 40 --seed 5") == 0);
    CHECK(testutil::read_file(a + "/train_ml_training.csv") ==
          testutil::read_file(b + "/train_ml_training.csv"));
    CHECK(testutil::read_file(a + "/s1_database+l1pp.csv") ==
          testutil::read_file(b + "/s1_database+l1pp.csv"));
    CHECK(testutil::read_file(a + "/catalog.tsv") ==
          testutil::read_file(b + "/catalog.tsv"));
}

TEST_CASE("simulate, train, profile, detect work end to end") {
    testutil::TempDir tmp;
    const std::string data = tmp.dir() + "/data";
    REQUIRE(run_cli("simulate --out " + data + " --samples 400 --seed 11") == 0);

    std::string train_traces;
    for (const char* wl :
         {"ml_training", "database", "stream_server", "web_server", "mapreduce"}) {
        train_traces += data + "/train_" + wl + ".csv ";
    }
    const std::string model = tmp.dir() + "/model.txt";
    REQUIRE(run_cli("train --traces " + train_traces + " --out " + model +
                    " --epochs 6 --hidden 16 --history 8 --seed 3") == 0);

    std::string normal, attack, benign;
    for (const char* wl :
         {"ml_training", "database", "stream_server", "web_server", "mapreduce"}) {
        normal += data + "/s1_" + wl + ".csv ";
    }
    for (const char* a : {"l1pp", "l3pp", "fr", "ff", "spectre_v1", "spectre_v2",
                          "spectre_v3", "spectre_v4", "buffer_overflow"}) {
        attack += data + "/s2_ml_training+" + a + ".csv ";
    }
    for (const char* b : {"gpg_rsa", "gcc", "bzip2", "mcf", "milc", "namd",
                          "libquantum", "soplex", "hmmer", "gobmk", "h264ref"}) {
        benign += data + "/s2_ml_training+" + b + ".csv ";
    }
    const std::string profiles = tmp.dir() + "/profiles";
    REQUIRE(run_cli("profile --model " + model + " --normal " + normal +
                    "--attack " + attack + "--benign " + benign + "--out " +
                    profiles) == 0);

    const std::string log = tmp.dir() + "/events.log";
    REQUIRE(run_cli("detect --model " + model + " --profiles " + profiles +
                    " --trace " + data + "/s1_ml_training+l1pp.csv --paused " +
                    data + "/s2_ml_training+l1pp.csv --w 5 --out " + log) == 0);

    const std::string events = testutil::read_file(log);
    CHECK(events.find("anomaly") != std::string::npos);
    CHECK(events.find("case2") != std::string::npos);

    // Mismatched profile dimensions are an input-format error (exit 3).
    redwatch::KdeDetector tiny(Eigen::MatrixXd::Zero(2, 3), 1.0, 0.0,
                               redwatch::DetectorKind::normal_workload);
    save_detector(tiny, profiles + "/rd_n.txt");
    CHECK(run_cli("detect --model " + model + " --profiles " + profiles +
                  " --trace " + data + "/s1_ml_training+l1pp.csv --paused " +
                  data + "/s2_ml_training+l1pp.csv --w 5 --out " + log) == 3);
}

TEST_CASE("select-features runs on preset workload traces") {
    testutil::TempDir tmp;
    const std::string data = tmp.dir() + "/data";
    REQUIRE(run_cli("simulate --out " + data + " --samples 200 --seed 2") == 0);
    std::string traces;
    for (const char* wl :
         {"ml_training", "database", "stream_server", "web_server", "mapreduce"}) {
        traces += data + "/train_" + wl + ".csv ";
    }
    const std::string report = tmp.dir() + "/importance.csv";
    REQUIRE(run_cli("select-features --traces " + traces +
                    "--universe trace --out " + report) == 0);
    const std::string csv = testutil::read_file(report);
    CHECK(csv.rfind("event,", 0) == 0);
    CHECK(csv.find("instruction") != std::string::npos);

    // Eta columns per workload sum to one.
    // (Structural check only; numeric checks live in the pca tests.)
    CHECK(std::count(csv.begin(), csv.end(), '\n') ==
          redwatch::kEventCount + 1);
}

TEST_CASE("malformed trace input exits with code 3") {
    testutil::TempDir tmp;
    const std::string bad = tmp.file("bad.csv");
    testutil::write_file(bad, "t_ms,wrong\n0,1\n");
    const std::string model = tmp.file("model.txt");
    CHECK(run_cli("train --traces " + bad + " --out " + model) == 3);
}
