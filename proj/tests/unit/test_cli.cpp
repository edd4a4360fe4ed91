// Drives the cptpsa executable end to end: exit codes, output naming and
// the fit-mu round trip.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cptpsa/analytic.hpp"
#include "cptpsa/experiment_config.hpp"
#include "cptpsa/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace cptpsa;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::vector<std::string> files;
};

Run run(const std::string& args, const fs::path& dir) {
    const fs::path listing = dir / "stdout.txt";
    const std::string cmd = std::string(CPTPSA_EXE) + " " + args + " > " + listing.string() + " 2> " +
                            (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(listing);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) r.files.push_back(line);
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("cptpsa-cli-" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

} // namespace

TEST_CASE("usage and config errors exit with 2") {
    const fs::path d = scratch_dir("errors");
    CHECK(run("", d).code == 2);
    CHECK(run("scan-phase", d).code == 2);
    CHECK(run("scan-phase --preset paper-exp --format xml", d).code == 2);

    write_text(d / "bad.json", R"({"preset": "paper-exp", "medium": {"bogus": 1}})");
    CHECK(run("scan-phase --config " + (d / "bad.json").string() + " --out " + d.string(), d).code == 2);
    std::ifstream err(d / "stderr.txt");
    const std::string text((std::istreambuf_iterator<char>(err)), {});
    CHECK(text.find("medium.bogus") != std::string::npos);
}

TEST_CASE("solver failures exit with 3") {
    const fs::path d = scratch_dir("solver");
    write_text(d / "stiff.json", R"({"preset": "paper-exp", "grid": {"n_steps": 16, "tolerance": 1e-15,
                                      "max_refinements": 1}})");
    CHECK(run("scan-phase --config " + (d / "stiff.json").string() + " --out " + d.string(), d).code == 3);
}

TEST_CASE("I/O failures exit with 4") {
    const fs::path d = scratch_dir("io");
    CHECK(run("fit-mu --input " + (d / "missing.csv").string() + " --out " + d.string(), d).code == 4);
    write_text(d / "blocker", "");
    CHECK(run("cpt-scan --preset paper-exp --out " + (d / "blocker" / "sub").string(), d).code == 4);
}

TEST_CASE("scan-phase then fit-mu recovers the preset mu") {
    const fs::path d = scratch_dir("roundtrip");
    const Run scan = run("scan-phase --preset analytic-regime --threads 2 --out " + d.string(), d);
    REQUIRE(scan.code == 0);
    REQUIRE(scan.files.size() == 1);
    const fs::path csv = scan.files.front();
    CHECK(csv.filename().string().rfind("scan-phase-", 0) == 0);
    CHECK(csv.extension() == ".csv");

    const ScanResult table = load_scan_result(csv);
    CHECK(table.has_column("gain"));
    CHECK(table.has_column("analytic_gain"));
    CHECK(table.metadata.at("preset") == "analytic-regime");

    const Run fit = run("fit-mu --input " + csv.string() + " --out " + d.string(), d);
    REQUIRE(fit.code == 0);
    const ScanResult result = load_scan_result(fit.files.front());
    const double mu = result.column("mu").front();
    const double expected = mu_from_medium(preset_config("analytic-regime").medium);
    CHECK(std::abs(mu - expected) / expected < 0.15);

    // A second run in the same second gets a distinct stem.
    const Run again = run("fit-mu --input " + csv.string() + " --out " + d.string(), d);
    REQUIRE(again.code == 0);
    CHECK(again.files.front() != fit.files.front());
}

TEST_CASE("structured and plot formats") {
    const fs::path d = scratch_dir("formats");
    const Run s = run("cpt-scan --preset paper-exp --format structured --out " + d.string(), d);
    REQUIRE(s.code == 0);
    CHECK(fs::path(s.files.front()).extension() == ".json");
    CHECK(load_scan_result(s.files.front()).has_column("transmission"));

    const Run p = run("cpt-scan --preset paper-exp --format plot --out " + d.string(), d);
    REQUIRE(p.code == 0);
    REQUIRE(p.files.size() == 2);
    CHECK(fs::path(p.files[1]).extension() == ".svg");
}
