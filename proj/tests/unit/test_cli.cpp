#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "simm/cli.hpp"
#include "simm/io.hpp"

using simm::testing::data_path;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = simm::cli_dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("simm_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> simple_data() {
    return {"--mixtures", data_path("simple_mixtures.csv"), "--sources", data_path("simple_sources.csv")};
}

std::vector<std::string> geese_data() {
    return {"--mixtures",       data_path("grouped_mixtures.csv"),      "--sources",
            data_path("geese_sources.csv"), "--corrections", data_path("geese_corrections.csv"),
            "--concentrations", data_path("geese_concentrations.csv")};
}

std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("fit then summarize the simple data") {
    const fs::path dir = fresh_dir("simple");
    const std::string artifact = (dir / "run.json").string();
    auto r = run(cat({"fit", "--method", "mcmc", "-o", artifact}, simple_data()));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(artifact));

    r = run({"summary", "--run", artifact, "--type", "diagnostics", "--csv"});
    REQUIRE(r.code == 0);
    // header then one row per parameter; every Rhat is close to 1
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        const double rhat = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(rhat <= 1.01);
        ++rows;
    }
    CHECK(rows == 5);

    r = run({"summary", "--run", artifact, "--type", "statistics"});
    CHECK(r.code == 0);
    CHECK(r.out.find("deviance") != std::string::npos);
    CHECK(r.out.find("sd[iso1]") != std::string::npos);

    r = run({"summary", "--run", artifact, "--type", "quantiles"});
    CHECK(r.out.find("97.5%") != std::string::npos);
    r = run({"summary", "--run", artifact, "--type", "correlations"});
    CHECK(r.code == 0);

    r = run({"compare-sources", "--run", artifact, "--source", "C", "--source", "A"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Prob ( proportion of C > proportion of A )") != std::string::npos);

    r = run({"predictive", "--run", artifact, "--prob", "0.5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("inside the 50% predictive interval") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("both backends write artifacts that summary can read") {
    const fs::path dir = fresh_dir("backends");
    const std::string vb = (dir / "vb.json").string();
    auto r = run(cat({"fit", "--method", "ffvb", "-o", vb}, simple_data()));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "vb.trace.csv"));
    CHECK(run({"summary", "--run", vb}).code == 0);
    // variational runs have no chains to diagnose
    r = run({"summary", "--run", vb, "--type", "diagnostics"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(simm::io::load_run(vb).backend == simm::Backend::Ffvb);
    fs::remove_all(dir);
}

TEST_CASE("output directory comes from the environment") {
    const fs::path dir = fresh_dir("env");
    ::setenv("SIMM_OUTPUT_DIR", dir.c_str(), 1);
    auto r = run(cat({"fit", "--iterations", "600", "--burn-in", "100", "--thin", "5"}, simple_data()));
    ::unsetenv("SIMM_OUTPUT_DIR");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "run.json"));
    fs::remove_all(dir);
}

TEST_CASE("grouped workflow") {
    const fs::path dir = fresh_dir("grouped");
    const std::string artifact = (dir / "run.json").string();
    auto r = run(cat({"fit", "-o", artifact, "--iterations", "1500", "--burn-in", "500", "--thin", "5"}, geese_data()));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("8 groups") != std::string::npos);

    r = run({"summary", "--run", artifact, "--group", "Period 3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Period 3") != std::string::npos);
    CHECK(r.out.find("Period 4") == std::string::npos);

    r = run({"compare-groups", "--run", artifact, "--source", "Zostera", "--group", "Period 1", "--group",
             "Period 2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Prob (") != std::string::npos);

    const std::string combined = (dir / "combined.json").string();
    r = run({"combine", "--run", artifact, "--source", "U.lactuca", "--source", "Enteromorpha", "--name",
             "Algae", "-o", combined});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    r = run({"summary", "--run", combined, "--group", "Period 1"});
    CHECK(r.out.find("Algae") != std::string::npos);
    CHECK(run({"predictive", "--run", combined, "--group", "Period 1"}).code == 1);

    const fs::path plots = dir / "plots";
    for (const std::string type : {"boxplot", "density", "matrix", "prior"}) {
        r = run({"plot", "--type", type, "--run", artifact, "--group", "Period 2", "--output-dir", plots.string()});
        CHECK_MESSAGE(r.code == 0, r.err);
        CHECK(fs::exists(plots / (type + "_Period_2.svg")));
        CHECK(fs::exists(plots / (type + "_Period_2.csv")));
    }
    r = run(cat({"plot", "--type", "isospace", "--output-dir", plots.string()}, geese_data()));
    CHECK_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(plots / "isospace.svg"));

    r = run(cat({"check", "--json"}, geese_data()));
    CHECK(r.code == 0);
    CHECK(r.out.find("\"inside\"") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("elicit writes priors usable by fit") {
    const fs::path dir = fresh_dir("elicit");
    const std::string priors = (dir / "priors.json").string();
    auto r = run({"elicit", "--means", "0.2,0.3,0.5", "--sds", "0.1,0.12,0.13", "--n-sim", "2000", "-o", priors});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(priors));
    r = run(cat({"fit", "--priors", priors, "-o", (dir / "run.json").string(), "--iterations", "600",
                 "--burn-in", "100", "--thin", "5"},
                simple_data()));
    CHECK_MESSAGE(r.code == 0, r.err);

    r = run({"elicit", "--means", "0.5,0.6", "--sds", "0.1,0.1"});
    CHECK(r.code == 1);
    fs::remove_all(dir);
}

TEST_CASE("errors map to exit codes") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"summary", "--run", "/no/such/run.json"}).code == 1);
    CHECK(run(cat({"fit", "--bogus-flag"}, simple_data())).code == 1);
    CHECK(run(cat({"fit", "--method", "gibbs"}, simple_data())).code == 1);
    auto r = run({"fit", "--mixtures", data_path("simple_mixtures.csv"), "--sources",
                  data_path("geese_sources.csv")});
    CHECK(r.code == 1);
    CHECK(r.err.find("unknown-tracer") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
}
