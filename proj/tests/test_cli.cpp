#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
};

// run the CLI under test (path from the YFS_CLI environment variable set by
// the build) and capture stdout + exit code; stderr is dropped
CmdResult cli(const std::string& args) {
    const char* bin = std::getenv("YFS_CLI");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    CmdResult res;
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) res.out.append(buf, n);
    const int status = pclose(p);
    res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("yfs_cli_test_" + std::to_string(long(getpid())));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// small, fast oracle config: exact tracking + curvature on the annulus
std::string oracle_config(const std::string& name, double tol) {
    json cfg;
    cfg["name"] = name;
    cfg["dim"] = 3;
    cfg["beta"] = 3.0;
    cfg["T"] = 1.0;
    cfg["base"] = "cylinder";
    cfg["grid"] = {{"r_in", 1.0}, {"r_max", 100.0}, {"points", 400}};
    cfg["boundaries"] = {{"inner", "exact"}, {"outer", "exact"}};
    cfg["solver"] = {{"dt_max", 2.664e-4}};
    cfg["until"] = 0.5;
    cfg["checks"] = json::array({json{{"type", "exact_error"}, {"time", 0.5}, {"tol", tol}},
                                 json{{"type", "curvature_law"}, {"time", 0.5}, {"tol", 1e-3}}});
    cfg["outputs"] = {{"snapshots", true}, {"history", true}, {"curvature", true}};
    return cfg.dump(1);
}

} // namespace

TEST_CASE("exponents: parameter table as JSON") {
    CmdResult r = cli("exponents --dim 3 --beta 3");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(j.at("c_star").get<double>() - 1.0) < 1e-12);
    CHECK(std::abs(j.at("m").get<double>() - 0.2) < 1e-15);
    const json& s = j.at("similarity");
    CHECK(std::abs(s.at("gamma1").get<double>() - 0.381966011) < 1e-6);
    CHECK(std::abs(s.at("gamma2").get<double>() - 2.618033989) < 1e-6);
    CHECK(std::abs(s.at("beta0").get<double>() - 2.0) < 1e-12);
    CHECK(std::abs(s.at("beta1").get<double>() - 2.5) < 1e-12);
    CHECK(s.at("regime").get<std::string>() == "slow_negative_tail");

    CmdResult r6 = cli("exponents --dim 6");
    REQUIRE(r6.code == 0);
    json j6 = json::parse(r6.out);
    CHECK(std::abs(j6.at("c_star").get<double>() - 4.0) < 1e-12);
    CHECK_FALSE(j6.contains("similarity"));

    // below beta0 the characteristic roots are complex: no gamma keys
    CmdResult rOsc = cli("exponents --dim 3 --beta 1");
    REQUIRE(rOsc.code == 0);
    json jo = json::parse(rOsc.out);
    CHECK(jo.at("similarity").at("regime").get<std::string>() == "oscillatory");
    CHECK_FALSE(jo.at("similarity").contains("gamma1"));
}

TEST_CASE("exponents: invalid dimension exits 2") {
    CHECK(cli("exponents --dim 2").code == 2);
    CHECK(cli("exponents").code == 2);           // missing required option
    CHECK(cli("exponents --dim 3 --beta 0").code == 2);
}

TEST_CASE("profile: barenblatt diagnostics and CSV") {
    const fs::path out = scratch_dir() / "prof_bb";
    CmdResult r = cli("profile --kind barenblatt --dim 3 --amp 1 --out " + out.string());
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(std::abs(j.at("gamma_hat").get<double>() - 2.0) < 1e-3);
    CHECK(j.at("endpoint").get<std::string>() == "D");

    const std::string csv = slurp(out / "profile_barenblatt.csv");
    CHECK(csv.rfind("# columns: r,f", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 1000);
    // diagnostics JSON is also written next to the CSV
    json onDisk = json::parse(slurp(out / "profile_barenblatt.json"));
    CHECK(onDisk.at("gamma_hat") == j.at("gamma_hat"));
}

TEST_CASE("profile: singular orbit ends at the cylinder point") {
    const fs::path out = scratch_dir() / "prof_sing";
    CmdResult r =
        cli("profile --kind singular --dim 3 --beta 3 --amp 1 --out " + out.string());
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("endpoint").get<std::string>() == "D");
    CHECK(std::abs(j.at("gamma_hat").get<double>() - 0.3802) < 2e-3);
    CHECK(j.at("tail_sign").get<int>() == 1);
}

TEST_CASE("profile: solver and argument failures map to distinct codes") {
    // oscillatory regime: no monotone-tail profile exists
    CHECK(cli("profile --kind smooth --dim 3 --beta 1.5").code == 3);
    // malformed requests
    CHECK(cli("profile --kind smooth --dim 3").code == 2);   // beta required
    CHECK(cli("profile --kind nosuch --dim 3 --beta 3").code == 2);
    CHECK(cli("profile --dim 3").code == 2);                 // kind required
}

TEST_CASE("phase: portrait CSV with endpoint") {
    const fs::path out = scratch_dir() / "phase_sing";
    CmdResult r = cli("phase --kind singular --dim 3 --beta 3 --amp 1 --out " + out.string());
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j.at("endpoint").get<std::string>() == "D");
    CHECK(j.at("samples").get<long>() > 100);
    const std::string csv = slurp(out / "phase_singular.csv");
    CHECK(csv.rfind("# columns: s,X,Y", 0) == 0);
}

TEST_CASE("run: oracle config passes and its report round-trips") {
    const fs::path cfg = write_file("oracle.json", oracle_config("oracle-a", 1e-3));
    const fs::path out = scratch_dir() / "run_oracle";
    CmdResult r = cli("run " + cfg.string() + " --out " + out.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("oracle-a: PASS (3/3 checks)") != std::string::npos);

    // the emitted report re-validates and prints per-check lines
    const fs::path rep = out / "oracle-a" / "report.json";
    CmdResult rr = cli("report " + rep.string());
    CHECK(rr.code == 0);
    CHECK(rr.out.find("[PASS] exact_error") != std::string::npos);
    CHECK(rr.out.find("all_pass: true") != std::string::npos);

    // report fields carry provenance notes
    json j = json::parse(slurp(rep));
    for (const json& c : j.at("checks")) CHECK_FALSE(c.at("note").get<std::string>().empty());
    CHECK(j.at("version").get<std::string>() == "0.1.0");
}

TEST_CASE("run: identical config produces byte-identical artifacts") {
    const fs::path cfg = write_file("det.json", oracle_config("det", 1e-3));
    const fs::path outA = scratch_dir() / "det_a";
    const fs::path outB = scratch_dir() / "det_b";
    REQUIRE(cli("run " + cfg.string() + " --out " + outA.string()).code == 0);
    REQUIRE(cli("run " + cfg.string() + " --out " + outB.string()).code == 0);
    for (const char* name : {"snapshot_000.csv", "history.csv", "curvature.csv",
                             "report.json"}) {
        CAPTURE(name);
        CHECK(slurp(outA / "det" / name) == slurp(outB / "det" / name));
    }
}

TEST_CASE("run: failing check exits 4 and the report says so") {
    const fs::path cfg = write_file("tight.json", oracle_config("tight", 1e-9));
    const fs::path out = scratch_dir() / "run_tight";
    CmdResult r = cli("run " + cfg.string() + " --out " + out.string());
    CHECK(r.code == 4);
    CHECK(r.out.find("tight: FAIL") != std::string::npos);
    CmdResult rr = cli("report " + (out / "tight" / "report.json").string());
    CHECK(rr.code == 4);
    CHECK(rr.out.find("all_pass: false") != std::string::npos);
}

TEST_CASE("run: invalid configs exit 2") {
    const fs::path missing = write_file("missing.json", "{\"name\": \"bad\"}");
    CHECK(cli("run " + missing.string()).code == 2);
    const fs::path broken = write_file("broken.json", "{ not json ]");
    CHECK(cli("run " + broken.string()).code == 2);
    CHECK(cli("run /nonexistent/config.json").code == 2);
    const fs::path badField = write_file(
        "badfield.json",
        "{\"name\":\"x\",\"dim\":3,\"beta\":-1,\"T\":1,\"base\":\"cylinder\","
        "\"grid\":{\"r_max\":10,\"points\":50},\"until\":0.1,\"checks\":[]}");
    CHECK(cli("run " + badField.string()).code == 2);
}

TEST_CASE("run: worker pool fans out independent configs") {
    const fs::path a = write_file("pool_a.json", oracle_config("pool-a", 1e-3));
    const fs::path b = write_file("pool_b.json", oracle_config("pool-b", 1e-3));
    const fs::path out = scratch_dir() / "pool";
    CmdResult r =
        cli("run " + a.string() + " " + b.string() + " --jobs 2 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("pool-a: PASS") != std::string::npos);
    CHECK(r.out.find("pool-b: PASS") != std::string::npos);
    CHECK(fs::exists(out / "pool-a" / "report.json"));
    CHECK(fs::exists(out / "pool-b" / "report.json"));
}

TEST_CASE("report: tampered files are rejected") {
    const fs::path cfg = write_file("tamper.json", oracle_config("tamper", 1e-3));
    const fs::path out = scratch_dir() / "run_tamper";
    REQUIRE(cli("run " + cfg.string() + " --out " + out.string()).code == 0);
    const fs::path rep = out / "tamper" / "report.json";

    json j = json::parse(slurp(rep));
    j["all_pass"] = false; // now inconsistent with the all-pass check records
    const fs::path bad1 = write_file("tampered1.json", j.dump(2));
    CHECK(cli("report " + bad1.string()).code == 2);

    json j2 = json::parse(slurp(rep));
    j2.erase("version");
    const fs::path bad2 = write_file("tampered2.json", j2.dump(2));
    CHECK(cli("report " + bad2.string()).code == 2);

    CHECK(cli("report /nonexistent/report.json").code == 2);
}
