// command-line front end: parameter tables, profile solves, phase portraits,
// evolution experiments from JSON configs, and report validation.
//
// exit codes: 0 success, 2 invalid arguments or config, 3 profile/orbit solver
// failure, 4 failed experiment check, 5 runtime failure during a run.
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "yfs/errors.hpp"
#include "yfs/experiments.hpp"
#include "yfs/flow.hpp"
#include "yfs/geometry.hpp"
#include "yfs/model.hpp"
#include "yfs/profiles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace yfs;

namespace {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::SlowNegativeTail: return "slow_negative_tail";
        case Regime::SlowPositiveTail: return "slow_positive_tail";
        case Regime::FastBarenblatt: return "fast_barenblatt";
        case Regime::Oscillatory: return "oscillatory";
        case Regime::Degenerate: return "degenerate";
    }
    return "unknown";
}

void print_json(const json& j) {
    const std::string s = j.dump(2);
    std::fwrite(s.data(), 1, s.size(), stdout);
    std::fputc('\n', stdout);
}

int cmd_exponents(int dim, double beta, bool haveBeta) {
    const ModelParams mp = derive_exponents(dim);
    json out;
    out["dim"] = mp.N;
    out["m"] = mp.m;
    out["n"] = mp.n;
    out["p"] = mp.p;
    out["alpha_bar"] = mp.alphaBar;
    out["c_star"] = mp.cStar;
    out["kappa"] = mp.kappa;
    if (haveBeta) {
        const SimilarityParams sp = similarity_params(mp, beta);
        json s;
        s["beta"] = sp.beta;
        s["alpha"] = sp.alpha;
        s["beta0"] = sp.beta0;
        s["beta1"] = sp.beta1;
        s["theta"] = sp.theta;
        s["regime"] = regime_name(regime_classify(mp, beta));
        if (sp.gamma1) s["gamma1"] = *sp.gamma1;
        if (sp.gamma2) s["gamma2"] = *sp.gamma2;
        if (sp.A1) s["A1"] = *sp.A1;
        if (sp.A2) s["A2"] = *sp.A2;
        if (sp.CN) s["C_N"] = *sp.CN;
        if (sp.p0) s["p0"] = *sp.p0;
        if (sp.p1) s["p1"] = *sp.p1;
        if (sp.p2) s["p2"] = *sp.p2;
        out["similarity"] = s;
    }
    print_json(out);
    return 0;
}

RadialProfile solve_kind(const std::string& kind, int dim, double beta, bool haveBeta,
                         double amp) {
    const ModelParams mp = derive_exponents(dim);
    if (kind == "cylinder") return cylinder_profile(mp);
    if (kind == "barenblatt") return barenblatt_profile(mp, amp);
    if (!haveBeta) throw DomainError(kind + " profiles need --beta");
    const SimilarityParams sp = similarity_params(mp, beta);
    if (kind == "smooth") return solve_smooth_profile(sp, amp);
    if (kind == "singular") return solve_singular_profile(sp, amp);
    if (kind == "expander") return solve_expander_profile(sp, amp);
    throw DomainError("unknown profile kind '" + kind + "'");
}

int cmd_profile(const std::string& kind, int dim, double beta, bool haveBeta, double amp,
                const std::string& out) {
    const RadialProfile prof = solve_kind(kind, dim, beta, haveBeta, amp);
    fs::create_directories(out);

    const fs::path csv = fs::path(out) / ("profile_" + kind + ".csv");
    FILE* f = std::fopen(csv.string().c_str(), "wb");
    if (!f) throw ConstructionError("cannot open for writing: " + csv.string());
    std::fprintf(f, "# columns: r,f\n");
    for (size_t i = 0; i < prof.grid.size(); ++i)
        std::fprintf(f, "%.17g,%.17g\n", prof.grid[i], prof.values[i]);
    std::fclose(f);

    json diag;
    diag["kind"] = kind;
    diag["dim"] = dim;
    if (haveBeta) diag["beta"] = beta;
    diag["amp"] = amp;
    diag["points"] = prof.grid.size();
    if (prof.originAmplitude) diag["origin_amplitude"] = *prof.originAmplitude;
    if (prof.valueAtOrigin) diag["origin_value"] = *prof.valueAtOrigin;
    if (prof.tailFit) {
        diag["gamma_hat"] = prof.tailFit->gammaHat;
        diag["b_hat"] = prof.tailFit->bHat;
        diag["tail_sign"] = prof.tailFit->sign;
        diag["fit_residual"] = prof.tailFit->residual;
    }
    diag["ode_residual"] = ode_residual(prof);
    try {
        diag["endpoint"] = to_string(to_phase_orbit(prof).endpoint);
    } catch (const Error&) {
        // portraits are a diagnostic extra; profiles without a usable orbit
        // (e.g. truncated windows) still get their CSV and fit fields
    }
    diag["csv"] = csv.filename().string();

    const fs::path jpath = fs::path(out) / ("profile_" + kind + ".json");
    std::ofstream js(jpath);
    js << diag.dump(2) << "\n";
    js.close();
    print_json(diag);
    return 0;
}

int cmd_phase(const std::string& kind, int dim, double beta, bool haveBeta, double amp,
              const std::string& out) {
    const RadialProfile prof = solve_kind(kind, dim, beta, haveBeta, amp);
    const PhaseOrbit orbit = to_phase_orbit(prof);
    fs::create_directories(out);

    const fs::path csv = fs::path(out) / ("phase_" + kind + ".csv");
    FILE* f = std::fopen(csv.string().c_str(), "wb");
    if (!f) throw ConstructionError("cannot open for writing: " + csv.string());
    std::fprintf(f, "# columns: s,X,Y\n");
    for (const PhasePoint& p : orbit.samples)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", p.s, p.X, p.Y);
    std::fclose(f);

    json diag;
    diag["kind"] = kind;
    diag["endpoint"] = to_string(orbit.endpoint);
    diag["samples"] = orbit.samples.size();
    diag["csv"] = csv.filename().string();
    print_json(diag);
    return 0;
}

// one experiment: parse, validate, run, report one summary line
int run_one(const std::string& cfgPath, const std::string& outRoot) {
    json config;
    try {
        std::ifstream in(cfgPath);
        if (!in) {
            std::fprintf(stderr, "error: cannot read config %s\n", cfgPath.c_str());
            return 2;
        }
        config = json::parse(in);
    } catch (const json::parse_error& e) {
        std::fprintf(stderr, "error: %s: %s\n", cfgPath.c_str(), e.what());
        return 2;
    }
    try {
        validate_config(config);
        const std::string outDir =
            (fs::path(outRoot) / config.at("name").get<std::string>()).string();
        const ExperimentReport rep = run_experiment(config, outDir);
        size_t passed = 0;
        for (const CheckRecord& c : rep.checks) passed += c.pass ? 1 : 0;
        std::printf("%s: %s (%zu/%zu checks) -> %s\n",
                    config.at("name").get<std::string>().c_str(),
                    rep.all_pass() ? "PASS" : "FAIL", passed, rep.checks.size(),
                    outDir.c_str());
        std::fflush(stdout);
        return rep.all_pass() ? 0 : 4;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s: %s\n", cfgPath.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s: %s\n", cfgPath.c_str(), e.what());
        return 5;
    }
}

int cmd_run(const std::vector<std::string>& configs, const std::string& outRoot, int jobs) {
    if (jobs <= 1 || configs.size() <= 1) {
        int worst = 0;
        for (const std::string& c : configs) worst = std::max(worst, run_one(c, outRoot));
        return worst;
    }
    // fan independent configs out to a bounded pool, one process each
    int worst = 0;
    size_t next = 0, live = 0;
    std::fflush(nullptr);
    const auto reap = [&]() {
        int status = 0;
        if (waitpid(-1, &status, 0) > 0) {
            --live;
            if (WIFEXITED(status)) worst = std::max(worst, WEXITSTATUS(status));
            else worst = std::max(worst, 5);
        }
    };
    while (next < configs.size() || live > 0) {
        if (next < configs.size() && live < size_t(jobs)) {
            const pid_t pid = fork();
            if (pid < 0) throw ConstructionError("fork failed");
            if (pid == 0) _exit(run_one(configs[next], outRoot));
            ++next;
            ++live;
        } else {
            reap();
        }
    }
    return worst;
}

int cmd_report(const std::string& path) {
    json rep;
    try {
        std::ifstream in(path);
        if (!in) {
            std::fprintf(stderr, "error: cannot read report %s\n", path.c_str());
            return 2;
        }
        rep = json::parse(in);
        validate_report(rep);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
        return 2;
    }
    std::printf("report %s (version %s)\n", path.c_str(),
                rep.at("version").get<std::string>().c_str());
    for (const json& c : rep.at("checks"))
        std::printf("  [%s] %-28s measured=%.6g expected=%.6g tol=%.3g  (%s)\n",
                    c.at("pass").get<bool>() ? "PASS" : "FAIL",
                    c.at("name").get<std::string>().c_str(), c.at("measured").get<double>(),
                    c.at("expected").get<double>(), c.at("tolerance").get<double>(),
                    c.at("note").get<std::string>().c_str());
    const bool all = rep.at("all_pass").get<bool>();
    std::printf("all_pass: %s\n", all ? "true" : "false");
    return all ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-similar fast-diffusion toolkit"};
    app.require_subcommand(1);

    int dim = 3;
    double beta = 0.0, amp = 1.0;
    std::string kind, out = ".", outRoot = "out", reportPath;
    std::vector<std::string> configs;
    int jobs = 1;

    CLI::App* expo = app.add_subcommand("exponents", "model and similarity parameter table");
    expo->add_option("--dim", dim, "space dimension (>= 3)")->required();
    CLI::Option* expoBeta = expo->add_option("--beta", beta, "similarity exponent beta");

    CLI::App* prof = app.add_subcommand("profile", "solve a self-similar profile");
    prof->add_option("--kind", kind, "cylinder|barenblatt|smooth|singular|expander")
        ->required();
    prof->add_option("--dim", dim, "space dimension (>= 3)")->required();
    CLI::Option* profBeta = prof->add_option("--beta", beta, "similarity exponent beta");
    prof->add_option("--amp", amp, "family parameter (lambda, f(0), or cone constant)");
    prof->add_option("--out", out, "output directory");

    CLI::App* phase = app.add_subcommand("phase", "phase-plane portrait of a profile");
    phase->add_option("--kind", kind, "cylinder|barenblatt|smooth|singular|expander")
        ->required();
    phase->add_option("--dim", dim, "space dimension (>= 3)")->required();
    CLI::Option* phaseBeta = phase->add_option("--beta", beta, "similarity exponent beta");
    phase->add_option("--amp", amp, "family parameter");
    phase->add_option("--out", out, "output directory");

    CLI::App* run = app.add_subcommand("run", "run experiments from JSON configs");
    run->add_option("configs", configs, "config files")->required()->check(CLI::ExistingFile);
    run->add_option("--out", outRoot, "output root directory");
    run->add_option("--jobs", jobs, "worker pool size")->check(CLI::PositiveNumber);

    CLI::App* report = app.add_subcommand("report", "validate and print a report.json");
    report->add_option("report", reportPath, "report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (expo->parsed()) return cmd_exponents(dim, beta, bool(*expoBeta));
        if (prof->parsed()) return cmd_profile(kind, dim, beta, bool(*profBeta), amp, out);
        if (phase->parsed()) return cmd_phase(kind, dim, beta, bool(*phaseBeta), amp, out);
        if (run->parsed()) return cmd_run(configs, outRoot, jobs);
        if (report->parsed()) return cmd_report(reportPath);
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    }
    return 0;
}
