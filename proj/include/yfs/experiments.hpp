#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "yfs/flow.hpp"

namespace yfs {

inline constexpr const char* kVersion = "0.1.0";

// one verified quantity of an experiment run; `note` records where the
// expected value comes from (closed form, formula, bound)
struct CheckRecord {
    std::string name;
    double measured = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct ExperimentReport {
    nlohmann::json config; // echo of the validated input
    std::string version;
    std::vector<CheckRecord> checks;
    std::vector<std::string> files; // artifacts written next to report.json
    bool all_pass() const;
    nlohmann::json to_json() const;
};

// Schema validation; both throw DomainError with a field-qualified message.
// A config drives one evolution run plus a list of typed checks:
//
// {
//   "name": "thm13",                         // file-name friendly
//   "dim": 3, "beta": 3.0, "T": 1.0,
//   "base": "smooth|barenblatt|cylinder|singular",
//   "amplitude": 0.1,                        // profile-family parameter
//   "tail_sign": -1,                         // optional, 0 = don't check
//   "envelope_b": 0.0,                       // optional smooth-data envelope
//   "perturbation": {"kind": "bump", "mass": 2, "center": 1,
//                    "width": 0.5, "seed": 11},             // optional
//   "grid": {"r_in": 0.0, "r_max": 1e5, "points": 2600},
//   "boundaries": {"inner": "neumann", "outer": "exact"},   // or cylinder_tail
//   "solver": {"dt_max": 1e-2, "newton_tol": 1e-10, "sup_stop": 1e-10},
//   "until": 0.97,
//   "snapshot_times": [0.25, 0.5],           // optional extra stations
//   "checks": [...],                         // see run_experiment
//   "outputs": {"snapshots": true, "history": true,
//               "distances": true, "curvature": false}      // optional
// }
void validate_config(const nlohmann::json& config);
void validate_report(const nlohmann::json& report);

// Runs the configured evolution, evaluates the checks, writes CSV artifacts
// plus report.json under outDir (created if missing), and returns the report.
//
// check types ("type" field):
//   exact_error      {time, tol}                   closed-form tracking error
//   rate             {taus, expected, rel_tol}     rescaled L1 decay exponent
//   sup_decrease     {taus, window}                rescaled sup distance monotone
//   extinction       {mode: equals_T|beyond_T, tol, bulk_r_min}
//   min_ratio_at_T   {window, threshold}           singular data at t = T
//   far_field_power  {time, radii, lo, hi}
//   tail_ratio       {times, lo, hi}
//   right_decrease   {taus, window}                post-T rescaled distances
//   curvature_law    {time, tol}                   cylinder curvature check
ExperimentReport run_experiment(const nlohmann::json& config, const std::string& outDir);

} // namespace yfs
