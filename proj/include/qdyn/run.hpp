#pragma once

// Run orchestration for the CLI: trajectory/speed/sweep outputs, the
// non-Markovianity report, and the six-model reference summary.

#include <filesystem>
#include <string>
#include <vector>

#include "qdyn/config.hpp"
#include "qdyn/nonmarkov.hpp"
#include "qdyn/speed.hpp"

namespace qdyn {

struct RunOutputs {
    std::vector<std::filesystem::path> files;
};

/// Executes a validated configuration and writes its artifacts under
/// config.out_dir: trajectory.csv always; speed.csv when the speed toggle is
/// on; sweep.csv when a sweep block is present; report.json when any
/// analysis ran. Deterministic for a fixed config and seed, regardless of
/// the job count.
RunOutputs run(const RunConfig& config);

struct SummaryTolerances {
    double fd_step = 1e-4;
    double fd_rel_tol = 1e-3;
    double blp_epsilon = 1e-8;
    double cp_epsilon = 1e-10;
};

struct SpeedCheck {
    double parameter = 0.0;
    double theta = 0.0;
    double closed_form = 0.0;
    double fd = 0.0;
    double rel_error = 0.0;
    bool pass = false;
};

struct RegionCheck {
    double parameter = 0.0;
    RegionVerdict claimed_indivisible = RegionVerdict::Numeric;
    RegionVerdict claimed_backflow = RegionVerdict::Numeric;
    bool computed_indivisible = false;
    bool computed_backflow = false;
    double blp = 0.0;
    bool pass = true;  // stays true when the claim is Numeric
};

struct MonotonicityCheck {
    std::string label;
    Monotonicity expected = Monotonicity::NonMonotonic;
    Monotonicity computed = Monotonicity::NonMonotonic;
    bool pass = false;
};

struct SummaryRow {
    std::string model;
    std::vector<SpeedCheck> speed_checks;
    std::vector<RegionCheck> region_checks;
    std::vector<MonotonicityCheck> monotonicity;
    std::vector<std::string> notes;
    bool pass = false;
};

struct SummaryReport {
    SummaryTolerances tol;
    std::vector<SummaryRow> rows;
    bool pass = false;
};

/// Runs the fixed reference parameter sets over all six model rows:
/// closed-form initial speeds against fidelity-curvature finite differences,
/// known region classifications against the computed ones, monotonicity
/// verdicts, and numeric boundaries where no closed form exists. Any row
/// failure marks the report failed; nothing throws for a mere mismatch.
SummaryReport build_summary_report(const SummaryTolerances& tol = {});

std::string summary_to_text(const SummaryReport& report);
std::string summary_to_json(const SummaryReport& report);

/// Unit convention line printed at the top of every report.
std::string units_note();

}  // namespace qdyn
