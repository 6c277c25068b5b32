// Experiment orchestration: trajectory fan-out across worker threads with
// derived per-trajectory seeds, CSV emission, and machine-readable summary
// lines on stdout. Progress and warnings go to stderr only.
#pragma once

#include <string>

#include "experiment/config.hpp"

namespace qcavity {

enum class RunStatus : int {
    Ok = 0,
    BadConfig = 2,
    NumericAbort = 3,
    IoFailure = 4,
};

struct RunResult {
    RunStatus status = RunStatus::Ok;
    std::string message;  // failure diagnostics
};

// Run a fully resolved experiment configuration.
RunResult run_experiment(const Config& cfg);

// `oracle upq` backend: exact vs strong-oscillator table for p,q in {0,1,2}.
// out_path empty = stdout.
RunResult write_upq_table(double mu, double phi, const std::string& out_path);

// `analytic fig2` backend: outcome density and conditioned populations as a
// function of the scaled signal y/sqrt(t) for the equal-spacing regime
// r_n = r n at a given r^2 t.
RunResult write_fig2_profile(double r2t, int atoms, const std::string& out_path);

}  // namespace qcavity
