// Physical parameters of the probed-cavity setup.
//
// Unit convention: hbar = 1 and kappa = kappa1 + kappa2 + kappaL = 1 defines
// the time unit. All rates (g, gs, kappa_i) are in units of kappa, beta in
// units of sqrt(kappa), dt in units of 1/kappa.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "hilbert.hpp"

namespace qcavity {

struct CavityParams {
    double kappa1 = 0.5;
    double kappa2 = 0.5;
    double kappaL = 0.0;
    double eta = 1.0;      // detection efficiency eta_D * eta_P
    double phi = 0.0;      // local-oscillator phase (radians)
    cx beta{0.0, 0.0};     // input coherent amplitude, piecewise constant
    double beta_off_time = -1.0;  // measurement-phase time at which beta -> 0; <0 = never
    double g = 0.0;
    double gs = 0.0;
    int atoms = 1;     // N
    int fock_cutoff = 3;  // Np
    double dt = 1e-3;
    HamiltonianVariant variant = HamiltonianVariant::Zeno;

    double kappa() const { return kappa1 + kappa2 + kappaL; }

    cx beta_at(double t) const {
        if (beta_off_time >= 0.0 && t >= beta_off_time) return cx{0.0, 0.0};
        return beta;
    }

    JointSpace space() const {
        return JointSpace(SymmetricSpinSpace(atoms), FockSpace(fock_cutoff));
    }

    // throws std::invalid_argument with a message on violation
    void validate() const;

    // Continuum-limit health indicators; all must be << 1 for the continuous
    // description to hold. Reported, never enforced.
    struct ValidityFlags {
        double kappa1_tau;    // kappa1 * dt
        double kappa2_tau;    // kappa2 * dt
        double drive_tau;     // sqrt(kappa1) * |beta| * dt
        double hamiltonian_tau;  // ||H|| * dt (row-sum bound)
        bool ok(double threshold = 0.1) const;
    };
    ValidityFlags validity() const;
    std::string validity_report() const;
};

// Default Fock cutoff policy: max(3, ceil(16 * kappa1 * |beta|^2 / kappa^2)),
// a factor-4 margin on the steady-state photon number 4*kappa1*|beta|^2/kappa^2.
int default_fock_cutoff(double kappa1, double kappa, double beta_abs);

}  // namespace qcavity
