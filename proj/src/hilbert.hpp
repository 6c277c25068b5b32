// Truncated Fock space and symmetric collective-spin space: every operator
// and state the steppers consume is built here.
//
// Joint basis ordering is fixed: the spin index varies slowest,
//   idx(n, p) = n*(Np+1) + p,   n = atoms in |f>, p = photon number.
// All CSV column orders derive from this.
#pragma once

#include <stdexcept>
#include <string>

#include "core/sparse.hpp"
#include "core/types.hpp"

namespace qcavity {

struct FockSpace {
    int cutoff;  // max photon number retained
    explicit FockSpace(int np) : cutoff(np) {
        if (np < 0) throw std::invalid_argument("FockSpace: cutoff must be >= 0");
    }
    int dim() const { return cutoff + 1; }
};

struct SymmetricSpinSpace {
    int atoms;  // basis |n>, n = 0..N atoms in |f>
    explicit SymmetricSpinSpace(int n) : atoms(n) {
        if (n < 0) throw std::invalid_argument("SymmetricSpinSpace: atom count must be >= 0");
    }
    int dim() const { return atoms + 1; }
};

struct JointSpace {
    SymmetricSpinSpace spin;
    FockSpace fock;
    JointSpace(SymmetricSpinSpace s, FockSpace f) : spin(s), fock(f) {}
    int dim() const { return spin.dim() * fock.dim(); }
    int index(int n, int p) const { return n * fock.dim() + p; }
};

enum class OperatorRole { Hamiltonian, Mode, Density, Generic };

// Dense operator on the joint space with a role tag. Densities and
// Hamiltonians get validated against their invariants on construction.
struct JointOperator {
    CMat m;
    OperatorRole role = OperatorRole::Generic;

    JointOperator() = default;
    JointOperator(CMat mat, OperatorRole r);
};

// Normalized ket on the joint space; the pure-state stepper renormalizes
// after every step, keeping the norm at 1 to round-off.
using PureState = CVec;

enum class LadderDirection { Raise, Lower };

// Fock-factor annihilation operator: <p-1|a|p> = sqrt(p).
SparseOp annihilation(const FockSpace& space);

// Collective spin ladder: sum_i sigma_i^+ / sigma_i^- restricted to the
// symmetric sector,  raise|n> = sqrt((n+1)(N-n)) |n+1>,
//                    lower|n> = sqrt(n(N+1-n))   |n-1>.
SparseOp collective_ladder(const SymmetricSpinSpace& space, LadderDirection dir);

// A ⊗ B with A on the spin factor, B on the Fock factor.
SparseOp tensor(const JointSpace& js, const SparseOp& spin_op, const SparseOp& fock_op);
CMat tensor(const CMat& a, const CMat& b);

enum class HamiltonianVariant { Dicke, Shifted, Zeno };

// Dispersive probing Hamiltonian (hbar = 1, rates in units of kappa):
//   Dicke:   g * n_spin ⊗ a†a
//   Shifted: g * (n_spin - N/2) ⊗ a†a
//   Zeno:    Dicke + g_s * (raise + lower) ⊗ 1
JointOperator hamiltonian(const JointSpace& js, HamiltonianVariant variant, double g, double gs);

struct CoherentState {
    CVec ket;              // normalized after truncation
    double norm_deficit;   // pre-truncation weight beyond the cutoff
    bool truncated;        // deficit exceeded 1e-6 (warn, not fail)
};

// Truncated coherent state, amplitudes ∝ xi^p / sqrt(p!).
CoherentState coherent_state(cx xi, const FockSpace& space);

enum class Subsystem { System, Cavity };

// Reduced density over the complementary factor.
CMat partial_trace(const CMat& rho, const JointSpace& js, Subsystem keep);

cx expect(const CMat& op, const CMat& rho);
cx expect(const SparseOp& op, const CMat& rho);

// Populations <n|rho_sys|n> for n = 0..N, normalized by Tr(rho).
std::vector<double> system_populations(const CMat& rho, const JointSpace& js);

// Occupancy of the top Fock level, summed over spin (cutoff health monitor).
double top_fock_occupancy(const CMat& rho, const JointSpace& js);

// Operator bundle shared by the steppers and the discrete oracle. The
// Hamiltonian is kept split as h_diag + gs * h_ladder so feedback can retune
// gs without rebuilding anything.
struct ProbeOperators {
    JointSpace js;
    SparseOp a, ad, nphot;  // cavity mode on the joint space
    SparseOp h_diag;        // g-scaled diagonal part (variant dependent)
    SparseOp h_ladder;      // (raise + lower) ⊗ 1, unscaled
};

ProbeOperators build_probe_operators(const JointSpace& js, HamiltonianVariant variant, double g);

// Joint ket builders
CVec product_ket(const JointSpace& js, const CVec& spin_ket, const CVec& fock_ket);
CVec spin_number_ket(const SymmetricSpinSpace& s, int n);
// ((|f> + |g>)/sqrt(2))^{⊗N} in the symmetric basis: binomial amplitudes.
CVec spin_plus_ket(const SymmetricSpinSpace& s);
CVec vacuum_ket(const FockSpace& f);

}  // namespace qcavity
