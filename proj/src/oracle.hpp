// Exact finite-dt, finite-local-oscillator model of one homodyne measurement
// step: the balanced detector's conditional update coefficients u_pq computed
// by expanding the local oscillator in Fock space and applying exact 50:50
// beam-splitter amplitudes, plus the discrete conditional density-operator
// map they drive. The strong-oscillator Gaussian forms are kept alongside as
// the asymptotic reference.
#pragma once

#include <cstdint>

#include "core/noise.hpp"
#include "hilbert.hpp"
#include "params.hpp"

namespace qcavity {

class HomodyneKernel {
  public:
    // mu = |alpha|^2 / 2, phi = local-oscillator phase. n_lo <= 0 picks the
    // default truncation |alpha|^2 + 10 |alpha| + kmax, widened until the
    // coherent-state tail is below 1e-8.
    HomodyneKernel(double mu, double phi, int n_lo = 0);

    double mu() const { return mu_; }
    double phi() const { return phi_; }
    int n_lo() const { return n_lo_; }
    int kmax() const { return kmax_; }  // tables cover |k| <= kmax
    double completeness_deficit() const { return deficit_; }

    // Exact matrix element sum_m <m+k|<m| U3 |alpha>|p><q|<alpha| U3^dag |m>|m+k>.
    cx u_exact(int p, int q, int k) const;

    // Strong-oscillator limits (valid for p,q in {0,1,2} with p+q <= 2, plus u11).
    cx u_closed(int p, int q, int k) const;

    // Cached per-k tables for the six coefficients entering the step map.
    struct Row {
        double u00, u11;
        cx u10, u01, u20, u02;
    };
    const Row& row(int k) const { return rows_[static_cast<size_t>(k + kmax_)]; }

  private:
    double mu_, phi_, alpha_abs_;
    int n_lo_, kmax_;
    double deficit_;
    std::vector<Row> rows_;
};

struct DiscreteStepParams {
    double t1, t2;       // beam-splitter amplitude transmissions, t_i^2 = kappa_i dt
    double dt;
    cx c_in10;           // = beta sqrt(dt); first-order input coefficient
    cx c_in11, c_in20;   // coherent-input second-order coefficients (order dt;
                         // they drop out of the first-order map)
    double mirror_phase; // pi/2, already folded into the map's sign conventions

    static DiscreteStepParams from_continuum(const CavityParams& p);
};

struct DiscreteStepResult {
    CMat rho;
    double pk;  // outcome probability Tr of the unnormalized update
};

// One conditional step given readout k = n - m. gs enters through the
// Hamiltonian exactly as in the continuum equations.
DiscreteStepResult discrete_step(const CMat& rho, int k, const HomodyneKernel& kern,
                                 const DiscreteStepParams& sp, const ProbeOperators& ops,
                                 double gs);

// Outcome distribution over the kernel's k range (normalized within range).
std::vector<double> outcome_distribution(const CMat& rho, const HomodyneKernel& kern,
                                         const DiscreteStepParams& sp, const ProbeOperators& ops);

// Draw k from the exact discrete distribution.
int sample_k(const CMat& rho, const HomodyneKernel& kern, const DiscreteStepParams& sp,
             const ProbeOperators& ops, NoiseStream& noise);

}  // namespace qcavity
