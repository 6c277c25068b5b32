// Closed-form solutions for the dispersively probed collective spin: cavity
// amplitudes per spin sector, homodyne sensitivity rates, conditional weights
// and the Gaussian-mixture outcome density. These double as ground-truth
// oracles for the stochastic integrators.
#pragma once

#include <vector>

#include "core/types.hpp"

namespace qcavity {

// d(xi)/dt = -kappa/2 xi + sqrt(kappa1) beta, explicit solution.
cx empty_cavity_amplitude(double t, cx xi0, cx beta, double kappa1, double kappa);

inline cx empty_cavity_steady(cx beta, double kappa1, double kappa) {
    return 2.0 * std::sqrt(kappa1) * beta / kappa;
}

// Intracavity amplitude gain over a single input segment of duration tau:
// 2 sqrt(kappa1) / (sqrt(tau) kappa). For kappa1 = kappa2, kappaL = 0 this is
// 1/t2 = sqrt of twice the mean photon round-trip number.
double enhancement_factor(double kappa1, double kappa2, double kappaL, double tau);

// Per-sector amplitude: d(xi_n)/dt = -(kappa/2 + i g n_eff) xi_n + sqrt(kappa1) beta.
// n_eff is the Hamiltonian eigenvalue factor (n for the plain probing
// Hamiltonian, n - N/2 for the shifted one).
cx xi_n(double t, double n_eff, cx xi0, double g, cx beta, double kappa1, double kappa);
cx xi_n_steady(double n_eff, double g, cx beta, double kappa1, double kappa);

enum class RateApprox { Exact, SmallG };

// Homodyne sensitivity rate at phi = 0 and real beta:
//   r_n = 8 beta g n sqrt(kappa1 kappa2 eta) / (kappa^2 + 4 g^2 n^2),
// SmallG drops the 4 g^2 n^2 term so r_n = r * n. Rejects complex beta.
double sensitivity_rate(double n, double g, cx beta, double kappa1, double kappa2, double kappaL,
                        double eta, RateApprox approx);

// General rate from an instantaneous amplitude: r = -2 sqrt(eta kappa2) Im(e^{-i phi} xi).
double rate_from_amplitude(cx xi, double eta, double kappa2, double phi);

// Weights after integrated signal y at time t (detector on at steady state):
// C_n(t) = C_n(0) exp(-r_n y - r_n^2 t / 2).
std::vector<double> weights(double t, double y, const std::vector<double>& c0,
                            const std::vector<double>& r);

std::vector<double> normalized(const std::vector<double>& w);

// P(y) = sum_n C_n(0) (2 pi t)^{-1/2} exp(-(y + r_n t)^2 / (2t))
double outcome_density(double y, double t, const std::vector<double>& c0,
                       const std::vector<double>& r);
double outcome_density_cdf(double y, double t, const std::vector<double>& c0,
                           const std::vector<double>& r);

// Success probability 1/2^{N-1} of the |0>,|N> superposition protocol.
double superposition_success(int atoms);

// C_n(0) for the product state ((|f>+|g>)/sqrt 2)^{⊗N}: binomial/2^N.
std::vector<double> binomial_weights(int atoms);

// General weights when the detector-on-at-steady-state condition is not met:
// trapezoidal quadrature of the exponent integrals over a recorded dy path.
// times[i] is the end of increment dy[i]; xi0 is the common amplitude at
// times[0] - dt.
std::vector<double> weights_from_record(const std::vector<double>& times,
                                        const std::vector<double>& dy,
                                        const std::vector<double>& c0, int atoms, bool shifted,
                                        cx xi0, double g, cx beta, double kappa1, double kappa2,
                                        double eta, double phi);

// Deterministic g = 0 reference: all atoms Rabi independently from |g>,
// <0|rho_sys|0> = cos^{2N}(gs t).
double rabi_population0(int atoms, double gs, double t);

}  // namespace qcavity
