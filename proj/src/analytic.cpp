#include "analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "core/stats.hpp"

namespace qcavity {

cx empty_cavity_amplitude(double t, cx xi0, cx beta, double kappa1, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("empty_cavity_amplitude: kappa must be > 0");
    const cx ss = empty_cavity_steady(beta, kappa1, kappa);
    return (xi0 - ss) * std::exp(-0.5 * kappa * t) + ss;
}

double enhancement_factor(double kappa1, double kappa2, double kappaL, double tau) {
    const double kappa = kappa1 + kappa2 + kappaL;
    if (!(kappa > 0.0) || !(tau > 0.0))
        throw std::invalid_argument("enhancement_factor: kappa and tau must be > 0");
    return 2.0 * std::sqrt(kappa1) / (std::sqrt(tau) * kappa);
}

cx xi_n_steady(double n_eff, double g, cx beta, double kappa1, double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("xi_n_steady: kappa must be > 0");
    return 2.0 * std::sqrt(kappa1) * beta / (kappa + 2.0 * I_UNIT * g * n_eff);
}

cx xi_n(double t, double n_eff, cx xi0, double g, cx beta, double kappa1, double kappa) {
    const cx ss = xi_n_steady(n_eff, g, beta, kappa1, kappa);
    const cx rate = 0.5 * kappa + I_UNIT * g * n_eff;
    return (xi0 - ss) * std::exp(-rate * t) + ss;
}

double sensitivity_rate(double n, double g, cx beta, double kappa1, double kappa2, double kappaL,
                        double eta, RateApprox approx) {
    if (std::abs(beta.imag()) > 1e-12 * std::max(1.0, std::abs(beta)))
        throw std::invalid_argument("sensitivity_rate: requires real beta (phi = 0 convention)");
    const double kappa = kappa1 + kappa2 + kappaL;
    const double num = 8.0 * beta.real() * g * n * std::sqrt(kappa1 * kappa2 * eta);
    const double den = (approx == RateApprox::SmallG)
                           ? kappa * kappa
                           : kappa * kappa + 4.0 * g * g * n * n;
    return num / den;
}

double rate_from_amplitude(cx xi, double eta, double kappa2, double phi) {
    return -2.0 * std::sqrt(eta * kappa2) * (std::exp(-I_UNIT * phi) * xi).imag();
}

std::vector<double> weights(double t, double y, const std::vector<double>& c0,
                            const std::vector<double>& r) {
    std::vector<double> w(c0.size());
    for (size_t n = 0; n < c0.size(); ++n)
        w[n] = c0[n] * std::exp(-r[n] * y - 0.5 * r[n] * r[n] * t);
    return w;
}

std::vector<double> normalized(const std::vector<double>& w) {
    double s = 0.0;
    for (double v : w) s += v;
    std::vector<double> out(w.size(), 0.0);
    if (s > 0.0)
        for (size_t i = 0; i < w.size(); ++i) out[i] = w[i] / s;
    return out;
}

double outcome_density(double y, double t, const std::vector<double>& c0,
                       const std::vector<double>& r) {
    if (!(t > 0.0)) throw std::invalid_argument("outcome_density: t must be > 0");
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * t);
    double p = 0.0;
    for (size_t n = 0; n < c0.size(); ++n) {
        const double u = y + r[n] * t;
        p += c0[n] * norm * std::exp(-u * u / (2.0 * t));
    }
    return p;
}

double outcome_density_cdf(double y, double t, const std::vector<double>& c0,
                           const std::vector<double>& r) {
    const double s = std::sqrt(t);
    double p = 0.0;
    for (size_t n = 0; n < c0.size(); ++n) p += c0[n] * normal_cdf((y + r[n] * t) / s);
    return p;
}

double superposition_success(int atoms) {
    if (atoms < 1) throw std::invalid_argument("superposition_success: N must be >= 1");
    return std::ldexp(1.0, 1 - atoms);
}

std::vector<double> binomial_weights(int atoms) {
    std::vector<double> c(atoms + 1);
    for (int n = 0; n <= atoms; ++n) {
        const double lb = std::lgamma(atoms + 1.0) - std::lgamma(n + 1.0) -
                          std::lgamma(atoms - n + 1.0) - atoms * std::log(2.0);
        c[n] = std::exp(lb);
    }
    return c;
}

std::vector<double> weights_from_record(const std::vector<double>& times,
                                        const std::vector<double>& dy,
                                        const std::vector<double>& c0, int atoms, bool shifted,
                                        cx xi0, double g, cx beta, double kappa1, double kappa2,
                                        double eta, double phi) {
    const double kappa = 1.0;
    std::vector<double> w(c0.size());
    for (int n = 0; n <= atoms; ++n) {
        const double n_eff = shifted ? n - 0.5 * atoms : static_cast<double>(n);
        double iy = 0.0;   // int r_n dy, trapezoid in r_n
        double itt = 0.0;  // int r_n^2 dt
        double prev_t = times.empty() ? 0.0 : times[0] - (times.size() > 1 ? times[1] - times[0] : 0.0);
        double prev_r = rate_from_amplitude(xi_n(prev_t, n_eff, xi0, g, beta, kappa1, kappa), eta,
                                            kappa2, phi);
        for (size_t i = 0; i < times.size(); ++i) {
            const double r = rate_from_amplitude(
                xi_n(times[i], n_eff, xi0, g, beta, kappa1, kappa), eta, kappa2, phi);
            const double h = times[i] - prev_t;
            iy += 0.5 * (prev_r + r) * dy[i];
            itt += 0.5 * (prev_r * prev_r + r * r) * h;
            prev_t = times[i];
            prev_r = r;
        }
        w[n] = c0[n] * std::exp(-iy - 0.5 * itt);
    }
    return w;
}

double rabi_population0(int atoms, double gs, double t) {
    const double c = std::cos(gs * t);
    return std::pow(c * c, atoms);
}

}  // namespace qcavity
