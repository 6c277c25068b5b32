// Small statistics toolbox: normal quantile/CDF, chi-square tail probability,
// and the goodness-of-fit tests used by the histogram checks.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qcavity {

// Inverse standard normal CDF, Wichura's algorithm AS 241 (PPND16).
// Deterministic rational approximation, |error| ~ 1e-16; this is the Gaussian
// transform of the reproducible noise contract, so it must not depend on
// platform libm behavior.
double inverse_normal_cdf(double p);

double normal_cdf(double z);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

// Survival function of chi-square with k dof.
double chi2_sf(double x, double k);

// One-sample chi-square test of (optionally weighted) samples against a
// target density given by its CDF. Bins are equi-spaced over [lo, hi];
// per-bin variances are estimated from the sample, so weights are handled
// correctly. Returns the p-value.
struct GofResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

GofResult gof_chi2_weighted(const std::vector<double>& x, const std::vector<double>& w,
                            const std::function<double(double)>& cdf, double lo, double hi,
                            int bins);

// Two-sample variant: weighted sample vs. plain reference sample.
GofResult gof_chi2_two_sample(const std::vector<double>& x, const std::vector<double>& w,
                              const std::vector<double>& ref, double lo, double hi, int bins);

// Least-squares slope of log(err) vs log(h); used by the integrator order checks.
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace qcavity
