#include "core/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcavity {

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }

    const double q = p - 0.5;
    double r;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                  6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
              1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
              4.2313330701600911252e+1) * r + 1.0);
        return q * num / den;
    }

    r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
        val = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        val = num / den;
    }
    return (q < 0.0) ? -val : val;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a+1 (modified Lentz).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double x, double k) { return gamma_q(0.5 * k, 0.5 * x); }

GofResult gof_chi2_weighted(const std::vector<double>& x, const std::vector<double>& w,
                            const std::function<double(double)>& cdf, double lo, double hi,
                            int bins) {
    GofResult res;
    const size_t n = x.size();
    if (n == 0 || bins < 1) return res;
    const double width = (hi - lo) / bins;

    std::vector<double> sw(bins, 0.0), sw2(bins, 0.0);
    std::vector<long> cnt(bins, 0);
    for (size_t i = 0; i < n; ++i) {
        if (x[i] < lo || x[i] >= hi) continue;
        int b = static_cast<int>((x[i] - lo) / width);
        if (b >= bins) b = bins - 1;
        const double wi = w.empty() ? 1.0 : w[i];
        sw[b] += wi;
        sw2[b] += wi * wi;
        ++cnt[b];
    }

    double stat = 0.0;
    int used = 0;
    const double nd = static_cast<double>(n);
    for (int b = 0; b < bins; ++b) {
        const double p = cdf(lo + (b + 1) * width) - cdf(lo + b * width);
        // a bin enters the statistic only where both the target mass and the
        // sample coverage allow a CLT-quality variance estimate (the
        // weighted analog of the "expected counts >= 5" rule)
        if (p * nd < 5.0 || cnt[b] < 16) continue;
        const double mean = sw[b] / nd;                // estimates p
        const double var = sw2[b] / nd - mean * mean;  // Var(w·1_bin)
        const double se2 = var / nd;
        if (!(se2 > 0.0)) continue;
        stat += (mean - p) * (mean - p) / se2;
        ++used;
    }
    res.statistic = stat;
    res.dof = used;
    res.p_value = used > 0 ? chi2_sf(stat, used) : 1.0;
    return res;
}

GofResult gof_chi2_two_sample(const std::vector<double>& x, const std::vector<double>& w,
                              const std::vector<double>& ref, double lo, double hi, int bins) {
    GofResult res;
    const size_t n = x.size(), m = ref.size();
    if (n == 0 || m == 0 || bins < 1) return res;
    const double width = (hi - lo) / bins;

    std::vector<double> sw(bins, 0.0), sw2(bins, 0.0), cr(bins, 0.0);
    std::vector<long> cnt(bins, 0);
    for (size_t i = 0; i < n; ++i) {
        if (x[i] < lo || x[i] >= hi) continue;
        int b = std::min(bins - 1, static_cast<int>((x[i] - lo) / width));
        const double wi = w.empty() ? 1.0 : w[i];
        sw[b] += wi;
        sw2[b] += wi * wi;
        ++cnt[b];
    }
    for (size_t i = 0; i < m; ++i) {
        if (ref[i] < lo || ref[i] >= hi) continue;
        int b = std::min(bins - 1, static_cast<int>((ref[i] - lo) / width));
        cr[b] += 1.0;
    }

    double stat = 0.0;
    int used = 0;
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    for (int b = 0; b < bins; ++b) {
        const double p1 = sw[b] / nd;
        const double p2 = cr[b] / md;
        if (cr[b] < 5.0 || cnt[b] < 16) continue;
        const double v1 = (sw2[b] / nd - p1 * p1) / nd;
        const double v2 = p2 * (1.0 - p2) / md;
        const double se2 = v1 + v2;
        if (se2 <= 0.0) continue;
        stat += (p1 - p2) * (p1 - p2) / se2;
        ++used;
    }
    res.statistic = stat;
    res.dof = used;
    res.p_value = used > 0 ? chi2_sf(stat, used) : 1.0;
    return res;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    const size_t n = h.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double X = std::log(h[i]);
        const double Y = std::log(err[i]);
        sx += X;
        sy += Y;
        sxx += X * X;
        sxy += X * Y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qcavity
