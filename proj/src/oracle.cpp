#include "oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace qcavity {

namespace {

constexpr double LN2 = 0.6931471805599453094;

// (-i)^e for any integer e
cx neg_i_pow(long e) {
    switch (((e % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, -1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, 1.0};
    }
}

double ln_binom(long n, long k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// <n1, n2| U3 |j, p> for the 50:50 splitter U3 = exp(-i pi/4 (a^dag b + a b^dag)),
// first slot = local-oscillator mode, second = signal mode; requires
// n1 + n2 = j + p. Written as sign * exp(logmag) * unit with the binomial
// brackets collapsed to stable rational forms.
struct Amp {
    double logmag;
    cx unit;  // phase times sign; zero amplitude flagged by logmag = -inf
};

Amp bs_amplitude(long j, long n1, long n2, int p) {
    Amp out{-std::numeric_limits<double>::infinity(), {0.0, 0.0}};
    if (j < 0 || n1 < 0 || n2 < 0) return out;

    const cx base_phase = neg_i_pow(j - n1);
    switch (p) {
        case 0: {
            // 2^{-j/2} sqrt(binom(j, n1)) (-i)^{n2}, with j - n1 = n2
            out.logmag = -0.5 * j * LN2 + 0.5 * ln_binom(j, n1);
            out.unit = base_phase;
            return out;
        }
        case 1: {
            // bracket = sqrt(binom(j,n1) n2) - sqrt(binom(j,n1-1) n1)
            double logmag, sign;
            if (n1 == 0) {
                logmag = 0.5 * std::log(static_cast<double>(n2));
                sign = 1.0;
            } else if (n2 == 0) {
                logmag = 0.5 * std::log(static_cast<double>(n1));  // binom(n1-1, n1-1) = 1
                sign = -1.0;
            } else {
                const long k = n1 - n2;
                if (k == 0) return out;  // exact cancellation
                logmag = 0.5 * (ln_binom(j, n1) - std::log(static_cast<double>(n2))) +
                         std::log(std::abs(static_cast<double>(k)));
                sign = (k > 0) ? -1.0 : 1.0;
            }
            out.logmag = -0.5 * (j + 1) * LN2 + logmag;
            out.unit = sign * base_phase;
            return out;
        }
        case 2: {
            // bracket = sqrt(binom(j,n1) n2(n2-1)) - 2 sqrt(binom(j,n1-1) n1 n2)
            //         + sqrt(binom(j,n1-2) n1(n1-1))
            double logmag, sign;
            if (n1 == 0) {
                if (n2 < 2) return out;
                logmag = 0.5 * std::log(static_cast<double>(n2) * (n2 - 1));
                sign = 1.0;
            } else if (n1 == 1) {
                // sqrt(n2) (n2 - 3)
                if (n2 == 3) return out;
                logmag = 0.5 * std::log(static_cast<double>(n2)) +
                         std::log(std::abs(static_cast<double>(n2 - 3)));
                sign = (n2 > 3) ? 1.0 : -1.0;
            } else {
                // T3 * (k^2 - 2 n2 - k) / (n1 (n1-1)), T3 = sqrt(binom(j,n1-2) n1(n1-1))
                const long k = n1 - n2;
                const long poly = k * k - 2 * n2 - k;
                if (poly == 0) return out;
                logmag = 0.5 * (ln_binom(j, n1 - 2) +
                                std::log(static_cast<double>(n1) * (n1 - 1))) +
                         std::log(std::abs(static_cast<double>(poly))) -
                         std::log(static_cast<double>(n1) * (n1 - 1));
                sign = (poly > 0) ? 1.0 : -1.0;
            }
            out.logmag = -0.5 * j * LN2 - 1.5 * LN2 + logmag;
            out.unit = sign * base_phase;
            return out;
        }
        default:
            throw std::invalid_argument("bs_amplitude: p must be in {0,1,2}");
    }
}

}  // namespace

HomodyneKernel::HomodyneKernel(double mu, double phi, int n_lo)
    : mu_(mu), phi_(phi), alpha_abs_(std::sqrt(2.0 * mu)) {
    if (!(mu > 0.0)) throw std::invalid_argument("HomodyneKernel: mu must be > 0");
    // 6 sigma of the Skellam readout keeps the out-of-range mass below 1e-8,
    // so the completeness checks on the table hold at their stated tolerance
    kmax_ = static_cast<int>(std::ceil(6.0 * std::sqrt(2.0 * mu))) + 4;

    const double nbar = 2.0 * mu;  // |alpha|^2
    int nlo = (n_lo > 0) ? n_lo
                         : static_cast<int>(std::ceil(nbar + 10.0 * std::sqrt(nbar))) + kmax_;
    for (int attempt = 0;; ++attempt) {
        // coherent-state weight beyond the truncation
        double kept = 0.0;
        for (int j = 0; j <= nlo; ++j)
            kept += std::exp(-nbar + j * std::log(nbar) - std::lgamma(j + 1.0));
        const double tail = std::max(0.0, 1.0 - kept);
        if (tail <= 1e-8) break;
        if (n_lo > 0 || attempt >= 8)
            throw std::runtime_error("HomodyneKernel: local-oscillator truncation deficit > 1e-8");
        nlo += static_cast<int>(std::ceil(2.0 * std::sqrt(nbar)));
    }
    n_lo_ = nlo;

    rows_.resize(static_cast<size_t>(2 * kmax_ + 1));
    double sum00 = 0.0;
    for (int k = -kmax_; k <= kmax_; ++k) {
        Row& r = rows_[static_cast<size_t>(k + kmax_)];
        r.u00 = u_exact(0, 0, k).real();
        r.u11 = u_exact(1, 1, k).real();
        r.u10 = u_exact(1, 0, k);
        r.u01 = std::conj(r.u10);
        r.u20 = u_exact(2, 0, k);
        r.u02 = std::conj(r.u20);
        sum00 += r.u00;
    }
    deficit_ = std::abs(1.0 - sum00);
}

cx HomodyneKernel::u_exact(int p, int q, int k) const {
    if (p < 0 || p > 2 || q < 0 || q > 2)
        throw std::invalid_argument("u_exact: p, q must be in {0,1,2}");

    const double ln_alpha = std::log(alpha_abs_);
    cx sum{0.0, 0.0};

    // m ranges where both Fock indices and both oscillator components exist
    long m_lo = std::max<long>(0, -k);
    for (long m = m_lo;; ++m) {
        const long n1 = m + k, n2 = m;
        const long jp = 2 * m + k - p, jq = 2 * m + k - q;
        if (jp > n_lo_ || jq > n_lo_) break;
        if (jp < 0 || jq < 0) continue;

        const Amp ap = bs_amplitude(jp, n1, n2, p);
        const Amp aq = bs_amplitude(jq, n1, n2, q);
        if (!std::isfinite(ap.logmag) || !std::isfinite(aq.logmag)) continue;

        // coherent-state amplitudes c_j = e^{-mu} alpha^j / sqrt(j!)
        const double lcp = -mu_ + jp * ln_alpha - 0.5 * std::lgamma(jp + 1.0);
        const double lcq = -mu_ + jq * ln_alpha - 0.5 * std::lgamma(jq + 1.0);
        const cx osc_phase = std::exp(I_UNIT * (phi_ * static_cast<double>(jp - jq)));

        const double mag = std::exp(lcp + lcq + ap.logmag + aq.logmag);
        sum += mag * osc_phase * ap.unit * std::conj(aq.unit);
    }
    if (p == q) sum = cx{sum.real(), 0.0};
    return sum;
}

cx HomodyneKernel::u_closed(int p, int q, int k) const {
    const double u00 =
        std::exp(-static_cast<double>(k) * k / (4.0 * mu_)) / (2.0 * std::sqrt(M_PI * mu_));
    const cx em = std::exp(-I_UNIT * phi_);
    const double kk = static_cast<double>(k);
    if (p == 0 && q == 0) return u00;
    if (p == 1 && q == 0) return -I_UNIT * kk * em / std::sqrt(2.0 * mu_) * u00;
    if (p == 0 && q == 1) return std::conj(-I_UNIT * kk * em / std::sqrt(2.0 * mu_)) * u00;
    if (p == 1 && q == 1) return kk * kk / (2.0 * mu_) * u00;
    if (p == 2 && q == 0) return -(kk * kk - 2.0 * mu_) * em * em / (2.0 * std::sqrt(2.0) * mu_) * u00;
    if (p == 0 && q == 2) return std::conj(-(kk * kk - 2.0 * mu_) * em * em / (2.0 * std::sqrt(2.0) * mu_)) * u00;
    throw std::invalid_argument("u_closed: no strong-oscillator form for this (p, q)");
}

DiscreteStepParams DiscreteStepParams::from_continuum(const CavityParams& p) {
    DiscreteStepParams sp{};
    sp.dt = p.dt;
    sp.t1 = std::sqrt(p.kappa1 * p.dt);
    sp.t2 = std::sqrt(p.kappa2 * p.dt);
    sp.c_in10 = p.beta * std::sqrt(p.dt);
    sp.c_in11 = std::norm(p.beta) * p.dt;
    sp.c_in20 = p.beta * p.beta * p.dt / std::sqrt(2.0);
    sp.mirror_phase = 0.5 * M_PI;
    return sp;
}

namespace {

// Unnormalized conditional map for readout k; returns Tr as well.
void apply_map(const CMat& rho, const HomodyneKernel::Row& u, const DiscreteStepParams& sp,
               const ProbeOperators& ops, double gs, CMat& out, CMat& scratch) {
    const int n = rho.n;
    out.set_zero();

    // u00 [ rho - i dt [H, rho] + t1 (c10 (ad rho - rho ad) - c10* (a rho - rho a)) ]
    axpy(out, u.u00, rho);
    const cx ihdt = cx{0.0, -1.0} * sp.dt * u.u00;
    acc_left(out, ihdt, ops.h_diag, rho);
    acc_right(out, -ihdt, ops.h_diag, rho);
    if (gs != 0.0) {
        acc_left(out, gs * ihdt, ops.h_ladder, rho);
        acc_right(out, -gs * ihdt, ops.h_ladder, rho);
    }
    const cx drv = u.u00 * sp.t1 * sp.c_in10;
    acc_left(out, drv, ops.ad, rho);
    acc_right(out, -drv, ops.ad, rho);
    acc_left(out, -std::conj(drv), ops.a, rho);
    acc_right(out, std::conj(drv), ops.a, rho);

    // measurement terms u10 t2 a rho + u01 t2 rho ad
    acc_left(out, u.u10 * sp.t2, ops.a, rho);
    acc_right_dag(out, u.u01 * sp.t2, ops.a, rho);

    // second order: (u00 t1^2 + u00 t2^2)/2 anticommutator, t1^2 u00 + t2^2 u11 jump,
    // and the two-photon t2^2 terms
    const double t1s = sp.t1 * sp.t1, t2s = sp.t2 * sp.t2;
    const cx acoef = -0.5 * u.u00 * (t1s + t2s);
    acc_left(out, acoef, ops.nphot, rho);
    acc_right(out, acoef, ops.nphot, rho);

    scratch.set_zero();
    acc_left(scratch, cx{1.0, 0.0}, ops.a, rho);  // scratch = a rho
    acc_right_dag(out, u.u00 * t1s + u.u11 * t2s, ops.a, scratch);  // += c * a rho ad
    acc_left(out, 0.5 * t2s * std::sqrt(2.0) * u.u20, ops.a, scratch);  // += c * a^2 rho

    scratch.set_zero();
    acc_right_dag(scratch, cx{1.0, 0.0}, ops.a, rho);  // scratch = rho ad
    acc_right_dag(out, 0.5 * t2s * std::sqrt(2.0) * u.u02, ops.a, scratch);  // += c * rho ad^2

    (void)n;
}

}  // namespace

DiscreteStepResult discrete_step(const CMat& rho, int k, const HomodyneKernel& kern,
                                 const DiscreteStepParams& sp, const ProbeOperators& ops,
                                 double gs) {
    if (std::abs(k) > kern.kmax())
        throw std::invalid_argument("discrete_step: k outside kernel range");
    CMat out(rho.n), scratch(rho.n);
    apply_map(rho, kern.row(k), sp, ops, gs, out, scratch);
    const double pk = trace(out).real();
    if (!(pk > 1e-300))
        throw std::runtime_error("discrete_step: non-positive outcome probability (u table inconsistent)");
    scale(out, 1.0 / pk);
    hermitize(out);
    return {std::move(out), pk};
}

std::vector<double> outcome_distribution(const CMat& rho, const HomodyneKernel& kern,
                                         const DiscreteStepParams& sp, const ProbeOperators& ops) {
    const int kmax = kern.kmax();
    const cx ea = trace_mul(ops.a, rho);
    const double en = trace_mul(ops.nphot, rho).real();
    CMat tmp(rho.n);
    mul_left(tmp, ops.a, rho);
    const cx ea2 = trace_mul(ops.a, tmp);  // <a^2>

    const double t2s = sp.t2 * sp.t2;
    std::vector<double> p(static_cast<size_t>(2 * kmax + 1));
    double sum = 0.0;
    for (int k = -kmax; k <= kmax; ++k) {
        const auto& u = kern.row(k);
        double pk = u.u00 + 2.0 * sp.t2 * (u.u10 * ea).real() +
                    t2s * ((u.u11 - u.u00) * en + std::sqrt(2.0) * (u.u20 * ea2).real());
        if (pk < -1e-10)
            throw std::runtime_error("outcome_distribution: negative probability beyond rounding");
        pk = std::max(pk, 0.0);
        p[static_cast<size_t>(k + kmax)] = pk;
        sum += pk;
    }
    for (auto& v : p) v /= sum;  // tail mass outside |k| <= kmax is renormalized away
    return p;
}

int sample_k(const CMat& rho, const HomodyneKernel& kern, const DiscreteStepParams& sp,
             const ProbeOperators& ops, NoiseStream& noise) {
    const auto p = outcome_distribution(rho, kern, sp, ops);
    const double u = noise.next_uniform();
    double acc = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u <= acc) return static_cast<int>(i) - kern.kmax();
    }
    return kern.kmax();
}

}  // namespace qcavity
