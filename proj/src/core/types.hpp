// Dense complex matrices and vectors sized for truncated Fock x spin spaces.
// Dimensions here are tiny (tens), so everything is contiguous row-major
// storage with hand-written loops; no BLAS.
#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace qcavity {

using cx = std::complex<double>;

constexpr cx I_UNIT{0.0, 1.0};

// Row-major square complex matrix.
struct CMat {
    int n = 0;
    std::vector<cx> a;

    CMat() = default;
    explicit CMat(int dim) : n(dim), a(static_cast<size_t>(dim) * dim, cx{0.0, 0.0}) {}

    cx& operator()(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    const cx& operator()(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }

    void set_zero() { std::fill(a.begin(), a.end(), cx{0.0, 0.0}); }

    static CMat identity(int dim) {
        CMat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
};

using CVec = std::vector<cx>;

inline cx trace(const CMat& m) {
    cx t = 0.0;
    for (int i = 0; i < m.n; ++i) t += m(i, i);
    return t;
}

// y += s*x
inline void axpy(CMat& y, cx s, const CMat& x) {
    assert(y.n == x.n);
    const size_t len = y.a.size();
    for (size_t i = 0; i < len; ++i) y.a[i] += s * x.a[i];
}

inline void scale(CMat& m, cx s) {
    for (auto& v : m.a) v *= s;
}

inline CMat matmul(const CMat& a, const CMat& b) {
    assert(a.n == b.n);
    const int n = a.n;
    CMat out(n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const cx aik = a(i, k);
            if (aik == cx{0.0, 0.0}) continue;
            for (int j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

inline CMat adjoint(const CMat& m) {
    CMat out(m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) out(j, i) = std::conj(m(i, j));
    return out;
}

// m <- (m + m^dag)/2, kills accumulated round-off asymmetry
inline void hermitize(CMat& m) {
    for (int i = 0; i < m.n; ++i) {
        for (int j = i + 1; j < m.n; ++j) {
            const cx v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
        m(i, i) = cx{m(i, i).real(), 0.0};
    }
}

inline double hermiticity_defect(const CMat& m) {
    double d = 0.0;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
    return d;
}

inline double max_abs_diff(const CMat& a, const CMat& b) {
    assert(a.n == b.n);
    double d = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) d = std::max(d, std::abs(a.a[i] - b.a[i]));
    return d;
}

// Tr(rho^2) for Hermitian rho
inline double purity(const CMat& rho) {
    double p = 0.0;
    for (const auto& v : rho.a) p += std::norm(v);
    return p;
}

inline bool all_finite(const CMat& m) {
    for (const auto& v : m.a)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

inline bool all_finite(const CVec& v) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
}

inline double norm2(const CVec& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

inline cx inner(const CVec& a, const CVec& b) {
    cx s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// rho = |psi><psi|
inline CMat outer(const CVec& psi) {
    CMat m(static_cast<int>(psi.size()));
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) m(i, j) = psi[i] * std::conj(psi[j]);
    return m;
}

// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi sweeps.
// Dimensions stay below ~50, so this is plenty fast and has no dependencies.
std::vector<double> hermitian_eigenvalues(CMat m);

inline double min_eigenvalue(const CMat& m) {
    auto ev = hermitian_eigenvalues(m);
    double lo = ev.empty() ? 0.0 : ev[0];
    for (double v : ev) lo = std::min(lo, v);
    return lo;
}

}  // namespace qcavity
