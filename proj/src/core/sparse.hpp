// Sparse operators in coordinate form. Ladder and number operators on the
// joint space have O(dim) nonzeros, which keeps every product in the SME
// steppers at O(dim^2) instead of O(dim^3).
#pragma once


#include "core/types.hpp"

namespace qcavity {

struct SparseOp {
    struct Entry {
        int r, c;
        cx v;
    };
    int n = 0;
    std::vector<Entry> e;

    SparseOp() = default;
    explicit SparseOp(int dim) : n(dim) {}

    void add(int r, int c, cx v) {
        if (v != cx{0.0, 0.0}) e.push_back({r, c, v});
    }

    CMat dense() const {
        CMat m(n);
        for (const auto& t : e) m(t.r, t.c) += t.v;
        return m;
    }

    SparseOp dagger() const {
        SparseOp out(n);
        out.e.reserve(e.size());
        for (const auto& t : e) out.e.push_back({t.c, t.r, std::conj(t.v)});
        return out;
    }

    SparseOp scaled(cx s) const {
        SparseOp out(n);
        out.e.reserve(e.size());
        for (const auto& t : e) out.e.push_back({t.r, t.c, s * t.v});
        return out;
    }

    static SparseOp sum(const SparseOp& a, const SparseOp& b) {
        SparseOp out(a.n);
        out.e = a.e;
        out.e.insert(out.e.end(), b.e.begin(), b.e.end());
        return out;
    }
};

// out += s * A*rho
inline void acc_left(CMat& out, cx s, const SparseOp& A, const CMat& rho) {
    const int n = rho.n;
    for (const auto& t : A.e) {
        const cx f = s * t.v;
        const cx* src = &rho.a[static_cast<size_t>(t.c) * n];
        cx* dst = &out.a[static_cast<size_t>(t.r) * n];
        for (int j = 0; j < n; ++j) dst[j] += f * src[j];
    }
}

// out += s * rho*A
inline void acc_right(CMat& out, cx s, const SparseOp& A, const CMat& rho) {
    const int n = rho.n;
    for (const auto& t : A.e) {
        const cx f = s * t.v;
        for (int i = 0; i < n; ++i)
            out.a[static_cast<size_t>(i) * n + t.c] += f * rho.a[static_cast<size_t>(i) * n + t.r];
    }
}

// out += s * rho*A^dag
inline void acc_right_dag(CMat& out, cx s, const SparseOp& A, const CMat& rho) {
    const int n = rho.n;
    for (const auto& t : A.e) {
        const cx f = s * std::conj(t.v);
        for (int i = 0; i < n; ++i)
            out.a[static_cast<size_t>(i) * n + t.r] += f * rho.a[static_cast<size_t>(i) * n + t.c];
    }
}

// out = A*rho (overwrite)
inline void mul_left(CMat& out, const SparseOp& A, const CMat& rho) {
    out.set_zero();
    acc_left(out, cx{1.0, 0.0}, A, rho);
}

// Tr(A*rho)
inline cx trace_mul(const SparseOp& A, const CMat& rho) {
    cx t = 0.0;
    for (const auto& e : A.e) t += e.v * rho(e.c, e.r);
    return t;
}

// out += s * A*psi for vectors
inline void acc_vec(CVec& out, cx s, const SparseOp& A, const CVec& psi) {
    for (const auto& t : A.e) out[t.r] += s * t.v * psi[t.c];
}

// <psi|A|psi>
inline cx expect_vec(const SparseOp& A, const CVec& psi) {
    cx t = 0.0;
    for (const auto& e : A.e) t += std::conj(psi[e.r]) * e.v * psi[e.c];
    return t;
}

}  // namespace qcavity
