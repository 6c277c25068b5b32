#include "hilbert.hpp"

#include <cmath>

namespace qcavity {

JointOperator::JointOperator(CMat mat, OperatorRole r) : m(std::move(mat)), role(r) {
    if (role == OperatorRole::Hamiltonian) {
        if (hermiticity_defect(m) > 1e-12)
            throw std::invalid_argument("JointOperator: Hamiltonian is not Hermitian");
    } else if (role == OperatorRole::Density) {
        if (std::abs(trace(m) - 1.0) > 1e-9)
            throw std::invalid_argument("JointOperator: density trace is not 1");
        if (hermiticity_defect(m) > 1e-12)
            throw std::invalid_argument("JointOperator: density is not Hermitian");
        if (min_eigenvalue(m) < -1e-8)
            throw std::invalid_argument("JointOperator: density is not positive");
    }
}

SparseOp annihilation(const FockSpace& space) {
    SparseOp a(space.dim());
    for (int p = 1; p <= space.cutoff; ++p) a.add(p - 1, p, std::sqrt(static_cast<double>(p)));
    return a;
}

SparseOp collective_ladder(const SymmetricSpinSpace& space, LadderDirection dir) {
    const int N = space.atoms;
    SparseOp op(space.dim());
    if (dir == LadderDirection::Raise) {
        for (int n = 0; n < N; ++n)
            op.add(n + 1, n, std::sqrt(static_cast<double>((n + 1) * (N - n))));
    } else {
        for (int n = 1; n <= N; ++n)
            op.add(n - 1, n, std::sqrt(static_cast<double>(n * (N + 1 - n))));
    }
    return op;
}

SparseOp tensor(const JointSpace& js, const SparseOp& spin_op, const SparseOp& fock_op) {
    const int dp = js.fock.dim();
    SparseOp out(js.dim());
    out.e.reserve(spin_op.e.size() * fock_op.e.size());
    for (const auto& s : spin_op.e)
        for (const auto& f : fock_op.e)
            out.add(s.r * dp + f.r, s.c * dp + f.c, s.v * f.v);
    return out;
}

CMat tensor(const CMat& a, const CMat& b) {
    CMat out(a.n * b.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) {
            const cx aij = a(i, j);
            if (aij == cx{0.0, 0.0}) continue;
            for (int k = 0; k < b.n; ++k)
                for (int l = 0; l < b.n; ++l) out(i * b.n + k, j * b.n + l) = aij * b(k, l);
        }
    return out;
}

JointOperator hamiltonian(const JointSpace& js, HamiltonianVariant variant, double g, double gs) {
    const int N = js.spin.atoms;
    const int dp = js.fock.dim();
    CMat h(js.dim());

    // diagonal part: g * (n or n - N/2) * p
    for (int n = 0; n <= N; ++n) {
        const double nf = (variant == HamiltonianVariant::Shifted)
                              ? (static_cast<double>(n) - 0.5 * N)
                              : static_cast<double>(n);
        for (int p = 0; p < dp; ++p) {
            const int i = js.index(n, p);
            h(i, i) = g * nf * p;
        }
    }

    if (variant == HamiltonianVariant::Zeno && gs != 0.0) {
        const SparseOp ladder = SparseOp::sum(collective_ladder(js.spin, LadderDirection::Raise),
                                              collective_ladder(js.spin, LadderDirection::Lower));
        for (const auto& e : ladder.e)
            for (int p = 0; p < dp; ++p) h(e.r * dp + p, e.c * dp + p) += gs * e.v;
    }

    return JointOperator(std::move(h), OperatorRole::Hamiltonian);
}

CoherentState coherent_state(cx xi, const FockSpace& space) {
    CoherentState st;
    st.ket.assign(space.dim(), cx{0.0, 0.0});

    // unnormalized amplitudes xi^p / sqrt(p!), then renormalize over cutoff
    cx amp = 1.0;
    double kept = 0.0;
    for (int p = 0; p <= space.cutoff; ++p) {
        if (p > 0) amp *= xi / std::sqrt(static_cast<double>(p));
        st.ket[p] = amp;
        kept += std::norm(amp);
    }
    const double full = std::exp(std::norm(xi));  // sum over all p of |xi|^{2p}/p!
    st.norm_deficit = std::max(0.0, 1.0 - kept / full);
    st.truncated = st.norm_deficit > 1e-6;

    const double inv = 1.0 / std::sqrt(kept);
    for (auto& c : st.ket) c *= inv;
    return st;
}

CMat partial_trace(const CMat& rho, const JointSpace& js, Subsystem keep) {
    const int dn = js.spin.dim(), dp = js.fock.dim();
    if (rho.n != dn * dp) throw std::invalid_argument("partial_trace: dimension mismatch");
    if (keep == Subsystem::System) {
        CMat out(dn);
        for (int n = 0; n < dn; ++n)
            for (int m = 0; m < dn; ++m)
                for (int p = 0; p < dp; ++p) out(n, m) += rho(js.index(n, p), js.index(m, p));
        return out;
    }
    CMat out(dp);
    for (int p = 0; p < dp; ++p)
        for (int q = 0; q < dp; ++q)
            for (int n = 0; n < dn; ++n) out(p, q) += rho(js.index(n, p), js.index(n, q));
    return out;
}

cx expect(const CMat& op, const CMat& rho) {
    if (op.n != rho.n) throw std::invalid_argument("expect: dimension mismatch");
    cx t = 0.0;
    for (int i = 0; i < op.n; ++i)
        for (int j = 0; j < op.n; ++j) t += op(i, j) * rho(j, i);
    return t;
}

cx expect(const SparseOp& op, const CMat& rho) {
    if (op.n != rho.n) throw std::invalid_argument("expect: dimension mismatch");
    return trace_mul(op, rho);
}

std::vector<double> system_populations(const CMat& rho, const JointSpace& js) {
    const int dn = js.spin.dim(), dp = js.fock.dim();
    std::vector<double> pops(dn, 0.0);
    double tr = 0.0;
    for (int n = 0; n < dn; ++n) {
        double s = 0.0;
        for (int p = 0; p < dp; ++p) s += rho(js.index(n, p), js.index(n, p)).real();
        pops[n] = s;
        tr += s;
    }
    if (tr != 0.0)
        for (auto& v : pops) v /= tr;
    return pops;
}

double top_fock_occupancy(const CMat& rho, const JointSpace& js) {
    const int dn = js.spin.dim(), p = js.fock.cutoff;
    double s = 0.0, tr = 0.0;
    for (int n = 0; n < dn; ++n) {
        s += rho(js.index(n, p), js.index(n, p)).real();
        for (int q = 0; q <= p; ++q) tr += rho(js.index(n, q), js.index(n, q)).real();
    }
    return tr != 0.0 ? s / tr : 0.0;
}

ProbeOperators build_probe_operators(const JointSpace& js, HamiltonianVariant variant, double g) {
    ProbeOperators ops{js, SparseOp(js.dim()), SparseOp(js.dim()), SparseOp(js.dim()),
                       SparseOp(js.dim()), SparseOp(js.dim())};
    const SparseOp a_fock = annihilation(js.fock);
    const SparseOp id_spin = [&js] {
        SparseOp id(js.spin.dim());
        for (int i = 0; i < js.spin.dim(); ++i) id.add(i, i, 1.0);
        return id;
    }();

    ops.a = tensor(js, id_spin, a_fock);
    ops.ad = ops.a.dagger();

    const int N = js.spin.atoms, dp = js.fock.dim();
    for (int n = 0; n <= N; ++n) {
        const double nf = (variant == HamiltonianVariant::Shifted)
                              ? (static_cast<double>(n) - 0.5 * N)
                              : static_cast<double>(n);
        for (int p = 0; p < dp; ++p) {
            if (p > 0) ops.nphot.add(js.index(n, p), js.index(n, p), static_cast<double>(p));
            if (g * nf * p != 0.0) ops.h_diag.add(js.index(n, p), js.index(n, p), g * nf * p);
        }
    }

    const SparseOp ladder = SparseOp::sum(collective_ladder(js.spin, LadderDirection::Raise),
                                          collective_ladder(js.spin, LadderDirection::Lower));
    SparseOp id_fock(js.fock.dim());
    for (int i = 0; i < js.fock.dim(); ++i) id_fock.add(i, i, 1.0);
    ops.h_ladder = tensor(js, ladder, id_fock);
    return ops;
}

CVec product_ket(const JointSpace& js, const CVec& spin_ket, const CVec& fock_ket) {
    CVec out(js.dim(), cx{0.0, 0.0});
    for (int n = 0; n < js.spin.dim(); ++n)
        for (int p = 0; p < js.fock.dim(); ++p) out[js.index(n, p)] = spin_ket[n] * fock_ket[p];
    return out;
}

CVec spin_number_ket(const SymmetricSpinSpace& s, int n) {
    if (n < 0 || n > s.atoms) throw std::invalid_argument("spin_number_ket: n out of range");
    CVec k(s.dim(), cx{0.0, 0.0});
    k[n] = 1.0;
    return k;
}

CVec spin_plus_ket(const SymmetricSpinSpace& s) {
    const int N = s.atoms;
    CVec k(s.dim());
    for (int n = 0; n <= N; ++n) {
        const double lb = 0.5 * (std::lgamma(N + 1.0) - std::lgamma(n + 1.0) -
                                 std::lgamma(N - n + 1.0)) - 0.5 * N * std::log(2.0);
        k[n] = std::exp(lb);
    }
    return k;
}

CVec vacuum_ket(const FockSpace& f) {
    CVec k(f.dim(), cx{0.0, 0.0});
    k[0] = 1.0;
    return k;
}

}  // namespace qcavity
