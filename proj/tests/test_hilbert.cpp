#include <doctest.h>

#include "hilbert.hpp"

using namespace qcavity;

TEST_CASE("annihilation acts as sqrt(p) lowering with a hard cutoff") {
    FockSpace f(4);
    const CMat a = annihilation(f).dense();

    // a|0> = 0
    for (int r = 0; r < 5; ++r) CHECK(a(r, 0) == cx{0.0, 0.0});
    // a|1> = |0>
    CHECK(a(0, 1).real() == doctest::Approx(1.0));
    // <3|a|4> = sqrt(4) = 2
    CHECK(a(3, 4).real() == doctest::Approx(2.0));
}

TEST_CASE("truncated ladder commutator [a, ad] = 1 - (Np+1)|Np><Np|") {
    FockSpace f(6);
    const SparseOp a = annihilation(f);
    const CMat ad = a.dagger().dense();
    const CMat am = a.dense();
    const CMat comm = [&] {
        CMat c = matmul(am, ad);
        axpy(c, cx{-1.0, 0.0}, matmul(ad, am));
        return c;
    }();
    for (int r = 0; r < f.dim(); ++r)
        for (int c = 0; c < f.dim(); ++c) {
            double expect = (r == c) ? 1.0 : 0.0;
            if (r == f.cutoff && c == f.cutoff) expect = 1.0 - (f.cutoff + 1);
            CHECK(std::abs(comm(r, c) - cx{expect, 0.0}) < 1e-12);
        }
}

TEST_CASE("collective ladder matrix elements") {
    SymmetricSpinSpace s4(4);
    const CMat up = collective_ladder(s4, LadderDirection::Raise).dense();

    // raise|1> = sqrt(6)|2>
    CHECK(up(2, 1).real() == doctest::Approx(std::sqrt(6.0)).epsilon(1e-14));
    // raise annihilates the top state
    for (int r = 0; r < 5; ++r) CHECK(up(r, 4) == cx{0.0, 0.0});

    SymmetricSpinSpace s1(1);
    const CMat dn = collective_ladder(s1, LadderDirection::Lower).dense();
    CHECK(dn(0, 1).real() == doctest::Approx(1.0));

    // raise^dag = lower exactly
    const CMat upd = adjoint(collective_ladder(s4, LadderDirection::Raise).dense());
    const CMat low = collective_ladder(s4, LadderDirection::Lower).dense();
    CHECK(max_abs_diff(upd, low) == 0.0);
}

TEST_CASE("probing Hamiltonian variants") {
    SUBCASE("zero couplings give the zero operator") {
        JointSpace js{SymmetricSpinSpace(2), FockSpace(2)};
        const CMat h = hamiltonian(js, HamiltonianVariant::Zeno, 0.0, 0.0).m;
        for (const auto& v : h.a) CHECK(v == cx{0.0, 0.0});
    }
    SUBCASE("one photon and one excited atom pick up g") {
        JointSpace js{SymmetricSpinSpace(1), FockSpace(1)};
        const double g = 0.37;
        const CMat h = hamiltonian(js, HamiltonianVariant::Dicke, g, 0.0).m;
        const int i = js.index(1, 1);
        CHECK(h(i, i).real() == doctest::Approx(g));
    }
    SUBCASE("shifted variant is symmetric about N/2") {
        JointSpace js{SymmetricSpinSpace(2), FockSpace(2)};
        const double g = 0.4;
        const CMat h = hamiltonian(js, HamiltonianVariant::Shifted, g, 0.0).m;
        // at one photon, the n-factor eigenvalue is -1 on |0> and +1 on |2>
        CHECK(h(js.index(0, 1), js.index(0, 1)).real() == doctest::Approx(-g));
        CHECK(h(js.index(2, 1), js.index(2, 1)).real() == doctest::Approx(+g));
        CHECK(h(js.index(1, 1), js.index(1, 1)) == cx{0.0, 0.0});
    }
    SUBCASE("Hermitian for all variants and parameters") {
        for (int N : {0, 1, 3}) {
            for (int Np : {1, 4}) {
                JointSpace js{SymmetricSpinSpace(N), FockSpace(Np)};
                for (auto v : {HamiltonianVariant::Dicke, HamiltonianVariant::Shifted,
                               HamiltonianVariant::Zeno}) {
                    const double gs = (v == HamiltonianVariant::Zeno) ? 0.31 : 0.0;
                    const CMat h = hamiltonian(js, v, 0.73, gs).m;
                    CHECK(hermiticity_defect(h) < 1e-12);
                }
            }
        }
    }
    SUBCASE("negative dimensions are rejected") {
        CHECK_THROWS(FockSpace(-1));
        CHECK_THROWS(SymmetricSpinSpace(-2));
    }
}

TEST_CASE("coherent state truncation") {
    FockSpace f(3);
    SUBCASE("vacuum at zero amplitude") {
        const auto st = coherent_state(cx{0.0, 0.0}, f);
        CHECK(st.ket[0].real() == doctest::Approx(1.0));
        CHECK(!st.truncated);
    }
    SUBCASE("truncated <a> stays close to xi") {
        const auto st = coherent_state(cx{0.2828, 0.0}, f);
        const SparseOp a = annihilation(f);
        cx ea = 0.0;
        for (const auto& e : a.e) ea += std::conj(st.ket[e.r]) * e.v * st.ket[e.c];
        // independent high-precision evaluation of the truncated expansion
        CHECK(std::abs(ea - cx{0.28277774271361198, 0.0}) < 1e-12);
        CHECK(std::abs(ea.real() - 0.2828) < 1e-4);
    }
    SUBCASE("unit norm after renormalization") {
        const auto st = coherent_state(cx{0.9, -0.3}, f);
        CHECK(norm2(st.ket) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("truncation deficit beyond 1e-6 is flagged, not fatal") {
        const auto st = coherent_state(cx{1.5, 0.0}, f);
        CHECK(st.truncated);
        CHECK(st.norm_deficit > 1e-6);
    }
}

TEST_CASE("tensor / partial trace / expectation") {
    JointSpace js{SymmetricSpinSpace(2), FockSpace(2)};

    SUBCASE("product state round trip") {
        CMat rs(3), rc(3);
        rs(0, 0) = 0.25;
        rs(1, 1) = 0.5;
        rs(2, 2) = 0.25;
        rs(0, 2) = cx{0.1, 0.05};
        rs(2, 0) = std::conj(rs(0, 2));
        const auto coh = coherent_state(cx{0.3, 0.1}, js.fock);
        rc = outer(coh.ket);
        const CMat joint = tensor(rs, rc);
        CHECK(max_abs_diff(partial_trace(joint, js, Subsystem::System), rs) < 1e-12);
        CHECK(max_abs_diff(partial_trace(joint, js, Subsystem::Cavity), rc) < 1e-12);
        CHECK(std::abs(trace(partial_trace(joint, js, Subsystem::System)) - trace(joint)) <
              1e-12);
    }
    SUBCASE("photon number of a truncated coherent state") {
        FockSpace f(8);
        const auto st = coherent_state(cx{0.4, 0.0}, f);
        const CMat rho = outer(st.ket);
        CMat n(9);
        for (int p = 0; p <= 8; ++p) n(p, p) = p;
        // within truncation error of |xi|^2
        CHECK(std::abs(expect(n, rho).real() - 0.16) < 1e-9);
    }
    SUBCASE("identity tensor identity") {
        const CMat id = tensor(CMat::identity(3), CMat::identity(3));
        CHECK(max_abs_diff(id, CMat::identity(9)) == 0.0);
    }
    SUBCASE("dimension mismatch throws") {
        CMat big(7);
        CHECK_THROWS(partial_trace(big, js, Subsystem::System));
        CHECK_THROWS(expect(CMat(4), CMat(5)));
    }
}

TEST_CASE("density operator invariants enforced on construction") {
    CMat ok(2);
    ok(0, 0) = 0.5;
    ok(1, 1) = 0.5;
    CHECK_NOTHROW(JointOperator(ok, OperatorRole::Density));

    CMat bad_trace(2);
    bad_trace(0, 0) = 0.9;
    bad_trace(1, 1) = 0.2;
    CHECK_THROWS(JointOperator(bad_trace, OperatorRole::Density));

    CMat neg(2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    CHECK_THROWS(JointOperator(neg, OperatorRole::Density));
}
