#include "sme.hpp"

#include <cmath>

namespace qcavity {

namespace {

SparseOp compose(const SparseOp& a, const SparseOp& b) {
    SparseOp out(a.n);
    for (const auto& x : a.e)
        for (const auto& y : b.e)
            if (x.c == y.r) out.add(x.r, y.c, x.v * y.v);
    return out;
}

}  // namespace

Stepper::Stepper(const JointSpace& js, HamiltonianVariant variant, double g, SmeRates rates,
                 double dt)
    : ops_(build_probe_operators(js, variant, g)),
      a2_(compose(ops_.a, ops_.a)),
      rates_(rates),
      dt_(dt),
      w1_(js.dim()),
      w2_(js.dim()),
      w3_(js.dim()),
      w4_(js.dim()) {}

cx Stepper::meas_c() const {
    if (!meas_on_ || rates_.meas == 0.0) return cx{0.0, 0.0};
    return -I_UNIT * std::exp(-I_UNIT * rates_.phi) * std::sqrt(rates_.meas);
}

void Stepper::drift(const CMat& rho, CMat& out) {
    out.set_zero();

    // -i [H, rho]
    acc_left(out, cx{0.0, -1.0}, ops_.h_diag, rho);
    acc_right(out, cx{0.0, 1.0}, ops_.h_diag, rho);
    if (gs_ != 0.0) {
        acc_left(out, cx{0.0, -gs_}, ops_.h_ladder, rho);
        acc_right(out, cx{0.0, gs_}, ops_.h_ladder, rho);
    }

    // sqrt(drive) (beta [ad, rho] - beta* [a, rho])
    if (beta_ != cx{0.0, 0.0} && rates_.drive != 0.0) {
        const cx d = std::sqrt(rates_.drive) * beta_;
        acc_left(out, d, ops_.ad, rho);
        acc_right(out, -d, ops_.ad, rho);
        acc_left(out, -std::conj(d), ops_.a, rho);
        acc_right(out, std::conj(d), ops_.a, rho);
    }

    // decay (a rho ad - 1/2 {ad a, rho})
    w4_.set_zero();
    acc_left(w4_, cx{1.0, 0.0}, ops_.a, rho);
    acc_right_dag(out, rates_.decay, ops_.a, w4_);
    acc_left(out, -0.5 * rates_.decay, ops_.nphot, rho);
    acc_right(out, -0.5 * rates_.decay, ops_.nphot, rho);
}

void Stepper::deterministic(CMat& rho) {
    drift(rho, w1_);
    axpy(rho, dt_, w1_);
    hermitize(rho);
    const double tr = trace(rho).real();
    scale(rho, 1.0 / tr);
}

void Stepper::lindblad_rk4(CMat& rho) {
    // classic RK4 on d(rho)/dt = L[rho]
    CMat k1(rho.n), k2(rho.n), k3(rho.n), k4(rho.n), tmp(rho.n);
    drift(rho, k1);
    tmp = rho;
    axpy(tmp, 0.5 * dt_, k1);
    drift(tmp, k2);
    tmp = rho;
    axpy(tmp, 0.5 * dt_, k2);
    drift(tmp, k3);
    tmp = rho;
    axpy(tmp, dt_, k3);
    drift(tmp, k4);
    axpy(rho, dt_ / 6.0, k1);
    axpy(rho, dt_ / 3.0, k2);
    axpy(rho, dt_ / 3.0, k3);
    axpy(rho, dt_ / 6.0, k4);
    hermitize(rho);
}

double Stepper::nonlinear(CMat& rho, double dW, Scheme scheme) {
    const cx c = meas_c();
    const cx ea = trace_mul(ops_.a, rho);
    const double m = 2.0 * (c * ea).real();
    const double dy = dW + m * dt_;

    if (scheme == Scheme::Euler) {
        // literal term-by-term form of the conditional equation
        drift(rho, w1_);
        w2_.set_zero();
        if (c != cx{0.0, 0.0}) {
            acc_left(w2_, c, ops_.a, rho);
            acc_right_dag(w2_, std::conj(c), ops_.a, rho);
            axpy(w2_, cx{-m, 0.0}, rho);
        }
        axpy(rho, dt_, w1_);
        axpy(rho, dW, w2_);
    } else {
        // One step of the linear equation driven by dy, in Kraus form
        //   rho' = M rho M† + (decay - meas) dt a rho a†,
        //   M = 1 + dt G + c dy a + (c^2/2)(dy^2 - dt) a^2,
        // then renormalized. Expanding M rho M† reproduces the drift, the
        // measurement terms and the single-noise Milstein correction; the
        // grouping keeps the update completely positive at any dt.
        const cx mil = 0.5 * c * c * (dy * dy - dt_);
        const cx cdY = c * dy;
        const cx dr = std::sqrt(rates_.drive) * beta_ * dt_;

        auto apply_m_left = [&](const CMat& src, CMat& dst) {
            dst = src;
            acc_left(dst, cx{0.0, -dt_}, ops_.h_diag, src);
            if (gs_ != 0.0) acc_left(dst, cx{0.0, -gs_ * dt_}, ops_.h_ladder, src);
            if (dr != cx{0.0, 0.0}) {
                acc_left(dst, dr, ops_.ad, src);
                acc_left(dst, -std::conj(dr), ops_.a, src);
            }
            acc_left(dst, -0.5 * rates_.decay * dt_, ops_.nphot, src);
            if (cdY != cx{0.0, 0.0}) acc_left(dst, cdY, ops_.a, src);
            if (mil != cx{0.0, 0.0}) acc_left(dst, mil, a2_, src);
        };
        // w1 = M rho ; w2 = w1 M† computed column-wise through the same entries
        apply_m_left(rho, w1_);
        w2_ = w1_;
        acc_right(w2_, cx{0.0, 1.0} * dt_, ops_.h_diag, w1_);  // (−i dt H)† = +i dt H
        if (gs_ != 0.0) acc_right(w2_, cx{0.0, gs_ * dt_}, ops_.h_ladder, w1_);
        if (dr != cx{0.0, 0.0}) {
            acc_right(w2_, std::conj(dr), ops_.a, w1_);  // (dr ad)† = dr* a
            acc_right(w2_, -dr, ops_.ad, w1_);
        }
        acc_right(w2_, -0.5 * rates_.decay * dt_, ops_.nphot, w1_);
        if (cdY != cx{0.0, 0.0}) acc_right_dag(w2_, std::conj(cdY), ops_.a, w1_);
        if (mil != cx{0.0, 0.0}) acc_right_dag(w2_, std::conj(mil), a2_, w1_);

        const double residual = rates_.decay - (meas_on_ ? rates_.meas : 0.0);
        if (residual != 0.0) {
            w3_.set_zero();
            acc_left(w3_, cx{1.0, 0.0}, ops_.a, rho);
            acc_right_dag(w2_, residual * dt_, ops_.a, w3_);
        }
        rho = w2_;
    }

    hermitize(rho);
    const double tr = trace(rho).real();
    if (!(tr > 0.0) || !all_finite(rho))
        throw std::runtime_error("nonlinear step produced an invalid state");
    scale(rho, 1.0 / tr);
    return dy;
}

double Stepper::linear(CMat& rho, double dy, Scheme scheme) {
    const cx c = meas_c();
    drift(rho, w1_);

    // B[rho] = c a rho + c* rho ad and its composition with itself
    w2_.set_zero();
    w3_.set_zero();
    if (c != cx{0.0, 0.0}) {
        acc_left(w2_, c, ops_.a, rho);
        acc_right_dag(w2_, std::conj(c), ops_.a, rho);
        if (scheme == Scheme::Milstein) {
            acc_left(w3_, c, ops_.a, w2_);
            acc_right_dag(w3_, std::conj(c), ops_.a, w2_);
        }
    }

    axpy(rho, dt_, w1_);
    axpy(rho, dy, w2_);
    if (scheme == Scheme::Milstein) axpy(rho, 0.5 * (dy * dy - dt_), w3_);
    hermitize(rho);
    const double w = trace(rho).real();
    if (!std::isfinite(w) || !all_finite(rho))
        throw std::runtime_error("linear step produced an invalid state");
    return w;
}

double Stepper::sse(PureState& psi, double dW) {
    const cx c = meas_c();
    const cx ea = expect_vec(ops_.a, psi);
    const double m = 2.0 * (c * ea).real();
    const double dy = dW + m * dt_;

    CVec dpsi(psi.size(), cx{0.0, 0.0});
    acc_vec(dpsi, cx{0.0, -dt_}, ops_.h_diag, psi);
    if (gs_ != 0.0) acc_vec(dpsi, cx{0.0, -gs_ * dt_}, ops_.h_ladder, psi);
    if (beta_ != cx{0.0, 0.0} && rates_.drive != 0.0) {
        const cx d = std::sqrt(rates_.drive) * beta_ * dt_;
        acc_vec(dpsi, d, ops_.ad, psi);
        acc_vec(dpsi, -std::conj(d), ops_.a, psi);
    }
    // -(decay/2)(ad a - 2 <ad> a + <a><ad>) dt
    const cx ead = std::conj(ea);
    acc_vec(dpsi, cx{-0.5 * rates_.decay * dt_, 0.0}, ops_.nphot, psi);
    acc_vec(dpsi, rates_.decay * dt_ * ead, ops_.a, psi);
    const cx sc = -0.5 * rates_.decay * dt_ * ea * ead;
    for (size_t i = 0; i < psi.size(); ++i) dpsi[i] += sc * psi[i];
    // measurement back-action c (a - <a>) dW
    if (c != cx{0.0, 0.0}) {
        acc_vec(dpsi, c * dW, ops_.a, psi);
        const cx mc = -c * dW * ea;
        for (size_t i = 0; i < psi.size(); ++i) dpsi[i] += mc * psi[i];
    }

    for (size_t i = 0; i < psi.size(); ++i) psi[i] += dpsi[i];
    const double nrm = norm2(psi);
    if (!(nrm > 0.0) || !all_finite(psi))
        throw std::runtime_error("sse step produced an invalid state");
    const double inv = 1.0 / nrm;
    for (auto& v : psi) v *= inv;
    return dy;
}

bool Stepper::counting(CMat& rho, NoiseStream& noise) {
    const double meas = meas_on_ ? rates_.meas : 0.0;
    const double en = trace_mul(ops_.nphot, rho).real();
    const double pclick = meas * en * dt_;
    const double u = noise.next_uniform();

    if (u < pclick) {
        // jump map a rho ad / Tr(a rho ad); pclick > 0 guarantees en > 0
        w1_.set_zero();
        acc_left(w1_, cx{1.0, 0.0}, ops_.a, rho);
        w2_.set_zero();
        acc_right_dag(w2_, cx{1.0 / en, 0.0}, ops_.a, w1_);
        rho = w2_;
        hermitize(rho);
        return true;
    }

    drift(rho, w1_);
    if (meas != 0.0) {
        // - meas (a rho ad - <ad a> rho)
        w2_.set_zero();
        acc_left(w2_, cx{1.0, 0.0}, ops_.a, rho);
        acc_right_dag(w1_, -meas, ops_.a, w2_);
        axpy(w1_, cx{meas * en, 0.0}, rho);
    }
    axpy(rho, dt_, w1_);
    hermitize(rho);
    const double tr = trace(rho).real();
    if (!(tr > 0.0) || !all_finite(rho))
        throw std::runtime_error("counting step produced an invalid state");
    scale(rho, 1.0 / tr);
    return false;
}

double feedback_toggle(double p_target, double gs_current, const FeedbackLaw& law) {
    if (p_target < law.low_threshold) return law.gs_high;
    if (p_target > law.high_threshold) return law.gs_low;
    return gs_current;
}

namespace {

CVec initial_spin_ket(const SimSpec& spec, const SymmetricSpinSpace& s) {
    switch (spec.init) {
        case SimSpec::Init::Plus: return spin_plus_ket(s);
        case SimSpec::Init::Number: return spin_number_ket(s, spec.init_n);
        default: return spin_number_ket(s, 0);
    }
}

struct RecordSink {
    TrajectoryRecord rec;
    const SimSpec& spec;
    const JointSpace& js;
    const SparseOp& a;

    RecordSink(const SimSpec& s, const JointSpace& j, const SparseOp& a_op)
        : spec(s), js(j), a(a_op) {}

    void push(double t, double inc, double y, const CMat& rho, double w, double gs_now) {
        rec.t.push_back(t);
        rec.increment.push_back(inc);
        rec.y.push_back(y);
        rec.populations.push_back(system_populations(rho, js));
        const double tr = trace(rho).real();
        const cx ea = trace_mul(a, rho) / tr;
        rec.re_a.push_back(ea.real());
        rec.im_a.push_back(ea.imag());
        if (spec.compute_purity) rec.purity.push_back(purity(rho) / (tr * tr));
        rec.weight.push_back(w);
        if (spec.feedback) rec.gs.push_back(gs_now);
    }

    void finalize(double t, double y, const CMat& rho, double w) {
        rec.final_t = t;
        rec.final_y = y;
        rec.final_weight = w;
        const double tr = trace(rho).real();
        rec.final_populations = system_populations(rho, js);
        CMat rn = rho;
        scale(rn, 1.0 / tr);
        const cx ea = trace_mul(a, rn);
        rec.final_re_a = ea.real();
        rec.final_im_a = ea.imag();
        rec.final_purity = purity(rn);
        rec.final_atom_purity = purity(partial_trace(rn, js, Subsystem::System));
    }
};

}  // namespace

TrajectoryRecord simulate_linear_blocks(const SimSpec& spec);  // below

TrajectoryRecord simulate(const SimSpec& spec) {
    const CavityParams& p = spec.params;
    p.validate();
    if (!(spec.t_end > 0.0)) throw std::invalid_argument("simulate: t_end must be > 0");
    if (spec.record_stride < 0) throw std::invalid_argument("simulate: record_stride must be >= 0");

    if (spec.equation == Equation::Sse && spec.prep_time > 0.0)
        throw std::invalid_argument(
            "simulate: detector-off preparation is incompatible with the pure-state unraveling");

    // Block-diagonal fast path: with gs = 0 and no feedback the linear
    // equation never couples different spin sectors, and all recorded
    // quantities except the joint purity live in the diagonal blocks.
    if (spec.equation == Equation::Linear && p.gs == 0.0 && !spec.feedback &&
        !spec.compute_purity)
        return simulate_linear_blocks(spec);

    const JointSpace js = p.space();
    const SmeRates rates = (spec.equation == Equation::Sse) ? SmeRates::all_output(p)
                                                            : SmeRates::transmission(p);
    Stepper st(js, p.variant, p.g, rates, p.dt);
    st.set_gs(p.gs);
    st.set_beta(p.beta);

    NoiseStream noise(spec.seed);

    CVec psi = product_ket(js, initial_spin_ket(spec, js.spin), vacuum_ket(js.fock));
    CMat rho = outer(psi);
    CMat sse_cache;  // dense view of |psi><psi| for records

    RecordSink sink(spec, js, st.ops().a);
    TrajectoryRecord& rec = sink.rec;

    // deterministic detector-off preparation
    const long prep_steps = std::lround(spec.prep_time / p.dt);
    st.set_detector(false);
    for (long i = 0; i < prep_steps; ++i) st.deterministic(rho);
    st.set_detector(true);

    const long steps = std::lround(spec.t_end / p.dt);
    rec.steps = steps;
    double y = 0.0, w = 1.0, gs_now = p.gs;
    double last_inc = 0.0;

    auto state_dense = [&]() -> const CMat& {
        if (spec.equation == Equation::Sse) {
            sse_cache = outer(psi);
            return sse_cache;
        }
        return rho;
    };

    if (spec.record_stride > 0) sink.push(0.0, 0.0, 0.0, state_dense(), w, gs_now);

    for (long i = 0; i < steps; ++i) {
        const double t = i * p.dt;
        st.set_beta(p.beta_at(t));

        if (spec.feedback) {
            const auto pops = system_populations(state_dense(), js);
            gs_now = feedback_toggle(pops[static_cast<size_t>(spec.feedback->target_n)], gs_now,
                                     *spec.feedback);
            st.set_gs(gs_now);
        }

        try {
            switch (spec.equation) {
                case Equation::Nonlinear:
                    last_inc = st.nonlinear(rho, noise.next_dw(p.dt), spec.scheme);
                    y += last_inc;
                    break;
                case Equation::Linear:
                    last_inc = noise.next_dw(p.dt);
                    w = st.linear(rho, last_inc);
                    y += last_inc;
                    break;
                case Equation::Sse:
                    last_inc = st.sse(psi, noise.next_dw(p.dt));
                    y += last_inc;
                    break;
                case Equation::Counting: {
                    const bool clicked = st.counting(rho, noise);
                    last_inc = clicked ? 1.0 : 0.0;
                    if (clicked) ++rec.clicks;
                    y += last_inc;
                    break;
                }
            }
        } catch (const std::exception& e) {
            throw SimAbort(i, t, e.what());
        }

        const long done = i + 1;
        if (spec.check_stride > 0 && done % spec.check_stride == 0) {
            const CMat& s = state_dense();
            const double tr = trace(s).real();
            rec.max_herm_defect = std::max(rec.max_herm_defect, hermiticity_defect(s));
            const double mineig = min_eigenvalue(s) / tr;
            rec.min_eig_seen = std::min(rec.min_eig_seen, mineig);
            if (mineig < -1e-6) ++rec.positivity_flags;  // reported, never clipped
            rec.max_top_fock = std::max(rec.max_top_fock, top_fock_occupancy(s, js));
        }
        if (spec.record_stride > 0 && done % spec.record_stride == 0)
            sink.push(done * p.dt, last_inc, y, state_dense(), w, gs_now);
    }

    sink.finalize(steps * p.dt, y, state_dense(), w);
    return rec;
}

// ---------------------------------------------------------------------------
// Linear-scheme block fast path. The diagonal spin sectors evolve as
// independent cavity-only equations with Hamiltonian g*n_eff*a†a; the weight
// is the sum of block traces. Exact algebraic reduction, cross-checked
// against the full-space path in the tests.

namespace {

struct CavityBlockStepper {
    SparseOp a, ad, nphot;
    double n_eff;
    double g, drive, meas, decay, phi, dt;
    cx beta;
    bool meas_on = true;
    CMat w1, w2, w3, w4;

    CavityBlockStepper(const FockSpace& f, double n_eff_, double g_, const SmeRates& r, double dt_)
        : a(annihilation(f)),
          ad(a.dagger()),
          nphot(f.dim()),
          n_eff(n_eff_),
          g(g_),
          drive(r.drive),
          meas(r.meas),
          decay(r.decay),
          phi(r.phi),
          dt(dt_),
          w1(f.dim()),
          w2(f.dim()),
          w3(f.dim()),
          w4(f.dim()) {
        for (int p = 1; p < f.dim(); ++p) nphot.add(p, p, static_cast<double>(p));
    }

    double step(CMat& rho, double dy) {
        const cx c = (meas_on && meas != 0.0)
                         ? -I_UNIT * std::exp(-I_UNIT * phi) * std::sqrt(meas)
                         : cx{0.0, 0.0};
        w1.set_zero();
        // -i g n_eff [ad a, rho]
        acc_left(w1, cx{0.0, -g * n_eff}, nphot, rho);
        acc_right(w1, cx{0.0, g * n_eff}, nphot, rho);
        if (beta != cx{0.0, 0.0} && drive != 0.0) {
            const cx d = std::sqrt(drive) * beta;
            acc_left(w1, d, ad, rho);
            acc_right(w1, -d, ad, rho);
            acc_left(w1, -std::conj(d), a, rho);
            acc_right(w1, std::conj(d), a, rho);
        }
        w4.set_zero();
        acc_left(w4, cx{1.0, 0.0}, a, rho);
        acc_right_dag(w1, decay, a, w4);
        acc_left(w1, -0.5 * decay, nphot, rho);
        acc_right(w1, -0.5 * decay, nphot, rho);

        w2.set_zero();
        w3.set_zero();
        if (c != cx{0.0, 0.0}) {
            acc_left(w2, c, a, rho);
            acc_right_dag(w2, std::conj(c), a, rho);
            acc_left(w3, c, a, w2);
            acc_right_dag(w3, std::conj(c), a, w2);
        }
        axpy(rho, dt, w1);
        axpy(rho, dy, w2);
        axpy(rho, 0.5 * (dy * dy - dt), w3);
        hermitize(rho);
        return trace(rho).real();
    }
};

}  // namespace

TrajectoryRecord simulate_linear_blocks(const SimSpec& spec) {
    const CavityParams& p = spec.params;
    const JointSpace js = p.space();
    const SmeRates rates = SmeRates::transmission(p);
    const int N = p.atoms;
    const FockSpace fock(p.fock_cutoff);

    const CVec spin = initial_spin_ket(spec, js.spin);

    std::vector<CavityBlockStepper> st;
    std::vector<CMat> blocks;
    st.reserve(N + 1);
    for (int n = 0; n <= N; ++n) {
        const double n_eff = (p.variant == HamiltonianVariant::Shifted)
                                 ? n - 0.5 * N
                                 : static_cast<double>(n);
        st.emplace_back(fock, n_eff, p.g, rates, p.dt);
        CMat b(fock.dim());
        b(0, 0) = std::norm(spin[static_cast<size_t>(n)]);
        blocks.push_back(std::move(b));
    }

    NoiseStream noise(spec.seed);
    TrajectoryRecord rec;

    auto record_row = [&](double t, double inc, double y) {
        double w = 0.0;
        std::vector<double> pops(N + 1, 0.0);
        cx ea = 0.0;
        for (int n = 0; n <= N; ++n) {
            const double tn = trace(blocks[static_cast<size_t>(n)]).real();
            pops[static_cast<size_t>(n)] = tn;
            w += tn;
            ea += trace_mul(st[static_cast<size_t>(n)].a, blocks[static_cast<size_t>(n)]);
        }
        for (auto& v : pops) v /= w;
        ea /= w;
        rec.t.push_back(t);
        rec.increment.push_back(inc);
        rec.y.push_back(y);
        rec.populations.push_back(pops);
        rec.re_a.push_back(ea.real());
        rec.im_a.push_back(ea.imag());
        rec.weight.push_back(w);
        return w;
    };

    // detector-off preparation: trace of every block is preserved exactly
    const long prep_steps = std::lround(spec.prep_time / p.dt);
    for (auto& s : st) {
        s.meas_on = false;
        s.beta = p.beta;
    }
    for (long i = 0; i < prep_steps; ++i)
        for (int n = 0; n <= N; ++n) st[static_cast<size_t>(n)].step(blocks[static_cast<size_t>(n)], 0.0);
    for (auto& s : st) s.meas_on = true;

    const long steps = std::lround(spec.t_end / p.dt);
    rec.steps = steps;
    double y = 0.0, w = 1.0, last_inc = 0.0;

    if (spec.record_stride > 0) record_row(0.0, 0.0, 0.0);

    for (long i = 0; i < steps; ++i) {
        const double t = i * p.dt;
        const cx b_t = p.beta_at(t);
        const double dy = noise.next_dw(p.dt);
        w = 0.0;
        for (int n = 0; n <= N; ++n) {
            st[static_cast<size_t>(n)].beta = b_t;
            const double tn = st[static_cast<size_t>(n)].step(blocks[static_cast<size_t>(n)], dy);
            if (!std::isfinite(tn)) throw SimAbort(i, t, "linear block step diverged");
            if (tn < -1e-9) throw SimAbort(i, t, "linear block trace went negative");
            w += tn;
        }
        last_inc = dy;
        y += dy;
        if (spec.record_stride > 0 && (i + 1) % spec.record_stride == 0)
            record_row((i + 1) * p.dt, last_inc, y);
    }

    // final summary
    {
        std::vector<double> pops(N + 1, 0.0);
        cx ea = 0.0;
        double wsum = 0.0;
        double top = 0.0;
        for (int n = 0; n <= N; ++n) {
            const auto& b = blocks[static_cast<size_t>(n)];
            const double tn = trace(b).real();
            pops[static_cast<size_t>(n)] = tn;
            wsum += tn;
            ea += trace_mul(st[static_cast<size_t>(n)].a, b);
            top += b(p.fock_cutoff, p.fock_cutoff).real();
        }
        for (auto& v : pops) v /= wsum;
        rec.final_t = steps * p.dt;
        rec.final_y = y;
        rec.final_weight = wsum;
        rec.final_populations = pops;
        rec.final_re_a = (ea / wsum).real();
        rec.final_im_a = (ea / wsum).imag();
        rec.max_top_fock = top / wsum;
    }
    return rec;
}

}  // namespace qcavity
