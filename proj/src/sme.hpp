// Conditioned-evolution steppers and the trajectory driver.
//
// Four unravelings of the probed-cavity dynamics are integrated on the joint
// (spin ⊗ Fock) space, all driven by a single homodyne/counting channel:
//
//   nonlinear  normalized conditional master equation, Euler or Milstein
//   linear     unnormalized variant in the reference measure; the trace
//              carries the likelihood of the record
//   sse        pure-state unraveling (valid when every decay channel is
//              detected: eta = 1, kappaL = 0)
//   counting   avalanche-photodiode unraveling with jump map a rho a†/Tr
//
// The measured quadrature enters through c = -i e^{-i phi} sqrt(meas); the
// homodyne record obeys dy = 2 Re(c <a>) dt + dW.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "core/noise.hpp"
#include "core/sparse.hpp"
#include "hilbert.hpp"
#include "params.hpp"

namespace qcavity {

enum class Equation { Nonlinear, Linear, Sse, Counting };
enum class Scheme { Euler, Milstein };

// Single-channel rates the steppers actually use. Transmission detection has
// meas = eta*kappa2; the pure-state unraveling detects all output, so
// meas = decay = kappa (it reduces to the reflected-port equation for
// kappa2 = 0).
struct SmeRates {
    double drive;  // input-coupler rate (drive amplitude sqrt(drive)*beta)
    double meas;   // detected-channel rate
    double decay;  // total cavity decay
    double phi;    // local-oscillator phase, master-equation convention

    static SmeRates transmission(const CavityParams& p) {
        return {p.kappa1, p.eta * p.kappa2, p.kappa(), p.phi};
    }
    static SmeRates all_output(const CavityParams& p) {
        if (p.kappaL != 0.0 || p.eta != 1.0)
            throw std::invalid_argument("sse: requires lossless detection (kappaL = 0, eta = 1)");
        return {p.kappa1, p.kappa1 + p.kappa2, p.kappa(), p.phi};
    }
};

// One-trajectory stepper; owns operators and scratch space.
class Stepper {
  public:
    Stepper(const JointSpace& js, HamiltonianVariant variant, double g, SmeRates rates, double dt);

    void set_gs(double gs) { gs_ = gs; }
    double gs() const { return gs_; }
    void set_beta(cx beta) { beta_ = beta; }
    cx beta() const { return beta_; }
    // detector off (preparation phase): measurement terms vanish
    void set_detector(bool on) { meas_on_ = on; }

    const ProbeOperators& ops() const { return ops_; }
    double dt() const { return dt_; }
    const SmeRates& rates() const { return rates_; }

    // Normalized conditional step; returns the record increment dy.
    double nonlinear(CMat& rho, double dW, Scheme scheme);

    // Unnormalized linear step driven by the reference-measure increment dy;
    // returns the new weight Tr(rho). Defaults to Milstein so the pathwise
    // weight matches the analytic exponential to O(dt); either way the mean
    // weight is preserved exactly.
    double linear(CMat& rho, double dy, Scheme scheme = Scheme::Milstein);

    // Pure-state step; returns dy.
    double sse(PureState& psi, double dW);

    // Counting step; consumes one uniform; returns true on a click.
    bool counting(CMat& rho, NoiseStream& noise);

    // Deterministic (eta = 0) Euler step, used by oracles and prep phases.
    void deterministic(CMat& rho);
    // High-accuracy unconditional reference: one RK4 step of the Lindblad flow.
    void lindblad_rk4(CMat& rho);

  private:
    cx meas_c() const;  // -i e^{-i phi} sqrt(meas), zero when detector off
    void drift(const CMat& rho, CMat& out);  // L[rho], full Lindblad + drive + Hamiltonian

    ProbeOperators ops_;
    SparseOp a2_;  // a^2 on the joint space
    SmeRates rates_;
    double dt_;
    double gs_ = 0.0;
    cx beta_{0.0, 0.0};
    bool meas_on_ = true;

    CMat w1_, w2_, w3_, w4_;  // scratch
};

struct FeedbackLaw {
    int target_n = 1;
    double gs_high = 0.05;
    double gs_low = 0.0;
    double low_threshold = 0.2;
    double high_threshold = 0.8;
};

// Bang-bang hysteresis: drive hard when the target population is small, let
// the measurement hold it when large, keep the previous value in between.
double feedback_toggle(double p_target, double gs_current, const FeedbackLaw& law);

struct SimSpec {
    CavityParams params;
    Equation equation = Equation::Nonlinear;
    Scheme scheme = Scheme::Milstein;
    double t_end = 10.0;
    double prep_time = 0.0;  // detector-off lead-in; consumes no randomness
    uint64_t seed = 1;
    int record_stride = 1;  // 0 = keep only the final summary
    enum class Init { Ground, Number, Plus } init = Init::Ground;
    int init_n = 0;
    std::optional<FeedbackLaw> feedback;
    bool compute_purity = true;
    int check_stride = 250;
};

struct TrajectoryRecord {
    std::vector<double> t;
    std::vector<double> increment;  // dy of the recorded step, or clicks (0/1)
    std::vector<double> y;          // integrated record / cumulative clicks
    std::vector<std::vector<double>> populations;  // <n|rho_sys|n>
    std::vector<double> re_a, im_a;
    std::vector<double> purity;  // empty when not computed
    std::vector<double> weight;  // 1 except for the linear scheme
    std::vector<double> gs;      // only filled when feedback is active

    // final-state summary (always filled)
    double final_t = 0.0, final_y = 0.0, final_weight = 1.0;
    std::vector<double> final_populations;
    double final_re_a = 0.0, final_im_a = 0.0;
    double final_purity = 1.0;       // joint state
    double final_atom_purity = 1.0;  // reduced system state (density schemes and sse)
    long clicks = 0;

    // health counters
    int positivity_flags = 0;      // sampled min eigenvalue below -1e-6
    double min_eig_seen = 0.0;
    double max_herm_defect = 0.0;
    double max_top_fock = 0.0;  // cutoff occupancy monitor (threshold 1e-6)
    long steps = 0;
};

struct SimAbort : std::runtime_error {
    long step;
    double t;
    SimAbort(long step_, double t_, const std::string& what)
        : std::runtime_error(what), step(step_), t(t_) {}
};

// Integrate one trajectory. Deterministic function of (spec, spec.seed).
TrajectoryRecord simulate(const SimSpec& spec);

}  // namespace qcavity
