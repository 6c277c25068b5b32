#include "params.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qcavity {

void CavityParams::validate() const {
    if (kappa1 < 0.0 || kappa2 < 0.0 || kappaL < 0.0)
        throw std::invalid_argument("params: decay rates must be non-negative");
    if (std::abs(kappa() - 1.0) > 1e-9)
        throw std::invalid_argument(
            "params: kappa1 + kappa2 + kappaL must equal 1 (rates are in units of kappa)");
    if (eta < 0.0 || eta > 1.0)
        throw std::invalid_argument("params: eta must lie in [0, 1]");
    if (!(dt > 0.0)) throw std::invalid_argument("params: dt must be positive");
    if (atoms < 0) throw std::invalid_argument("params: atom count must be >= 0");
    if (fock_cutoff < 0) throw std::invalid_argument("params: Fock cutoff must be >= 0");
    if (gs != 0.0 && variant != HamiltonianVariant::Zeno)
        throw std::invalid_argument("params: gs != 0 requires hamiltonian = zeno");
}

CavityParams::ValidityFlags CavityParams::validity() const {
    ValidityFlags f{};
    f.kappa1_tau = kappa1 * dt;
    f.kappa2_tau = kappa2 * dt;
    f.drive_tau = std::sqrt(kappa1) * std::abs(beta) * dt;

    // crude ||H|| bound: max row sum of |entries|
    const JointSpace js = space();
    const CMat h = hamiltonian(js, variant, g, gs).m;
    double hn = 0.0;
    for (int i = 0; i < h.n; ++i) {
        double row = 0.0;
        for (int j = 0; j < h.n; ++j) row += std::abs(h(i, j));
        hn = std::max(hn, row);
    }
    f.hamiltonian_tau = hn * dt;
    return f;
}

bool CavityParams::ValidityFlags::ok(double threshold) const {
    return kappa1_tau < threshold && kappa2_tau < threshold && drive_tau < threshold &&
           hamiltonian_tau < threshold;
}

std::string CavityParams::validity_report() const {
    const auto f = validity();
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "kappa1*tau=%.3g kappa2*tau=%.3g sqrt(kappa1)*|beta|*tau=%.3g |H|*tau=%.3g%s",
                  f.kappa1_tau, f.kappa2_tau, f.drive_tau, f.hamiltonian_tau,
                  f.ok() ? "" : "  [WARNING: continuum conditions strained]");
    return buf;
}

int default_fock_cutoff(double kappa1, double kappa, double beta_abs) {
    const double target = 16.0 * kappa1 * beta_abs * beta_abs / (kappa * kappa);
    return std::max(3, static_cast<int>(std::ceil(target)));
}

}  // namespace qcavity
