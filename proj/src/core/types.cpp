#include "core/types.hpp"

namespace qcavity {

std::vector<double> hermitian_eigenvalues(CMat m) {
    const int n = m.n;
    std::vector<double> ev(n, 0.0);
    if (n == 0) return ev;
    if (n == 1) {
        ev[0] = m(0, 0).real();
        return ev;
    }

    double scale = 0.0;
    for (const auto& v : m.a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return ev;
    const double tol = 1e-14 * scale;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(m(p, q)));
        if (off < tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cx apq = m(p, q);
                if (std::abs(apq) < tol * 1e-2) continue;

                // 2x2 Hermitian block [[app, apq], [apq*, aqq]]: rotate it away.
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                const double absq = std::abs(apq);
                const cx phase = apq / absq;  // e^{i arg}
                const double theta = 0.5 * std::atan2(2.0 * absq, app - aqq);
                const double c = std::cos(theta);
                const double s = std::sin(theta);
                const cx sp = s * std::conj(phase);

                // Columns: col_p' = c*col_p + s*phase*col_q ; col_q' = -s*conj(phase)*col_p + c*col_q
                for (int i = 0; i < n; ++i) {
                    const cx mip = m(i, p), miq = m(i, q);
                    m(i, p) = c * mip + sp * miq;
                    m(i, q) = -std::conj(sp) * mip + c * miq;
                }
                for (int j = 0; j < n; ++j) {
                    const cx mpj = m(p, j), mqj = m(q, j);
                    m(p, j) = c * mpj + std::conj(sp) * mqj;
                    m(q, j) = -sp * mpj + c * mqj;
                }
            }
        }
    }

    for (int i = 0; i < n; ++i) ev[i] = m(i, i).real();
    return ev;
}

}  // namespace qcavity
