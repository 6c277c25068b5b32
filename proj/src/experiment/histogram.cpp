#include "experiment/histogram.hpp"

namespace qcavity {

double Histogram::density(int b) const {
    double in_range = 0.0;
    for (double c : counts) in_range += c;
    if (in_range <= 0.0) return 0.0;
    return counts[static_cast<size_t>(b)] / (in_range * width());
}

Histogram histogram(const std::vector<double>& values, const std::vector<double>& weights,
                    int bins, double lo, double hi) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be >= 1");
    if (!(hi > lo)) throw std::invalid_argument("histogram: need hi > lo");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<size_t>(bins), 0.0);
    double in_range = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        h.total_weight += w;
        if (values[i] < lo || values[i] >= hi) continue;
        int b = static_cast<int>((values[i] - lo) / h.width());
        if (b >= bins) b = bins - 1;
        h.counts[static_cast<size_t>(b)] += w;
        in_range += w;
    }
    h.empty_flagged = !(in_range > 0.0);
    return h;
}

}  // namespace qcavity
