// Weighted histogram with density normalization (integrates to 1 over the
// covered range).
#pragma once

#include <stdexcept>
#include <vector>

namespace qcavity {

struct Histogram {
    double lo = 0.0, hi = 1.0;
    std::vector<double> counts;   // weighted counts per bin
    double total_weight = 0.0;    // including out-of-range mass
    bool empty_flagged = false;   // no in-range mass: zero norm

    int bins() const { return static_cast<int>(counts.size()); }
    double width() const { return (hi - lo) / bins(); }
    double center(int b) const { return lo + (b + 0.5) * width(); }
    // density normalized over the in-range mass
    double density(int b) const;
};

Histogram histogram(const std::vector<double>& values, const std::vector<double>& weights,
                    int bins, double lo, double hi);

}  // namespace qcavity
