#pragma once

#include <cstddef>
#include <vector>

#include "bpslam/models.hpp"

namespace bpslam {

/// Systematic resampling: returns `count` source indices drawn with a single
/// uniform offset; weights need not be normalized.
inline std::vector<std::size_t> systematic_resample_indices(
    const std::vector<double>& weights, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(count);
    if (count == 0 || weights.empty()) return idx;
    double total = 0.0;
    for (double w : weights) total += w;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double step = total / (double)count;
    double pointer = u01(rng) * step;
    std::size_t i = 0;
    double cum = weights[0];
    for (std::size_t n = 0; n < count; ++n) {
        while (cum < pointer && i + 1 < weights.size()) cum += weights[++i];
        idx[n] = i;
        pointer += step;
    }
    return idx;
}

}  // namespace bpslam
