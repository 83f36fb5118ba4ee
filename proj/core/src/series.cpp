#include "mdfcn/series.hpp"

#include <cmath>
#include <limits>

namespace mdfcn {

void check_finite(const TimeSeries& x) {
    for (double v : x.values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("time series contains NaN/Inf");
        }
    }
}

NormBounds compute_bounds(const std::vector<TimeSeries>& train) {
    if (train.empty()) {
        throw std::invalid_argument("empty training set");
    }
    NormBounds b{std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
    for (const auto& x : train) {
        for (double v : x.values) {
            b.min = std::min(b.min, v);
            b.max = std::max(b.max, v);
        }
    }
    return b;
}

TimeSeries minmax_normalize(const TimeSeries& x, const NormBounds& b) {
    if (!(b.max > b.min)) {
        throw std::invalid_argument("degenerate normalization range (max <= min)");
    }
    TimeSeries out;
    out.label = x.label;
    out.values.reserve(x.values.size());
    const double range = b.max - b.min;
    for (double v : x.values) {
        out.values.push_back((v - b.min) / range);
    }
    return out;
}

std::vector<TimeSeries> minmax_normalize(const std::vector<TimeSeries>& xs,
                                         const NormBounds& b) {
    std::vector<TimeSeries> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(minmax_normalize(x, b));
    return out;
}

}  // namespace mdfcn
