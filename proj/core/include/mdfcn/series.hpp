#ifndef MDFCN_SERIES_HPP
#define MDFCN_SERIES_HPP

#include <stdexcept>
#include <vector>

namespace mdfcn {

/// A labeled univariate time series. Label 0 means "unlabeled".
struct TimeSeries {
    std::vector<double> values;
    int label = 0;

    std::size_t length() const { return values.size(); }
};

/// Min/max of the training split, applied to both splits.
struct NormBounds {
    double min = 0.0;
    double max = 1.0;
};

// Throws std::invalid_argument on NaN/Inf entries.
void check_finite(const TimeSeries& x);

// Bounds over every value of every series in `train`.
NormBounds compute_bounds(const std::vector<TimeSeries>& train);

// (v - min) / (max - min), no clipping. Throws on max <= min.
TimeSeries minmax_normalize(const TimeSeries& x, const NormBounds& b);
std::vector<TimeSeries> minmax_normalize(const std::vector<TimeSeries>& xs,
                                         const NormBounds& b);

}  // namespace mdfcn

#endif
