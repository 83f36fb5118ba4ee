#ifndef MDFCN_MDF_HPP
#define MDFCN_MDF_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "mdfcn/series.hpp"

namespace mdfcn {

/// Dense row-major matrix of doubles. Indexing is 0-based here; the MDF
/// accessors below speak the 1-based (d, s) coordinates instead.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Binary masker: 1 marks the zero-padded region of a channel array.
struct MaskerK {
    std::size_t rows = 0;  // d_max
    std::size_t cols = 0;  // T - n + 1
    std::vector<std::uint8_t> data;

    /// 1-based (d, s).
    std::uint8_t at(std::size_t d, std::size_t s) const {
        return data[(d - 1) * cols + (s - 1)];
    }
};

/// The (n-1)-channel motif difference field of one series.
struct MdfImage {
    std::size_t motif_length = 0;      // n
    std::size_t series_length = 0;     // T
    int label = 0;
    std::vector<Grid> channels;        // n-1 grids, each d_max x (T-n+1)

    std::size_t d_max() const { return channels.empty() ? 0 : channels[0].rows; }
    std::size_t width() const { return channels.empty() ? 0 : channels[0].cols; }

    /// Channel i (1-based, 1..n-1) value at 1-based (d, s).
    double at(std::size_t i, std::size_t d, std::size_t s) const {
        return channels[i - 1](d - 1, s - 1);
    }
};

// floor((T-1)/(n-1)). Throws std::invalid_argument unless T >= n >= 2.
std::size_t max_displacement(std::size_t series_length, std::size_t motif_length);

// Consecutive differences of the motif starting at s (1-based) with
// displacement d: (x_{s+d}-x_s, ..., x_{s+(n-1)d}-x_{s+(n-2)d}).
// Throws std::out_of_range when (d, s) is not a valid motif position.
std::vector<double> motif_difference(const TimeSeries& x, std::size_t n,
                                     std::size_t d, std::size_t s);

MaskerK build_masker(std::size_t series_length, std::size_t motif_length);

// The 180-degree rotation partner of 1-based (d, s) on a d_max x width grid.
inline std::pair<std::size_t, std::size_t> rotation_partner(
    std::size_t d, std::size_t s, std::size_t d_max, std::size_t width) {
    return {d_max + 1 - d, width + 1 - s};
}

// Encode one series into its (n-1)-channel MDF image. Padded positions are
// filled from the 180-degree rotation of the unfilled channel array.
MdfImage encode(const TimeSeries& x, std::size_t motif_length);

std::vector<MdfImage> encode_all(const std::vector<TimeSeries>& xs,
                                 std::size_t motif_length);

}  // namespace mdfcn

#endif
