#include "mdfcn/mdf.hpp"

#include <stdexcept>
#include <string>

namespace mdfcn {

std::size_t max_displacement(std::size_t series_length, std::size_t motif_length) {
    if (motif_length < 2) {
        throw std::invalid_argument("motif length must be >= 2");
    }
    if (series_length < motif_length) {
        throw std::invalid_argument("series length " + std::to_string(series_length) +
                                    " shorter than motif length " +
                                    std::to_string(motif_length));
    }
    return (series_length - 1) / (motif_length - 1);
}

std::vector<double> motif_difference(const TimeSeries& x, std::size_t n,
                                     std::size_t d, std::size_t s) {
    const std::size_t T = x.length();
    const std::size_t dmax = max_displacement(T, n);
    if (d < 1 || d > dmax) {
        throw std::out_of_range("displacement out of range");
    }
    if (s < 1 || s > T - (n - 1) * d) {
        throw std::out_of_range("motif start out of range");
    }
    std::vector<double> diff(n - 1);
    for (std::size_t i = 0; i < n - 1; ++i) {
        // x is 0-based in memory, (d, s) are the 1-based paper coordinates.
        diff[i] = x.values[s - 1 + (i + 1) * d] - x.values[s - 1 + i * d];
    }
    return diff;
}

MaskerK build_masker(std::size_t series_length, std::size_t motif_length) {
    const std::size_t T = series_length;
    const std::size_t n = motif_length;
    const std::size_t dmax = max_displacement(T, n);
    const std::size_t width = T - n + 1;
    MaskerK k;
    k.rows = dmax;
    k.cols = width;
    k.data.assign(dmax * width, 0);
    for (std::size_t d = 1; d <= dmax; ++d) {
        const std::size_t valid = T - (n - 1) * d;  // >= 1 by definition of d_max
        for (std::size_t s = valid + 1; s <= width; ++s) {
            k.data[(d - 1) * width + (s - 1)] = 1;
        }
    }
    return k;
}

MdfImage encode(const TimeSeries& x, std::size_t motif_length) {
    check_finite(x);
    const std::size_t T = x.length();
    const std::size_t n = motif_length;
    const std::size_t dmax = max_displacement(T, n);
    const std::size_t width = T - n + 1;

    // Unfilled channel arrays G: motif differences where valid, zero in the
    // padded region.
    std::vector<Grid> g(n - 1, Grid(dmax, width));
    for (std::size_t d = 1; d <= dmax; ++d) {
        const std::size_t valid = T - (n - 1) * d;
        for (std::size_t s = 1; s <= valid; ++s) {
            for (std::size_t i = 0; i < n - 1; ++i) {
                g[i](d - 1, s - 1) =
                    x.values[s - 1 + (i + 1) * d] - x.values[s - 1 + i * d];
            }
        }
    }

    MdfImage img;
    img.motif_length = n;
    img.series_length = T;
    img.label = x.label;
    img.channels = g;

    // IMG = G + K o G' where G' is G rotated 180 degrees and the fill reads
    // the unfilled arrays.
    const MaskerK k = build_masker(T, n);
    for (std::size_t i = 0; i < n - 1; ++i) {
        for (std::size_t d = 1; d <= dmax; ++d) {
            for (std::size_t s = 1; s <= width; ++s) {
                if (k.at(d, s)) {
                    auto [dr, sr] = rotation_partner(d, s, dmax, width);
                    img.channels[i](d - 1, s - 1) = g[i](dr - 1, sr - 1);
                }
            }
        }
    }
    return img;
}

std::vector<MdfImage> encode_all(const std::vector<TimeSeries>& xs,
                                 std::size_t motif_length) {
    std::vector<MdfImage> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(encode(x, motif_length));
    return out;
}

}  // namespace mdfcn
