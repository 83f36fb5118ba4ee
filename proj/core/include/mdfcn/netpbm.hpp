#ifndef MDFCN_NETPBM_HPP
#define MDFCN_NETPBM_HPP

#include <string>

#include "mdfcn/mdf.hpp"

namespace mdfcn {

/// Intensity mapping recorded alongside every written heat image.
struct IntensityScale {
    double min = 0.0;
    double max = 0.0;
};

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). Grid min maps to
// 0 and grid max to 65535; a constant grid maps to 0. Returns the mapping.
IntensityScale write_pgm16(const std::string& path, const Grid& grid);

// Binary PPM (P6, maxval 255) with a blue-white-red colormap over the same
// min/max mapping.
IntensityScale write_ppm(const std::string& path, const Grid& grid);

}  // namespace mdfcn

#endif
