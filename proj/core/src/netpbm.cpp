#include "mdfcn/netpbm.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace mdfcn {

namespace {

IntensityScale grid_scale(const Grid& grid) {
    if (grid.data.empty()) throw std::invalid_argument("cannot write empty image");
    const auto [mn, mx] = std::minmax_element(grid.data.begin(), grid.data.end());
    return {*mn, *mx};
}

double normalized(double v, const IntensityScale& s) {
    if (s.max <= s.min) return 0.0;
    return (v - s.min) / (s.max - s.min);
}

std::ofstream open_binary(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

}  // namespace

IntensityScale write_pgm16(const std::string& path, const Grid& grid) {
    const IntensityScale scale = grid_scale(grid);
    std::ofstream out = open_binary(path);
    out << "P5\n" << grid.cols << " " << grid.rows << "\n65535\n";
    for (double v : grid.data) {
        const auto sample =
            static_cast<std::uint16_t>(normalized(v, scale) * 65535.0 + 0.5);
        // Most significant byte first, per the Netpbm maxval > 255 rule.
        out.put(static_cast<char>(sample >> 8));
        out.put(static_cast<char>(sample & 0xff));
    }
    if (!out) throw std::runtime_error("short write to " + path);
    return scale;
}

IntensityScale write_ppm(const std::string& path, const Grid& grid) {
    const IntensityScale scale = grid_scale(grid);
    std::ofstream out = open_binary(path);
    out << "P6\n" << grid.cols << " " << grid.rows << "\n255\n";
    for (double v : grid.data) {
        const double t = normalized(v, scale);
        // Blue (t=0) through white (t=0.5) to red (t=1).
        double r, g, b;
        if (t < 0.5) {
            r = g = 2.0 * t;
            b = 1.0;
        } else {
            r = 1.0;
            g = b = 2.0 * (1.0 - t);
        }
        out.put(static_cast<char>(static_cast<int>(r * 255.0 + 0.5)));
        out.put(static_cast<char>(static_cast<int>(g * 255.0 + 0.5)));
        out.put(static_cast<char>(static_cast<int>(b * 255.0 + 0.5)));
    }
    if (!out) throw std::runtime_error("short write to " + path);
    return scale;
}

}  // namespace mdfcn
