#ifndef MDFCN_TENSOR_HPP
#define MDFCN_TENSOR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdfcn {

/// (batch, channel, row, col) array of doubles, row-major within a channel.
struct Tensor4 {
    std::size_t batch = 0, channels = 0, height = 0, width = 0;
    std::vector<double> data;

    Tensor4() = default;
    Tensor4(std::size_t b, std::size_t c, std::size_t h, std::size_t w)
        : batch(b), channels(c), height(h), width(w), data(b * c * h * w, 0.0) {}

    std::size_t size() const { return data.size(); }
    std::size_t plane() const { return height * width; }

    double& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
        return data[((b * channels + c) * height + y) * width + x];
    }
    double at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return data[((b * channels + c) * height + y) * width + x];
    }

    bool same_shape(const Tensor4& o) const {
        return batch == o.batch && channels == o.channels && height == o.height &&
               width == o.width;
    }
};

inline void require_shape(const Tensor4& t, std::size_t b, std::size_t c,
                          std::size_t h, std::size_t w, const char* what) {
    if (t.batch != b || t.channels != c || t.height != h || t.width != w) {
        throw std::invalid_argument(std::string("shape mismatch in ") + what);
    }
}

}  // namespace mdfcn

#endif
