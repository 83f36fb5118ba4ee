#ifndef MDFCN_ADAM_HPP
#define MDFCN_ADAM_HPP

#include <cstddef>
#include <vector>

namespace mdfcn {

/// Adam optimizer state for one flat parameter block.
struct AdamState {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment

    AdamState() = default;
    explicit AdamState(std::size_t n, double lr = 0.001, double b1 = 0.9,
                       double b2 = 0.999, double eps = 1e-8)
        : learning_rate(lr), beta1(b1), beta2(b2), epsilon(eps),
          m(n, 0.0), v(n, 0.0) {}
};

// Standard bias-corrected Adam update, in place. Throws on shape mismatch.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state);

}  // namespace mdfcn

#endif
