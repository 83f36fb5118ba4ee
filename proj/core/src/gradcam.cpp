#include "mdfcn/gradcam.hpp"

#include <algorithm>
#include <stdexcept>

namespace mdfcn {

std::vector<double> grad_cam_alphas(const FcnModel& model,
                                    const std::vector<double>& probabilities,
                                    std::size_t a3_plane, std::size_t target_class,
                                    CamScore score) {
    const std::size_t C = model.classes();
    if (target_class < 1 || target_class > C) {
        throw std::invalid_argument("grad_cam: target class out of range");
    }
    // d score / d logits.
    std::vector<double> dlogits(C, 0.0);
    if (score == CamScore::kLogit) {
        dlogits[target_class - 1] = 1.0;
    } else {
        const double pc = probabilities[target_class - 1];
        for (std::size_t o = 0; o < C; ++o) {
            dlogits[o] = pc * ((o == target_class - 1 ? 1.0 : 0.0) - probabilities[o]);
        }
    }
    // Through the dense head: d score / d h_k, then through GAP the gradient
    // w.r.t. A3 is constant per channel, so alpha_k equals it directly.
    std::vector<double> alphas(model.head.features, 0.0);
    for (std::size_t k = 0; k < model.head.features; ++k) {
        double acc = 0.0;
        for (std::size_t o = 0; o < C; ++o) {
            acc += dlogits[o] * model.head.w(o, k);
        }
        alphas[k] = acc / static_cast<double>(a3_plane);
    }
    return alphas;
}

Grid grad_cam(FcnModel& model, const MdfImage& image, std::size_t target_class,
              CamScore score) {
    const Tensor4 input = to_tensor(std::vector<const MdfImage*>{&image});
    ForwardCaches caches;
    auto logits = forward_logits(model, input, Mode::kInference, &caches);
    const std::vector<double> probs = softmax(logits[0]);

    const Tensor4& a3 = caches.a3;
    const auto alphas =
        grad_cam_alphas(model, probs, a3.plane(), target_class, score);

    Grid map(a3.height, a3.width);
    for (std::size_t k = 0; k < a3.channels; ++k) {
        for (std::size_t y = 0; y < a3.height; ++y) {
            for (std::size_t x = 0; x < a3.width; ++x) {
                map(y, x) += alphas[k] * a3.at(0, k, y, x);
            }
        }
    }
    for (double& v : map.data) v = std::max(v, 0.0);
    return map;
}

Grid upsample_bilinear(const Grid& coarse, std::size_t rows, std::size_t cols) {
    if (coarse.rows < 1 || coarse.cols < 1) {
        throw std::invalid_argument("upsample: empty source map");
    }
    Grid out(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double sy = (rows > 1 && coarse.rows > 1)
                              ? static_cast<double>(r) * (coarse.rows - 1) / (rows - 1)
                              : 0.0;
        const std::size_t y0 = std::min<std::size_t>(
            static_cast<std::size_t>(sy), coarse.rows - 1);
        const std::size_t y1 = std::min(y0 + 1, coarse.rows - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t c = 0; c < cols; ++c) {
            const double sx =
                (cols > 1 && coarse.cols > 1)
                    ? static_cast<double>(c) * (coarse.cols - 1) / (cols - 1)
                    : 0.0;
            const std::size_t x0 = std::min<std::size_t>(
                static_cast<std::size_t>(sx), coarse.cols - 1);
            const std::size_t x1 = std::min(x0 + 1, coarse.cols - 1);
            const double fx = sx - static_cast<double>(x0);
            out(r, c) = (1 - fy) * ((1 - fx) * coarse(y0, x0) + fx * coarse(y0, x1)) +
                        fy * ((1 - fx) * coarse(y1, x0) + fx * coarse(y1, x1));
        }
    }
    return out;
}

Grid symmetrize(const Grid& map) {
    Grid out(map.rows, map.cols);
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            auto [dr, sr] = rotation_partner(r + 1, c + 1, map.rows, map.cols);
            out(r, c) = (map(r, c) + map(dr - 1, sr - 1)) / 2.0;
        }
    }
    return out;
}

}  // namespace mdfcn
