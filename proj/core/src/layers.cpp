#include "mdfcn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdfcn {

ConvLayer::ConvLayer(std::size_t out_c, std::size_t in_c, std::size_t k,
                     std::size_t s)
    : out_channels(out_c), in_channels(in_c), kernel(k), stride(s),
      weights(out_c * in_c * k * k, 0.0), bias(out_c, 0.0) {
    if (k < 1 || s < 1) {
        throw std::invalid_argument("kernel and stride must be >= 1");
    }
}

std::size_t conv_out_dim(std::size_t in_dim, std::size_t stride) {
    return (in_dim + stride - 1) / stride;
}

namespace {

struct Padding {
    long top = 0, left = 0;
};

Padding same_padding(const Tensor4& input, const ConvLayer& layer,
                     std::size_t out_h, std::size_t out_w) {
    const long k = static_cast<long>(layer.kernel);
    const long s = static_cast<long>(layer.stride);
    const long pad_h = std::max<long>((static_cast<long>(out_h) - 1) * s + k -
                                          static_cast<long>(input.height), 0);
    const long pad_w = std::max<long>((static_cast<long>(out_w) - 1) * s + k -
                                          static_cast<long>(input.width), 0);
    return {pad_h / 2, pad_w / 2};
}

}  // namespace

Tensor4 conv2d_forward(const Tensor4& input, const ConvLayer& layer) {
    if (input.channels != layer.in_channels) {
        throw std::invalid_argument("conv2d_forward: input channel mismatch");
    }
    const std::size_t out_h = conv_out_dim(input.height, layer.stride);
    const std::size_t out_w = conv_out_dim(input.width, layer.stride);
    const Padding pad = same_padding(input, layer, out_h, out_w);
    const long ih = static_cast<long>(input.height);
    const long iw = static_cast<long>(input.width);

    Tensor4 out(input.batch, layer.out_channels, out_h, out_w);
    for (std::size_t b = 0; b < input.batch; ++b) {
        for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
            for (std::size_t oy = 0; oy < out_h; ++oy) {
                for (std::size_t ox = 0; ox < out_w; ++ox) {
                    double acc = layer.bias[oc];
                    const long base_y = static_cast<long>(oy * layer.stride) - pad.top;
                    const long base_x = static_cast<long>(ox * layer.stride) - pad.left;
                    for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
                        for (std::size_t ky = 0; ky < layer.kernel; ++ky) {
                            const long y = base_y + static_cast<long>(ky);
                            if (y < 0 || y >= ih) continue;
                            for (std::size_t kx = 0; kx < layer.kernel; ++kx) {
                                const long x = base_x + static_cast<long>(kx);
                                if (x < 0 || x >= iw) continue;
                                acc += layer.w(oc, ic, ky, kx) *
                                       input.at(b, ic, static_cast<std::size_t>(y),
                                                static_cast<std::size_t>(x));
                            }
                        }
                    }
                    out.at(b, oc, oy, ox) = acc;
                }
            }
        }
    }
    return out;
}

ConvGrads conv2d_backward(const Tensor4& input, const ConvLayer& layer,
                          const Tensor4& grad_out) {
    const std::size_t out_h = conv_out_dim(input.height, layer.stride);
    const std::size_t out_w = conv_out_dim(input.width, layer.stride);
    require_shape(grad_out, input.batch, layer.out_channels, out_h, out_w,
                  "conv2d_backward grad_out");
    const Padding pad = same_padding(input, layer, out_h, out_w);
    const long ih = static_cast<long>(input.height);
    const long iw = static_cast<long>(input.width);

    ConvGrads g;
    g.input = Tensor4(input.batch, input.channels, input.height, input.width);
    g.weights.assign(layer.weights.size(), 0.0);
    g.bias.assign(layer.bias.size(), 0.0);

    for (std::size_t b = 0; b < input.batch; ++b) {
        for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
            for (std::size_t oy = 0; oy < out_h; ++oy) {
                for (std::size_t ox = 0; ox < out_w; ++ox) {
                    const double go = grad_out.at(b, oc, oy, ox);
                    if (go == 0.0) continue;
                    g.bias[oc] += go;
                    const long base_y = static_cast<long>(oy * layer.stride) - pad.top;
                    const long base_x = static_cast<long>(ox * layer.stride) - pad.left;
                    for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
                        for (std::size_t ky = 0; ky < layer.kernel; ++ky) {
                            const long y = base_y + static_cast<long>(ky);
                            if (y < 0 || y >= ih) continue;
                            for (std::size_t kx = 0; kx < layer.kernel; ++kx) {
                                const long x = base_x + static_cast<long>(kx);
                                if (x < 0 || x >= iw) continue;
                                const std::size_t yy = static_cast<std::size_t>(y);
                                const std::size_t xx = static_cast<std::size_t>(x);
                                g.weights[((oc * layer.in_channels + ic) * layer.kernel +
                                           ky) * layer.kernel + kx] +=
                                    go * input.at(b, ic, yy, xx);
                                g.input.at(b, ic, yy, xx) +=
                                    go * layer.w(oc, ic, ky, kx);
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

Tensor4 batchnorm_forward(const Tensor4& input, BatchNormLayer& layer, Mode mode,
                          BatchNormCache* cache) {
    if (input.channels != layer.channels) {
        throw std::invalid_argument("batchnorm_forward: channel mismatch");
    }
    if (mode == Mode::kTraining && input.batch < 2) {
        throw std::invalid_argument("batchnorm training mode needs batch size >= 2");
    }
    const std::size_t plane = input.plane();
    const std::size_t count = input.batch * plane;
    Tensor4 out(input.batch, input.channels, input.height, input.width);
    Tensor4 xhat(input.batch, input.channels, input.height, input.width);
    std::vector<double> inv_std(layer.channels, 0.0);

    for (std::size_t c = 0; c < layer.channels; ++c) {
        double mean, var;
        if (mode == Mode::kTraining) {
            double sum = 0.0;
            for (std::size_t b = 0; b < input.batch; ++b) {
                const double* p = &input.data[(b * input.channels + c) * plane];
                for (std::size_t i = 0; i < plane; ++i) sum += p[i];
            }
            mean = sum / static_cast<double>(count);
            double sq = 0.0;
            for (std::size_t b = 0; b < input.batch; ++b) {
                const double* p = &input.data[(b * input.channels + c) * plane];
                for (std::size_t i = 0; i < plane; ++i) {
                    const double dv = p[i] - mean;
                    sq += dv * dv;
                }
            }
            var = sq / static_cast<double>(count);  // biased, as normalization uses it
            layer.running_mean[c] = layer.momentum * layer.running_mean[c] +
                                    (1.0 - layer.momentum) * mean;
            layer.running_var[c] = layer.momentum * layer.running_var[c] +
                                   (1.0 - layer.momentum) * var;
        } else {
            mean = layer.running_mean[c];
            var = layer.running_var[c];
        }
        const double istd = 1.0 / std::sqrt(var + layer.epsilon);
        inv_std[c] = istd;
        for (std::size_t b = 0; b < input.batch; ++b) {
            const double* p = &input.data[(b * input.channels + c) * plane];
            double* ph = &xhat.data[(b * input.channels + c) * plane];
            double* po = &out.data[(b * input.channels + c) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                ph[i] = (p[i] - mean) * istd;
                po[i] = layer.gamma[c] * ph[i] + layer.beta[c];
            }
        }
    }
    if (cache) {
        cache->normalized = std::move(xhat);
        cache->inv_std = std::move(inv_std);
        cache->count = count;
    }
    return out;
}

BatchNormGrads batchnorm_backward(const BatchNormCache& cache,
                                  const BatchNormLayer& layer,
                                  const Tensor4& grad_out) {
    const Tensor4& xhat = cache.normalized;
    if (!grad_out.same_shape(xhat)) {
        throw std::invalid_argument("batchnorm_backward: shape mismatch");
    }
    const std::size_t plane = xhat.plane();
    const double m = static_cast<double>(cache.count);

    BatchNormGrads g;
    g.input = Tensor4(xhat.batch, xhat.channels, xhat.height, xhat.width);
    g.gamma.assign(layer.channels, 0.0);
    g.beta.assign(layer.channels, 0.0);

    for (std::size_t c = 0; c < layer.channels; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t b = 0; b < xhat.batch; ++b) {
            const double* pdy = &grad_out.data[(b * xhat.channels + c) * plane];
            const double* ph = &xhat.data[(b * xhat.channels + c) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                sum_dy += pdy[i];
                sum_dy_xhat += pdy[i] * ph[i];
            }
        }
        g.beta[c] = sum_dy;
        g.gamma[c] = sum_dy_xhat;
        const double scale = layer.gamma[c] * cache.inv_std[c];
        for (std::size_t b = 0; b < xhat.batch; ++b) {
            const double* pdy = &grad_out.data[(b * xhat.channels + c) * plane];
            const double* ph = &xhat.data[(b * xhat.channels + c) * plane];
            double* pdx = &g.input.data[(b * xhat.channels + c) * plane];
            for (std::size_t i = 0; i < plane; ++i) {
                pdx[i] = scale * (pdy[i] - sum_dy / m - ph[i] * sum_dy_xhat / m);
            }
        }
    }
    return g;
}

Tensor4 relu_forward(const Tensor4& input) {
    Tensor4 out = input;
    for (double& v : out.data) v = std::max(v, 0.0);
    return out;
}

Tensor4 relu_backward(const Tensor4& input, const Tensor4& grad_out) {
    if (!input.same_shape(grad_out)) {
        throw std::invalid_argument("relu_backward: shape mismatch");
    }
    Tensor4 g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (input.data[i] <= 0.0) g.data[i] = 0.0;
    }
    return g;
}

std::vector<std::vector<double>> gap_forward(const Tensor4& input) {
    const std::size_t plane = input.plane();
    std::vector<std::vector<double>> out(input.batch,
                                         std::vector<double>(input.channels, 0.0));
    for (std::size_t b = 0; b < input.batch; ++b) {
        for (std::size_t c = 0; c < input.channels; ++c) {
            const double* p = &input.data[(b * input.channels + c) * plane];
            double sum = 0.0;
            for (std::size_t i = 0; i < plane; ++i) sum += p[i];
            out[b][c] = sum / static_cast<double>(plane);
        }
    }
    return out;
}

Tensor4 gap_backward(const Tensor4& input_like,
                     const std::vector<std::vector<double>>& grad_out) {
    const std::size_t plane = input_like.plane();
    Tensor4 g(input_like.batch, input_like.channels, input_like.height,
              input_like.width);
    for (std::size_t b = 0; b < input_like.batch; ++b) {
        for (std::size_t c = 0; c < input_like.channels; ++c) {
            const double v = grad_out[b][c] / static_cast<double>(plane);
            double* p = &g.data[(b * input_like.channels + c) * plane];
            for (std::size_t i = 0; i < plane; ++i) p[i] = v;
        }
    }
    return g;
}

std::vector<double> dense_forward(const DenseHead& head,
                                  const std::vector<double>& features) {
    if (features.size() != head.features) {
        throw std::invalid_argument("dense_forward: feature size mismatch");
    }
    std::vector<double> out(head.classes);
    for (std::size_t c = 0; c < head.classes; ++c) {
        double acc = head.bias[c];
        for (std::size_t f = 0; f < head.features; ++f) {
            acc += head.w(c, f) * features[f];
        }
        out[c] = acc;
    }
    return out;
}

DenseGrads dense_backward(const DenseHead& head, const std::vector<double>& features,
                          const std::vector<double>& grad_out) {
    if (grad_out.size() != head.classes || features.size() != head.features) {
        throw std::invalid_argument("dense_backward: shape mismatch");
    }
    DenseGrads g;
    g.input.assign(head.features, 0.0);
    g.weights.assign(head.weights.size(), 0.0);
    g.bias = grad_out;
    for (std::size_t c = 0; c < head.classes; ++c) {
        for (std::size_t f = 0; f < head.features; ++f) {
            g.weights[c * head.features + f] = grad_out[c] * features[f];
            g.input[f] += grad_out[c] * head.w(c, f);
        }
    }
    return g;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

SoftmaxCeResult softmax_cross_entropy(const std::vector<double>& logits,
                                      std::size_t target_class) {
    if (target_class < 1 || target_class > logits.size()) {
        throw std::invalid_argument("softmax_cross_entropy: target class out of range");
    }
    SoftmaxCeResult r;
    r.probabilities = softmax(logits);
    r.loss = -std::log(r.probabilities[target_class - 1]);
    r.logit_grad = r.probabilities;
    r.logit_grad[target_class - 1] -= 1.0;
    return r;
}

}  // namespace mdfcn
