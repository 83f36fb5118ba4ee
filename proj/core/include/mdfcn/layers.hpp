#ifndef MDFCN_LAYERS_HPP
#define MDFCN_LAYERS_HPP

#include <cstddef>
#include <vector>

#include "mdfcn/tensor.hpp"

namespace mdfcn {

// ---------------------------------------------------------------------------
// Convolution (cross-correlation, "same" zero padding, square stride)
// ---------------------------------------------------------------------------

struct ConvLayer {
    std::size_t out_channels = 0, in_channels = 0;
    std::size_t kernel = 0;  // square kernel
    std::size_t stride = 1;
    std::vector<double> weights;  // [out][in][kh][kw]
    std::vector<double> bias;     // [out]

    ConvLayer() = default;
    ConvLayer(std::size_t out_c, std::size_t in_c, std::size_t k, std::size_t s);

    double& w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
        return weights[((o * in_channels + i) * kernel + ky) * kernel + kx];
    }
    double w(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
        return weights[((o * in_channels + i) * kernel + ky) * kernel + kx];
    }
};

struct ConvGrads {
    Tensor4 input;
    std::vector<double> weights;
    std::vector<double> bias;
};

// Output spatial dim under same padding: ceil(in / stride).
std::size_t conv_out_dim(std::size_t in_dim, std::size_t stride);

Tensor4 conv2d_forward(const Tensor4& input, const ConvLayer& layer);
ConvGrads conv2d_backward(const Tensor4& input, const ConvLayer& layer,
                          const Tensor4& grad_out);

// ---------------------------------------------------------------------------
// Batch normalization (per channel over batch + spatial)
// ---------------------------------------------------------------------------

enum class Mode { kTraining, kInference };

struct BatchNormLayer {
    std::size_t channels = 0;
    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
    double epsilon = 1e-5;
    double momentum = 0.9;  // fraction of the old running statistic retained

    BatchNormLayer() = default;
    explicit BatchNormLayer(std::size_t c)
        : channels(c), gamma(c, 1.0), beta(c, 0.0),
          running_mean(c, 0.0), running_var(c, 1.0) {}
};

struct BatchNormCache {
    Tensor4 normalized;            // x_hat
    std::vector<double> inv_std;   // per channel
    std::size_t count = 0;         // batch * spatial
};

// Training mode uses batch statistics and updates the running averages on
// `layer`; inference mode reads the stored statistics only. Training mode
// requires batch size >= 2.
Tensor4 batchnorm_forward(const Tensor4& input, BatchNormLayer& layer, Mode mode,
                          BatchNormCache* cache = nullptr);

struct BatchNormGrads {
    Tensor4 input;
    std::vector<double> gamma;
    std::vector<double> beta;
};

BatchNormGrads batchnorm_backward(const BatchNormCache& cache,
                                  const BatchNormLayer& layer,
                                  const Tensor4& grad_out);

// ---------------------------------------------------------------------------
// ReLU / global average pooling / dense head / softmax cross entropy
// ---------------------------------------------------------------------------

Tensor4 relu_forward(const Tensor4& input);
Tensor4 relu_backward(const Tensor4& input, const Tensor4& grad_out);

// Spatial mean per (batch, channel): rows = batch, cols = channels.
std::vector<std::vector<double>> gap_forward(const Tensor4& input);
Tensor4 gap_backward(const Tensor4& input_like,
                     const std::vector<std::vector<double>>& grad_out);

struct DenseHead {
    std::size_t classes = 0, features = 0;
    std::vector<double> weights;  // [classes][features]
    std::vector<double> bias;     // [classes]

    DenseHead() = default;
    DenseHead(std::size_t c, std::size_t f)
        : classes(c), features(f), weights(c * f, 0.0), bias(c, 0.0) {}

    double& w(std::size_t c, std::size_t f_) { return weights[c * features + f_]; }
    double w(std::size_t c, std::size_t f_) const { return weights[c * features + f_]; }
};

std::vector<double> dense_forward(const DenseHead& head,
                                  const std::vector<double>& features);

struct DenseGrads {
    std::vector<double> input;
    std::vector<double> weights;
    std::vector<double> bias;
};

DenseGrads dense_backward(const DenseHead& head, const std::vector<double>& features,
                          const std::vector<double>& grad_out);

std::vector<double> softmax(const std::vector<double>& logits);

struct SoftmaxCeResult {
    double loss = 0.0;
    std::vector<double> probabilities;
    std::vector<double> logit_grad;  // p - onehot(target)
};

// target_class is 1-based (1..C).
SoftmaxCeResult softmax_cross_entropy(const std::vector<double>& logits,
                                      std::size_t target_class);

}  // namespace mdfcn

#endif
