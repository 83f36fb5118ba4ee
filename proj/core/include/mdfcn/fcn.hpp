#ifndef MDFCN_FCN_HPP
#define MDFCN_FCN_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "mdfcn/adam.hpp"
#include "mdfcn/layers.hpp"
#include "mdfcn/mdf.hpp"
#include "mdfcn/series.hpp"
#include "mdfcn/tensor.hpp"

namespace mdfcn {

using StrideTriple = std::array<std::size_t, 3>;
using FilterTriple = std::array<std::size_t, 3>;

/// Three conv+BN blocks (kernels 8x8, 5x5, 3x3) and a dense softmax head.
struct FcnModel {
    ConvLayer conv1, conv2, conv3;
    BatchNormLayer bn1, bn2, bn3;
    DenseHead head;

    std::size_t in_channels() const { return conv1.in_channels; }
    std::size_t classes() const { return head.classes; }
    StrideTriple strides() const { return {conv1.stride, conv2.stride, conv3.stride}; }
};

// Fan-in-scaled Gaussian init for conv/dense weights; BN gamma=1, beta=0.
FcnModel make_model(std::size_t in_channels, std::size_t classes,
                    const FilterTriple& filters, const StrideTriple& strides,
                    unsigned seed);

struct TrainConfig {
    std::vector<StrideTriple> stride_candidates = {
        {8, 5, 3}, {4, 2, 2}, {2, 2, 2}, {3, 2, 1}};
    StrideTriple strides = {8, 5, 3};  // used when CV is not requested
    FilterTriple filters = {16, 32, 16};
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    std::size_t epochs = 200;
    std::size_t batch_size = 16;
    unsigned seed = 1;
    std::size_t motif_length = 3;
};

struct TrainedArtifact {
    FcnModel model;
    StrideTriple strides{};
    std::vector<double> loss_history;  // one entry per epoch
    NormBounds bounds;
    TrainConfig config;
};

// Throws std::invalid_argument when a feature map would lose all pixels.
void check_strides(std::size_t height, std::size_t width, const StrideTriple& s);

// Forward caches for one training batch, everything backward needs.
struct ForwardCaches {
    Tensor4 a0, z1, r1, a1, z2, r2, a2, z3, r3, a3;
    BatchNormCache bc1, bc2, bc3;
    std::vector<std::vector<double>> features;  // GAP output [batch][f3]
    std::vector<std::vector<double>> logits;    // [batch][C]
};

Tensor4 to_tensor(const std::vector<const MdfImage*>& batch);
Tensor4 to_tensor(const std::vector<MdfImage>& batch);

// Full forward pass; `caches` may be null in inference mode.
std::vector<std::vector<double>> forward_logits(FcnModel& model, const Tensor4& input,
                                                Mode mode,
                                                ForwardCaches* caches = nullptr);

// Softmax over forward_logits, per batch element.
std::vector<std::vector<double>> forward(FcnModel& model,
                                         const std::vector<MdfImage>& batch,
                                         Mode mode = Mode::kInference);

/// Gradients for every parameter block, same layout as param_blocks().
struct ModelGrads {
    std::vector<std::vector<double>> blocks;
};

// Parameter blocks in a fixed order (conv w/b, bn gamma/beta x3, head w/b).
std::vector<std::vector<double>*> param_blocks(FcnModel& model);

// Backward from per-sample logit gradients; also returns the input gradient
// (needed by Grad-CAM-style consumers).
ModelGrads backward(FcnModel& model, const ForwardCaches& caches,
                    const std::vector<std::vector<double>>& logit_grads,
                    Tensor4* input_grad = nullptr);

// One optimization step over all parameter blocks.
struct ModelAdam {
    std::vector<AdamState> states;
    explicit ModelAdam(FcnModel& model, double lr, double b1, double b2,
                       double eps = 1e-8);
    void step(FcnModel& model, const ModelGrads& grads);
};

// Train on encoded images with the configured strides; keeps the epoch-end
// snapshot with the lowest training loss.
TrainedArtifact train(const std::vector<MdfImage>& dataset, const TrainConfig& cfg);

// 4-fold stratified CV over cfg.stride_candidates; returns the triple with
// the lowest mean validation error, ties broken toward larger strides.
StrideTriple cross_validate_strides(const std::vector<MdfImage>& dataset,
                                    const TrainConfig& cfg,
                                    std::vector<double>* fold_errors = nullptr);

// Fraction of misclassified instances.
double evaluate(TrainedArtifact& artifact, const std::vector<MdfImage>& test);

// 1-based argmax class predictions.
std::vector<int> predict(FcnModel& model, const std::vector<MdfImage>& batch);

// Checkpoint: <dir>/model.json holds every parameter and BN statistic plus
// the training config; see README for the layout.
void save_artifact(const std::string& dir, const TrainedArtifact& artifact);
TrainedArtifact load_artifact(const std::string& dir);

}  // namespace mdfcn

#endif
