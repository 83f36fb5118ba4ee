#include "mdfcn/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace mdfcn {

namespace {

void init_gaussian(std::vector<double>& w, double stddev, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& v : w) v = dist(rng);
}

}  // namespace

FcnModel make_model(std::size_t in_channels, std::size_t classes,
                    const FilterTriple& filters, const StrideTriple& strides,
                    unsigned seed) {
    if (in_channels < 1 || classes < 2) {
        throw std::invalid_argument("make_model: need >= 1 input channel, >= 2 classes");
    }
    std::mt19937 rng(seed);
    FcnModel m;
    m.conv1 = ConvLayer(filters[0], in_channels, 8, strides[0]);
    m.conv2 = ConvLayer(filters[1], filters[0], 5, strides[1]);
    m.conv3 = ConvLayer(filters[2], filters[1], 3, strides[2]);
    m.bn1 = BatchNormLayer(filters[0]);
    m.bn2 = BatchNormLayer(filters[1]);
    m.bn3 = BatchNormLayer(filters[2]);
    m.head = DenseHead(classes, filters[2]);
    for (ConvLayer* c : {&m.conv1, &m.conv2, &m.conv3}) {
        const double fan_in =
            static_cast<double>(c->in_channels * c->kernel * c->kernel);
        init_gaussian(c->weights, std::sqrt(2.0 / fan_in), rng);
    }
    init_gaussian(m.head.weights,
                  std::sqrt(2.0 / static_cast<double>(m.head.features)), rng);
    return m;
}

void check_strides(std::size_t height, std::size_t width, const StrideTriple& s) {
    std::size_t h = height, w = width;
    for (std::size_t u : s) {
        if (u < 1) throw std::invalid_argument("stride must be >= 1");
        if (h < 1 || w < 1) {
            throw std::invalid_argument("stride collapse: feature map has no pixels");
        }
        h = conv_out_dim(h, u);
        w = conv_out_dim(w, u);
    }
    if (h < 1 || w < 1) {
        throw std::invalid_argument("stride collapse: feature map has no pixels");
    }
}

Tensor4 to_tensor(const std::vector<const MdfImage*>& batch) {
    if (batch.empty()) throw std::invalid_argument("to_tensor: empty batch");
    const MdfImage& first = *batch[0];
    Tensor4 t(batch.size(), first.channels.size(), first.d_max(), first.width());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const MdfImage& img = *batch[b];
        if (img.channels.size() != t.channels || img.d_max() != t.height ||
            img.width() != t.width) {
            throw std::invalid_argument("to_tensor: inconsistent image shapes");
        }
        for (std::size_t c = 0; c < t.channels; ++c) {
            std::copy(img.channels[c].data.begin(), img.channels[c].data.end(),
                      t.data.begin() + ((b * t.channels + c) * t.plane()));
        }
    }
    return t;
}

Tensor4 to_tensor(const std::vector<MdfImage>& batch) {
    std::vector<const MdfImage*> ptrs;
    ptrs.reserve(batch.size());
    for (const auto& img : batch) ptrs.push_back(&img);
    return to_tensor(ptrs);
}

std::vector<std::vector<double>> forward_logits(FcnModel& model, const Tensor4& input,
                                                Mode mode, ForwardCaches* caches) {
    check_strides(input.height, input.width, model.strides());
    ForwardCaches local;
    ForwardCaches& c = caches ? *caches : local;
    c.a0 = input;
    c.z1 = conv2d_forward(c.a0, model.conv1);
    c.r1 = batchnorm_forward(c.z1, model.bn1, mode, caches ? &c.bc1 : nullptr);
    c.a1 = relu_forward(c.r1);
    c.z2 = conv2d_forward(c.a1, model.conv2);
    c.r2 = batchnorm_forward(c.z2, model.bn2, mode, caches ? &c.bc2 : nullptr);
    c.a2 = relu_forward(c.r2);
    c.z3 = conv2d_forward(c.a2, model.conv3);
    c.r3 = batchnorm_forward(c.z3, model.bn3, mode, caches ? &c.bc3 : nullptr);
    c.a3 = relu_forward(c.r3);
    c.features = gap_forward(c.a3);
    c.logits.clear();
    c.logits.reserve(input.batch);
    for (std::size_t b = 0; b < input.batch; ++b) {
        c.logits.push_back(dense_forward(model.head, c.features[b]));
    }
    return c.logits;
}

std::vector<std::vector<double>> forward(FcnModel& model,
                                         const std::vector<MdfImage>& batch,
                                         Mode mode) {
    const Tensor4 input = to_tensor(batch);
    auto logits = forward_logits(model, input, mode);
    for (auto& row : logits) row = softmax(row);
    return logits;
}

std::vector<std::vector<double>*> param_blocks(FcnModel& model) {
    return {&model.conv1.weights, &model.conv1.bias,
            &model.bn1.gamma,     &model.bn1.beta,
            &model.conv2.weights, &model.conv2.bias,
            &model.bn2.gamma,     &model.bn2.beta,
            &model.conv3.weights, &model.conv3.bias,
            &model.bn3.gamma,     &model.bn3.beta,
            &model.head.weights,  &model.head.bias};
}

ModelGrads backward(FcnModel& model, const ForwardCaches& c,
                    const std::vector<std::vector<double>>& logit_grads,
                    Tensor4* input_grad) {
    const std::size_t batch = c.a0.batch;
    if (logit_grads.size() != batch) {
        throw std::invalid_argument("backward: logit grad batch mismatch");
    }

    // Dense head, accumulated over the batch.
    std::vector<double> d_head_w(model.head.weights.size(), 0.0);
    std::vector<double> d_head_b(model.head.bias.size(), 0.0);
    std::vector<std::vector<double>> d_features(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        DenseGrads dg = dense_backward(model.head, c.features[b], logit_grads[b]);
        for (std::size_t i = 0; i < d_head_w.size(); ++i) d_head_w[i] += dg.weights[i];
        for (std::size_t i = 0; i < d_head_b.size(); ++i) d_head_b[i] += dg.bias[i];
        d_features[b] = std::move(dg.input);
    }

    Tensor4 da3 = gap_backward(c.a3, d_features);
    Tensor4 dr3 = relu_backward(c.r3, da3);
    BatchNormGrads bg3 = batchnorm_backward(c.bc3, model.bn3, dr3);
    ConvGrads cg3 = conv2d_backward(c.a2, model.conv3, bg3.input);

    Tensor4 dr2 = relu_backward(c.r2, cg3.input);
    BatchNormGrads bg2 = batchnorm_backward(c.bc2, model.bn2, dr2);
    ConvGrads cg2 = conv2d_backward(c.a1, model.conv2, bg2.input);

    Tensor4 dr1 = relu_backward(c.r1, cg2.input);
    BatchNormGrads bg1 = batchnorm_backward(c.bc1, model.bn1, dr1);
    ConvGrads cg1 = conv2d_backward(c.a0, model.conv1, bg1.input);

    if (input_grad) *input_grad = std::move(cg1.input);

    ModelGrads g;
    g.blocks = {std::move(cg1.weights), std::move(cg1.bias),
                std::move(bg1.gamma),   std::move(bg1.beta),
                std::move(cg2.weights), std::move(cg2.bias),
                std::move(bg2.gamma),   std::move(bg2.beta),
                std::move(cg3.weights), std::move(cg3.bias),
                std::move(bg3.gamma),   std::move(bg3.beta),
                std::move(d_head_w),    std::move(d_head_b)};
    return g;
}

ModelAdam::ModelAdam(FcnModel& model, double lr, double b1, double b2, double eps) {
    for (auto* block : param_blocks(model)) {
        states.emplace_back(block->size(), lr, b1, b2, eps);
    }
}

void ModelAdam::step(FcnModel& model, const ModelGrads& grads) {
    auto blocks = param_blocks(model);
    if (grads.blocks.size() != blocks.size()) {
        throw std::invalid_argument("ModelAdam::step: block count mismatch");
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        adam_step(*blocks[i], grads.blocks[i], states[i]);
    }
}

namespace {

std::size_t count_classes(const std::vector<MdfImage>& dataset) {
    int max_label = 0;
    for (const auto& img : dataset) {
        if (img.label < 1) {
            throw std::invalid_argument("labels must be contiguous integers >= 1");
        }
        max_label = std::max(max_label, img.label);
    }
    if (max_label < 2) throw std::invalid_argument("need at least 2 classes");
    std::vector<std::size_t> counts(static_cast<std::size_t>(max_label), 0);
    for (const auto& img : dataset) counts[img.label - 1]++;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) {
            throw std::invalid_argument("class " + std::to_string(c + 1) +
                                        " has no training instance");
        }
    }
    return static_cast<std::size_t>(max_label);
}

// Batches of roughly cfg.batch_size; never emits a size-1 batch (BN needs >= 2).
std::vector<std::vector<std::size_t>> make_batches(std::vector<std::size_t> order,
                                                   std::size_t batch_size) {
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        const std::size_t end = std::min(order.size(), i + batch_size);
        batches.emplace_back(order.begin() + i, order.begin() + end);
    }
    if (batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back()[0]);
        batches.pop_back();
    }
    return batches;
}

}  // namespace

TrainedArtifact train(const std::vector<MdfImage>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    const std::size_t classes = count_classes(dataset);
    const std::size_t batch_size =
        std::max<std::size_t>(2, std::min(cfg.batch_size, dataset.size()));
    if (dataset.size() < 2) {
        throw std::invalid_argument("train: need at least 2 instances (batch norm)");
    }
    check_strides(dataset[0].d_max(), dataset[0].width(), cfg.strides);

    FcnModel model = make_model(dataset[0].channels.size(), classes, cfg.filters,
                                cfg.strides, cfg.seed);
    ModelAdam opt(model, cfg.learning_rate, cfg.beta1, cfg.beta2);

    TrainedArtifact art;
    art.strides = cfg.strides;
    art.config = cfg;
    art.model = model;  // zero-epoch result
    double best_loss = std::numeric_limits<double>::infinity();

    std::mt19937 rng(cfg.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (const auto& batch_idx : make_batches(order, batch_size)) {
            std::vector<const MdfImage*> batch;
            batch.reserve(batch_idx.size());
            for (std::size_t i : batch_idx) batch.push_back(&dataset[i]);
            const Tensor4 input = to_tensor(batch);

            ForwardCaches caches;
            auto logits = forward_logits(model, input, Mode::kTraining, &caches);

            const double inv_b = 1.0 / static_cast<double>(batch.size());
            std::vector<std::vector<double>> logit_grads(batch.size());
            for (std::size_t b = 0; b < batch.size(); ++b) {
                auto r = softmax_cross_entropy(
                    logits[b], static_cast<std::size_t>(batch[b]->label));
                loss_sum += r.loss;
                for (double& v : r.logit_grad) v *= inv_b;
                logit_grads[b] = std::move(r.logit_grad);
            }
            ModelGrads grads = backward(model, caches, logit_grads);
            opt.step(model, grads);
        }
        const double epoch_loss = loss_sum / static_cast<double>(dataset.size());
        art.loss_history.push_back(epoch_loss);
        if (epoch_loss < best_loss) {
            best_loss = epoch_loss;
            art.model = model;
        }
    }
    return art;
}

namespace {

std::vector<std::size_t> stratified_folds(const std::vector<MdfImage>& dataset,
                                          std::size_t k, unsigned seed) {
    std::vector<std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const std::size_t c = static_cast<std::size_t>(dataset[i].label);
        if (by_class.size() < c) by_class.resize(c);
        by_class[c - 1].push_back(i);
    }
    std::mt19937 rng(seed);
    std::vector<std::size_t> fold_of(dataset.size(), 0);
    std::size_t next = 0;
    for (auto& idxs : by_class) {
        std::shuffle(idxs.begin(), idxs.end(), rng);
        for (std::size_t i : idxs) fold_of[i] = next++ % k;
    }
    return fold_of;
}

}  // namespace

StrideTriple cross_validate_strides(const std::vector<MdfImage>& dataset,
                                    const TrainConfig& cfg,
                                    std::vector<double>* fold_errors) {
    constexpr std::size_t kFolds = 4;
    if (dataset.size() < kFolds) {
        throw std::invalid_argument("cross validation needs at least 4 instances");
    }
    if (cfg.stride_candidates.empty()) {
        throw std::invalid_argument("no stride candidates");
    }

    std::vector<StrideTriple> valid;
    for (const auto& cand : cfg.stride_candidates) {
        try {
            check_strides(dataset[0].d_max(), dataset[0].width(), cand);
            valid.push_back(cand);
        } catch (const std::invalid_argument& e) {
            std::cerr << "warning: skipping stride candidate (" << cand[0] << ","
                      << cand[1] << "," << cand[2] << "): " << e.what() << "\n";
        }
    }
    if (valid.empty()) throw std::invalid_argument("all stride candidates collapse");
    if (valid.size() == 1) {
        if (fold_errors) *fold_errors = {0.0};
        return valid[0];
    }

    const auto fold_of = stratified_folds(dataset, kFolds, cfg.seed);

    auto run_fold = [&](StrideTriple cand, std::size_t fold) -> double {
        std::vector<MdfImage> tr, va;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            (fold_of[i] == fold ? va : tr).push_back(dataset[i]);
        }
        TrainConfig fold_cfg = cfg;
        fold_cfg.strides = cand;
        TrainedArtifact art = train(tr, fold_cfg);
        return va.empty() ? 0.0 : evaluate(art, va);
    };

    std::vector<std::future<double>> jobs;
    for (const auto& cand : valid) {
        for (std::size_t f = 0; f < kFolds; ++f) {
            jobs.push_back(std::async(std::launch::async, run_fold, cand, f));
        }
    }
    std::vector<double> mean_errors(valid.size(), 0.0);
    for (std::size_t ci = 0; ci < valid.size(); ++ci) {
        for (std::size_t f = 0; f < kFolds; ++f) {
            mean_errors[ci] += jobs[ci * kFolds + f].get();
        }
        mean_errors[ci] /= kFolds;
    }
    if (fold_errors) *fold_errors = mean_errors;

    auto product = [](const StrideTriple& s) { return s[0] * s[1] * s[2]; };
    std::size_t best = 0;
    for (std::size_t ci = 1; ci < valid.size(); ++ci) {
        if (mean_errors[ci] < mean_errors[best] ||
            (mean_errors[ci] == mean_errors[best] &&
             product(valid[ci]) > product(valid[best]))) {
            best = ci;
        }
    }
    return valid[best];
}

std::vector<int> predict(FcnModel& model, const std::vector<MdfImage>& batch) {
    auto probs = forward(model, batch, Mode::kInference);
    std::vector<int> out;
    out.reserve(probs.size());
    for (const auto& p : probs) {
        out.push_back(static_cast<int>(
            std::distance(p.begin(), std::max_element(p.begin(), p.end())) + 1));
    }
    return out;
}

double evaluate(TrainedArtifact& artifact, const std::vector<MdfImage>& test) {
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    const auto pred = predict(artifact.model, test);
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (pred[i] != test[i].label) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(test.size());
}

// ---------------------------------------------------------------------------
// Checkpoint
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json conv_to_json(const ConvLayer& c) {
    return {{"out_channels", c.out_channels}, {"in_channels", c.in_channels},
            {"kernel", c.kernel},             {"stride", c.stride},
            {"weights", c.weights},           {"bias", c.bias}};
}

ConvLayer conv_from_json(const json& j) {
    ConvLayer c(j.at("out_channels"), j.at("in_channels"), j.at("kernel"),
                j.at("stride"));
    c.weights = j.at("weights").get<std::vector<double>>();
    c.bias = j.at("bias").get<std::vector<double>>();
    return c;
}

json bn_to_json(const BatchNormLayer& b) {
    return {{"channels", b.channels},
            {"gamma", b.gamma},
            {"beta", b.beta},
            {"running_mean", b.running_mean},
            {"running_var", b.running_var},
            {"epsilon", b.epsilon},
            {"momentum", b.momentum}};
}

BatchNormLayer bn_from_json(const json& j) {
    BatchNormLayer b(j.at("channels").get<std::size_t>());
    b.gamma = j.at("gamma").get<std::vector<double>>();
    b.beta = j.at("beta").get<std::vector<double>>();
    b.running_mean = j.at("running_mean").get<std::vector<double>>();
    b.running_var = j.at("running_var").get<std::vector<double>>();
    b.epsilon = j.at("epsilon");
    b.momentum = j.at("momentum");
    return b;
}

}  // namespace

void save_artifact(const std::string& dir, const TrainedArtifact& art) {
    std::filesystem::create_directories(dir);
    json j;
    j["format_version"] = 1;
    j["strides"] = art.strides;
    j["bounds"] = {{"min", art.bounds.min}, {"max", art.bounds.max}};
    j["loss_history"] = art.loss_history;
    j["config"] = {{"filters", art.config.filters},
                   {"learning_rate", art.config.learning_rate},
                   {"beta1", art.config.beta1},
                   {"beta2", art.config.beta2},
                   {"epochs", art.config.epochs},
                   {"batch_size", art.config.batch_size},
                   {"seed", art.config.seed},
                   {"motif_length", art.config.motif_length}};
    j["model"] = {{"conv1", conv_to_json(art.model.conv1)},
                  {"conv2", conv_to_json(art.model.conv2)},
                  {"conv3", conv_to_json(art.model.conv3)},
                  {"bn1", bn_to_json(art.model.bn1)},
                  {"bn2", bn_to_json(art.model.bn2)},
                  {"bn3", bn_to_json(art.model.bn3)},
                  {"head",
                   {{"classes", art.model.head.classes},
                    {"features", art.model.head.features},
                    {"weights", art.model.head.weights},
                    {"bias", art.model.head.bias}}}};
    std::ofstream out(std::filesystem::path(dir) / "model.json");
    if (!out) throw std::runtime_error("cannot write checkpoint in " + dir);
    out << j.dump(2) << "\n";
}

TrainedArtifact load_artifact(const std::string& dir) {
    std::ifstream in(std::filesystem::path(dir) / "model.json");
    if (!in) throw std::runtime_error("cannot open checkpoint in " + dir);
    json j;
    in >> j;
    if (j.at("format_version").get<int>() != 1) {
        throw std::runtime_error("unsupported checkpoint format version");
    }
    TrainedArtifact art;
    art.strides = j.at("strides").get<StrideTriple>();
    art.bounds.min = j.at("bounds").at("min");
    art.bounds.max = j.at("bounds").at("max");
    art.loss_history = j.at("loss_history").get<std::vector<double>>();
    const json& c = j.at("config");
    art.config.filters = c.at("filters").get<FilterTriple>();
    art.config.learning_rate = c.at("learning_rate");
    art.config.beta1 = c.at("beta1");
    art.config.beta2 = c.at("beta2");
    art.config.epochs = c.at("epochs");
    art.config.batch_size = c.at("batch_size");
    art.config.seed = c.at("seed");
    art.config.motif_length = c.at("motif_length");
    art.config.strides = art.strides;
    const json& m = j.at("model");
    art.model.conv1 = conv_from_json(m.at("conv1"));
    art.model.conv2 = conv_from_json(m.at("conv2"));
    art.model.conv3 = conv_from_json(m.at("conv3"));
    art.model.bn1 = bn_from_json(m.at("bn1"));
    art.model.bn2 = bn_from_json(m.at("bn2"));
    art.model.bn3 = bn_from_json(m.at("bn3"));
    const json& h = m.at("head");
    art.model.head = DenseHead(h.at("classes"), h.at("features"));
    art.model.head.weights = h.at("weights").get<std::vector<double>>();
    art.model.head.bias = h.at("bias").get<std::vector<double>>();
    return art;
}

}  // namespace mdfcn
