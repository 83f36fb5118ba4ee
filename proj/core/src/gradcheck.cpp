#include "mdfcn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "mdfcn/layers.hpp"

namespace mdfcn {

namespace {

constexpr double kStep = 1e-5;
constexpr double kThreshold = 1e-4;

double rel_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
    return std::abs(a - b) / scale;
}

// Central finite difference of f along x[i].
double numeric_grad(const std::function<double()>& f, double& xi) {
    const double saved = xi;
    xi = saved + kStep;
    const double fp = f();
    xi = saved - kStep;
    const double fm = f();
    xi = saved;
    return (fp - fm) / (2.0 * kStep);
}

double check_vector(const std::function<double()>& f, std::vector<double>& x,
                    const std::vector<double>& analytic) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, rel_error(numeric_grad(f, x[i]), analytic[i]));
    }
    return worst;
}

Tensor4 random_tensor(std::size_t b, std::size_t c, std::size_t h, std::size_t w,
                      std::mt19937& rng) {
    Tensor4 t(b, c, h, w);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : t.data) v = dist(rng);
    return t;
}

// Scalar loss: fixed random weighting of the output tensor.
std::vector<double> random_weights(std::size_t n, std::mt19937& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> w(n);
    for (double& v : w) v = dist(rng);
    return w;
}

double weighted_sum(const std::vector<double>& data, const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) acc += data[i] * w[i];
    return acc;
}

double check_conv(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> pick_b(1, 2), pick_c(1, 3),
        pick_hw(3, 8), pick_k(0, 2), pick_s(1, 3);
    const std::size_t kernels[] = {3, 5, 8};
    Tensor4 input = random_tensor(pick_b(rng), pick_c(rng), pick_hw(rng),
                                  pick_hw(rng), rng);
    ConvLayer layer(pick_c(rng), input.channels, kernels[pick_k(rng)], pick_s(rng));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : layer.weights) v = dist(rng);
    for (double& v : layer.bias) v = dist(rng);

    Tensor4 out = conv2d_forward(input, layer);
    const auto w = random_weights(out.size(), rng);
    Tensor4 upstream = out;
    std::copy(w.begin(), w.end(), upstream.data.begin());
    ConvGrads g = conv2d_backward(input, layer, upstream);

    auto loss = [&] { return weighted_sum(conv2d_forward(input, layer).data, w); };
    double worst = check_vector(loss, input.data, g.input.data);
    worst = std::max(worst, check_vector(loss, layer.weights, g.weights));
    worst = std::max(worst, check_vector(loss, layer.bias, g.bias));
    return worst;
}

double check_batchnorm(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> pick_b(2, 4), pick_c(1, 3),
        pick_hw(2, 5);
    Tensor4 input = random_tensor(pick_b(rng), pick_c(rng), pick_hw(rng),
                                  pick_hw(rng), rng);
    BatchNormLayer layer(input.channels);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : layer.gamma) v = 1.0 + 0.2 * dist(rng);
    for (double& v : layer.beta) v = 0.2 * dist(rng);

    BatchNormLayer scratch = layer;
    BatchNormCache cache;
    Tensor4 out = batchnorm_forward(input, scratch, Mode::kTraining, &cache);
    const auto w = random_weights(out.size(), rng);
    Tensor4 upstream = out;
    std::copy(w.begin(), w.end(), upstream.data.begin());
    BatchNormGrads g = batchnorm_backward(cache, layer, upstream);

    auto loss = [&] {
        BatchNormLayer tmp = layer;  // forward mutates running statistics
        return weighted_sum(
            batchnorm_forward(input, tmp, Mode::kTraining).data, w);
    };
    double worst = check_vector(loss, input.data, g.input.data);
    worst = std::max(worst, check_vector(loss, layer.gamma, g.gamma));
    worst = std::max(worst, check_vector(loss, layer.beta, g.beta));
    return worst;
}

double check_relu(std::mt19937& rng) {
    Tensor4 input = random_tensor(2, 2, 4, 4, rng);
    // Keep entries away from the kink.
    for (double& v : input.data) {
        if (std::abs(v) < 0.1) v = v < 0 ? v - 0.2 : v + 0.2;
    }
    Tensor4 out = relu_forward(input);
    const auto w = random_weights(out.size(), rng);
    Tensor4 upstream = out;
    std::copy(w.begin(), w.end(), upstream.data.begin());
    Tensor4 g = relu_backward(input, upstream);
    auto loss = [&] { return weighted_sum(relu_forward(input).data, w); };
    return check_vector(loss, input.data, g.data);
}

double check_gap(std::mt19937& rng) {
    Tensor4 input = random_tensor(2, 3, 4, 5, rng);
    auto out = gap_forward(input);
    std::vector<std::vector<double>> upstream(out.size());
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& row : upstream) {
        row.resize(input.channels);
        for (double& v : row) v = dist(rng);
    }
    Tensor4 g = gap_backward(input, upstream);
    auto loss = [&] {
        auto f = gap_forward(input);
        double acc = 0.0;
        for (std::size_t b = 0; b < f.size(); ++b) {
            for (std::size_t c = 0; c < f[b].size(); ++c) {
                acc += f[b][c] * upstream[b][c];
            }
        }
        return acc;
    };
    return check_vector(loss, input.data, g.data);
}

double check_dense(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> pick_c(2, 5), pick_f(2, 8);
    DenseHead head(pick_c(rng), pick_f(rng));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : head.weights) v = dist(rng);
    for (double& v : head.bias) v = dist(rng);
    std::vector<double> features(head.features);
    for (double& v : features) v = dist(rng);

    auto out = dense_forward(head, features);
    const auto w = random_weights(out.size(), rng);
    DenseGrads g = dense_backward(head, features, w);
    auto loss = [&] { return weighted_sum(dense_forward(head, features), w); };
    double worst = check_vector(loss, features, g.input);
    worst = std::max(worst, check_vector(loss, head.weights, g.weights));
    worst = std::max(worst, check_vector(loss, head.bias, g.bias));
    return worst;
}

double check_softmax_ce(std::mt19937& rng) {
    std::uniform_int_distribution<std::size_t> pick_c(2, 6);
    const std::size_t classes = pick_c(rng);
    std::normal_distribution<double> dist(0.0, 2.0);
    std::vector<double> logits(classes);
    for (double& v : logits) v = dist(rng);
    const std::size_t target =
        std::uniform_int_distribution<std::size_t>(1, classes)(rng);

    auto r = softmax_cross_entropy(logits, target);
    auto loss = [&] { return softmax_cross_entropy(logits, target).loss; };
    return check_vector(loss, logits, r.logit_grad);
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(unsigned seed, std::size_t rounds) {
    struct Op {
        const char* name;
        double (*fn)(std::mt19937&);
    };
    const Op ops[] = {{"conv2d", check_conv},   {"batchnorm", check_batchnorm},
                      {"relu", check_relu},     {"gap", check_gap},
                      {"dense", check_dense},   {"softmax_ce", check_softmax_ce}};
    std::vector<GradCheckResult> results;
    for (const Op& op : ops) {
        GradCheckResult r;
        r.op = op.name;
        for (std::size_t i = 0; i < rounds; ++i) {
            std::mt19937 rng(seed + static_cast<unsigned>(i) * 7919u);
            r.max_rel_error = std::max(r.max_rel_error, op.fn(rng));
        }
        r.passed = r.max_rel_error < kThreshold;
        results.push_back(r);
    }
    return results;
}

bool report_gradcheck(std::ostream& out, unsigned seed, std::size_t rounds) {
    bool all = true;
    for (const auto& r : run_gradcheck(seed, rounds)) {
        out << (r.passed ? "PASS" : "FAIL") << " " << r.op
            << " max_rel_error=" << r.max_rel_error << "\n";
        all = all && r.passed;
    }
    return all;
}

}  // namespace mdfcn
