#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "mdfcn/fcn.hpp"
#include "mdfcn/gradcam.hpp"
#include "mdfcn/mdf.hpp"
#include "mdfcn/ordinal.hpp"

using namespace mdfcn;

namespace {

TimeSeries random_series(std::size_t T, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    TimeSeries x;
    for (std::size_t t = 0; t < T; ++t) x.values.push_back(dist(rng));
    return x;
}

// Pairwise-comparison oracle for triads: the 13-way case split over the
// signs of (x1 vs x2, x1 vs x3, x2 vs x3).
std::string triad_oracle(double a, double b, double c) {
    auto cmp = [](double u, double v) { return u < v ? -1 : (u > v ? 1 : 0); };
    const int ab = cmp(a, b), ac = cmp(a, c), bc = cmp(b, c);
    if (ab == 0 && ac == 0) return "111";
    if (ab == 0) return ac < 0 ? "112" : "221";
    if (bc == 0) return ab < 0 ? "122" : "211";
    if (ac == 0) return ab < 0 ? "113" : "311";
    if (ab < 0 && bc < 0) return "123";
    if (ab < 0 && ac < 0) return "132";  // a < c < b
    if (ac < 0) return "213";            // b < a < c
    if (ab < 0) return "231";            // c < a < b
    if (bc < 0) return "312";            // b < c < a
    return "321";
}

}  // namespace

TEST_CASE("triad oracle exhaustive over {0,1,2}^3") {
    std::set<std::string> seen;
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                const std::string expect = triad_oracle(a, b, c);
                const std::string got =
                    ordinal_pattern({double(a), double(b), double(c)});
                INFO("triple (", a, ",", b, ",", c, ")");
                CHECK(got == expect);
                seen.insert(got);
            }
        }
    }
    CHECK(seen.size() == 13);
    for (const auto& code : triadic_pattern_codes()) {
        CHECK(seen.count(code) == 1);
    }
}

TEST_CASE("ordinal pattern examples") {
    CHECK(ordinal_pattern({1, 2, 3}) == "123");
    CHECK(ordinal_pattern({2, 2, 7}) == "112");
    CHECK(ordinal_pattern({7, 2, 2}) == "211");
    CHECK(ordinal_pattern({5, 5, 5}) == "111");
    CHECK(ordinal_pattern({1, 2}) == "12");
    CHECK(ordinal_pattern({2, 1}) == "21");
    CHECK(ordinal_pattern({2, 2}) == "11");
    CHECK_THROWS_AS(ordinal_pattern({1, std::nan(""), 2}), std::invalid_argument);
    CHECK_THROWS_AS(ordinal_pattern({1.0}), std::invalid_argument);
}

TEST_CASE("ordinal pattern is invariant under strictly increasing transforms") {
    std::mt19937 rng(3);
    std::normal_distribution<double> dist(0.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> motif(3);
        for (double& v : motif) v = dist(rng);
        if (trial % 3 == 0) motif[1] = motif[0];  // force some ties
        const std::string base = ordinal_pattern(motif);

        std::vector<double> affine, expd, cubed;
        for (double v : motif) {
            affine.push_back(2.5 * v - 7.0);
            expd.push_back(std::exp(v));
            cubed.push_back(v * v * v);
        }
        CHECK(ordinal_pattern(affine) == base);
        CHECK(ordinal_pattern(expd) == base);
        CHECK(ordinal_pattern(cubed) == base);
    }
}

TEST_CASE("tie tolerance") {
    CHECK(ordinal_pattern({1.0, 1.0 + 1e-9, 2.0}) == "123");
    CHECK(ordinal_pattern({1.0, 1.0 + 1e-9, 2.0}, {1e-6}) == "112");
}

TEST_CASE("collect_indices partitions the valid positions") {
    SUBCASE("strictly increasing series is all 123") {
        TimeSeries x{{1, 2, 3, 4, 5, 6, 7, 8}, 0};
        const auto sets = collect_all_indices(x, 3);
        REQUIRE(sets.size() == 1);
        CHECK(sets.count("123") == 1);
    }
    SUBCASE("constant series is all 111") {
        TimeSeries x{std::vector<double>(9, 4.0), 0};
        const auto sets = collect_all_indices(x, 3);
        REQUIRE(sets.size() == 1);
        CHECK(sets.count("111") == 1);
        CHECK(sets.at("111").size() == 7 + 5 + 3 + 1);
    }
    SUBCASE("sample series partition sizes sum to 9") {
        TimeSeries x{{1, 3, 2, 5, 4, 6, 0}, 0};
        const auto sets = collect_all_indices(x, 3);
        std::size_t total = 0;
        for (const auto& [code, set] : sets) total += set.size();
        CHECK(total == 9);
    }
    SUBCASE("random series for several n") {
        for (unsigned seed = 1; seed <= 10; ++seed) {
            const TimeSeries x = random_series(20 + seed, seed);
            for (std::size_t n : {2, 3, 4}) {
                const std::size_t T = x.length();
                const std::size_t dmax = max_displacement(T, n);
                std::size_t expect = 0;
                for (std::size_t d = 1; d <= dmax; ++d) expect += T - (n - 1) * d;
                std::size_t total = 0;
                for (const auto& [code, set] : collect_all_indices(x, n)) {
                    total += set.size();
                }
                CHECK(total == expect);
            }
        }
    }
}

TEST_CASE("significance") {
    SUBCASE("constant map scores every nonempty pattern equally") {
        TimeSeries x{{1, 3, 2, 5, 4, 6, 0}, 0};
        const auto sets = collect_all_indices(x, 3);
        Grid map(3, 5);
        for (double& v : map.data) v = 2.5;
        for (const auto& s : significance(map, sets)) {
            CHECK(s.score == doctest::Approx(2.5).epsilon(1e-15));
        }
    }
    SUBCASE("zero map scores zero") {
        TimeSeries x{{1, 3, 2, 5, 4, 6, 0}, 0};
        const Grid map(3, 5);
        for (const auto& s : significance(map, collect_all_indices(x, 3))) {
            CHECK(s.score == 0.0);
        }
    }
    SUBCASE("hand-built map and sets") {
        std::map<std::string, std::vector<MotifIndex>> sets;
        sets["123"] = {{1, 1}, {1, 2}};
        sets["211"] = {{2, 1}};
        sets["111"] = {{3, 5}, {2, 3}, {1, 5}};
        sets["321"] = {};
        Grid map(3, 5);
        for (std::size_t i = 0; i < map.data.size(); ++i) {
            map.data[i] = static_cast<double>(i);  // row-major 0..14
        }
        const auto scores = significance(map, sets);
        REQUIRE(scores.size() == 3);  // the empty pattern is omitted
        // E_123 = (0 + 1)/2, E_211 = 5, E_111 = (14 + 7 + 4)/3.
        CHECK(scores[0].code == "111");
        CHECK(scores[0].score == doctest::Approx(25.0 / 3).epsilon(1e-15));
        CHECK(scores[1].code == "211");
        CHECK(scores[1].score == doctest::Approx(5.0).epsilon(1e-15));
        CHECK(scores[2].code == "123");
        CHECK(scores[2].score == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(scores[0].count == 3);
    }
    SUBCASE("ranking is non-increasing with ties by code") {
        const TimeSeries x = random_series(40, 7);
        const MdfImage img = encode(x, 3);
        Grid map(img.d_max(), img.width());
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (double& v : map.data) v = dist(rng);
        const auto scores = significance(map, collect_all_indices(x, 3));
        for (std::size_t i = 1; i < scores.size(); ++i) {
            CHECK(scores[i - 1].score >= scores[i].score);
        }
    }
}

TEST_CASE("upsample bilinear") {
    SUBCASE("constant stays constant") {
        Grid coarse(3, 4);
        for (double& v : coarse.data) v = 1.75;
        const Grid up = upsample_bilinear(coarse, 9, 17);
        for (double v : up.data) CHECK(v == doctest::Approx(1.75).epsilon(1e-15));
    }
    SUBCASE("1x1 source broadcasts") {
        Grid coarse(1, 1);
        coarse(0, 0) = 3.25;
        const Grid up = upsample_bilinear(coarse, 5, 7);
        for (double v : up.data) CHECK(v == 3.25);
    }
    SUBCASE("2x2 to 3x3 center is the corner mean") {
        Grid coarse(2, 2);
        coarse(0, 0) = 1.0;
        coarse(0, 1) = 2.0;
        coarse(1, 0) = 3.0;
        coarse(1, 1) = 4.0;
        const Grid up = upsample_bilinear(coarse, 3, 3);
        CHECK(up(1, 1) == doctest::Approx(2.5).epsilon(1e-15));
        CHECK(up(0, 0) == 1.0);  // corner aligned
        CHECK(up(2, 2) == 4.0);
    }
}

TEST_CASE("symmetrize") {
    Grid map(3, 5);
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (double& v : map.data) v = dist(rng);

    const Grid sym = symmetrize(map);
    SUBCASE("exact rotation symmetry") {
        for (std::size_t d = 1; d <= 3; ++d) {
            for (std::size_t s = 1; s <= 5; ++s) {
                auto [dr, sr] = rotation_partner(d, s, 3, 5);
                CHECK(sym(d - 1, s - 1) == sym(dr - 1, sr - 1));
            }
        }
    }
    SUBCASE("idempotent") {
        const Grid twice = symmetrize(sym);
        CHECK(twice.data == sym.data);
    }
    SUBCASE("single entry averages with its partner") {
        Grid single(3, 5);
        single(0, 0) = 2.0;
        const Grid s = symmetrize(single);
        CHECK(s(0, 0) == 1.0);
        CHECK(s(2, 4) == 1.0);
        double total = 0.0;
        for (double v : s.data) total += v;
        CHECK(total == 2.0);
    }
}

TEST_CASE("grad_cam properties") {
    const TimeSeries x = random_series(40, 33);
    const MdfImage img = encode(x, 3);
    FcnModel model = make_model(2, 3, {4, 8, 4}, {2, 2, 2}, 11);

    SUBCASE("maps are nonnegative for every class") {
        for (std::size_t c = 1; c <= 3; ++c) {
            for (const Grid& map : {grad_cam(model, img, c, CamScore::kLogit),
                                    grad_cam(model, img, c, CamScore::kSoftmax)}) {
                for (double v : map.data) CHECK(v >= 0.0);
            }
        }
    }
    SUBCASE("zeroed last conv block gives a zero map") {
        FcnModel zeroed = model;
        std::fill(zeroed.conv3.weights.begin(), zeroed.conv3.weights.end(), 0.0);
        std::fill(zeroed.conv3.bias.begin(), zeroed.conv3.bias.end(), 0.0);
        const Grid map = grad_cam(zeroed, img, 1);
        for (double v : map.data) CHECK(v == 0.0);
    }
    SUBCASE("invalid class rejected") {
        CHECK_THROWS_AS(grad_cam(model, img, 0), std::invalid_argument);
        CHECK_THROWS_AS(grad_cam(model, img, 4), std::invalid_argument);
    }
}

TEST_CASE("alpha gradients match finite differences through GAP plus head") {
    const TimeSeries x = random_series(36, 51);
    const MdfImage img = encode(x, 3);
    FcnModel model = make_model(2, 3, {4, 8, 4}, {2, 2, 2}, 29);

    const Tensor4 input = to_tensor(std::vector<const MdfImage*>{&img});
    ForwardCaches caches;
    auto logits = forward_logits(model, input, Mode::kInference, &caches);
    const auto probs = softmax(logits[0]);

    for (const CamScore score : {CamScore::kLogit, CamScore::kSoftmax}) {
        for (std::size_t cls = 1; cls <= 3; ++cls) {
            const auto alphas =
                grad_cam_alphas(model, probs, caches.a3.plane(), cls, score);

            // Score as a function of A3, evaluated through GAP + dense.
            Tensor4 a3 = caches.a3;
            auto score_of = [&]() {
                const auto feats = gap_forward(a3);
                const auto lg = dense_forward(model.head, feats[0]);
                return score == CamScore::kLogit ? lg[cls - 1] : softmax(lg)[cls - 1];
            };

            const double h = 1e-5;
            for (std::size_t k = 0; k < a3.channels; ++k) {
                // d score / d A3 is constant per channel; probe one pixel and
                // compare the GAP-pooled value (= alpha times the plane size
                // over the plane, i.e. alpha itself per-entry).
                double& pixel = a3.at(0, k, 0, 0);
                const double saved = pixel;
                pixel = saved + h;
                const double fp = score_of();
                pixel = saved - h;
                const double fm = score_of();
                pixel = saved;
                const double numeric = (fp - fm) / (2.0 * h);
                const double scale =
                    std::max({std::abs(numeric), std::abs(alphas[k]), 1e-8});
                CHECK(std::abs(numeric - alphas[k]) / scale < 1e-4);
            }
        }
    }
}
