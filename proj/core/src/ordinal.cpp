// Ordinal pattern code tables live here, isolated from the ranking logic.

#include "mdfcn/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mdfcn {

namespace {

bool tied(double a, double b, TieTolerance tol) {
    if (tol.tau == 0.0) return a == b;
    return std::abs(a - b) <= tol.tau * std::max({1.0, std::abs(a), std::abs(b)});
}

// Dense ranks starting at 1, ties grouped along the sorted order.
std::vector<int> dense_ranks(const std::vector<double>& v, TieTolerance tol) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<int> ranks(v.size(), 0);
    int rank = 1;
    ranks[order[0]] = rank;
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (!tied(v[order[i]], v[order[i - 1]], tol)) ++rank;
        ranks[order[i]] = rank;
    }
    return ranks;
}

}  // namespace

std::string ordinal_pattern(const std::vector<double>& motif, TieTolerance tol) {
    const std::size_t n = motif.size();
    if (n < 2 || n > 9) {
        throw std::invalid_argument("ordinal_pattern: motif length must be in [2, 9]");
    }
    for (double v : motif) {
        if (std::isnan(v)) throw std::invalid_argument("ordinal_pattern: NaN value");
    }
    const auto ranks = dense_ranks(motif, tol);
    // Triadic outer ties carry their own codes in the 13-pattern alphabet.
    if (n == 3 && ranks[0] == ranks[2] && ranks[0] != ranks[1]) {
        return ranks[1] > ranks[0] ? "113" : "311";
    }
    std::string code(n, '0');
    for (std::size_t i = 0; i < n; ++i) {
        code[i] = static_cast<char>('0' + ranks[i]);
    }
    return code;
}

const std::vector<std::string>& triadic_pattern_codes() {
    static const std::vector<std::string> codes = {
        "111", "112", "113", "122", "123", "132", "211",
        "213", "221", "231", "311", "312", "321"};
    return codes;
}

const std::vector<std::string>& dual_pattern_codes() {
    static const std::vector<std::string> codes = {"11", "12", "21"};
    return codes;
}

std::map<std::string, std::vector<MotifIndex>> collect_all_indices(
    const TimeSeries& x, std::size_t motif_length, TieTolerance tol) {
    const std::size_t T = x.length();
    const std::size_t n = motif_length;
    const std::size_t dmax = max_displacement(T, n);
    std::map<std::string, std::vector<MotifIndex>> sets;
    std::vector<double> motif(n);
    for (std::size_t d = 1; d <= dmax; ++d) {
        const std::size_t valid = T - (n - 1) * d;
        for (std::size_t s = 1; s <= valid; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                motif[i] = x.values[s - 1 + i * d];
            }
            sets[ordinal_pattern(motif, tol)].emplace_back(d, s);
        }
    }
    return sets;
}

std::vector<MotifIndex> collect_indices(const TimeSeries& x, std::size_t motif_length,
                                        const std::string& code, TieTolerance tol) {
    auto sets = collect_all_indices(x, motif_length, tol);
    auto it = sets.find(code);
    return it == sets.end() ? std::vector<MotifIndex>{} : std::move(it->second);
}

std::vector<PatternScore> significance(
    const Grid& map,
    const std::map<std::string, std::vector<MotifIndex>>& index_sets) {
    std::vector<PatternScore> scores;
    for (const auto& [code, set] : index_sets) {
        if (set.empty()) continue;
        double sum = 0.0;
        for (const auto& [d, s] : set) {
            if (d > map.rows || s > map.cols) {
                throw std::out_of_range("significance: motif index outside the map");
            }
            sum += map(d - 1, s - 1);
        }
        scores.push_back({code, set.size(), sum / static_cast<double>(set.size())});
    }
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.code < b.code;
    });
    return scores;
}

}  // namespace mdfcn
