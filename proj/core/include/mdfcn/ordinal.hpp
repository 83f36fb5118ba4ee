#ifndef MDFCN_ORDINAL_HPP
#define MDFCN_ORDINAL_HPP

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mdfcn/mdf.hpp"
#include "mdfcn/series.hpp"

namespace mdfcn {

/// Relative tolerance for treating two motif values as tied.
/// 0 means exact equality.
struct TieTolerance {
    double tau = 0.0;
};

// Weak-ordering code of a motif: dense ranks as digits, with the triadic
// outer-tie classes mapped to the codes 113 and 311. Supports n in [2, 9].
// Throws on NaN.
std::string ordinal_pattern(const std::vector<double>& motif,
                            TieTolerance tol = {});

// The 13 triadic codes, ascending.
const std::vector<std::string>& triadic_pattern_codes();
// The 3 dual codes, ascending.
const std::vector<std::string>& dual_pattern_codes();

/// 1-based (d, s) motif position.
using MotifIndex = std::pair<std::size_t, std::size_t>;

// Classify every valid motif position of x; the index sets partition the
// Sum_d (T-(n-1)d) positions.
std::map<std::string, std::vector<MotifIndex>> collect_all_indices(
    const TimeSeries& x, std::size_t motif_length, TieTolerance tol = {});

// Index set of one pattern code (possibly empty).
std::vector<MotifIndex> collect_indices(const TimeSeries& x, std::size_t motif_length,
                                        const std::string& code,
                                        TieTolerance tol = {});

struct PatternScore {
    std::string code;
    std::size_t count = 0;  // Z_j
    double score = 0.0;     // E_j
};

// Mean symmetrized heat per pattern, ranked descending; empty patterns are
// omitted. Ties broken by ascending code.
std::vector<PatternScore> significance(
    const Grid& symmetrized_map,
    const std::map<std::string, std::vector<MotifIndex>>& index_sets);

}  // namespace mdfcn

#endif
