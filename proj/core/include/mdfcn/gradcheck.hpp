#ifndef MDFCN_GRADCHECK_HPP
#define MDFCN_GRADCHECK_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mdfcn {

struct GradCheckResult {
    std::string op;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Central finite differences (h = 1e-5) against every hand-written backward
/// pass, on randomized small shapes. Threshold: relative error < 1e-4.
std::vector<GradCheckResult> run_gradcheck(unsigned seed, std::size_t rounds);

// Prints one line per op; returns true when everything passed.
bool report_gradcheck(std::ostream& out, unsigned seed, std::size_t rounds);

}  // namespace mdfcn

#endif
