#ifndef MDFCN_DATASET_HPP
#define MDFCN_DATASET_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mdfcn/mdf.hpp"
#include "mdfcn/series.hpp"

namespace mdfcn {

/// Maps the contiguous labels 1..C back to the file's original label values.
using LabelTable = std::vector<double>;

// Parse a UCR flat file: one series per line, label first, tab/comma/space
// separated. Labels are remapped to 1..C in sorted original order. When
// `labels` arrives non-empty it is reused (test split against a training
// table) and unknown labels are an error. Throws std::runtime_error with the
// offending line number on parse or ragged-length failures.
std::vector<TimeSeries> load_ucr_file(const std::string& path, LabelTable& labels);

// Write series in the same flat format, tab separated, 17 significant digits.
void write_ucr_file(const std::string& path, const std::vector<TimeSeries>& series,
                    const LabelTable& labels);

// Synthetic plateau series in the spirit of TwoPatterns: Gaussian noise plus
// class-defining unit steps; class = ordered step directions. classes must
// be 2 or 4, T >= 32.
std::vector<TimeSeries> synthesize_twopatterns(std::size_t classes,
                                               std::size_t per_class, std::size_t T,
                                               double sigma, unsigned seed);

// MDF record container: "MDF1" magic, u32 {count, channels, rows, cols, n, T},
// then per series an i32 label and channel-major row-major doubles. All
// integers and doubles little-endian.
void save_mdf_records(const std::string& path, const std::vector<MdfImage>& images);
std::vector<MdfImage> load_mdf_records(const std::string& path);

// FNV-1a 64-bit over the file bytes, as a fixed-width hex string.
std::string fingerprint_file(const std::string& path);

}  // namespace mdfcn

#endif
