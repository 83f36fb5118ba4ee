#ifndef MDFCN_GRADCAM_HPP
#define MDFCN_GRADCAM_HPP

#include <cstddef>
#include <vector>

#include "mdfcn/fcn.hpp"
#include "mdfcn/mdf.hpp"

namespace mdfcn {

/// Which class score the Grad-CAM gradients flow from.
enum class CamScore { kLogit, kSoftmax };

// Channel weights: GAP of d score / d A3 for each feature-map channel k.
// Analytic backprop through the dense head and GAP only.
std::vector<double> grad_cam_alphas(const FcnModel& model,
                                    const std::vector<double>& probabilities,
                                    std::size_t a3_plane, std::size_t target_class,
                                    CamScore score);

// Coarse class activation map over A3's spatial grid, ReLU-clamped.
// target_class is 1-based.
Grid grad_cam(FcnModel& model, const MdfImage& image, std::size_t target_class,
              CamScore score = CamScore::kLogit);

// Corner-aligned bilinear interpolation to rows x cols.
Grid upsample_bilinear(const Grid& coarse, std::size_t rows, std::size_t cols);

// L'(d,s) = (L(d,s) + L(d*,s*)) / 2 over the MDF rotation partner map.
Grid symmetrize(const Grid& map);

}  // namespace mdfcn

#endif
