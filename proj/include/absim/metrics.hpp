#pragma once

#include "absim/image.hpp"

namespace absim {

// Full-reference similarity scores for one image pair.
struct SimilarityReport {
    double psnr_db = 0.0;  // +infinity when the images are identical
    double ssim = 0.0;
    double pearson = 0.0;
};

// 10*log10(peak^2 / MSE) with the MSE taken over intensities scaled to
// [0, peak]; the value is therefore the same for any peak chosen for
// co-scaled data. Returns +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b, double peak = 1.0);

// Mean local SSIM over an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, dynamic range 1.0. Requires min(width, height) >= 11.
double ssim(const GrayImage& a, const GrayImage& b);

// Sample correlation of the flattened intensities. Throws NumericError
// when either image is constant (undefined correlation).
double pearson(const GrayImage& a, const GrayImage& b);

SimilarityReport similarity(const GrayImage& a, const GrayImage& b, double peak = 1.0);

}  // namespace absim
