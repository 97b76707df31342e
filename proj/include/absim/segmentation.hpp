#pragma once

#include <cstdint>
#include <vector>

#include "absim/image.hpp"

namespace absim {

// One instance mask: sorted linear pixel indices into a width*height grid,
// with a detection confidence in [0, 1].
struct Mask {
    std::vector<std::uint32_t> pixels;
    double score = 1.0;
};

struct InstanceMaskSet {
    int width = 0;
    int height = 0;
    std::vector<Mask> masks;
};

// Otsu's threshold over a 256-bin histogram (intensity -> round(v*255)).
// Returns the lowest level maximizing between-class variance; throws
// NumericError for a single-bin (degenerate) histogram.
int otsu_threshold(const GrayImage& image);

// Otsu binarization (foreground strictly above the threshold), 8-connected
// component labeling, components below min_area dropped. Scores are 1.0.
InstanceMaskSet segment_otsu(const GrayImage& image, int min_area = 16);

// |a intersect b| / |a union b|; 0 for two empty masks.
double mask_iou(const Mask& a, const Mask& b);

// Greedy score-ordered matching at the given IoU threshold followed by
// 101-point interpolated area under the precision-recall curve, scaled to
// [0, 100]. Empty truth: 100 when predictions are also empty, else 0.
double average_precision(const InstanceMaskSet& pred, const InstanceMaskSet& truth,
                         double iou_thresh);

struct ApReport {
    double ap50 = 0.0;
    double ap75 = 0.0;
    double ap_coco = 0.0;  // mean over IoU 0.50:0.05:0.95
};

ApReport ap_report(const InstanceMaskSet& pred, const InstanceMaskSet& truth);

}  // namespace absim
