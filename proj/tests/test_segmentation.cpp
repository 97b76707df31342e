#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "absim/errors.hpp"
#include "absim/segmentation.hpp"
#include "test_util.hpp"

using namespace absim;

namespace {

// Exhaustive oracle: recompute the between-class variance at every level
// from the raw quantized pixels.
int otsu_oracle(const GrayImage& img) {
    std::vector<int> levels;
    for (double v : img.pixels) {
        levels.push_back(std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255));
    }
    int best_level = -1;
    double best = 0.0;
    for (int t = 0; t < 256; ++t) {
        double w0 = 0, w1 = 0, s0 = 0, s1 = 0;
        for (int v : levels) {
            if (v <= t) {
                w0 += 1;
                s0 += v;
            } else {
                w1 += 1;
                s1 += v;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const double d = s0 / w0 - s1 / w1;
        const double var = w0 * w1 * d * d;
        if (var > best) {
            best = var;
            best_level = t;
        }
    }
    return best_level;
}

GrayImage from_levels(int w, int h, const std::vector<int>& levels) {
    GrayImage img = GrayImage::constant(w, h, 0.0);
    for (std::size_t i = 0; i < levels.size(); ++i) img.pixels[i] = levels[i] / 255.0;
    return img;
}

Mask rect_mask(int img_w, int x0, int y0, int w, int h, double score = 1.0) {
    Mask m;
    m.score = score;
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            m.pixels.push_back(static_cast<std::uint32_t>(y) * img_w + x);
        }
    }
    std::sort(m.pixels.begin(), m.pixels.end());
    return m;
}

}  // namespace

TEST_CASE("otsu threshold: bimodal plateaus resolve to the lowest level") {
    std::vector<int> levels;
    for (int i = 0; i < 8; ++i) levels.push_back(10);
    for (int i = 0; i < 8; ++i) levels.push_back(200);
    const GrayImage balanced = from_levels(4, 4, levels);
    CHECK(otsu_threshold(balanced) == 10);
    CHECK(otsu_threshold(balanced) == otsu_oracle(balanced));

    levels.assign(15, 0);
    levels.push_back(255);
    const GrayImage skewed = from_levels(4, 4, levels);
    CHECK(otsu_threshold(skewed) == 0);
    CHECK(otsu_threshold(skewed) == otsu_oracle(skewed));

    // Random images agree with the exhaustive oracle.
    SplitMix64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        GrayImage img = GrayImage::constant(12, 12, 0.0);
        for (double& v : img.pixels) v = rng.uniform();
        CHECK(otsu_threshold(img) == otsu_oracle(img));
    }

    CHECK_THROWS_AS(otsu_threshold(GrayImage::constant(8, 8, 0.4)), NumericError);
}

TEST_CASE("segment_otsu: component count, 8-connectivity, area filter") {
    // Two bright squares on a dark background.
    GrayImage img = GrayImage::constant(48, 48, 0.1);
    for (int y = 6; y < 14; ++y) {
        for (int x = 6; x < 14; ++x) img.at(y, x) = 0.9;
    }
    for (int y = 30; y < 38; ++y) {
        for (int x = 30; x < 38; ++x) img.at(y, x) = 0.9;
    }
    const InstanceMaskSet two = segment_otsu(img);
    CHECK(two.masks.size() == 2);
    for (const Mask& m : two.masks) CHECK(m.score == 1.0);

    // A bright frame touching both squares merges everything (8-connected).
    GrayImage framed = img;
    for (int i = 0; i < 48; ++i) {
        framed.at(13, i) = 0.9;  // row through the first square, reaching the second's column
        framed.at(i, 30) = 0.9;
    }
    const InstanceMaskSet one = segment_otsu(framed);
    CHECK(one.masks.size() == 1);

    // Diagonal-only contact still connects under 8-connectivity.
    GrayImage diag = GrayImage::constant(48, 48, 0.1);
    for (int y = 6; y < 12; ++y)
        for (int x = 6; x < 12; ++x) diag.at(y, x) = 0.9;
    for (int y = 12; y < 18; ++y)
        for (int x = 12; x < 18; ++x) diag.at(y, x) = 0.9;
    CHECK(segment_otsu(diag).masks.size() == 1);

    // A 9-pixel blob is dropped by the default 16-pixel area filter.
    GrayImage small = GrayImage::constant(48, 48, 0.1);
    for (int y = 20; y < 23; ++y)
        for (int x = 20; x < 23; ++x) small.at(y, x) = 0.9;
    CHECK(segment_otsu(small).masks.empty());
    CHECK(segment_otsu(small, 9).masks.size() == 1);
}

TEST_CASE("segment_otsu output masks are pairwise disjoint") {
    std::vector<std::vector<std::uint32_t>> truth;
    const GrayImage img = testutil::synthetic_blob_image(128, 128, 8, 5, &truth);
    const InstanceMaskSet masks = segment_otsu(img);
    std::set<std::uint32_t> seen;
    for (const Mask& m : masks.masks) {
        for (std::uint32_t p : m.pixels) CHECK(seen.insert(p).second);
    }
}

TEST_CASE("mask_iou") {
    const Mask a = rect_mask(32, 4, 4, 2, 2);
    CHECK(mask_iou(a, a) == doctest::Approx(1.0));
    const Mask far = rect_mask(32, 20, 20, 2, 2);
    CHECK(mask_iou(a, far) == doctest::Approx(0.0));
    // 2x2 square against its 1-px horizontal shift: overlap 2, union 6.
    const Mask shifted = rect_mask(32, 5, 4, 2, 2);
    CHECK(mask_iou(a, shifted) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("average precision: the three pinned constructions") {
    InstanceMaskSet truth;
    truth.width = truth.height = 64;
    truth.masks = {rect_mask(64, 4, 4, 8, 8), rect_mask(64, 40, 40, 8, 8)};

    // Perfect predictions, arbitrary scores -> 100 at every threshold.
    InstanceMaskSet perfect = truth;
    perfect.masks[0].score = 0.3;
    perfect.masks[1].score = 0.9;
    const ApReport rp = ap_report(perfect, truth);
    CHECK(rp.ap50 == doctest::Approx(100.0));
    CHECK(rp.ap75 == doctest::Approx(100.0));
    CHECK(rp.ap_coco == doctest::Approx(100.0));

    // No predictions at all -> 0.
    InstanceMaskSet none;
    none.width = none.height = 64;
    CHECK(average_precision(none, truth, 0.5) == doctest::Approx(0.0));

    // TP(0.9), FP(0.8), TP(0.7): 101-point AP = (51 + 50*2/3)/101 * 100.
    InstanceMaskSet mixed;
    mixed.width = mixed.height = 64;
    mixed.masks = {rect_mask(64, 4, 4, 8, 8, 0.9), rect_mask(64, 20, 20, 8, 8, 0.8),
                   rect_mask(64, 40, 40, 8, 8, 0.7)};
    const double ap = average_precision(mixed, truth, 0.5);
    CHECK(std::abs(ap - 83.5) < 0.5);

    // IoU exactly 0.6 straddles AP50 and AP75.
    InstanceMaskSet straddle;
    straddle.width = straddle.height = 64;
    straddle.masks = {rect_mask(64, 6, 4, 8, 10), rect_mask(64, 42, 40, 8, 10)};
    InstanceMaskSet wide_truth;
    wide_truth.width = wide_truth.height = 64;
    wide_truth.masks = {rect_mask(64, 4, 4, 8, 10), rect_mask(64, 40, 40, 8, 10)};
    CHECK(mask_iou(straddle.masks[0], wide_truth.masks[0]) == doctest::Approx(0.6));
    const ApReport rs = ap_report(straddle, wide_truth);
    CHECK(rs.ap50 == doctest::Approx(100.0));
    CHECK(rs.ap75 == doctest::Approx(0.0));

    // Empty-vs-empty is vacuously perfect.
    InstanceMaskSet empty;
    empty.width = empty.height = 64;
    CHECK(average_precision(none, empty, 0.5) == doctest::Approx(100.0));
    CHECK(average_precision(mixed, empty, 0.5) == doctest::Approx(0.0));
}

TEST_CASE("ap properties: score-transform invariance, threshold monotonicity") {
    std::vector<std::vector<std::uint32_t>> blob_pixels;
    const GrayImage img = testutil::synthetic_blob_image(128, 128, 10, 9, &blob_pixels);
    InstanceMaskSet truth;
    truth.width = truth.height = 128;
    for (auto& pixels : blob_pixels) {
        Mask m;
        m.pixels = pixels;
        std::sort(m.pixels.begin(), m.pixels.end());
        truth.masks.push_back(std::move(m));
    }

    InstanceMaskSet pred = segment_otsu(img);
    SplitMix64 rng(2);
    for (Mask& m : pred.masks) m.score = 0.2 + 0.6 * rng.uniform();

    InstanceMaskSet transformed = pred;
    for (Mask& m : transformed.masks) m.score = std::exp(3.0 * m.score) / 50.0;  // monotone

    double last = 101.0;
    for (int k = 0; k < 10; ++k) {
        const double thresh = 0.5 + 0.05 * k;
        const double ap = average_precision(pred, truth, thresh);
        CHECK(ap == doctest::Approx(average_precision(transformed, truth, thresh)));
        CHECK(ap <= last + 1e-9);
        last = ap;
    }

    // ap_coco equals the mean of the ten per-threshold values.
    const ApReport report = ap_report(pred, truth);
    double mean = 0.0;
    for (int k = 0; k < 10; ++k) mean += average_precision(pred, truth, 0.5 + 0.05 * k);
    CHECK(report.ap_coco == doctest::Approx(mean / 10.0));
}
