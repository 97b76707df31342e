#include "absim/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "absim/errors.hpp"

namespace absim {

namespace {

int quantize255(double v) {
    return std::clamp(static_cast<int>(std::lround(v * 255.0)), 0, 255);
}

}  // namespace

int otsu_threshold(const GrayImage& image) {
    std::array<std::int64_t, 256> hist{};
    for (double v : image.pixels) hist[quantize255(v)] += 1;

    const double total = static_cast<double>(image.pixels.size());
    double total_mass = 0.0;
    for (int i = 0; i < 256; ++i) total_mass += static_cast<double>(hist[i]) * i;

    // Between-class variance w0*w1*(mu0-mu1)^2 for the split (<= t | > t);
    // ties resolve to the lowest level.
    int best_level = -1;
    double best_var = 0.0;
    double w0 = 0.0;
    double mass0 = 0.0;
    for (int t = 0; t < 256; ++t) {
        w0 += static_cast<double>(hist[t]);
        mass0 += static_cast<double>(hist[t]) * t;
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = mass0 / w0;
        const double mu1 = (total_mass - mass0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_level = t;
        }
    }
    if (best_level < 0) {
        throw NumericError("degenerate histogram: image has a single gray level");
    }
    return best_level;
}

InstanceMaskSet segment_otsu(const GrayImage& image, int min_area) {
    const int level = otsu_threshold(image);
    const int w = image.width;
    const int h = image.height;

    std::vector<char> fg(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = quantize255(image.pixels[i]) > level;

    InstanceMaskSet result;
    result.width = w;
    result.height = h;

    std::vector<char> seen(fg.size(), 0);
    std::vector<std::uint32_t> stack;
    for (std::size_t start = 0; start < fg.size(); ++start) {
        if (!fg[start] || seen[start]) continue;
        // 8-connected flood fill.
        Mask mask;
        stack.assign(1, static_cast<std::uint32_t>(start));
        seen[start] = 1;
        while (!stack.empty()) {
            const std::uint32_t p = stack.back();
            stack.pop_back();
            mask.pixels.push_back(p);
            const int y = static_cast<int>(p) / w;
            const int x = static_cast<int>(p) % w;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const int ny = y + dy;
                    const int nx = x + dx;
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
                    if (fg[q] && !seen[q]) {
                        seen[q] = 1;
                        stack.push_back(static_cast<std::uint32_t>(q));
                    }
                }
            }
        }
        if (static_cast<int>(mask.pixels.size()) >= min_area) {
            std::sort(mask.pixels.begin(), mask.pixels.end());
            mask.score = 1.0;
            result.masks.push_back(std::move(mask));
        }
    }
    return result;
}

double mask_iou(const Mask& a, const Mask& b) {
    std::size_t inter = 0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.pixels.size() && ib < b.pixels.size()) {
        if (a.pixels[ia] == b.pixels[ib]) {
            ++inter;
            ++ia;
            ++ib;
        } else if (a.pixels[ia] < b.pixels[ib]) {
            ++ia;
        } else {
            ++ib;
        }
    }
    const std::size_t uni = a.pixels.size() + b.pixels.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double average_precision(const InstanceMaskSet& pred, const InstanceMaskSet& truth,
                         double iou_thresh) {
    if (truth.masks.empty()) return pred.masks.empty() ? 100.0 : 0.0;
    if (pred.masks.empty()) return 0.0;

    // Stable score ordering keeps ties deterministic by original index.
    std::vector<std::size_t> order(pred.masks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return pred.masks[l].score > pred.masks[r].score;
    });

    std::vector<char> truth_used(truth.masks.size(), 0);
    std::vector<char> is_tp;
    is_tp.reserve(order.size());
    for (const std::size_t pi : order) {
        double best_iou = iou_thresh;
        int best_t = -1;
        for (std::size_t ti = 0; ti < truth.masks.size(); ++ti) {
            if (truth_used[ti]) continue;
            const double iou = mask_iou(pred.masks[pi], truth.masks[ti]);
            if (iou >= best_iou) {
                best_iou = iou;
                best_t = static_cast<int>(ti);
            }
        }
        if (best_t >= 0) {
            truth_used[best_t] = 1;
            is_tp.push_back(1);
        } else {
            is_tp.push_back(0);
        }
    }

    const double n_truth = static_cast<double>(truth.masks.size());
    std::vector<double> recall, precision;
    int tp = 0, fp = 0;
    for (char f : is_tp) {
        tp += f;
        fp += 1 - f;
        recall.push_back(tp / n_truth);
        precision.push_back(static_cast<double>(tp) / (tp + fp));
    }

    // 101-point interpolation: p(r) = max precision at recall >= r.
    double ap = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double r = k / 100.0;
        double p = 0.0;
        for (std::size_t i = 0; i < recall.size(); ++i) {
            if (recall[i] >= r) p = std::max(p, precision[i]);
        }
        ap += p;
    }
    return ap / 101.0 * 100.0;
}

ApReport ap_report(const InstanceMaskSet& pred, const InstanceMaskSet& truth) {
    ApReport report;
    report.ap50 = average_precision(pred, truth, 0.50);
    report.ap75 = average_precision(pred, truth, 0.75);
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) sum += average_precision(pred, truth, 0.50 + 0.05 * k);
    report.ap_coco = sum / 10.0;
    return report;
}

}  // namespace absim
