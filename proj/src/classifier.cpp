#include "absim/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "absim/errors.hpp"
#include "absim/image_io.hpp"
#include "absim/rng.hpp"

namespace absim {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// 3x3 same-padding convolution, out[oc] = b[oc] + sum_ic w[oc][ic] * in[ic].
// Written as shifted row accumulations so the inner loops stay contiguous.
void conv3x3_forward(const double* in, int in_c, int side, const Tensor& w, const Tensor& b,
                     double* out, int out_c) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int oc = 0; oc < out_c; ++oc) {
        std::fill(out + oc * plane, out + (oc + 1) * plane, b.v[oc]);
    }
    for (int oc = 0; oc < out_c; ++oc) {
        double* out_plane = out + oc * plane;
        for (int ic = 0; ic < in_c; ++ic) {
            const double* in_plane = in + ic * plane;
            const double* wk = &w.v[(static_cast<std::size_t>(oc) * in_c + ic) * 9];
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const int y0 = std::max(0, -dy);
                const int y1 = side - std::max(0, dy);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const int x0 = std::max(0, -dx);
                    const int x1 = side - std::max(0, dx);
                    const double wv = wk[ky * 3 + kx];
                    for (int y = y0; y < y1; ++y) {
                        double* orow = out_plane + static_cast<std::size_t>(y) * side;
                        const double* irow =
                            in_plane + static_cast<std::size_t>(y + dy) * side + dx;
                        for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
                    }
                }
            }
        }
    }
}

// Gradients of the same convolution: accumulates into dw, db and
// (when dins is non-null) din.
void conv3x3_backward(const double* in, int in_c, int side, const Tensor& w, const double* dout,
                      int out_c, Tensor& dw, Tensor& db, double* din) {
    const std::size_t plane = static_cast<std::size_t>(side) * side;
    for (int oc = 0; oc < out_c; ++oc) {
        const double* dout_plane = dout + oc * plane;
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += dout_plane[i];
        db.v[oc] += acc;

        for (int ic = 0; ic < in_c; ++ic) {
            const double* in_plane = in + ic * plane;
            double* dwk = &dw.v[(static_cast<std::size_t>(oc) * in_c + ic) * 9];
            const double* wk = &w.v[(static_cast<std::size_t>(oc) * in_c + ic) * 9];
            for (int ky = 0; ky < 3; ++ky) {
                const int dy = ky - 1;
                const int y0 = std::max(0, -dy);
                const int y1 = side - std::max(0, dy);
                for (int kx = 0; kx < 3; ++kx) {
                    const int dx = kx - 1;
                    const int x0 = std::max(0, -dx);
                    const int x1 = side - std::max(0, dx);
                    const double wv = wk[ky * 3 + kx];
                    double grad_w = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const double* drow = dout_plane + static_cast<std::size_t>(y) * side;
                        const double* irow =
                            in_plane + static_cast<std::size_t>(y + dy) * side + dx;
                        double* dirow =
                            din ? din + ic * plane + static_cast<std::size_t>(y + dy) * side + dx
                                : nullptr;
                        for (int x = x0; x < x1; ++x) {
                            grad_w += drow[x] * irow[x];
                            if (dirow) dirow[x] += wv * drow[x];
                        }
                    }
                    dwk[ky * 3 + kx] += grad_w;
                }
            }
        }
    }
}

void avgpool2_forward(const double* in, int channels, int side, double* out) {
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* ip = in + static_cast<std::size_t>(c) * side * side;
        double* op = out + static_cast<std::size_t>(c) * half * half;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                const double* r0 = ip + static_cast<std::size_t>(2 * y) * side + 2 * x;
                const double* r1 = r0 + side;
                op[static_cast<std::size_t>(y) * half + x] =
                    0.25 * (r0[0] + r0[1] + r1[0] + r1[1]);
            }
        }
    }
}

void avgpool2_backward(const double* dout, int channels, int side, double* din) {
    const int half = side / 2;
    for (int c = 0; c < channels; ++c) {
        const double* dp = dout + static_cast<std::size_t>(c) * half * half;
        double* ip = din + static_cast<std::size_t>(c) * side * side;
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                const double g = 0.25 * dp[static_cast<std::size_t>(y) * half + x];
                double* r0 = ip + static_cast<std::size_t>(2 * y) * side + 2 * x;
                double* r1 = r0 + side;
                r0[0] = r0[1] = r1[0] = r1[1] = g;
            }
        }
    }
}

struct BlockCache {
    std::vector<double> input;     // conv input, in_c * side^2
    std::vector<double> tanh_out;  // out_c * side^2
    int side = 0;
    int in_c = 0;
    int out_c = 0;
};

struct ForwardCache {
    std::array<BlockCache, 3> blocks;
    std::vector<double> features;  // 32
    int feature_side = 0;
};

const Tensor& conv_w(const ClassifierModel& m, int block) {
    return block == 0 ? m.conv1_w : block == 1 ? m.conv2_w : m.conv3_w;
}
const Tensor& conv_b(const ClassifierModel& m, int block) {
    return block == 0 ? m.conv1_b : block == 1 ? m.conv2_b : m.conv3_b;
}

HeadLogits forward_cached(const ClassifierModel& model, const std::vector<double>& image,
                          int side, ForwardCache* cache) {
    if (side < 8 || side % 8 != 0) {
        throw ConfigError("classifier input side must be a positive multiple of 8");
    }
    if (image.size() != static_cast<std::size_t>(side) * side) {
        throw ConfigError("classifier input size does not match side " + std::to_string(side));
    }

    std::vector<double> current = image;  // 1 channel
    int cur_side = side;
    int cur_c = 1;
    ForwardCache local;
    ForwardCache& fc = cache ? *cache : local;

    for (int blk = 0; blk < 3; ++blk) {
        const int out_c = ClassifierModel::kChannels[blk];
        BlockCache& bc = fc.blocks[blk];
        bc.input = current;
        bc.side = cur_side;
        bc.in_c = cur_c;
        bc.out_c = out_c;

        std::vector<double> z(static_cast<std::size_t>(out_c) * cur_side * cur_side);
        conv3x3_forward(current.data(), cur_c, cur_side, conv_w(model, blk), conv_b(model, blk),
                        z.data(), out_c);
        for (double& v : z) v = std::tanh(v);
        bc.tanh_out = z;

        std::vector<double> pooled(static_cast<std::size_t>(out_c) * (cur_side / 2) *
                                   (cur_side / 2));
        avgpool2_forward(z.data(), out_c, cur_side, pooled.data());
        current = std::move(pooled);
        cur_side /= 2;
        cur_c = out_c;
    }

    // Global average pool to the 32-wide feature vector.
    const std::size_t plane = static_cast<std::size_t>(cur_side) * cur_side;
    std::vector<double> features(cur_c);
    for (int c = 0; c < cur_c; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < plane; ++i) acc += current[c * plane + i];
        features[c] = acc / static_cast<double>(plane);
    }
    fc.features = features;
    fc.feature_side = cur_side;

    HeadLogits logits;
    const Tensor* head_w[3] = {&model.head_cat_w, &model.head_type_w, &model.head_amp_w};
    const Tensor* head_b[3] = {&model.head_cat_b, &model.head_type_b, &model.head_amp_b};
    for (int h = 0; h < 3; ++h) {
        const int width = ClassifierModel::kHeadWidths[h];
        logits.heads[h].resize(width);
        for (int o = 0; o < width; ++o) {
            double acc = head_b[h]->v[o];
            const double* row = &head_w[h]->v[static_cast<std::size_t>(o) * features.size()];
            for (std::size_t i = 0; i < features.size(); ++i) acc += row[i] * features[i];
            logits.heads[h][o] = acc;
        }
    }
    return logits;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - peak);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

// Per-head loss and dL/dlogits for one sample.
double head_loss(const std::vector<double>& logits, int target, LossKind kind,
                 std::vector<double>& dlogits) {
    dlogits.assign(logits.size(), 0.0);
    if (kind == LossKind::CrossEntropy) {
        const std::vector<double> p = softmax(logits);
        for (std::size_t i = 0; i < p.size(); ++i) dlogits[i] = p[i];
        dlogits[target] -= 1.0;
        return -std::log(std::max(p[target], 1e-300));
    }
    // MSE against the one-hot target, mean over the head width.
    const double inv = 1.0 / static_cast<double>(logits.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double diff = logits[i] - (static_cast<int>(i) == target ? 1.0 : 0.0);
        loss += diff * diff * inv;
        dlogits[i] = 2.0 * diff * inv;
    }
    return loss;
}

std::array<int, 3> targets_of(const AberrationLabel& label) {
    return {label.category_index(), label.type_index(), label.amplitude_class_index()};
}

// Backpropagates one sample's head gradients (already scaled) into grads.
void backward_sample(const ClassifierModel& model, const ForwardCache& fc,
                     const std::array<std::vector<double>, 3>& dlogits,
                     std::vector<Tensor>& grads) {
    // parameters() order: conv1_w, conv1_b, conv2_w, conv2_b, conv3_w,
    // conv3_b, head_cat_w, head_cat_b, head_type_w, head_type_b,
    // head_amp_w, head_amp_b.
    const std::size_t n_feat = fc.features.size();
    std::vector<double> dfeat(n_feat, 0.0);
    const Tensor* head_w[3] = {&model.head_cat_w, &model.head_type_w, &model.head_amp_w};
    for (int h = 0; h < 3; ++h) {
        Tensor& dw = grads[6 + 2 * h];
        Tensor& db = grads[7 + 2 * h];
        for (std::size_t o = 0; o < dlogits[h].size(); ++o) {
            const double g = dlogits[h][o];
            db.v[o] += g;
            const double* row = &head_w[h]->v[o * n_feat];
            double* dw_row = &dw.v[o * n_feat];
            for (std::size_t i = 0; i < n_feat; ++i) {
                dw_row[i] += g * fc.features[i];
                dfeat[i] += g * row[i];
            }
        }
    }

    // GAP backward: every spatial cell of channel c receives dfeat[c]/plane.
    const int s3 = fc.feature_side;
    const std::size_t plane3 = static_cast<std::size_t>(s3) * s3;
    std::vector<double> dcurrent(n_feat * plane3);
    for (std::size_t c = 0; c < n_feat; ++c) {
        const double g = dfeat[c] / static_cast<double>(plane3);
        std::fill(dcurrent.begin() + c * plane3, dcurrent.begin() + (c + 1) * plane3, g);
    }

    for (int blk = 2; blk >= 0; --blk) {
        const BlockCache& bc = fc.blocks[blk];
        const std::size_t plane = static_cast<std::size_t>(bc.side) * bc.side;

        // Pool backward into the tanh output frame, then through tanh.
        std::vector<double> dz(static_cast<std::size_t>(bc.out_c) * plane);
        avgpool2_backward(dcurrent.data(), bc.out_c, bc.side, dz.data());
        for (std::size_t i = 0; i < dz.size(); ++i) {
            const double a = bc.tanh_out[i];
            dz[i] *= 1.0 - a * a;
        }

        std::vector<double> din;
        double* din_ptr = nullptr;
        if (blk > 0) {
            din.assign(static_cast<std::size_t>(bc.in_c) * plane, 0.0);
            din_ptr = din.data();
        }
        conv3x3_backward(bc.input.data(), bc.in_c, bc.side, conv_w(model, blk), dz.data(),
                         bc.out_c, grads[2 * blk], grads[2 * blk + 1], din_ptr);
        if (blk > 0) dcurrent = std::move(din);
    }
}

double loss_and_optional_gradients(const ClassifierModel& model,
                                   std::span<const Example* const> batch, LossKind kind,
                                   std::vector<Tensor>* grads) {
    if (batch.empty()) throw ConfigError("empty batch");
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const Example* ex : batch) {
        ex->label.validate();
        ForwardCache fc;
        const HeadLogits logits = forward_cached(model, ex->image, ex->side, &fc);
        const std::array<int, 3> targets = targets_of(ex->label);

        std::array<std::vector<double>, 3> dlogits;
        double sample_loss = 0.0;
        for (int h = 0; h < 3; ++h) {
            sample_loss += head_loss(logits.heads[h], targets[h], kind, dlogits[h]);
            if (grads) {
                for (double& g : dlogits[h]) g *= inv_batch;
            }
        }
        total += sample_loss * inv_batch;
        if (grads) backward_sample(model, fc, dlogits, *grads);
    }
    return total;
}

std::vector<Tensor> zero_gradients(const ClassifierModel& model) {
    std::vector<Tensor> grads;
    for (const Tensor* p : model.parameters()) grads.push_back(Tensor::zeros(p->shape));
    return grads;
}

void write_u32le(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape) {
    Tensor t;
    t.shape = std::move(shape);
    std::size_t n = 1;
    for (int d : t.shape) n *= static_cast<std::size_t>(d);
    t.v.assign(n, 0.0);
    return t;
}

ClassifierModel::ClassifierModel() {
    conv1_w = Tensor::zeros({kChannels[0], 1, 3, 3});
    conv1_b = Tensor::zeros({kChannels[0]});
    conv2_w = Tensor::zeros({kChannels[1], kChannels[0], 3, 3});
    conv2_b = Tensor::zeros({kChannels[1]});
    conv3_w = Tensor::zeros({kChannels[2], kChannels[1], 3, 3});
    conv3_b = Tensor::zeros({kChannels[2]});
    head_cat_w = Tensor::zeros({kHeadWidths[0], kChannels[2]});
    head_cat_b = Tensor::zeros({kHeadWidths[0]});
    head_type_w = Tensor::zeros({kHeadWidths[1], kChannels[2]});
    head_type_b = Tensor::zeros({kHeadWidths[1]});
    head_amp_w = Tensor::zeros({kHeadWidths[2], kChannels[2]});
    head_amp_b = Tensor::zeros({kHeadWidths[2]});
}

void ClassifierModel::init(std::uint64_t seed) {
    SplitMix64 rng(mix64(seed));
    auto fill = [&rng](Tensor& t, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : t.v) v = (2.0 * rng.uniform() - 1.0) * bound;
    };
    fill(conv1_w, 1 * 9);
    fill(conv2_w, kChannels[0] * 9);
    fill(conv3_w, kChannels[1] * 9);
    fill(head_cat_w, kChannels[2]);
    fill(head_type_w, kChannels[2]);
    fill(head_amp_w, kChannels[2]);
    for (Tensor* b : {&conv1_b, &conv2_b, &conv3_b, &head_cat_b, &head_type_b, &head_amp_b}) {
        std::fill(b->v.begin(), b->v.end(), 0.0);
    }
    if (parameter_count() >= 50000) {
        throw ConfigError("classifier exceeds the 50k parameter budget");
    }
}

std::vector<Tensor*> ClassifierModel::parameters() {
    return {&conv1_w,    &conv1_b,    &conv2_w,     &conv2_b,     &conv3_w,    &conv3_b,
            &head_cat_w, &head_cat_b, &head_type_w, &head_type_b, &head_amp_w, &head_amp_b};
}

std::vector<const Tensor*> ClassifierModel::parameters() const {
    return {&conv1_w,    &conv1_b,    &conv2_w,     &conv2_b,     &conv3_w,    &conv3_b,
            &head_cat_w, &head_cat_b, &head_type_w, &head_type_b, &head_amp_w, &head_amp_b};
}

std::vector<std::string> ClassifierModel::parameter_names() const {
    return {"conv1_w",    "conv1_b",    "conv2_w",     "conv2_b",     "conv3_w",    "conv3_b",
            "head_cat_w", "head_cat_b", "head_type_w", "head_type_b", "head_amp_w", "head_amp_b"};
}

std::size_t ClassifierModel::parameter_count() const {
    std::size_t n = 0;
    for (const Tensor* p : parameters()) n += p->size();
    return n;
}

std::vector<double> normalize_input(const std::vector<double>& pixels) {
    const double n = static_cast<double>(pixels.size());
    double mean = 0.0;
    for (double v : pixels) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : pixels) var += (v - mean) * (v - mean);
    var /= n;
    const double inv_std = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
    std::vector<double> out(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) out[i] = (pixels[i] - mean) * inv_std;
    return out;
}

HeadLogits forward(const ClassifierModel& model, const std::vector<double>& image64) {
    if (image64.size() != static_cast<std::size_t>(ClassifierModel::kInputSide) *
                              ClassifierModel::kInputSide) {
        throw ConfigError("classifier expects a 64x64 input");
    }
    return forward_cached(model, image64, ClassifierModel::kInputSide, nullptr);
}

HeadLogits forward_any(const ClassifierModel& model, const std::vector<double>& image, int side) {
    return forward_cached(model, image, side, nullptr);
}

double batch_loss(const ClassifierModel& model, std::span<const Example> batch, LossKind kind) {
    std::vector<const Example*> ptrs;
    ptrs.reserve(batch.size());
    for (const Example& ex : batch) ptrs.push_back(&ex);
    return loss_and_optional_gradients(model, ptrs, kind, nullptr);
}

double batch_loss_and_gradients(const ClassifierModel& model, std::span<const Example> batch,
                                LossKind kind, std::vector<Tensor>& grads) {
    grads = zero_gradients(model);
    std::vector<const Example*> ptrs;
    ptrs.reserve(batch.size());
    for (const Example& ex : batch) ptrs.push_back(&ex);
    return loss_and_optional_gradients(model, ptrs, kind, &grads);
}

void TrainConfig::validate() const {
    if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must be in (0, 1]");
    if (decay_epochs < 1) throw ConfigError("decay interval must be >= 1");
}

double scheduled_learning_rate(const TrainConfig& cfg, int epoch) {
    return cfg.learning_rate * std::pow(cfg.decay, epoch / cfg.decay_epochs);
}

TrainLog train(ClassifierModel& model, std::vector<Example> examples, const TrainConfig& cfg) {
    cfg.validate();
    if (examples.empty()) throw ConfigError("no training examples");

    // Canonical order first: training must not depend on how the caller
    // happened to order the records.
    std::stable_sort(examples.begin(), examples.end(),
                     [](const Example& a, const Example& b) { return a.sort_key < b.sort_key; });

    std::vector<Tensor*> params = model.parameters();
    std::vector<Tensor> m_state, v_state;
    for (const Tensor* p : params) {
        m_state.push_back(Tensor::zeros(p->shape));
        v_state.push_back(Tensor::zeros(p->shape));
    }

    TrainLog log;
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    long long step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = scheduled_learning_rate(cfg, epoch);

        // Shuffle depends only on (seed, epoch, count).
        SplitMix64 rng(mix64(cfg.seed) + static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.below(i)]);
        }

        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const Example*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);

            std::vector<Tensor> grads = zero_gradients(model);
            const double loss = loss_and_optional_gradients(model, batch, cfg.loss, &grads);
            if (!std::isfinite(loss)) {
                throw NumericError("non-finite loss " + std::to_string(loss) + " at epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(start / cfg.batch_size));
            }
            epoch_loss_sum += loss * static_cast<double>(end - start);

            ++step;
            const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
            const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
            for (std::size_t t = 0; t < params.size(); ++t) {
                double* p = params[t]->v.data();
                double* g = grads[t].v.data();
                double* m = m_state[t].v.data();
                double* v = v_state[t].v.data();
                const std::size_t n = params[t]->size();
                for (std::size_t i = 0; i < n; ++i) {
                    m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
                    v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                    const double m_hat = m[i] / bias1;
                    const double v_hat = v[i] / bias2;
                    p[i] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
                }
            }
        }
        log.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(examples.size()));
        log.epoch_lr.push_back(lr);
    }
    return log;
}

EvalReport evaluate(const ClassifierModel& model, std::span<const Example> examples) {
    if (examples.empty()) throw ConfigError("no evaluation examples");

    EvalReport report;
    report.confusion.category.assign(2, std::vector<int>(2, 0));
    report.confusion.type.assign(8, std::vector<int>(8, 0));
    report.confusion.amplitude.assign(9, std::vector<int>(9, 0));

    int inconsistent = 0;
    for (const Example& ex : examples) {
        ex.label.validate();
        const HeadLogits logits = forward_cached(model, ex.image, ex.side, nullptr);
        std::array<int, 3> pred{};
        for (int h = 0; h < 3; ++h) {
            pred[h] = static_cast<int>(std::max_element(logits.heads[h].begin(),
                                                        logits.heads[h].end()) -
                                       logits.heads[h].begin());
        }
        const std::array<int, 3> truth = targets_of(ex.label);
        report.confusion.category[truth[0]][pred[0]] += 1;
        report.confusion.type[truth[1]][pred[1]] += 1;
        report.confusion.amplitude[truth[2]][pred[2]] += 1;

        const bool pred_mixed_cat = pred[0] == static_cast<int>(Category::Mixed);
        const bool pred_mixed_type = is_mixed_type(static_cast<AberrationType>(pred[1]));
        if (pred_mixed_cat != pred_mixed_type) ++inconsistent;
    }
    report.confusion.total = static_cast<int>(examples.size());
    report.head_inconsistency_rate =
        static_cast<double>(inconsistent) / static_cast<double>(examples.size());

    const std::vector<std::vector<int>>* mats[3] = {
        &report.confusion.category, &report.confusion.type, &report.confusion.amplitude};
    for (int h = 0; h < 3; ++h) {
        const auto& mat = *mats[h];
        const int classes = static_cast<int>(mat.size());
        long long trace = 0;
        for (int c = 0; c < classes; ++c) trace += mat[c][c];
        report.accuracy[h] = static_cast<double>(trace) / static_cast<double>(examples.size());

        // Macro precision; a class never predicted contributes 0.
        double precision_sum = 0.0;
        for (int c = 0; c < classes; ++c) {
            long long predicted = 0;
            for (int r = 0; r < classes; ++r) predicted += mat[r][c];
            if (predicted > 0) {
                precision_sum += static_cast<double>(mat[c][c]) / static_cast<double>(predicted);
            }
        }
        report.macro_precision[h] = precision_sum / static_cast<double>(classes);
    }
    return report;
}

void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    nlohmann::ordered_json header;
    header["input_side"] = ClassifierModel::kInputSide;
    header["head_widths"] = ClassifierModel::kHeadWidths;
    nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
    const auto names = model.parameter_names();
    const auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        tensors.push_back({{"name", names[i]}, {"shape", params[i]->shape}});
    }
    header["tensors"] = tensors;
    const std::string header_str = header.dump();

    out.write("ABSIMNN1", 8);
    write_u32le(out, static_cast<std::uint32_t>(header_str.size()));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    for (const Tensor* p : params) {
        for (double v : p->v) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            unsigned char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>((bits >> (8 * k)) & 0xff);
            out.write(reinterpret_cast<const char*>(b), 8);
        }
    }
    if (!out) throw IoError("short write to " + path.string());
}

ClassifierModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, "ABSIMNN1", 8) != 0) {
        throw IoError(path.string() + ": bad checkpoint magic (expected ABSIMNN1)", 0);
    }
    unsigned char len_bytes[4];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 4)) {
        throw IoError(path.string() + ": truncated header length", 8);
    }
    const std::uint32_t header_len = static_cast<std::uint32_t>(len_bytes[0]) |
                                     (static_cast<std::uint32_t>(len_bytes[1]) << 8) |
                                     (static_cast<std::uint32_t>(len_bytes[2]) << 16) |
                                     (static_cast<std::uint32_t>(len_bytes[3]) << 24);
    if (header_len > (1u << 20)) throw IoError(path.string() + ": implausible header size", 8);
    std::string header_str(header_len, '\0');
    if (!in.read(header_str.data(), header_len)) {
        throw IoError(path.string() + ": truncated header", 12);
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_str);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": header is not valid JSON: " + e.what());
    }

    ClassifierModel model;
    const auto names = model.parameter_names();
    const auto params = model.parameters();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != params.size()) {
        throw IoError(path.string() + ": unexpected tensor count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (tensors[i].at("name").get<std::string>() != names[i]) {
            throw IoError(path.string() + ": tensor order mismatch at " + names[i]);
        }
        const std::vector<int> shape = tensors[i].at("shape").get<std::vector<int>>();
        if (shape != params[i]->shape) {
            throw IoError(path.string() + ": shape mismatch for " + names[i]);
        }
        for (double& v : params[i]->v) {
            unsigned char b[8];
            if (!in.read(reinterpret_cast<char*>(b), 8)) {
                throw IoError(path.string() + ": truncated tensor data for " + names[i]);
            }
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
            std::memcpy(&v, &bits, 8);
        }
    }
    return model;
}

std::vector<Example> load_examples(const DatasetManifest& manifest,
                                   const std::filesystem::path& base_dir) {
    std::vector<Example> examples;
    examples.reserve(manifest.records.size());
    for (const ManifestRecord& rec : manifest.records) {
        const F32Grid grid = read_f32_grid(base_dir / rec.path);
        if (grid.width != grid.height ||
            grid.width != static_cast<std::uint32_t>(ClassifierModel::kInputSide)) {
            throw ConfigError(rec.path + ": classifier inputs must be " +
                              std::to_string(ClassifierModel::kInputSide) + "x" +
                              std::to_string(ClassifierModel::kInputSide) + ", got " +
                              std::to_string(grid.width) + "x" + std::to_string(grid.height));
        }
        Example ex;
        ex.side = ClassifierModel::kInputSide;
        std::vector<double> pixels(grid.data.begin(), grid.data.end());
        ex.image = normalize_input(pixels);
        ex.label = rec.label;
        ex.sort_key = rec.item_seed;
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace absim
