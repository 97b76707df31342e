#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "absim/dataset.hpp"

namespace absim {

// Dense row-major parameter tensor.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> v;

    static Tensor zeros(std::vector<int> shape);
    std::size_t size() const { return v.size(); }
};

// Small PSF label classifier: three 3x3 conv blocks (1->8->16->32 channels,
// tanh, 2x average pooling), global average pooling to 32 features, and
// affine heads of widths 2 (category), 8 (type), 9 (amplitude class).
// Works on any square input with side divisible by 8; the dataset pipeline
// feeds 64x64 PSF grids.
class ClassifierModel {
  public:
    static constexpr int kInputSide = 64;
    static constexpr std::array<int, 3> kChannels{8, 16, 32};
    static constexpr std::array<int, 3> kHeadWidths{2, 8, 9};

    ClassifierModel();

    // Fan-in-scaled uniform init, fully determined by the seed.
    void init(std::uint64_t seed);

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::vector<std::string> parameter_names() const;
    std::size_t parameter_count() const;

    Tensor conv1_w, conv1_b;
    Tensor conv2_w, conv2_b;
    Tensor conv3_w, conv3_b;
    Tensor head_cat_w, head_cat_b;
    Tensor head_type_w, head_type_b;
    Tensor head_amp_w, head_amp_b;
};

// Logits of the three heads, in head order (2, 8, 9).
struct HeadLogits {
    std::array<std::vector<double>, 3> heads;
};

// One labeled input. `image` is the normalized pixel grid (zero mean, unit
// variance); `sort_key` fixes the canonical record order used by training.
struct Example {
    std::vector<double> image;
    int side = ClassifierModel::kInputSide;
    AberrationLabel label;
    std::uint64_t sort_key = 0;
};

// z-score normalization used on every PSF before it enters the network.
std::vector<double> normalize_input(const std::vector<double>& pixels);

// Deterministic forward pass; throws ConfigError on a non-64x64 input.
HeadLogits forward(const ClassifierModel& model, const std::vector<double>& image64);

// Forward pass for an arbitrary side (multiple of 8); the gradient checker
// runs on small inputs through this entry point.
HeadLogits forward_any(const ClassifierModel& model, const std::vector<double>& image, int side);

enum class LossKind { CrossEntropy, MseOneHot };

// Mean over the batch of the summed per-head losses.
double batch_loss(const ClassifierModel& model, std::span<const Example> batch, LossKind kind);

// batch_loss value plus analytic gradients, one tensor per parameter in
// parameters() order.
double batch_loss_and_gradients(const ClassifierModel& model, std::span<const Example> batch,
                                LossKind kind, std::vector<Tensor>& grads);

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double decay = 0.9;      // multiplier applied every decay_epochs
    int decay_epochs = 20;
    std::uint64_t seed = 1;
    LossKind loss = LossKind::CrossEntropy;

    void validate() const;
};

// Learning rate in effect for a (0-based) epoch under the step decay.
double scheduled_learning_rate(const TrainConfig& cfg, int epoch);

struct TrainLog {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_lr;
};

// Adam training loop. Records are put in canonical order (sorted by
// sort_key) and reshuffled each epoch from the config seed, so the result
// does not depend on the incoming record order. Throws NumericError with
// epoch/batch diagnostics if the loss ever goes non-finite.
TrainLog train(ClassifierModel& model, std::vector<Example> examples, const TrainConfig& cfg);

// Row = truth, column = argmax prediction.
struct ConfusionMatrices {
    std::vector<std::vector<int>> category;   // 2x2
    std::vector<std::vector<int>> type;       // 8x8
    std::vector<std::vector<int>> amplitude;  // 9x9
    int total = 0;
};

struct EvalReport {
    ConfusionMatrices confusion;
    std::array<double, 3> accuracy{};         // per head: trace/total
    std::array<double, 3> macro_precision{};  // classes without predictions count 0
    // Fraction of records whose predicted category disagrees with the
    // predicted type's single/mixed side.
    double head_inconsistency_rate = 0.0;
};

EvalReport evaluate(const ClassifierModel& model, std::span<const Example> examples);

// Checkpoint: magic "ABSIMNN1", little-endian uint32 header length, JSON
// header (tensor names/shapes), then raw little-endian float64 tensors in
// declaration order.
void save_checkpoint(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel load_checkpoint(const std::filesystem::path& path);

// Loads every record's rendered PSF (f32 grid next to the manifest),
// normalizes it, and keys it by item_seed.
std::vector<Example> load_examples(const DatasetManifest& manifest,
                                   const std::filesystem::path& base_dir);

}  // namespace absim
