#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absim/optics.hpp"

namespace absim {

enum class Category { Single, Mixed };

enum class AberrationType {
    Astigmatism,
    Coma,
    Spherical,
    Trefoil,
    Mixed4_6,
    Mixed4_8,
    Mixed4_13,
    Mixed4_18,
};

inline constexpr int kTypeCount = 8;

// The eight labeled amplitude levels; class index 8 is "none" (mixed).
inline constexpr std::array<double, 8> kAmplitudeLevels{0.05, 0.1, 0.15, 0.2,
                                                        0.4,  0.6, 0.8,  1.0};
inline constexpr int kAmplitudeClassCount = 9;

std::string to_string(Category c);
std::string to_string(AberrationType t);
Category category_from_string(const std::string& s);
AberrationType type_from_string(const std::string& s);
bool is_mixed_type(AberrationType t);

// (category, aberration type, amplitude class). Mixed labels carry no
// amplitude class (nullopt); single labels carry one of kAmplitudeLevels.
struct AberrationLabel {
    Category category = Category::Single;
    AberrationType type = AberrationType::Astigmatism;
    std::optional<double> amplitude_class;

    void validate() const;  // throws ConfigError on inconsistent triples
    int type_index() const { return static_cast<int>(type); }
    int category_index() const { return static_cast<int>(category); }
    int amplitude_class_index() const;  // 0..7 for levels, 8 for none
};

AberrationLabel make_single_label(AberrationType t, double amplitude_class);
AberrationLabel make_mixed_label(AberrationType t);

struct ManifestRecord {
    std::string path;  // relative to the manifest's directory
    AberrationLabel label;
    ZernikeCoefficients coeffs;
    std::uint64_t base_seed = 0;
    std::uint64_t item_seed = 0;
    bool undersampled = false;  // filled in at render time
};

struct DatasetManifest {
    std::uint64_t base_seed = 0;
    std::vector<ManifestRecord> records;
};

// Seed-derivation rule: item_seed = mix64(base_seed ^ record_index). Test
// sets offset their indices by kTestSeedNamespace so train and test item
// seeds never collide for a shared base seed.
inline constexpr std::uint64_t kTestSeedNamespace = 1ull << 32;
std::uint64_t item_seed_for(std::uint64_t base_seed, std::uint64_t record_index);

// How a scalar amplitude is assigned to a paired-index aberration.
// Full puts the labeled amplitude on both indices; HalfRoot2 divides it
// by sqrt(2) so the pair's quadrature sum equals the label.
enum class AmplitudeSplit { Full, HalfRoot2 };

// The 8-level single-aberration grid crossed with the four single types;
// amplitudes ascending within each type, 32 entries.
std::vector<std::pair<AberrationType, double>> single_schedule();

// Coefficients for one single-type aberration: Astigmatism -> {4, 5},
// Coma -> {6, 7}, Spherical -> {8}, Trefoil -> {9, 10}.
ZernikeCoefficients coefficients_for(AberrationType type, double amplitude,
                                     AmplitudeSplit split = AmplitudeSplit::Full);

// Inclusive Wyant index range of a mixed type: {4,6}, {4,8}, {4,13}, {4,18}.
std::pair<int, int> mixed_index_range(AberrationType type);

// Per-index amplitude |N(0, 1/3)| clipped to [0, 1], drawn from the seeded
// stream in ascending index order.
ZernikeCoefficients mixed_sample(AberrationType mixed_type, std::uint64_t seed);

// 192 single records (per type: the four fine levels once, plus 11 samples
// at 0.01 steps within +-0.05 of each base in {0.4, 0.6, 0.8, 1.0}) and
// 2000 mixed records (500 per order range).
DatasetManifest plcm_train_set(std::uint64_t base_seed);

// 20 single records (5 per type, level drawn from the 8-level grid) and
// 200 mixed records (50 per order range); seeds disjoint from the train
// namespace.
DatasetManifest plcm_test_set(std::uint64_t base_seed);

struct RenderOptions {
    bool png_preview = false;
    std::filesystem::path source_image_dir;  // optional: also write degraded images
};

// Renders every record's PSF under out_dir as <path>.f32 + .json sidecar,
// updates the records' undersampled flags, and writes manifest.jsonl.
// Re-running with the same seed reproduces byte-identical files.
void render_manifest(DatasetManifest& manifest, const OpticalConfig& config,
                     const std::filesystem::path& out_dir, const RenderOptions& options = {});

void write_manifest_jsonl(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest_jsonl(const std::filesystem::path& path);

}  // namespace absim
