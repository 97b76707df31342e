#include "absim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "absim/errors.hpp"
#include "absim/image.hpp"
#include "absim/image_io.hpp"
#include "absim/parallel.hpp"
#include "absim/rng.hpp"

namespace absim {

namespace {

constexpr std::array<AberrationType, 4> kSingleTypes{
    AberrationType::Astigmatism, AberrationType::Coma, AberrationType::Spherical,
    AberrationType::Trefoil};
constexpr std::array<AberrationType, 4> kMixedTypes{
    AberrationType::Mixed4_6, AberrationType::Mixed4_8, AberrationType::Mixed4_13,
    AberrationType::Mixed4_18};

// Amplitudes are carried as integer hundredths while schedules are built,
// so 0.4 - 0.05 comes out as exactly 0.35.
double hundredths(int h) { return h / 100.0; }

std::string record_file_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "psf_%06zu.f32", index);
    return buf;
}

}  // namespace

std::string to_string(Category c) {
    return c == Category::Single ? "single" : "mixed";
}

std::string to_string(AberrationType t) {
    switch (t) {
        case AberrationType::Astigmatism: return "astigmatism";
        case AberrationType::Coma: return "coma";
        case AberrationType::Spherical: return "spherical";
        case AberrationType::Trefoil: return "trefoil";
        case AberrationType::Mixed4_6: return "mixed4_6";
        case AberrationType::Mixed4_8: return "mixed4_8";
        case AberrationType::Mixed4_13: return "mixed4_13";
        case AberrationType::Mixed4_18: return "mixed4_18";
    }
    throw ConfigError("unknown aberration type");
}

Category category_from_string(const std::string& s) {
    if (s == "single") return Category::Single;
    if (s == "mixed") return Category::Mixed;
    throw ConfigError("unknown category '" + s + "'");
}

AberrationType type_from_string(const std::string& s) {
    for (int i = 0; i < kTypeCount; ++i) {
        const auto t = static_cast<AberrationType>(i);
        if (to_string(t) == s) return t;
    }
    throw ConfigError("unknown aberration type '" + s + "'");
}

bool is_mixed_type(AberrationType t) {
    return t == AberrationType::Mixed4_6 || t == AberrationType::Mixed4_8 ||
           t == AberrationType::Mixed4_13 || t == AberrationType::Mixed4_18;
}

void AberrationLabel::validate() const {
    const bool mixed = is_mixed_type(type);
    if ((category == Category::Mixed) != mixed) {
        throw ConfigError("label category does not match aberration type " + to_string(type));
    }
    if (mixed != !amplitude_class.has_value()) {
        throw ConfigError("amplitude class must be none exactly for mixed labels");
    }
    if (amplitude_class.has_value()) {
        const double a = *amplitude_class;
        if (std::none_of(kAmplitudeLevels.begin(), kAmplitudeLevels.end(),
                         [a](double l) { return std::abs(l - a) < 1e-9; })) {
            throw ConfigError("amplitude class " + std::to_string(a) + " is not a schedule level");
        }
    }
}

int AberrationLabel::amplitude_class_index() const {
    if (!amplitude_class.has_value()) return 8;
    for (std::size_t i = 0; i < kAmplitudeLevels.size(); ++i) {
        if (std::abs(kAmplitudeLevels[i] - *amplitude_class) < 1e-9) return static_cast<int>(i);
    }
    throw ConfigError("amplitude class is not a schedule level");
}

AberrationLabel make_single_label(AberrationType t, double amplitude_class) {
    AberrationLabel label{Category::Single, t, amplitude_class};
    label.validate();
    return label;
}

AberrationLabel make_mixed_label(AberrationType t) {
    AberrationLabel label{Category::Mixed, t, std::nullopt};
    label.validate();
    return label;
}

std::uint64_t item_seed_for(std::uint64_t base_seed, std::uint64_t record_index) {
    return mix64(base_seed ^ record_index);
}

std::vector<std::pair<AberrationType, double>> single_schedule() {
    std::vector<std::pair<AberrationType, double>> schedule;
    schedule.reserve(kSingleTypes.size() * kAmplitudeLevels.size());
    for (AberrationType t : kSingleTypes) {
        for (double a : kAmplitudeLevels) schedule.emplace_back(t, a);
    }
    return schedule;
}

ZernikeCoefficients coefficients_for(AberrationType type, double amplitude,
                                     AmplitudeSplit split) {
    if (amplitude < 0.0) throw ConfigError("amplitude must be >= 0");
    const double a =
        split == AmplitudeSplit::HalfRoot2 ? amplitude / std::numbers::sqrt2 : amplitude;

    ZernikeCoefficients coeffs;
    if (amplitude == 0.0) return coeffs;
    switch (type) {
        case AberrationType::Astigmatism:
            coeffs.set(4, a);
            coeffs.set(5, a);
            break;
        case AberrationType::Coma:
            coeffs.set(6, a);
            coeffs.set(7, a);
            break;
        case AberrationType::Spherical:
            coeffs.set(8, amplitude);  // single index, no split
            break;
        case AberrationType::Trefoil:
            coeffs.set(9, a);
            coeffs.set(10, a);
            break;
        default:
            throw ConfigError("coefficients_for requires a single aberration type");
    }
    return coeffs;
}

std::pair<int, int> mixed_index_range(AberrationType type) {
    switch (type) {
        case AberrationType::Mixed4_6: return {4, 6};
        case AberrationType::Mixed4_8: return {4, 8};
        case AberrationType::Mixed4_13: return {4, 13};
        case AberrationType::Mixed4_18: return {4, 18};
        default:
            throw ConfigError("mixed_index_range requires a mixed aberration type");
    }
}

ZernikeCoefficients mixed_sample(AberrationType mixed_type, std::uint64_t seed) {
    const auto [lo, hi] = mixed_index_range(mixed_type);
    SplitMix64 rng(seed);
    ZernikeCoefficients coeffs;
    for (int index = lo; index <= hi; ++index) {
        // |N(0, 1/3)| clipped to [0, 1]: ~3 sigma spans the sampled range.
        const double a = std::min(std::abs(rng.normal(1.0 / 3.0)), 1.0);
        coeffs.set(index, a);
    }
    return coeffs;
}

DatasetManifest plcm_train_set(std::uint64_t base_seed) {
    DatasetManifest manifest;
    manifest.base_seed = base_seed;
    auto& records = manifest.records;

    auto push = [&](const AberrationLabel& label, const ZernikeCoefficients& coeffs) {
        ManifestRecord rec;
        rec.label = label;
        rec.coeffs = coeffs;
        rec.base_seed = base_seed;
        rec.item_seed = item_seed_for(base_seed, records.size());
        rec.path = record_file_name(records.size());
        records.push_back(std::move(rec));
    };

    // Single part: the four fine levels once each, then 0.01-step samples
    // within +-0.05 of every base level >= 0.4 (labeled with the base).
    for (AberrationType t : kSingleTypes) {
        for (int h : {5, 10, 15, 20}) {
            push(make_single_label(t, hundredths(h)), coefficients_for(t, hundredths(h)));
        }
        for (int base : {40, 60, 80, 100}) {
            for (int offset = -5; offset <= 5; ++offset) {
                push(make_single_label(t, hundredths(base)),
                     coefficients_for(t, hundredths(base + offset)));
            }
        }
    }

    // Mixed part: 500 per order range, coefficients drawn per item seed.
    for (AberrationType t : kMixedTypes) {
        for (int i = 0; i < 500; ++i) {
            const std::uint64_t seed = item_seed_for(base_seed, records.size());
            push(make_mixed_label(t), mixed_sample(t, seed));
        }
    }
    return manifest;
}

DatasetManifest plcm_test_set(std::uint64_t base_seed) {
    DatasetManifest manifest;
    manifest.base_seed = base_seed;
    auto& records = manifest.records;

    auto next_index = [&] { return kTestSeedNamespace + records.size(); };
    auto push = [&](const AberrationLabel& label, const ZernikeCoefficients& coeffs,
                    std::uint64_t item_seed) {
        ManifestRecord rec;
        rec.label = label;
        rec.coeffs = coeffs;
        rec.base_seed = base_seed;
        rec.item_seed = item_seed;
        rec.path = record_file_name(records.size());
        records.push_back(std::move(rec));
    };

    // 5 singles per type at levels drawn from the 8-level grid.
    for (AberrationType t : kSingleTypes) {
        for (int i = 0; i < 5; ++i) {
            const std::uint64_t seed = item_seed_for(base_seed, next_index());
            SplitMix64 rng(seed);
            const double level = kAmplitudeLevels[rng.below(kAmplitudeLevels.size())];
            push(make_single_label(t, level), coefficients_for(t, level), seed);
        }
    }
    // 50 mixed per order range.
    for (AberrationType t : kMixedTypes) {
        for (int i = 0; i < 50; ++i) {
            const std::uint64_t seed = item_seed_for(base_seed, next_index());
            push(make_mixed_label(t), mixed_sample(t, seed), seed);
        }
    }
    return manifest;
}

void render_manifest(DatasetManifest& manifest, const OpticalConfig& config,
                     const std::filesystem::path& out_dir, const RenderOptions& options) {
    config.validate();
    std::filesystem::create_directories(out_dir);

    std::vector<std::filesystem::path> sources;
    if (!options.source_image_dir.empty()) {
        for (const auto& entry : std::filesystem::directory_iterator(options.source_image_dir)) {
            if (entry.path().extension() == ".png") sources.push_back(entry.path());
        }
        std::sort(sources.begin(), sources.end());
        if (sources.empty()) {
            throw IoError("no .png source images in " + options.source_image_dir.string());
        }
    }

    parallel_for(manifest.records.size(), [&](std::size_t i) {
        ManifestRecord& rec = manifest.records[i];
        const PsfImage kernel = psf(config, rec.coeffs);
        rec.undersampled = kernel.undersampled;

        std::filesystem::path prefix = out_dir / rec.path;
        prefix.replace_extension();
        save_psf(kernel, prefix, options.png_preview);

        if (!sources.empty()) {
            const GrayImage src = load_image(sources[i % sources.size()]);
            const GrayImage degraded = convolve(src, kernel);
            std::filesystem::path degraded_path = prefix;
            degraded_path += "_degraded.png";
            save_image(degraded, degraded_path);
        }
    });

    write_manifest_jsonl(manifest, out_dir / "manifest.jsonl");
}

void write_manifest_jsonl(const DatasetManifest& manifest, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    for (const ManifestRecord& rec : manifest.records) {
        nlohmann::ordered_json line;
        line["path"] = rec.path;
        line["category"] = to_string(rec.label.category);
        line["aberration_type"] = to_string(rec.label.type);
        if (rec.label.amplitude_class.has_value()) {
            line["amplitude_class"] = *rec.label.amplitude_class;
        } else {
            line["amplitude_class"] = nullptr;
        }
        nlohmann::ordered_json coeffs = nlohmann::ordered_json::object();
        for (const auto& [index, amplitude] : rec.coeffs.entries) {
            coeffs[std::to_string(index)] = amplitude;
        }
        line["coefficients"] = coeffs;
        line["item_seed"] = std::to_string(rec.item_seed);
        line["undersampled"] = rec.undersampled;
        out << line.dump() << "\n";
    }
    if (!out) throw IoError("short write to " + path.string());
}

DatasetManifest read_manifest_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    DatasetManifest manifest;
    std::set<std::uint64_t> seen_seeds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ManifestRecord rec;
        rec.path = j.at("path").get<std::string>();
        rec.label.category = category_from_string(j.at("category").get<std::string>());
        rec.label.type = type_from_string(j.at("aberration_type").get<std::string>());
        if (j.at("amplitude_class").is_null()) {
            rec.label.amplitude_class = std::nullopt;
        } else {
            rec.label.amplitude_class = j.at("amplitude_class").get<double>();
        }
        rec.label.validate();
        for (const auto& [key, value] : j.at("coefficients").items()) {
            rec.coeffs.set(std::stoi(key), value.get<double>());
        }
        rec.item_seed = std::stoull(j.at("item_seed").get<std::string>());
        rec.undersampled = j.value("undersampled", false);
        if (!seen_seeds.insert(rec.item_seed).second) {
            throw IoError(path.string() + ":" + std::to_string(line_no) +
                          ": duplicate item seed " + std::to_string(rec.item_seed));
        }
        manifest.records.push_back(std::move(rec));
    }
    return manifest;
}

}  // namespace absim
