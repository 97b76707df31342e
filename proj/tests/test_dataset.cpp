#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "absim/dataset.hpp"
#include "absim/errors.hpp"
#include "absim/image_io.hpp"
#include "test_util.hpp"

using namespace absim;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("single schedule: 32 entries over the 8-level grid") {
    const auto schedule = single_schedule();
    CHECK(schedule.size() == 32);

    std::set<double> amplitudes;
    std::set<AberrationType> types;
    for (const auto& [type, amp] : schedule) {
        amplitudes.insert(amp);
        types.insert(type);
        CHECK_FALSE(is_mixed_type(type));
    }
    CHECK(types.size() == 4);
    const std::set<double> expected{0.05, 0.1, 0.15, 0.2, 0.4, 0.6, 0.8, 1.0};
    CHECK(amplitudes == expected);

    // Every spherical entry touches only index 8.
    for (const auto& [type, amp] : schedule) {
        if (type == AberrationType::Spherical) {
            const ZernikeCoefficients c = coefficients_for(type, amp);
            CHECK(c.entries.size() == 1);
            CHECK(c.amplitude(8) == doctest::Approx(amp));
        }
    }
}

TEST_CASE("coefficients_for: index pairs and split conventions") {
    const ZernikeCoefficients sph = coefficients_for(AberrationType::Spherical, 0.4);
    CHECK(sph.entries.size() == 1);
    CHECK(sph.amplitude(8) == doctest::Approx(0.4));

    const ZernikeCoefficients astig0 = coefficients_for(AberrationType::Astigmatism, 0.0);
    CHECK(astig0.empty());

    const ZernikeCoefficients tref = coefficients_for(AberrationType::Trefoil, 1.0);
    CHECK(tref.amplitude(9) == doctest::Approx(1.0));
    CHECK(tref.amplitude(10) == doctest::Approx(1.0));
    CHECK(tref.amplitude(8) == 0.0);

    const ZernikeCoefficients coma = coefficients_for(AberrationType::Coma, 0.3);
    CHECK(coma.amplitude(6) == doctest::Approx(0.3));
    CHECK(coma.amplitude(7) == doctest::Approx(0.3));

    const ZernikeCoefficients halved =
        coefficients_for(AberrationType::Astigmatism, 1.0, AmplitudeSplit::HalfRoot2);
    CHECK(halved.amplitude(4) == doctest::Approx(1.0 / std::sqrt(2.0)));

    CHECK_THROWS_AS(coefficients_for(AberrationType::Mixed4_6, 0.2), ConfigError);
    CHECK_THROWS_AS(coefficients_for(AberrationType::Coma, -0.1), ConfigError);
}

TEST_CASE("mixed_sample: index support, determinism, sampler mean") {
    const ZernikeCoefficients c46 = mixed_sample(AberrationType::Mixed4_6, 99);
    for (const auto& [index, amp] : c46.entries) {
        CHECK(index >= 4);
        CHECK(index <= 6);
        CHECK(amp >= 0.0);
        CHECK(amp <= 1.0);
    }
    CHECK(c46.entries.size() == 3);

    const ZernikeCoefficients again = mixed_sample(AberrationType::Mixed4_6, 99);
    CHECK(again.entries == c46.entries);

    const ZernikeCoefficients c418 = mixed_sample(AberrationType::Mixed4_18, 7);
    CHECK(c418.entries.size() == 15);

    // Monte-Carlo oracle of E[min(|N(0,1/3)|, 1)] ~= 0.266.
    double total = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        total += mixed_sample(AberrationType::Mixed4_6, 1000 + i).amplitude(4);
    }
    CHECK(std::abs(total / n - 0.266) < 0.01);
}

TEST_CASE("plcm train set: counts, fine sampling, seed rule") {
    const DatasetManifest train = plcm_train_set(7);
    CHECK(train.records.size() == 2192);

    int singles = 0, mixed = 0;
    std::set<std::uint64_t> seeds;
    for (std::size_t i = 0; i < train.records.size(); ++i) {
        const ManifestRecord& rec = train.records[i];
        rec.label.validate();
        CHECK(seeds.insert(rec.item_seed).second);
        CHECK(rec.item_seed == item_seed_for(7, i));
        if (rec.label.category == Category::Single) {
            ++singles;
        } else {
            ++mixed;
        }
    }
    CHECK(singles == 192);
    CHECK(mixed == 2000);

    // A 0.43-amplitude record carries class 0.4.
    bool found_043 = false;
    for (const ManifestRecord& rec : train.records) {
        if (rec.label.type == AberrationType::Spherical &&
            std::abs(rec.coeffs.amplitude(8) - 0.43) < 1e-12) {
            found_043 = true;
            CHECK(*rec.label.amplitude_class == doctest::Approx(0.4));
        }
    }
    CHECK(found_043);

    // Fine samples: 11 steps of 0.01 around each base >= 0.4; never above 1.05.
    for (const ManifestRecord& rec : train.records) {
        if (rec.label.category != Category::Single) continue;
        const double cls = *rec.label.amplitude_class;
        double actual = 0.0;
        for (const auto& [index, amp] : rec.coeffs.entries) actual = std::max(actual, amp);
        CHECK(actual <= 1.05 + 1e-12);
        if (cls >= 0.4) {
            CHECK(std::abs(actual - cls) <= 0.05 + 1e-12);
            const double step = std::round((actual - cls) * 100.0) - (actual - cls) * 100.0;
            CHECK(std::abs(step) < 1e-9);  // offsets land on the 0.01 grid
        } else {
            CHECK(actual == doctest::Approx(cls));
        }
    }

    const int per_base = 11;
    int base_04 = 0;
    for (const ManifestRecord& rec : train.records) {
        if (rec.label.type == AberrationType::Coma && rec.label.amplitude_class.has_value() &&
            std::abs(*rec.label.amplitude_class - 0.4) < 1e-12) {
            ++base_04;
        }
    }
    CHECK(base_04 == per_base);

    // Mixed records: 500 per range, support matches the range.
    int m46 = 0;
    for (const ManifestRecord& rec : train.records) {
        if (rec.label.type == AberrationType::Mixed4_6) {
            ++m46;
            for (const auto& [index, amp] : rec.coeffs.entries) CHECK(index <= 6);
        }
    }
    CHECK(m46 == 500);
}

TEST_CASE("plcm test set: 220 records, seeds disjoint from train") {
    const DatasetManifest train = plcm_train_set(7);
    const DatasetManifest test = plcm_test_set(7);
    CHECK(test.records.size() == 220);

    int singles = 0;
    int per_range[4] = {0, 0, 0, 0};
    for (const ManifestRecord& rec : test.records) {
        rec.label.validate();
        if (rec.label.category == Category::Single) {
            ++singles;
        } else {
            per_range[rec.label.type_index() - 4] += 1;
        }
    }
    CHECK(singles == 20);
    for (int k = 0; k < 4; ++k) CHECK(per_range[k] == 50);

    std::set<std::uint64_t> train_seeds, test_seeds;
    for (const auto& rec : train.records) train_seeds.insert(rec.item_seed);
    for (const auto& rec : test.records) test_seeds.insert(rec.item_seed);
    CHECK(test_seeds.size() == 220);
    for (std::uint64_t s : test_seeds) CHECK(train_seeds.count(s) == 0);
}

TEST_CASE("render: reproducible bytes, sidecar audit, manifest round trip") {
    OpticalConfig config;
    config.na = 0.75;
    config.lambda_um = 0.35;
    config.pixel_um = 0.1;
    config.grid = 64;

    // A small hand-built manifest keeps the test fast.
    DatasetManifest manifest;
    manifest.base_seed = 3;
    for (int i = 0; i < 6; ++i) {
        ManifestRecord rec;
        const AberrationType t = i < 3 ? AberrationType::Spherical : AberrationType::Mixed4_6;
        rec.item_seed = item_seed_for(3, i);
        if (i < 3) {
            rec.label = make_single_label(t, 0.4);
            rec.coeffs = coefficients_for(t, 0.4 + 0.01 * i);
        } else {
            rec.label = make_mixed_label(t);
            rec.coeffs = mixed_sample(t, rec.item_seed);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "psf_%06d.f32", i);
        rec.path = name;
        rec.base_seed = 3;
        manifest.records.push_back(rec);
    }

    const auto dir1 = testutil::make_temp_dir("render");
    const auto dir2 = testutil::make_temp_dir("render");
    DatasetManifest m1 = manifest, m2 = manifest;
    render_manifest(m1, config, dir1);
    render_manifest(m2, config, dir2);

    CHECK(slurp(dir1 / "manifest.jsonl") == slurp(dir2 / "manifest.jsonl"));
    for (const auto& rec : m1.records) {
        CHECK(slurp(dir1 / rec.path) == slurp(dir2 / rec.path));
        CHECK_FALSE(slurp(dir1 / rec.path).empty());
    }

    // Line count equals record count.
    std::ifstream lines(dir1 / "manifest.jsonl");
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++count;
    }
    CHECK(count == 6);

    // Mixed4_6 sidecars list only indices 4..6.
    for (const auto& rec : m1.records) {
        if (rec.label.type != AberrationType::Mixed4_6) continue;
        std::filesystem::path sidecar = dir1 / rec.path;
        sidecar.replace_extension(".json");
        const nlohmann::json j = nlohmann::json::parse(slurp(sidecar));
        for (const auto& [key, value] : j.at("coefficients").items()) {
            const int index = std::stoi(key);
            CHECK(index >= 4);
            CHECK(index <= 6);
        }
        CHECK_FALSE(j.at("undersampled").get<bool>());
    }

    const DatasetManifest round = read_manifest_jsonl(dir1 / "manifest.jsonl");
    CHECK(round.records.size() == m1.records.size());
    for (std::size_t i = 0; i < round.records.size(); ++i) {
        CHECK(round.records[i].path == m1.records[i].path);
        CHECK(round.records[i].item_seed == m1.records[i].item_seed);
        CHECK(round.records[i].label.type == m1.records[i].label.type);
        CHECK(round.records[i].coeffs.entries == m1.records[i].coeffs.entries);
    }

    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("label invariants are enforced") {
    CHECK_THROWS_AS(make_single_label(AberrationType::Mixed4_8, 0.4), ConfigError);
    CHECK_THROWS_AS(make_mixed_label(AberrationType::Coma), ConfigError);
    CHECK_THROWS_AS(make_single_label(AberrationType::Coma, 0.37), ConfigError);
    CHECK(make_mixed_label(AberrationType::Mixed4_13).amplitude_class_index() == 8);
    CHECK(make_single_label(AberrationType::Coma, 0.05).amplitude_class_index() == 0);
    CHECK(make_single_label(AberrationType::Coma, 1.0).amplitude_class_index() == 7);
}
