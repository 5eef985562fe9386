#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcfp/errors.hpp"
#include "tcfp/features.hpp"
#include "tcfp/kernels.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <vector>

using namespace tcfp;
namespace fs = std::filesystem;

namespace {

TimeChromaImage blank_image(std::size_t bins, std::size_t frames, double hop = 0.025) {
    TimeChromaImage img;
    img.num_bins = bins;
    img.num_frames = frames;
    img.frame_hop_s = hop;
    img.frame0_center_s = 0.05;
    img.params = ChromaParams{};
    img.values.assign(bins * frames, 0.0);
    return img;
}

// smooth random field with enough texture to shed local maxima everywhere
TimeChromaImage smooth_random_image(std::size_t bins, std::size_t frames, uint64_t seed) {
    TimeChromaImage img = blank_image(bins, frames);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
    std::uniform_int_distribution<int> kb(1, 8);
    std::uniform_int_distribution<int> kt(1, static_cast<int>(frames) / 60);
    for (int c = 0; c < 16; ++c) {
        const double a = amp(rng), pb = phase(rng), pt = phase(rng);
        const int fb = kb(rng), ft = std::max(1, kt(rng));
        for (std::size_t b = 0; b < bins; ++b)
            for (std::size_t t = 0; t < frames; ++t)
                img.at(b, t) += a * (1.0 + std::cos(2.0 * M_PI * fb * b / bins + pb)) *
                                (1.0 + std::cos(2.0 * M_PI * ft * t / frames + pt));
    }
    return img;
}

// exhaustive oracle: every strict 8-neighbor maximum (no density cap)
std::vector<std::pair<std::size_t, std::size_t>> brute_maxima(const TimeChromaImage& img) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    double gmax = 0.0;
    for (double v : img.values)
        gmax = std::max(gmax, v);
    for (std::size_t t = 1; t + 1 < img.num_frames; ++t)
        for (std::size_t b = 0; b < img.num_bins; ++b) {
            const double v = img.at(b, t);
            if (v <= 1e-6 * gmax)
                continue;
            bool is_max = true;
            for (int db = -1; db <= 1 && is_max; ++db)
                for (int dt = -1; dt <= 1; ++dt) {
                    if (db == 0 && dt == 0)
                        continue;
                    const std::size_t nb = (b + img.num_bins + db) % img.num_bins;
                    if (v <= img.at(nb, t + dt)) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max)
                out.push_back({t, b});
        }
    return out;
}

Patch patch_from(const std::vector<std::vector<double>>& rows) {
    Patch p;
    p.height = rows.size();
    p.width = rows[0].size();
    for (const auto& r : rows)
        p.values.insert(p.values.end(), r.begin(), r.end());
    return p;
}

// smooth 1-D profile sampled at `width` points; used for scale comparability
std::vector<double> sampled_profile(double freq1, double freq2, double ph, std::size_t width) {
    std::vector<double> out(width);
    for (std::size_t j = 0; j < width; ++j) {
        const double u = (j + 0.5) / static_cast<double>(width);
        out[j] = std::sin(2.0 * M_PI * freq1 * u + ph) + 0.5 * std::cos(2.0 * M_PI * freq2 * u);
    }
    return out;
}

} // namespace

TEST_CASE("constant images have no strict maxima") {
    TimeChromaImage img = blank_image(32, 32);
    std::fill(img.values.begin(), img.values.end(), 1.0);
    CHECK(find_local_maxima(img).empty());
}

TEST_CASE("a single impulse is the single candidate") {
    TimeChromaImage img = blank_image(64, 64);
    img.at(5, 40) = 1.0;
    const auto cands = find_local_maxima(img);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].t_frame == 40);
    CHECK(cands[0].b == 5);
}

TEST_CASE("maxima match the exhaustive neighborhood scan") {
    const TimeChromaImage img = smooth_random_image(288, 400, 77);
    const auto expect = brute_maxima(img);
    const auto got = find_local_maxima(img, 1e9); // cap disabled
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].t_frame == expect[i].first);
        CHECK(got[i].b == expect[i].second);
    }
}

TEST_CASE("the density cap keeps the strongest candidates per second") {
    TimeChromaImage img = blank_image(64, 400); // 0.025 s hop -> 10 s
    // 30 isolated maxima inside the first second, values 1..30
    int placed = 0;
    for (std::size_t t = 2; t < 38 && placed < 30; t += 2)
        for (std::size_t b = 2; b < 60 && placed < 30; b += 8)
            img.at(b, t) = 1.0 + placed++;
    const auto got = find_local_maxima(img, 20.0);
    CHECK(got.size() == 20);
    for (const auto& c : got)
        CHECK(img.at(c.b, c.t_frame) >= 11.0); // the ten weakest dropped
}

TEST_CASE("patch extraction: impulse, wrap and shift consistency") {
    TimeChromaImage img = blank_image(288, 200);
    img.at(100, 50) = 2.0;
    // width of 5 frames at 0.025 s hop, height 3
    const Patch p = extract_patch(img, 50, 100, 0.125, 3);
    CHECK(p.width == 5);
    CHECK(p.height == 3);
    for (std::size_t i = 0; i < p.height; ++i)
        for (std::size_t j = 0; j < p.width; ++j)
            CHECK(p.values[i * p.width + j] == (i == 1 && j == 2 ? 2.0 : 0.0));

    // circular wrap at the bin edge: rows of a patch at b=2 with height 72
    TimeChromaImage img2 = smooth_random_image(288, 100, 3);
    const Patch wrap = extract_patch(img2, 50, 2, 0.5, 72);
    const long half_lo = (72 - 1) / 2;
    for (std::size_t i = 0; i < wrap.height; ++i) {
        const long src = ((2 - half_lo + static_cast<long>(i)) % 288 + 288) % 288;
        CHECK(wrap.row(i)[0] == img2.at(static_cast<std::size_t>(src), 50 - (wrap.width - 1) / 2));
    }

    // patches track circular shifts exactly
    const TimeChromaImage shifted = circular_shift(img2, 31);
    const Patch a = extract_patch(img2, 60, 140, 1.0, 72);
    const Patch b = extract_patch(shifted, 60, (140 + 31) % 288, 1.0, 72);
    CHECK(a.values == b.values);
}

TEST_CASE("descriptors: dimension, normalization, affine invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<std::vector<double>> rows(72, std::vector<double>(80));
    for (auto& r : rows)
        for (double& x : r)
            x = d(rng);
    const Patch p = patch_from(rows);
    const auto desc = patch_descriptor(p, 12, 12);
    REQUIRE(desc.has_value());
    CHECK(desc->size() == 143);
    double mean = 0.0;
    for (double x : *desc)
        mean += x;
    CHECK(std::abs(mean / 143.0) < 1e-9);
    CHECK(std::abs(std::sqrt(kernels::sumsq(desc->data(), desc->size())) - 1.0) < 1e-9);

    // alpha * P + beta gives the identical descriptor
    Patch q = p;
    for (double& x : q.values)
        x = 2.0 * x + 7.0;
    const auto desc2 = patch_descriptor(q, 12, 12);
    REQUIRE(desc2.has_value());
    for (std::size_t i = 0; i < desc->size(); ++i)
        CHECK(std::abs((*desc)[i] - (*desc2)[i]) < 1e-9);
}

TEST_CASE("constant patches are degenerate") {
    Patch p;
    p.height = 16;
    p.width = 16;
    p.values.assign(256, 3.5);
    CHECK_FALSE(patch_descriptor(p, 12, 12).has_value());
}

TEST_CASE("descriptors are comparable across patch widths") {
    // the same smooth profile sampled at full and half width correlates >= 0.95
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> fr(0.5, 3.0), ph(0.0, 2.0 * M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> bf, tf;
        for (int k = 0; k < 3; ++k) {
            bf.push_back(fr(rng));
            tf.push_back(ph(rng));
        }
        auto sample_patch = [&](std::size_t width) {
            std::vector<std::vector<double>> rows;
            for (int b = 0; b < 24; ++b) {
                const double vb = std::sin(2.0 * M_PI * bf[0] * (b + 0.5) / 24.0 + tf[0]);
                auto row = sampled_profile(bf[1], bf[2], tf[1], width);
                for (double& x : row)
                    x = (1.5 + vb) * (1.5 + x);
                rows.push_back(row);
            }
            return patch_from(rows);
        };
        const auto full = patch_descriptor(sample_patch(96), 12, 12);
        const auto half = patch_descriptor(sample_patch(48), 12, 12);
        REQUIRE(full.has_value());
        REQUIRE(half.has_value());
        CHECK(kernels::dot(full->data(), half->data(), full->size()) >= 0.95);
    }
}

TEST_CASE("dictionary: identical patches collapse to their descriptor") {
    // one repeated structure, c = 1
    TimeChromaImage img = blank_image(288, 2500);
    for (int rep = 0; rep < 24; ++rep) {
        const std::size_t t0 = 60 + rep * 100;
        for (int db = -8; db <= 8; ++db)
            for (int dt = -20; dt <= 20; ++dt)
                img.at((150 + db + 288) % 288, t0 + dt) +=
                    std::exp(-0.5 * (db * db / 9.0 + dt * dt / 100.0));
    }
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary dict = build_dictionary(corpus, 1, 2.0, 72, 42, 12, 12);
    REQUIRE(dict.size() == 1);
    const auto cands = find_local_maxima(img);
    REQUIRE(!cands.empty());
    const Patch p = extract_patch(img, static_cast<long>(cands[0].t_frame),
                                  static_cast<long>(cands[0].b), 2.0, 72);
    const auto desc = patch_descriptor(p, 12, 12);
    REQUIRE(desc.has_value());
    const double corr = kernels::dot(desc->data(), dict.patterns[0].data(), desc->size());
    CHECK(corr >= 1.0 - 1e-6);
}

TEST_CASE("dictionary: two families produce their two means") {
    // two well-separated families: time-elongated blobs vs chroma-elongated
    // blobs, each stamp carrying one local maximum and a mild width wobble
    TimeChromaImage img = blank_image(288, 5200);
    auto stamp = [&](std::size_t t0, std::size_t b0, bool family_a, double wobble) {
        const double sb = family_a ? 3.0 : 14.0 * (1.0 + 0.04 * wobble);
        const double st = (family_a ? 30.0 : 5.0) * (1.0 + 0.04 * wobble);
        for (int db = -30; db <= 30; ++db)
            for (int dt = -70; dt <= 70; ++dt)
                img.at((b0 + db + 288) % 288, t0 + dt) +=
                    std::exp(-0.5 * (db * db / (sb * sb) + dt * dt / (st * st)));
    };
    for (int rep = 0; rep < 30; ++rep)
        stamp(100 + rep * 170, 80, true, std::sin(1.7 * rep));
    for (int rep = 0; rep < 30; ++rep)
        stamp(185 + rep * 170, 210, false, std::cos(2.3 * rep));
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary dict = build_dictionary(corpus, 2, 2.0, 72, 7, 12, 12);
    REQUIRE(dict.size() == 2);
    // each centroid should be within 0.05 rad of one family's mean descriptor
    auto family_mean = [&](std::size_t b0) {
        std::vector<double> acc(143, 0.0);
        int count = 0;
        for (const auto& c : find_local_maxima(img)) {
            if (std::abs(static_cast<long>(c.b) - static_cast<long>(b0)) > 20)
                continue;
            const Patch p = extract_patch(img, static_cast<long>(c.t_frame),
                                          static_cast<long>(c.b), 2.0, 72);
            if (auto d = patch_descriptor(p, 12, 12)) {
                kernels::axpy(acc.data(), d->data(), 1.0, acc.size());
                ++count;
            }
        }
        REQUIRE(count > 0);
        double mean = 0.0;
        for (double x : acc)
            mean += x;
        mean /= static_cast<double>(acc.size());
        for (double& x : acc)
            x -= mean;
        const double norm = std::sqrt(kernels::sumsq(acc.data(), acc.size()));
        for (double& x : acc)
            x /= norm;
        return acc;
    };
    const auto mean_a = family_mean(80);
    const auto mean_b = family_mean(210);
    for (const auto& mean : {mean_a, mean_b}) {
        double best = -2.0;
        for (const auto& pat : dict.patterns)
            best = std::max(best, kernels::dot(mean.data(), pat.data(), mean.size()));
        CHECK(std::acos(std::clamp(best, -1.0, 1.0)) <= 0.05);
    }
}

TEST_CASE("dictionary building is deterministic per seed") {
    const TimeChromaImage img = smooth_random_image(288, 3000, 123);
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary d1 = build_dictionary(corpus, 4, 2.0, 72, 99, 12, 12);
    const PatternDictionary d2 = build_dictionary(corpus, 4, 2.0, 72, 99, 12, 12);
    REQUIRE(d1.size() == d2.size());
    for (std::size_t i = 0; i < d1.size(); ++i)
        CHECK(d1.patterns[i] == d2.patterns[i]);
}

TEST_CASE("insufficient corpora are rejected") {
    TimeChromaImage img = blank_image(288, 60);
    img.at(10, 30) = 1.0;
    std::vector<const TimeChromaImage*> corpus = {&img};
    CHECK_THROWS_AS(build_dictionary(corpus, 10, 2.0, 72, 1, 12, 12), InsufficientPatches);
}

TEST_CASE("feature detection is equivariant under circular shifts") {
    const TimeChromaImage img = smooth_random_image(288, 1600, 2024);
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary dict = build_dictionary(corpus, 3, 2.0, 72, 5, 12, 12);

    DetectParams params;
    const auto base = detect_features(img, dict, params);
    REQUIRE(!base.empty());

    const int delta = 37;
    const TimeChromaImage shifted_img = circular_shift(img, delta);
    const auto shifted = detect_features(shifted_img, dict, params);
    REQUIRE(shifted.size() == base.size());

    // output order follows (t, b) and bins wrap, so align by key
    auto key = [](const FeaturePoint& f) { return std::make_pair(f.t_s, f.b); };
    std::map<std::pair<double, int>, const FeaturePoint*> by_key;
    for (const auto& f : shifted)
        by_key[key(f)] = &f;
    for (const auto& f : base) {
        const auto it = by_key.find({f.t_s, (f.b + delta) % 288});
        REQUIRE(it != by_key.end());
        CHECK(it->second->scale_s == f.scale_s);
        CHECK(it->second->ptype == f.ptype);
    }

    const auto fps = fingerprint_features(img, base, 12, 12);
    const auto fps_shifted = fingerprint_features(shifted_img, shifted, 12, 12);
    REQUIRE(fps.size() == fps_shifted.size());
    std::map<std::pair<double, int>, const Fingerprint*> fp_by_key;
    for (const auto& fp : fps_shifted)
        fp_by_key[{fp.point.t_s, fp.point.b}] = &fp;
    for (const auto& fp : fps) {
        const auto it = fp_by_key.find({fp.point.t_s, (fp.point.b + delta) % 288});
        REQUIRE(it != fp_by_key.end());
        for (std::size_t k = 0; k < fp.desc.size(); ++k)
            CHECK(std::abs(fp.desc[k] - it->second->desc[k]) < 1e-9);
    }
}

TEST_CASE("the stability vote requires a strict majority of scales") {
    // dictionary with two orthogonal-ish patterns; synthetic candidate whose
    // patches split 15/15 must be discarded (>50% is required)
    const TimeChromaImage img = smooth_random_image(288, 900, 8);
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary dict = build_dictionary(corpus, 2, 2.0, 72, 3, 12, 12);
    DetectParams params;
    const auto feats = detect_features(img, dict, params);
    // every accepted feature carries a valid type and an in-range scale
    for (const auto& f : feats) {
        CHECK(f.ptype >= 0);
        CHECK(f.ptype < 2);
        CHECK(f.scale_s >= params.scale_min_s - 1e-12);
        CHECK(f.scale_s <= params.scale_max_s + 1e-12);
    }
}

TEST_CASE("dictionary files round-trip and reject truncation") {
    const TimeChromaImage img = smooth_random_image(288, 1600, 31);
    std::vector<const TimeChromaImage*> corpus = {&img};
    const PatternDictionary dict = build_dictionary(corpus, 3, 2.0, 72, 11, 12, 12);
    const auto path = fs::temp_directory_path() / "tcfp_dict_test.bin";
    save_dictionary(path.string(), dict);
    const PatternDictionary back = load_dictionary(path.string());
    CHECK(back.q == dict.q);
    CHECK(back.r == dict.r);
    CHECK(back.m == dict.m);
    CHECK(back.n == dict.n);
    CHECK(back.w_t_s == dict.w_t_s);
    CHECK(back.w_p == dict.w_p);
    REQUIRE(back.patterns.size() == dict.patterns.size());
    for (std::size_t i = 0; i < dict.size(); ++i)
        CHECK(back.patterns[i] == dict.patterns[i]);

    fs::resize_file(path, fs::file_size(path) - 8);
    CHECK_THROWS_AS(load_dictionary(path.string()), FormatVersionMismatch);

    std::ofstream(path, std::ios::binary) << "WRONGMAGICxxxxxxxxxxxxxxxxxxxxxxxxxxxx";
    CHECK_THROWS_AS(load_dictionary(path.string()), FormatVersionMismatch);
}
