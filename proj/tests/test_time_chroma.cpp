#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tcfp/kernels.hpp"
#include "tcfp/spectrogram.hpp"
#include "tcfp/time_chroma.hpp"

#include <cmath>
#include <vector>

using namespace tcfp;

namespace {

AudioSignal tone_mix(const std::vector<std::pair<double, double>>& freq_amp, double seconds,
                     int rate) {
    AudioSignal sig;
    sig.sample_rate = rate;
    sig.samples.assign(static_cast<std::size_t>(seconds * rate), 0.0);
    for (std::size_t i = 0; i < sig.samples.size(); ++i)
        for (const auto& [f, a] : freq_amp)
            sig.samples[i] += a * std::sin(2.0 * M_PI * f * i / rate);
    return sig;
}

TimeChromaImage image_of_signal(const AudioSignal& sig, const ChromaParams& params) {
    const Spectrogram spec = stft_magnitude(sig, 0.1, 0.75);
    return compute_time_chroma(spec, build_filter_bank(params, spec.bin_hz));
}

double column_cosine(const TimeChromaImage& a, const TimeChromaImage& b, std::size_t t) {
    std::vector<double> ca(a.num_bins), cb(b.num_bins);
    for (std::size_t i = 0; i < a.num_bins; ++i) {
        ca[i] = a.at(i, t);
        cb[i] = b.at(i, t);
    }
    const double na = std::sqrt(kernels::sumsq(ca.data(), ca.size()));
    const double nb = std::sqrt(kernels::sumsq(cb.data(), cb.size()));
    if (na <= 0.0 || nb <= 0.0)
        return 1.0; // silent column on both sides counts as agreeing
    return kernels::dot(ca.data(), cb.data(), ca.size()) / (na * nb);
}

const ChromaParams kDefaults{};

} // namespace

TEST_CASE("pitch grid frequencies") {
    CHECK(kDefaults.pitch_freq(0) == doctest::Approx(80.0));
    CHECK(kDefaults.pitch_freq(72) == doctest::Approx(160.0));
    CHECK(kDefaults.bins() == 288);
}

TEST_CASE("closed-form filter shape partitions unity at midpoints") {
    // midpoint between adjacent pitch centers, evaluated on the closed form
    for (int i : {10, 100, 250}) {
        const double mid_hz = kDefaults.pitch_freq(i + 0.5);
        const double sum = filter_weight(kDefaults, i, mid_hz) +
                           filter_weight(kDefaults, i + 1, mid_hz);
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        // overlap confined to the rolloff region
        CHECK(filter_weight(kDefaults, i, kDefaults.pitch_freq(i + 0.2)) == 1.0);
        CHECK(filter_weight(kDefaults, i + 1, kDefaults.pitch_freq(i + 0.2)) == 0.0);
    }
}

TEST_CASE("filter bank covers pitches up to the Nyquist limit") {
    const PitchFilterBank bank = build_filter_bank(kDefaults, 10.0);
    // pitches exist while 2^(i/m) f0 <= fs/2
    const std::size_t expect =
        static_cast<std::size_t>(std::floor(72.0 * std::log2(4410.0 / 80.0))) + 1;
    CHECK(bank.filters.size() == expect);
    for (const auto& f : bank.filters) {
        CHECK_FALSE(f.weights.empty());
        for (double w : f.weights) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
    }
    // flat-top bins keep weight one where the grid resolves pitches
    for (std::size_t i = 0; i < bank.filters.size(); ++i) {
        const auto& f = bank.filters[i];
        if (f.center_hz < 1200.0)
            continue;
        for (std::size_t j = 0; j < f.weights.size(); ++j) {
            const double hz = (f.first_bin + j) * 10.0;
            const double d = std::abs(kDefaults.pitch_of_freq(hz) - static_cast<double>(i));
            if (d <= 0.25)
                CHECK(f.weights[j] == 1.0);
        }
    }
}

TEST_CASE("a pure grid tone concentrates in its own chroma bin") {
    for (int j : {150, 222, 275}) {
        const AudioSignal sig = tone_mix({{kDefaults.pitch_freq(j), 0.5}}, 1.0, kDefaults.fs);
        const TimeChromaImage img = image_of_signal(sig, kDefaults);
        for (std::size_t t = 0; t < img.num_frames; ++t) {
            std::size_t best = 0;
            for (std::size_t b = 1; b < img.num_bins; ++b)
                if (img.at(b, t) > img.at(best, t))
                    best = b;
            CHECK(best == static_cast<std::size_t>(j % 288));
        }
    }
}

TEST_CASE("tones n octaves apart land in the same chroma bin") {
    const int j = 100;
    const AudioSignal a = tone_mix({{kDefaults.pitch_freq(j), 0.5}}, 1.0, kDefaults.fs);
    const AudioSignal b =
        tone_mix({{kDefaults.pitch_freq(j + 288), 0.5}}, 1.0, kDefaults.fs); // n octaves up
    const TimeChromaImage ia = image_of_signal(a, kDefaults);
    const TimeChromaImage ib = image_of_signal(b, kDefaults);
    for (std::size_t t = 0; t < ia.num_frames; ++t) {
        std::size_t best_a = 0, best_b = 0;
        for (std::size_t bb = 1; bb < ia.num_bins; ++bb) {
            if (ia.at(bb, t) > ia.at(best_a, t))
                best_a = bb;
            if (ib.at(bb, t) > ib.at(best_b, t))
                best_b = bb;
        }
        CHECK(best_a == best_b);
    }
}

TEST_CASE("circular shift identities") {
    const AudioSignal sig =
        tone_mix({{kDefaults.pitch_freq(140), 0.4}, {kDefaults.pitch_freq(200), 0.3}}, 0.7,
                 kDefaults.fs);
    const TimeChromaImage img = image_of_signal(sig, kDefaults);
    CHECK(circular_shift(img, 0).values == img.values);
    CHECK(circular_shift(img, 288).values == img.values);
    CHECK(circular_shift(circular_shift(img, 12), -12).values == img.values);
    // spot-check the index arithmetic
    const TimeChromaImage s = circular_shift(img, 5);
    CHECK(s.at(5, 10) == img.at(0, 10));
    CHECK(s.at(2, 10) == img.at((288 - 3) % 288, 10));
}

TEST_CASE("pitch-shift covariance: shifted partials shift the image circularly") {
    // every partial moved up by dp pitch steps stays on the pitch grid
    const int dp = 12;
    std::vector<std::pair<double, double>> base, shifted;
    for (int j : {270, 290, 310, 330}) {
        base.push_back({kDefaults.pitch_freq(j), 0.35});
        shifted.push_back({kDefaults.pitch_freq(j + dp), 0.35});
    }
    const TimeChromaImage ia = image_of_signal(tone_mix(base, 1.0, kDefaults.fs), kDefaults);
    const TimeChromaImage ib = image_of_signal(tone_mix(shifted, 1.0, kDefaults.fs), kDefaults);
    const TimeChromaImage expect = circular_shift(ia, dp);
    double mean_cos = 0.0;
    for (std::size_t t = 0; t < ia.num_frames; ++t)
        mean_cos += column_cosine(ib, expect, t);
    mean_cos /= static_cast<double>(ia.num_frames);
    CHECK(mean_cos >= 0.95);
}

TEST_CASE("tempo covariance: time-scaled notes scale the image along time") {
    const double a = 1.25; // note durations scaled by 1/a
    const int rate = kDefaults.fs;
    auto note_burst = [&](double scale) {
        AudioSignal sig;
        sig.sample_rate = rate;
        sig.samples.assign(static_cast<std::size_t>(2.0 / scale * rate), 0.0);
        // two tones gated on/off; envelope positions scale with 1/a
        const double f1 = kDefaults.pitch_freq(150);
        const double f2 = kDefaults.pitch_freq(210);
        for (std::size_t i = 0; i < sig.samples.size(); ++i) {
            const double t = static_cast<double>(i) / rate * scale; // unscaled time
            if (t < 1.0)
                sig.samples[i] = 0.5 * std::sin(2.0 * M_PI * f1 * i / rate);
            else
                sig.samples[i] = 0.5 * std::sin(2.0 * M_PI * f2 * i / rate);
        }
        return sig;
    };
    const TimeChromaImage orig = image_of_signal(note_burst(1.0), kDefaults);
    const TimeChromaImage fast = image_of_signal(note_burst(a), kDefaults);
    // column t of the fast image corresponds to column a*t of the original
    double mean_cos = 0.0;
    std::size_t cols = 0;
    for (std::size_t t = 0; t < fast.num_frames; ++t) {
        const std::size_t src = static_cast<std::size_t>(std::lround(t * a));
        if (src >= orig.num_frames)
            break;
        std::vector<double> cf(fast.num_bins), co(orig.num_bins);
        for (std::size_t b = 0; b < fast.num_bins; ++b) {
            cf[b] = fast.at(b, t);
            co[b] = orig.at(b, src);
        }
        const double nf = std::sqrt(kernels::sumsq(cf.data(), cf.size()));
        const double no = std::sqrt(kernels::sumsq(co.data(), co.size()));
        if (nf <= 0.0 || no <= 0.0)
            continue;
        mean_cos += kernels::dot(cf.data(), co.data(), cf.size()) / (nf * no);
        ++cols;
    }
    mean_cos /= static_cast<double>(cols);
    CHECK(mean_cos >= 0.9);
}

TEST_CASE("silence maps to the zero image and energy is conserved") {
    AudioSignal silent;
    silent.sample_rate = kDefaults.fs;
    silent.samples.assign(kDefaults.fs, 0.0);
    const TimeChromaImage zero = image_of_signal(silent, kDefaults);
    for (double v : zero.values)
        CHECK(v == 0.0);

    const AudioSignal sig =
        tone_mix({{kDefaults.pitch_freq(100), 0.4}, {997.0, 0.3}}, 0.8, kDefaults.fs);
    const Spectrogram spec = stft_magnitude(sig, 0.1, 0.75);
    const TimeChromaImage img = compute_time_chroma(spec, build_filter_bank(kDefaults, spec.bin_hz));
    for (std::size_t t = 0; t < img.num_frames; ++t) {
        double chroma_sum = 0.0;
        for (std::size_t b = 0; b < img.num_bins; ++b) {
            CHECK(img.at(b, t) >= 0.0);
            chroma_sum += img.at(b, t);
        }
        double spec_energy = 0.0;
        for (std::size_t k = 0; k < spec.num_bins; ++k)
            spec_energy += spec.at(k, t) * spec.at(k, t);
        CHECK(chroma_sum <= spec_energy * (1.0 + 1e-9));
    }
}
