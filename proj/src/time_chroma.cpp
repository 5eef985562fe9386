#include "tcfp/time_chroma.hpp"

#include "tcfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcfp {

double ChromaParams::pitch_freq(double i) const {
    return std::exp2(i / m) * f0;
}

double ChromaParams::pitch_of_freq(double hz) const {
    return m * std::log2(hz / f0);
}

double filter_weight(const ChromaParams& params, int pitch_index, double freq_hz) {
    if (freq_hz <= 0.0)
        return 0.0;
    const double d = std::abs(params.pitch_of_freq(freq_hz) - pitch_index);
    if (d <= 0.25)
        return 1.0;
    if (d >= 0.75)
        return 0.0;
    const double c = std::cos(M_PI * (d - 0.25));
    return c * c;
}

PitchFilterBank build_filter_bank(const ChromaParams& params, double spec_bin_hz) {
    if (spec_bin_hz <= 0.0)
        throw std::invalid_argument("build_filter_bank: bin width must be positive");
    if (params.f0 <= 0.0 || params.m <= 0 || params.n <= 0 || params.bins() < 2)
        throw std::invalid_argument("build_filter_bank: invalid chroma parameters");
    const double nyquist = params.fs / 2.0;
    if (std::exp2(params.n) * params.f0 >= nyquist)
        throw std::invalid_argument("build_filter_bank: band holds less than one chroma period");

    PitchFilterBank bank;
    bank.params = params;
    bank.spec_bin_hz = spec_bin_hz;

    const std::size_t num_bins = static_cast<std::size_t>(std::floor(nyquist / spec_bin_hz)) + 1;
    for (int i = 0;; ++i) {
        const double center = params.pitch_freq(i);
        if (center > nyquist)
            break;
        // sampled support of the closed-form shape
        const double lo_hz = params.pitch_freq(i - 0.75);
        const double hi_hz = params.pitch_freq(i + 0.75);
        std::size_t lo_bin = static_cast<std::size_t>(std::max(0.0, std::ceil(lo_hz / spec_bin_hz)));
        std::size_t hi_bin = static_cast<std::size_t>(std::floor(hi_hz / spec_bin_hz));
        hi_bin = std::min(hi_bin, num_bins - 1);

        PitchFilterBank::Filter filt;
        filt.center_hz = center;
        bool empty = true;
        if (lo_bin <= hi_bin) {
            filt.first_bin = lo_bin;
            filt.weights.resize(hi_bin - lo_bin + 1, 0.0);
            for (std::size_t bin = lo_bin; bin <= hi_bin; ++bin) {
                const double w = filter_weight(params, i, bin * spec_bin_hz);
                filt.weights[bin - lo_bin] = w;
                if (w > 0.0)
                    empty = false;
            }
        }
        if (empty) {
            // pitch spacing below bin resolution: claim the nearest bin so no
            // pitch goes unrepresented. The claim weight keeps decaying with
            // the pitch distance, so of all filters sharing one coarse bin the
            // one whose center lies closest keeps the largest share.
            const std::size_t nearest = std::max<std::size_t>(
                1, std::min(num_bins - 1,
                            static_cast<std::size_t>(std::llround(center / spec_bin_hz))));
            const double d = std::abs(params.pitch_of_freq(nearest * spec_bin_hz) - i);
            filt.first_bin = nearest;
            filt.weights.assign(1, 0.1 * std::exp(-4.0 * std::max(0.0, d - 0.75)));
        }
        bank.filters.push_back(std::move(filt));
    }

    // cap the total claim on every spectrogram bin at one so a bin never
    // contributes more than its own energy
    std::vector<double> bin_totals(num_bins, 0.0);
    for (const auto& f : bank.filters)
        for (std::size_t j = 0; j < f.weights.size(); ++j)
            bin_totals[f.first_bin + j] += f.weights[j];
    for (auto& f : bank.filters)
        for (std::size_t j = 0; j < f.weights.size(); ++j) {
            const double total = bin_totals[f.first_bin + j];
            if (total > 1.0)
                f.weights[j] /= total;
        }
    return bank;
}

TimeChromaImage compute_time_chroma(const Spectrogram& spec, const PitchFilterBank& bank) {
    const ChromaParams& params = bank.params;
    if (spec.sample_rate != params.fs)
        throw std::invalid_argument("compute_time_chroma: spectrogram rate != chroma fs");

    const std::size_t period = static_cast<std::size_t>(params.bins());
    TimeChromaImage img;
    img.params = params;
    img.num_bins = period;
    img.num_frames = spec.num_frames;
    img.frame_hop_s = spec.frame_hop_s;
    img.frame0_center_s = spec.frame_center_s(0);
    img.values.assign(period * spec.num_frames, 0.0);

    std::vector<double> energy(spec.num_bins);
    for (std::size_t t = 0; t < spec.num_frames; ++t) {
        const double* frame = spec.frame(t);
        kernels::multiply(frame, frame, energy.data(), spec.num_bins);
        for (std::size_t i = 0; i < bank.filters.size(); ++i) {
            const auto& f = bank.filters[i];
            if (f.first_bin >= spec.num_bins)
                continue;
            const std::size_t len = std::min(f.weights.size(), spec.num_bins - f.first_bin);
            const double e = kernels::dot(f.weights.data(), energy.data() + f.first_bin, len);
            img.at(i % period, t) += e;
        }
    }
    return img;
}

TimeChromaImage circular_shift(const TimeChromaImage& img, int delta_bins) {
    const long b = static_cast<long>(img.num_bins);
    TimeChromaImage out = img;
    for (long row = 0; row < b; ++row) {
        const long src = ((row - delta_bins) % b + b) % b;
        std::copy_n(img.row(src), img.num_frames, out.values.data() + row * img.num_frames);
    }
    return out;
}

} // namespace tcfp
