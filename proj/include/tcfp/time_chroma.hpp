#pragma once

#include "tcfp/spectrogram.hpp"

#include <cstddef>
#include <vector>

namespace tcfp {

/// Pitch grid: pitch i has frequency 2^(i/m) * f0, m pitches per octave,
/// pitches n octaves apart identified (period of n*m bins).
struct ChromaParams {
    int m = 72;       // pitches per octave
    int n = 4;        // octaves per period
    double f0 = 80.0; // lowest pitch, Hz
    int fs = 8820;    // canonical sample rate, Hz

    int bins() const { return n * m; }
    double pitch_freq(double i) const;
    /// pitch-axis position of a frequency: m * log2(f / f0)
    double pitch_of_freq(double hz) const;
};

/// Narrow-band filter per pitch, sampled at spectrogram bin centers.
/// The continuous shape is flat (weight 1) within 1/4 pitch step of the
/// center and rolls off as a raised cosine, crossing 1/2 at half a step and
/// reaching zero at 3/4 — adjacent filters sum to one over the whole axis.
/// Frequencies below f0 get no filter.
struct PitchFilterBank {
    struct Filter {
        std::size_t first_bin = 0;
        std::vector<double> weights; // contiguous bins from first_bin
        double center_hz = 0.0;
    };
    std::vector<Filter> filters; // index = pitch index
    ChromaParams params;
    double spec_bin_hz = 0.0;
};

/// Closed-form filter shape for pitch index i evaluated at an arbitrary
/// frequency (before bin sampling and per-bin rescaling).
double filter_weight(const ChromaParams& params, int pitch_index, double freq_hz);

/// One filter per pitch index i from 0 while 2^(i/m)*f0 <= fs/2. Filters
/// whose sampled support is empty claim their nearest bin; bins where the
/// sampled weights of all filters sum above one are rescaled so each
/// spectrogram bin contributes at most its own energy.
PitchFilterBank build_filter_bank(const ChromaParams& params, double spec_bin_hz);

/// B x T nonnegative matrix, circular along the chroma axis (B = n*m bins).
/// Stored row-major by bin so each bin's time series is contiguous.
struct TimeChromaImage {
    std::vector<double> values; // bins * frames
    std::size_t num_bins = 0;
    std::size_t num_frames = 0;
    double frame_hop_s = 0.0;
    double frame0_center_s = 0.0; // center time of frame 0
    ChromaParams params;

    double at(std::size_t b, std::size_t t) const { return values[b * num_frames + t]; }
    double& at(std::size_t b, std::size_t t) { return values[b * num_frames + t]; }
    const double* row(std::size_t b) const { return values.data() + b * num_frames; }
    double frame_time_s(double t) const { return frame0_center_s + t * frame_hop_s; }
};

/// Sum pitch energies (squared spectrogram magnitudes through the filter
/// bank) into chroma bins: values(b, t) = sum_k pitch_energy(b + k*n*m, t).
TimeChromaImage compute_time_chroma(const Spectrogram& spec, const PitchFilterBank& bank);

/// values'(b, t) = values((b - delta_bins) mod B, t)
TimeChromaImage circular_shift(const TimeChromaImage& img, int delta_bins);

} // namespace tcfp
