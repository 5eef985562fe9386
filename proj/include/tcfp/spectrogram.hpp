#pragma once

#include "tcfp/audio.hpp"

#include <cstddef>
#include <vector>

namespace tcfp {

/// One-sided STFT magnitudes, frame-major: row t holds bins 0..num_bins-1.
struct Spectrogram {
    std::vector<double> mags; // num_frames * num_bins
    std::size_t num_bins = 0;
    std::size_t num_frames = 0;
    double bin_hz = 0.0;
    double frame_hop_s = 0.0;
    double window_len_s = 0.0;
    int sample_rate = 0;

    const double* frame(std::size_t t) const { return mags.data() + t * num_bins; }
    double at(std::size_t bin, std::size_t t) const { return mags[t * num_bins + bin]; }
    /// center time of frame t in seconds
    double frame_center_s(std::size_t t) const {
        const double n = window_len_s * sample_rate;
        return (t * frame_hop_s * sample_rate + n / 2.0) / sample_rate;
    }
};

/// Magnitude STFT with a periodic Hann window. Window length N =
/// round(window_len_s * fs), hop = round(N * (1 - overlap_fraction)); frames
/// are |DFT| of the first N/2+1 bins, trailing partial windows dropped.
/// Throws SignalTooShort if the signal is shorter than one window.
Spectrogram stft_magnitude(const AudioSignal& sig, double window_len_s, double overlap_fraction);

} // namespace tcfp
