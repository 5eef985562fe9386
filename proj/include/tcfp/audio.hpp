#pragma once

#include <string>
#include <vector>

namespace tcfp {

/// Mono audio buffer, amplitudes in [-1, 1].
struct AudioSignal {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

/// Decode a RIFF/WAVE file. PCM 8/16/24-bit integer or 32-bit float, 1 or 2
/// channels; stereo is downmixed by channel averaging, integer samples scaled
/// by the type's max magnitude. Chunks other than fmt/data are skipped.
/// Throws IoError, MalformedHeader, UnsupportedEncoding.
AudioSignal load_wav(const std::string& path);

/// Write a mono 16-bit PCM WAV (samples clamped to [-1, 1]).
void write_wav(const std::string& path, const AudioSignal& sig);

/// Band-limited rate conversion: polyphase windowed-sinc (Kaiser window,
/// 32 taps per phase, cutoff at 0.45 of the lower rate). Same rate in and
/// out returns the input unchanged.
AudioSignal resample(const AudioSignal& sig, int target_rate);

/// Playback-rate change by real factor: output duration = input / speed and
/// every frequency is multiplied by speed; the sample rate label is kept.
AudioSignal stretch_playback(const AudioSignal& sig, double speed);

} // namespace tcfp
