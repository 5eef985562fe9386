#pragma once

#include "tcfp/audio.hpp"
#include "tcfp/time_chroma.hpp"

#include <cstdint>
#include <vector>

namespace tcfp {

/// Note list rendered additively; the ground truth behind every robustness
/// test. Pitch/tempo attacks re-render the score, which keeps the attacked
/// audio mathematically exact instead of approximating it with DSP.
struct SyntheticScore {
    struct Note {
        int pitch_index = 0; // frequency 2^(i/m) * f0
        double onset_s = 0.0;
        double duration_s = 0.0;
        double amplitude = 0.0;
        int harmonics = 3;
        uint64_t phase_key = 0; // keeps partial phases stable across re-renders
    };
    std::vector<Note> notes;
    uint64_t seed = 0;
    double length_s = 0.0;
};

/// Deterministic random score (same seed, same samples): note density 2-6
/// per second, durations 0.3-1.2 s, 3-6 harmonics with 1/h amplitude decay,
/// raised-cosine envelopes.
std::pair<SyntheticScore, AudioSignal> generate_song(uint64_t seed, double length_s,
                                                     const ChromaParams& params);

/// Additive render of a score at the given length.
AudioSignal render_score(const SyntheticScore& score, const ChromaParams& params,
                         double length_s);

/// Exact pitch shift: every pitch index moves by delta_p steps, time
/// untouched. Throws OutOfBand when a partial would cross f0 or fs/2.
AudioSignal attack_pitch_shift(const SyntheticScore& score, int delta_p,
                               const ChromaParams& params);
SyntheticScore shift_score(const SyntheticScore& score, int delta_p, const ChromaParams& params);

/// Exact tempo change by factor a: onsets and durations divide by a (tempo
/// increases by a), pitches untouched.
AudioSignal attack_tempo(const SyntheticScore& score, double a, const ChromaParams& params);
SyntheticScore scale_score_time(const SyntheticScore& score, double a);

/// Playback-speed change on any signal: duration divides by s, frequencies
/// multiply by s.
AudioSignal attack_speed(const AudioSignal& sig, double s);

/// Additive white Gaussian noise at an exact power-ratio SNR; +infinity
/// returns the input unchanged. Throws SilentSignal for silent input.
AudioSignal attack_noise(const AudioSignal& sig, double snr_db, uint64_t noise_seed = 0x5eed);

struct MashupEntry {
    AudioSignal signal;
    double gap_before_s = 0.0; // silence inserted before the snippet
    uint32_t song_id = 0;
    double db_start_s = 0.0;
    double db_end_s = 0.0;
    double slope_a = 1.0; // a in t_q = a * t_db + b for this snippet
    int dp = 0;           // canonical pitch shift, [0, B)
};

struct GroundTruthRow {
    uint32_t song_id = 0;
    double query_start_s = 0.0;
    double query_end_s = 0.0;
    double db_start_s = 0.0;
    double db_end_s = 0.0;
    double a = 1.0;
    int dp = 0;
};

struct Mashup {
    AudioSignal signal;
    std::vector<GroundTruthRow> truth;
};

/// Concatenate snippets (with their silent gaps) into one query and record
/// the per-snippet ground truth.
Mashup mashup(const std::vector<MashupEntry>& entries, int sample_rate);

/// Notes of `score` sounding anywhere in [t0, t1), shifted to local time
/// (clipped at the render stage, so the snippet matches the source audio).
SyntheticScore cut_score(const SyntheticScore& score, double t0, double t1);

} // namespace tcfp
