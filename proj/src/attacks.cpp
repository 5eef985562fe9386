#include "tcfp/attacks.hpp"

#include "tcfp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace tcfp {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double phase_for(uint64_t phase_key, int harmonic) {
    const uint64_t h = splitmix64(phase_key ^ (0xA24BAED4963EE407ull * (harmonic + 1)));
    return 2.0 * M_PI * (static_cast<double>(h >> 11) * 0x1.0p-53);
}

// Note pitches stay where the 10 Hz spectrogram grid resolves single pitch
// steps and where every partial survives the evaluation attack levels
// (+-12 steps, +-10% speed) without leaving [f0, fs/2). Outside this window
// the coarse bin grid can mislabel a partial's chroma row by one step.
constexpr int kPitchLo = 265;
constexpr int kPitchHi = 290;
constexpr double kHarmonicBandCap = 3900.0; // Hz, highest partial incl. attack headroom

} // namespace

AudioSignal render_score(const SyntheticScore& score, const ChromaParams& params,
                         double length_s) {
    AudioSignal sig;
    sig.sample_rate = params.fs;
    const std::size_t n = static_cast<std::size_t>(std::llround(length_s * params.fs));
    sig.samples.assign(n, 0.0);

    for (const auto& note : score.notes) {
        const double f0 = params.pitch_freq(note.pitch_index);
        const long lo = std::max(0L, std::lround(note.onset_s * params.fs));
        const long hi = std::min(static_cast<long>(n),
                                 std::lround((note.onset_s + note.duration_s) * params.fs));
        for (int h = 1; h <= note.harmonics; ++h) {
            const double f = f0 * h;
            if (f >= params.fs / 2.0)
                continue;
            const double w = 2.0 * M_PI * f / params.fs;
            const double amp = note.amplitude / h;
            const double phase = phase_for(note.phase_key, h);
            for (long i = lo; i < hi; ++i) {
                const double tau = static_cast<double>(i) / params.fs - note.onset_s;
                const double env = 0.5 - 0.5 * std::cos(2.0 * M_PI * tau / note.duration_s);
                sig.samples[i] += amp * env * std::sin(w * i + phase);
            }
        }
    }

    double peak = 0.0;
    for (double s : sig.samples)
        peak = std::max(peak, std::abs(s));
    if (peak > 0.5) {
        const double g = 0.5 / peak;
        for (double& s : sig.samples)
            s *= g;
    }
    return sig;
}

std::pair<SyntheticScore, AudioSignal> generate_song(uint64_t seed, double length_s,
                                                     const ChromaParams& params) {
    if (length_s < 10.0)
        throw std::invalid_argument("generate_song: length must be at least 10 s");
    SyntheticScore score;
    score.seed = seed;
    score.length_s = length_s;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> density_d(2.0, 6.0);
    std::uniform_real_distribution<double> dur_d(0.3, 1.2);
    std::uniform_real_distribution<double> amp_d(0.08, 0.25);
    std::uniform_int_distribution<int> pitch_d(kPitchLo, kPitchHi);
    std::uniform_int_distribution<int> harm_d(3, 6);

    const double density = density_d(rng);
    const double usable = length_s - 0.05; // envelope headroom at the end
    const std::size_t count = static_cast<std::size_t>(std::llround(density * length_s));
    std::uniform_real_distribution<double> onset_d(0.0, usable - 1.2);
    for (std::size_t k = 0; k < count; ++k) {
        SyntheticScore::Note note;
        note.onset_s = onset_d(rng);
        note.duration_s = std::min(dur_d(rng), usable - note.onset_s);
        note.amplitude = amp_d(rng);
        note.pitch_index = pitch_d(rng);
        const int in_band = static_cast<int>(kHarmonicBandCap / params.pitch_freq(note.pitch_index));
        note.harmonics = std::min(harm_d(rng), std::max(1, in_band));
        note.phase_key = splitmix64(seed ^ (k * 0x9E3779B97F4A7C15ull + 1));
        score.notes.push_back(note);
    }
    std::sort(score.notes.begin(), score.notes.end(),
              [](const auto& a, const auto& b) { return a.onset_s < b.onset_s; });
    return {score, render_score(score, params, length_s)};
}

SyntheticScore shift_score(const SyntheticScore& score, int delta_p, const ChromaParams& params) {
    SyntheticScore out = score;
    const double nyquist = params.fs / 2.0;
    for (auto& note : out.notes) {
        note.pitch_index += delta_p;
        const double f = params.pitch_freq(note.pitch_index);
        if (f < params.f0 || f >= nyquist)
            throw OutOfBand("pitch shift moves a note outside [f0, fs/2)");
    }
    return out;
}

AudioSignal attack_pitch_shift(const SyntheticScore& score, int delta_p,
                               const ChromaParams& params) {
    return render_score(shift_score(score, delta_p, params), params, score.length_s);
}

SyntheticScore scale_score_time(const SyntheticScore& score, double a) {
    if (!(a > 0.0))
        throw std::invalid_argument("scale_score_time: factor must be positive");
    SyntheticScore out = score;
    out.length_s = score.length_s / a;
    for (auto& note : out.notes) {
        note.onset_s /= a;
        note.duration_s /= a;
    }
    return out;
}

AudioSignal attack_tempo(const SyntheticScore& score, double a, const ChromaParams& params) {
    const SyntheticScore scaled = scale_score_time(score, a);
    return render_score(scaled, params, scaled.length_s);
}

AudioSignal attack_speed(const AudioSignal& sig, double s) {
    return stretch_playback(sig, s);
}

AudioSignal attack_noise(const AudioSignal& sig, double snr_db, uint64_t noise_seed) {
    if (std::isinf(snr_db) && snr_db > 0.0)
        return sig;
    double power = 0.0;
    for (double s : sig.samples)
        power += s * s;
    power /= std::max<std::size_t>(1, sig.samples.size());
    if (!(power > 0.0))
        throw SilentSignal("attack_noise: SNR undefined for a silent signal");

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> noise(sig.samples.size());
    double npow = 0.0;
    for (double& v : noise) {
        v = gauss(rng);
        npow += v * v;
    }
    npow /= std::max<std::size_t>(1, noise.size());
    // normalize the realized noise power so the measured SNR is exact
    const double target = power / std::pow(10.0, snr_db / 10.0);
    const double g = std::sqrt(target / npow);

    AudioSignal out = sig;
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] += g * noise[i];
    return out;
}

SyntheticScore cut_score(const SyntheticScore& score, double t0, double t1) {
    SyntheticScore out;
    out.seed = score.seed;
    out.length_s = t1 - t0;
    for (const auto& note : score.notes) {
        if (note.onset_s + note.duration_s <= t0 || note.onset_s >= t1)
            continue;
        SyntheticScore::Note local = note;
        local.onset_s = note.onset_s - t0; // may go negative; render clips
        out.notes.push_back(local);
    }
    return out;
}

Mashup mashup(const std::vector<MashupEntry>& entries, int sample_rate) {
    Mashup out;
    out.signal.sample_rate = sample_rate;
    for (const auto& e : entries) {
        const std::size_t gap = static_cast<std::size_t>(std::llround(e.gap_before_s * sample_rate));
        out.signal.samples.insert(out.signal.samples.end(), gap, 0.0);
        const double q_start = static_cast<double>(out.signal.samples.size()) / sample_rate;
        out.signal.samples.insert(out.signal.samples.end(), e.signal.samples.begin(),
                                  e.signal.samples.end());
        const double q_end = static_cast<double>(out.signal.samples.size()) / sample_rate;
        out.truth.push_back({e.song_id, q_start, q_end, e.db_start_s, e.db_end_s, e.slope_a, e.dp});
    }
    return out;
}

} // namespace tcfp
