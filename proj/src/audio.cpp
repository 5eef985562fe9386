#include "tcfp/audio.hpp"

#include "tcfp/errors.hpp"
#include "tcfp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tcfp {

namespace {

uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    return static_cast<uint32_t>(buf[0]) | (static_cast<uint32_t>(buf[1]) << 8) |
           (static_cast<uint32_t>(buf[2]) << 16) | (static_cast<uint32_t>(buf[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
    unsigned char buf[2];
    in.read(reinterpret_cast<char*>(buf), 2);
    return static_cast<uint16_t>(buf[0] | (buf[1] << 8));
}

void write_u32(std::ostream& out, uint32_t v) {
    const unsigned char buf[4] = {static_cast<unsigned char>(v & 0xff),
                                  static_cast<unsigned char>((v >> 8) & 0xff),
                                  static_cast<unsigned char>((v >> 16) & 0xff),
                                  static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u16(std::ostream& out, uint16_t v) {
    const unsigned char buf[2] = {static_cast<unsigned char>(v & 0xff),
                                  static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(buf), 2);
}

} // namespace

AudioSignal load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw MalformedHeader(path + ": not a RIFF file");
    read_u32(in); // riff size, unused
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw MalformedHeader(path + ": not a WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;
    std::vector<char> data;
    bool have_data = false;

    while (in.read(tag, 4)) {
        const uint32_t size = read_u32(in);
        if (!in)
            throw MalformedHeader(path + ": truncated chunk header");
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (size < 16)
                throw MalformedHeader(path + ": fmt chunk too small");
            format = read_u16(in);
            channels = read_u16(in);
            rate = read_u32(in);
            read_u32(in); // byte rate
            read_u16(in); // block align
            bits = read_u16(in);
            in.ignore(size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            if (static_cast<uint32_t>(in.gcount()) != size)
                throw MalformedHeader(path + ": truncated data chunk");
            have_data = true;
        } else {
            in.ignore(size);
        }
        if (size & 1)
            in.ignore(1); // chunks are word-aligned
    }
    if (!have_fmt || !have_data)
        throw MalformedHeader(path + ": missing fmt or data chunk");
    if (rate == 0)
        throw MalformedHeader(path + ": zero sample rate");
    if (channels != 1 && channels != 2)
        throw UnsupportedEncoding(path + ": only mono/stereo supported");

    const bool pcm_ok = format == 1 && (bits == 8 || bits == 16 || bits == 24);
    const bool float_ok = format == 3 && bits == 32;
    if (!pcm_ok && !float_ok)
        throw UnsupportedEncoding(path + ": unsupported sample format");

    const size_t bytes_per_sample = bits / 8;
    const size_t frame_bytes = bytes_per_sample * channels;
    const size_t frames = data.size() / frame_bytes;
    const unsigned char* raw = reinterpret_cast<const unsigned char*>(data.data());

    AudioSignal sig;
    sig.sample_rate = static_cast<int>(rate);
    sig.samples.resize(frames);
    for (size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (int ch = 0; ch < channels; ++ch) {
            const unsigned char* p = raw + f * frame_bytes + ch * bytes_per_sample;
            double v = 0.0;
            if (format == 3) {
                float x;
                std::memcpy(&x, p, 4);
                v = x;
            } else if (bits == 8) {
                v = (static_cast<int>(p[0]) - 128) / 128.0;
            } else if (bits == 16) {
                const int16_t x = static_cast<int16_t>(p[0] | (p[1] << 8));
                v = x / 32768.0;
            } else { // 24-bit
                int32_t x = p[0] | (p[1] << 8) | (p[2] << 16);
                if (x & 0x800000)
                    x |= ~0xffffff; // sign extend
                v = x / 8388608.0;
            }
            acc += v;
        }
        sig.samples[f] = acc / channels;
    }
    return sig;
}

void write_wav(const std::string& path, const AudioSignal& sig) {
    if (sig.sample_rate <= 0)
        throw std::invalid_argument("write_wav: invalid sample rate");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create " + path);

    const uint32_t data_bytes = static_cast<uint32_t>(sig.samples.size() * 2);
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1); // PCM
    write_u16(out, 1); // mono
    write_u32(out, static_cast<uint32_t>(sig.sample_rate));
    write_u32(out, static_cast<uint32_t>(sig.sample_rate * 2));
    write_u16(out, 2);  // block align
    write_u16(out, 16); // bits
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (double s : sig.samples) {
        const long scaled = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
        const int16_t q = static_cast<int16_t>(std::clamp(scaled, -32768L, 32767L));
        unsigned char buf[2] = {static_cast<unsigned char>(q & 0xff),
                                static_cast<unsigned char>((q >> 8) & 0xff)};
        out.write(reinterpret_cast<const char*>(buf), 2);
    }
    if (!out)
        throw IoError("write failed: " + path);
}

namespace {

double bessel_i0(double x) {
    double acc = 1.0, term = 1.0;
    const double h = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= h / (k * static_cast<double>(k));
        acc += term;
        if (term < acc * 1e-17)
            break;
    }
    return acc;
}

constexpr int kTapsPerPhase = 32;
constexpr int kPhases = 512;
constexpr double kKaiserBeta = 8.6;

// Windowed-sinc interpolation at arbitrary real ratio = out_rate / in_rate.
// Tap weights come from a (kPhases+1)-row polyphase table, rows normalized to
// unit DC gain, with linear interpolation between adjacent phases.
std::vector<double> resample_by_ratio(const std::vector<double>& in, double ratio) {
    const size_t out_len = static_cast<size_t>(std::llround(in.size() * ratio));
    std::vector<double> out(out_len, 0.0);
    if (in.empty() || out_len == 0)
        return out;

    const double cutoff = 0.45 * std::min(1.0, ratio); // cycles per input sample
    const double half_width = (kTapsPerPhase / 2) / std::min(1.0, ratio);
    const int taps = 2 * static_cast<int>(std::ceil(half_width));
    const double inv_i0 = 1.0 / bessel_i0(kKaiserBeta);

    std::vector<double> table(static_cast<size_t>(kPhases + 1) * taps);
    for (int p = 0; p <= kPhases; ++p) {
        double* row = table.data() + static_cast<size_t>(p) * taps;
        double sum = 0.0;
        for (int j = 0; j < taps; ++j) {
            const double u = (j - taps / 2 + 1) - static_cast<double>(p) / kPhases;
            double w = 0.0;
            if (std::abs(u) < half_width) {
                const double z = 2.0 * cutoff * u;
                const double sinc = z == 0.0 ? 1.0 : std::sin(M_PI * z) / (M_PI * z);
                const double t = u / half_width;
                const double win = bessel_i0(kKaiserBeta * std::sqrt(1.0 - t * t)) * inv_i0;
                w = 2.0 * cutoff * sinc * win;
            }
            row[j] = w;
            sum += w;
        }
        for (int j = 0; j < taps; ++j)
            row[j] /= sum;
    }

    const size_t n = in.size();
    for (size_t k = 0; k < out_len; ++k) {
        const double x = k / ratio;
        const double fl = std::floor(x);
        const long i0 = static_cast<long>(fl) - taps / 2 + 1;
        const double frac = x - fl;
        const double pr = frac * kPhases;
        const int p0 = std::min(static_cast<int>(pr), kPhases - 1);
        const double a = pr - p0;
        const double* row0 = table.data() + static_cast<size_t>(p0) * taps;
        const double* row1 = row0 + taps;
        if (i0 >= 0 && i0 + taps <= static_cast<long>(n)) {
            const double* src = in.data() + i0;
            out[k] = (1.0 - a) * kernels::dot(row0, src, taps) + a * kernels::dot(row1, src, taps);
        } else {
            double acc = 0.0;
            for (int j = 0; j < taps; ++j) {
                const long i = i0 + j;
                if (i < 0 || i >= static_cast<long>(n))
                    continue;
                acc += ((1.0 - a) * row0[j] + a * row1[j]) * in[i];
            }
            out[k] = acc;
        }
    }
    return out;
}

} // namespace

AudioSignal resample(const AudioSignal& sig, int target_rate) {
    if (target_rate <= 0)
        throw std::invalid_argument("resample: target rate must be positive");
    if (sig.sample_rate <= 0)
        throw std::invalid_argument("resample: signal has no sample rate");
    if (target_rate == sig.sample_rate)
        return sig;
    AudioSignal out;
    out.sample_rate = target_rate;
    out.samples = resample_by_ratio(sig.samples, static_cast<double>(target_rate) / sig.sample_rate);
    return out;
}

AudioSignal stretch_playback(const AudioSignal& sig, double speed) {
    if (speed <= 0.0)
        throw std::invalid_argument("stretch_playback: speed must be positive");
    if (speed == 1.0)
        return sig;
    AudioSignal out;
    out.sample_rate = sig.sample_rate;
    out.samples = resample_by_ratio(sig.samples, 1.0 / speed);
    return out;
}

} // namespace tcfp
