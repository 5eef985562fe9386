#include "tcfp/spectrogram.hpp"

#include "tcfp/errors.hpp"
#include "tcfp/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include <fftw3.h>

namespace tcfp {

Spectrogram stft_magnitude(const AudioSignal& sig, double window_len_s, double overlap_fraction) {
    if (sig.sample_rate <= 0)
        throw std::invalid_argument("stft_magnitude: signal has no sample rate");
    if (overlap_fraction < 0.0 || overlap_fraction >= 1.0)
        throw std::invalid_argument("stft_magnitude: overlap must be in [0, 1)");

    const long n = std::lround(window_len_s * sig.sample_rate);
    if (n < 2)
        throw std::invalid_argument("stft_magnitude: window shorter than two samples");
    const long hop = std::max(1L, std::lround(n * (1.0 - overlap_fraction)));
    if (static_cast<long>(sig.samples.size()) < n)
        throw SignalTooShort("stft_magnitude: signal shorter than one window");

    const std::size_t num_bins = static_cast<std::size_t>(n / 2 + 1);
    const std::size_t num_frames = static_cast<std::size_t>((sig.samples.size() - n) / hop + 1);

    std::vector<double> window(n);
    for (long i = 0; i < n; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);

    Spectrogram spec;
    spec.num_bins = num_bins;
    spec.num_frames = num_frames;
    spec.bin_hz = static_cast<double>(sig.sample_rate) / n;
    spec.frame_hop_s = static_cast<double>(hop) / sig.sample_rate;
    spec.window_len_s = window_len_s;
    spec.sample_rate = sig.sample_rate;
    spec.mags.resize(num_frames * num_bins);

    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(num_bins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);

    for (std::size_t t = 0; t < num_frames; ++t) {
        const double* src = sig.samples.data() + static_cast<std::size_t>(t) * hop;
        kernels::multiply(src, window.data(), in, n);
        fftw_execute(plan);
        kernels::complex_magnitude(&out[0][0], spec.mags.data() + t * num_bins, num_bins);
    }

    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    return spec;
}

} // namespace tcfp
