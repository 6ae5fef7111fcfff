#include "s4c/mel.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace s4c::mel {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW plan creation is not thread-safe; executions are.
std::mutex g_plan_mutex;

struct FftwPlan {
    int n = 0;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan{};

    FftwPlan(const FftwPlan&) = delete;
    explicit FftwPlan(int size) : n(size) {
        in = fftw_alloc_real(n);
        out = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    }
    ~FftwPlan() {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
};

std::vector<double> mel_boundaries(const MelConfig& cfg, int sample_rate) {
    const double fmax = cfg.fmax_hz > 0.0 ? cfg.fmax_hz : sample_rate / 2.0;
    const double mel_lo = hz_to_mel(cfg.fmin_hz);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> hz(cfg.n_mels + 2);
    for (int i = 0; i < cfg.n_mels + 2; ++i) {
        hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));
    }
    return hz;
}

}  // namespace

std::vector<double> mel_filterbank(const MelConfig& cfg, int sample_rate) {
    if (cfg.n_mels <= 0) throw std::invalid_argument("n_mels must be positive");
    if (!is_pow2(cfg.fft_size)) throw std::invalid_argument("fft_size must be a power of two");

    const int n_bins = cfg.fft_size / 2 + 1;
    const std::vector<double> edge_hz = mel_boundaries(cfg, sample_rate);
    std::vector<double> fb(std::size_t(cfg.n_mels) * n_bins, 0.0);

    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = edge_hz[m], center = edge_hz[m + 1], hi = edge_hz[m + 2];
        const double area_norm = 2.0 / (hi - lo);
        for (int bin = 0; bin < n_bins; ++bin) {
            const double f = double(bin) * sample_rate / cfg.fft_size;
            double w = 0.0;
            if (f > lo && f < center) {
                w = (f - lo) / (center - lo);
            } else if (f >= center && f < hi) {
                w = (hi - f) / (hi - center);
            }
            fb[std::size_t(m) * n_bins + bin] = w * area_norm;
        }
    }
    return fb;
}

double band_center_hz(const MelConfig& cfg, int sample_rate, int band) {
    if (band < 0 || band >= cfg.n_mels) throw std::invalid_argument("band out of range");
    return mel_boundaries(cfg, sample_rate)[band + 1];
}

std::vector<double> power_spectrum_frame(const float* samples, int fft_size) {
    if (!is_pow2(fft_size)) throw std::invalid_argument("fft_size must be a power of two");
    thread_local std::unique_ptr<FftwPlan> plan;
    if (!plan || plan->n != fft_size) plan = std::make_unique<FftwPlan>(fft_size);

    for (int i = 0; i < fft_size; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / fft_size));
        plan->in[i] = w * samples[i];
    }
    fftw_execute(plan->plan);

    std::vector<double> power(fft_size / 2 + 1);
    for (int bin = 0; bin <= fft_size / 2; ++bin) {
        const double re = plan->out[bin][0], im = plan->out[bin][1];
        power[bin] = re * re + im * im;
    }
    return power;
}

Spectrogram mel_spectrogram(const audio::AudioBuffer& buf, const MelConfig& cfg) {
    if (cfg.hop <= 0) throw std::invalid_argument("hop must be positive");
    if (static_cast<int>(buf.samples.size()) < cfg.fft_size) {
        throw std::invalid_argument("buffer shorter than one analysis window");
    }

    const int n_frames =
        1 + static_cast<int>((buf.samples.size() - cfg.fft_size) / cfg.hop);
    const int n_bins = cfg.fft_size / 2 + 1;
    const std::vector<double> fb = mel_filterbank(cfg, buf.sample_rate);

    Spectrogram spec;
    spec.n_frames = n_frames;
    spec.n_mels = cfg.n_mels;
    spec.frame_hop_s = double(cfg.hop) / buf.sample_rate;
    spec.values.assign(std::size_t(n_frames) * cfg.n_mels, 0.0);

    for (int t = 0; t < n_frames; ++t) {
        const std::vector<double> power =
            power_spectrum_frame(buf.samples.data() + std::size_t(t) * cfg.hop, cfg.fft_size);
        for (int m = 0; m < cfg.n_mels; ++m) {
            const double* row = fb.data() + std::size_t(m) * n_bins;
            double acc = 0.0;
            for (int bin = 0; bin < n_bins; ++bin) acc += row[bin] * power[bin];
            spec.at(t, m) = acc;
        }
    }
    return spec;
}

}  // namespace s4c::mel
