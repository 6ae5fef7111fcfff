#pragma once

#include <vector>

#include "s4c/audio.hpp"

namespace s4c::mel {

struct MelConfig {
    int fft_size = 2048;   // power of two
    int hop = 480;         // samples (10 ms at 48 kHz)
    int n_mels = 128;
    double fmin_hz = 0.0;
    double fmax_hz = 0.0;  // 0 -> Nyquist
};

// Time x mel-band energy matrix. Row t holds the n_mels band energies of
// frame t; frame t covers samples [t*hop, t*hop + fft_size).
struct Spectrogram {
    int n_frames = 0;
    int n_mels = 0;
    double frame_hop_s = 0.0;
    double origin_offset_s = 0.0;  // seconds from the source buffer start
    std::vector<double> values;    // row-major, n_frames * n_mels

    double at(int frame, int band) const { return values[std::size_t(frame) * n_mels + band]; }
    double& at(int frame, int band) { return values[std::size_t(frame) * n_mels + band]; }
};

// Triangular mel filterbank on the HTK mel scale, rows normalized to unit
// area in Hz. Returned matrix is n_mels x (fft_size/2 + 1), row-major.
std::vector<double> mel_filterbank(const MelConfig& cfg, int sample_rate);

// Hann-windowed power-spectrum frames routed through the mel filterbank.
// Frame count is exactly 1 + floor((len - fft_size) / hop); a buffer shorter
// than one window is an error.
Spectrogram mel_spectrogram(const audio::AudioBuffer& buf, const MelConfig& cfg = {});

// Center frequency (Hz) of a mel band, for filterbank diagnostics.
double band_center_hz(const MelConfig& cfg, int sample_rate, int band);

// Power spectrum |FFT|^2 of one Hann-windowed frame; bins 0..fft_size/2.
std::vector<double> power_spectrum_frame(const float* samples, int fft_size);

}  // namespace s4c::mel
