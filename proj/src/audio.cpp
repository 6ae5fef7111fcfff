#include "s4c/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace s4c::audio {

namespace {

Mp3Decoder g_mp3_decoder;

constexpr double kFrameSeconds = 0.010;

std::uint32_t read_u32le(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16le(const unsigned char* p) {
    return std::uint16_t(p[0] | p[1] << 8);
}

float peak_abs(const std::vector<float>& v) {
    float peak = 0.0f;
    for (float x : v) peak = std::max(peak, std::abs(x));
    return peak;
}

int frame_length(int sample_rate) {
    return std::max(1, static_cast<int>(std::lround(kFrameSeconds * sample_rate)));
}

// Per-frame RMS over non-overlapping frames anchored at the buffer start.
// The trailing partial frame counts as a frame of its own.
std::vector<double> frame_rms(const AudioBuffer& buf, int frame_len) {
    const std::size_t n = buf.samples.size();
    std::vector<double> rms;
    rms.reserve(n / frame_len + 1);
    for (std::size_t start = 0; start < n; start += frame_len) {
        std::size_t end = std::min(n, start + frame_len);
        double acc = 0.0;
        for (std::size_t i = start; i < end; ++i) {
            acc += double(buf.samples[i]) * buf.samples[i];
        }
        rms.push_back(std::sqrt(acc / double(end - start)));
    }
    return rms;
}

}  // namespace

void set_mp3_decoder(Mp3Decoder decoder) { g_mp3_decoder = std::move(decoder); }

bool has_mp3_decoder() { return static_cast<bool>(g_mp3_decoder); }

AudioBuffer decode_wav(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw AudioError("not a RIFF/WAVE stream");
    }

    int channels = 0;
    int sample_rate = 0;
    int bits = 0;
    int format = 0;
    const unsigned char* data = nullptr;
    std::size_t data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        std::uint32_t chunk_size = read_u32le(bytes.data() + pos + 4);
        std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) {
            chunk_size = static_cast<std::uint32_t>(bytes.size() - body);
        }
        if (std::memcmp(id, "fmt ", 4) == 0 && chunk_size >= 16) {
            format = read_u16le(bytes.data() + body);
            channels = read_u16le(bytes.data() + body + 2);
            sample_rate = static_cast<int>(read_u32le(bytes.data() + body + 4));
            bits = read_u16le(bytes.data() + body + 14);
            if (format == 0xFFFE && chunk_size >= 40) {
                // WAVE_FORMAT_EXTENSIBLE: first two bytes of the GUID hold the tag.
                format = read_u16le(bytes.data() + body + 24);
            }
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);
    }

    if (channels <= 0 || sample_rate <= 0 || data == nullptr) {
        throw AudioError("malformed WAV: missing fmt or data chunk");
    }

    const int bytes_per_sample = bits / 8;
    if (bytes_per_sample == 0) throw AudioError("malformed WAV: zero bits per sample");
    const std::size_t total_samples = data_size / bytes_per_sample;
    const std::size_t n_frames = total_samples / channels;
    if (n_frames == 0) throw AudioError("empty audio stream");

    AudioBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(n_frames);

    for (std::size_t f = 0; f < n_frames; ++f) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const unsigned char* p = data + (f * channels + c) * bytes_per_sample;
            double v;
            if (format == 1 && bits == 16) {
                std::int16_t s = static_cast<std::int16_t>(read_u16le(p));
                v = s / 32768.0;
            } else if (format == 1 && bits == 24) {
                std::int32_t s = p[0] | p[1] << 8 | p[2] << 16;
                if (s & 0x800000) s |= ~0xFFFFFF;
                v = s / 8388608.0;
            } else if (format == 3 && bits == 32) {
                float fv;
                std::memcpy(&fv, p, 4);
                v = fv;
            } else {
                throw AudioError("unsupported WAV encoding: format " + std::to_string(format) +
                                 ", " + std::to_string(bits) + " bits");
            }
            acc += v;
        }
        out.samples[f] = static_cast<float>(acc / channels);
    }
    return out;
}

AudioBuffer load_audio(const std::filesystem::path& path, int target_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AudioError("cannot open audio file: " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.empty()) throw AudioError("empty audio stream: " + path.string());

    AudioBuffer buf;
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "RIFF", 4) == 0) {
        try {
            buf = decode_wav(bytes);
        } catch (const AudioError& e) {
            throw AudioError(path.string() + ": " + e.what());
        }
    } else if (path.extension() == ".mp3" ||
               (bytes.size() >= 3 && std::memcmp(bytes.data(), "ID3", 3) == 0) ||
               (bytes.size() >= 2 && bytes[0] == 0xFF && (bytes[1] & 0xE0) == 0xE0)) {
        if (!g_mp3_decoder) {
            throw AudioError("MP3 input but no MP3 decoder registered in this build: " +
                             path.string());
        }
        buf = g_mp3_decoder(path);
        if (buf.empty()) throw AudioError("empty audio stream: " + path.string());
    } else {
        throw AudioError("unrecognized audio container: " + path.string());
    }

    if (buf.sample_rate != target_rate) buf = resample(buf, target_rate);
    return buf;
}

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
    if (target_rate <= 0) throw AudioError("target rate must be positive");
    if (buf.sample_rate == target_rate || buf.empty()) {
        AudioBuffer out = buf;
        out.sample_rate = target_rate;
        return out;
    }
    const std::size_t in_len = buf.samples.size();
    const std::size_t out_len = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(double(in_len) * target_rate / buf.sample_rate)));
    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(out_len);
    const double step = double(in_len) / double(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        double pos = i * step;
        std::size_t i0 = std::min(in_len - 1, static_cast<std::size_t>(pos));
        std::size_t i1 = std::min(in_len - 1, i0 + 1);
        double frac = pos - double(i0);
        out.samples[i] =
            static_cast<float>((1.0 - frac) * buf.samples[i0] + frac * buf.samples[i1]);
    }
    return out;
}

AudioBuffer normalize(const AudioBuffer& buf) {
    if (buf.empty()) throw AudioError("cannot normalize an empty buffer");
    float peak = peak_abs(buf.samples);
    if (peak == 0.0f) return buf;
    AudioBuffer out = buf;
    for (float& x : out.samples) x /= peak;
    return out;
}

TrimResult trim_silence(const AudioBuffer& buf, double threshold_db) {
    if (buf.empty()) throw AudioError("cannot trim an empty buffer");
    if (threshold_db >= 0.0) throw AudioError("trim threshold must be negative dB");

    TrimResult result;
    const float peak = peak_abs(buf.samples);
    if (peak == 0.0f) {
        result.all_silent = true;
        result.audio.sample_rate = buf.sample_rate;
        return result;
    }

    const int frame_len = frame_length(buf.sample_rate);
    const std::vector<double> rms = frame_rms(buf, frame_len);
    const double threshold = double(peak) * std::pow(10.0, threshold_db / 20.0);

    std::ptrdiff_t first = -1, last = -1;
    for (std::size_t f = 0; f < rms.size(); ++f) {
        if (rms[f] >= threshold) {
            if (first < 0) first = static_cast<std::ptrdiff_t>(f);
            last = static_cast<std::ptrdiff_t>(f);
        }
    }
    if (first < 0) {
        result.all_silent = true;
        result.audio.sample_rate = buf.sample_rate;
        return result;
    }

    const std::size_t begin = std::size_t(first) * frame_len;
    const std::size_t end = std::min(buf.samples.size(), std::size_t(last + 1) * frame_len);
    result.audio.sample_rate = buf.sample_rate;
    result.audio.samples.assign(buf.samples.begin() + begin, buf.samples.begin() + end);
    result.leading_offset_s = double(begin) / buf.sample_rate;
    return result;
}

std::vector<Interval> split_nonsilent(const AudioBuffer& buf, double threshold_db,
                                      double min_gap_s, double min_len_s) {
    if (buf.empty()) throw AudioError("cannot split an empty buffer");

    std::vector<Interval> intervals;
    const float peak = peak_abs(buf.samples);
    if (peak == 0.0f) return intervals;

    const int frame_len = frame_length(buf.sample_rate);
    const std::vector<double> rms = frame_rms(buf, frame_len);
    const double threshold = double(peak) * std::pow(10.0, threshold_db / 20.0);
    const double frame_s = double(frame_len) / buf.sample_rate;
    const double total_s = buf.duration_s();

    // Runs of active frames.
    std::ptrdiff_t run_start = -1;
    for (std::size_t f = 0; f <= rms.size(); ++f) {
        bool active = f < rms.size() && rms[f] >= threshold;
        if (active && run_start < 0) run_start = static_cast<std::ptrdiff_t>(f);
        if (!active && run_start >= 0) {
            intervals.push_back({run_start * frame_s, std::min(total_s, f * frame_s)});
            run_start = -1;
        }
    }

    // Merge gaps shorter than min_gap_s.
    std::vector<Interval> merged;
    for (const Interval& iv : intervals) {
        if (!merged.empty() && iv.start_s - merged.back().end_s < min_gap_s) {
            merged.back().end_s = iv.end_s;
        } else {
            merged.push_back(iv);
        }
    }

    std::vector<Interval> kept;
    for (const Interval& iv : merged) {
        if (iv.length_s() >= min_len_s) kept.push_back(iv);
    }
    return kept;
}

AudioBuffer slice(const AudioBuffer& buf, const Interval& iv) {
    AudioBuffer out;
    out.sample_rate = buf.sample_rate;
    const auto n = static_cast<std::ptrdiff_t>(buf.samples.size());
    auto begin = std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::llround(iv.start_s * buf.sample_rate)), 0, n);
    auto end = std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::llround(iv.end_s * buf.sample_rate)), begin, n);
    out.samples.assign(buf.samples.begin() + begin, buf.samples.begin() + end);
    return out;
}

double mean_amplitude(const AudioBuffer& buf, const Interval& iv) {
    AudioBuffer s = slice(buf, iv);
    if (s.empty()) return 0.0;
    double acc = 0.0;
    for (float x : s.samples) acc += std::abs(double(x));
    return acc / double(s.samples.size());
}

}  // namespace s4c::audio
