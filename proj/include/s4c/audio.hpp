#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace s4c::audio {

// Mono waveform. Samples are nominally in [-1, 1]; the canonical rate for the
// dataset is 48 kHz and load_audio() resamples everything to it.
struct AudioBuffer {
    std::vector<float> samples;
    int sample_rate = 48000;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration_s() const {
        return empty() ? 0.0 : static_cast<double>(samples.size()) / sample_rate;
    }
};

// Half-open time span in seconds, 0 <= start < end.
struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;

    double length_s() const { return end_s - start_s; }
    bool operator==(const Interval&) const = default;
};

class AudioError : public std::runtime_error {
public:
    explicit AudioError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pluggable MP3 decode hook. The default build ships without a decoder;
// registering one enables .mp3 inputs everywhere load_audio() is used.
using Mp3Decoder = std::function<AudioBuffer(const std::filesystem::path&)>;
void set_mp3_decoder(Mp3Decoder decoder);
bool has_mp3_decoder();

// Decodes a WAV (PCM 16/24-bit or float32) or MP3 file into a mono buffer at
// target_rate. Multi-channel input is averaged. Throws AudioError on
// undecodable or zero-length streams.
AudioBuffer load_audio(const std::filesystem::path& path, int target_rate = 48000);

// Parses WAV data without touching the filesystem. Channels are averaged,
// no resampling is applied.
AudioBuffer decode_wav(const std::vector<unsigned char>& bytes);

// Linear-interpolation resampler. Output length = round(n * target / source),
// so duration is preserved to within one sample.
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

// Scales so that the peak absolute amplitude is exactly 1. Silent input is
// returned unchanged.
AudioBuffer normalize(const AudioBuffer& buf);

struct TrimResult {
    AudioBuffer audio;
    double leading_offset_s = 0.0;
    bool all_silent = false;
};

// Removes leading/trailing frames whose RMS falls below peak + threshold_db.
// Cuts happen at 10 ms frame boundaries, which makes the operation idempotent.
// threshold_db must be negative (relative to peak).
TrimResult trim_silence(const AudioBuffer& buf, double threshold_db = -40.0);

// Splits the buffer into non-silent intervals: frames above the threshold are
// active, gaps shorter than min_gap_s are merged, and intervals shorter than
// min_len_s are dropped. Result is sorted and pairwise disjoint.
std::vector<Interval> split_nonsilent(const AudioBuffer& buf, double threshold_db = -35.0,
                                      double min_gap_s = 0.25, double min_len_s = 0.2);

// View of the samples covered by an interval (clamped to buffer bounds).
AudioBuffer slice(const AudioBuffer& buf, const Interval& iv);

// Mean absolute sample value over an interval of the buffer.
double mean_amplitude(const AudioBuffer& buf, const Interval& iv);

}  // namespace s4c::audio
