#pragma once

#include <optional>
#include <vector>

#include "s4c/affinity.hpp"
#include "s4c/audio.hpp"
#include "s4c/cnn.hpp"
#include "s4c/mel.hpp"

namespace s4c::breath {

enum class PhaseLabel : int { exhalation = 0, inhalation = 1, other = 2 };
const char* phase_name(PhaseLabel label);

struct BreathInterval {
    audio::Interval interval;
    PhaseLabel label = PhaseLabel::other;
    double mean_amplitude = 0.0;
    int cluster_id = -1;
};

// Per-recording respiratory indicators. Values are absent (not zero) when the
// recording yields no usable cycles for them.
struct RespiratoryIndicators {
    std::optional<double> rr;         // breaths per minute
    std::optional<double> i_e_ratio;  // t_i / t_e
    std::optional<double> fit;        // t_i / t_tot
    std::optional<double> t_i, t_e, t_tot;  // mean per-cycle seconds
    int cycle_count = 0;
    std::optional<bool> rr_normal;    // 16..20 /min
    std::optional<bool> i_e_normal;   // 1/3 .. 1/2
    std::optional<bool> fit_normal;   // 0.421 +/- 0.033
};

struct BreathConfig {
    double trim_db = -40.0;
    double split_db = -35.0;
    double min_gap_s = 0.25;
    double min_len_s = 0.2;
    mel::MelConfig mel;
    affinity::ApParams ap;
    double preference_scale = 1.0;  // multiplies the median preference
    // Optional localization gate: keep only intervals the classifier calls
    // breathing. Off by default; the dataset's regular-breathing recordings
    // are already content-pure.
    const std::vector<const cnn::CnnModel*>* localizer_models = nullptr;
};

struct SegmentationResult {
    std::vector<BreathInterval> intervals;  // absolute recording time, sorted
    bool empty_result = false;              // silent or no usable intervals
    double leading_offset_s = 0.0;
    double trimmed_duration_s = 0.0;
};

// Sum of each mel band over time: component j = sum_t spec(t, j).
std::vector<double> frequency_profile(const mel::Spectrogram& spec);

struct IntervalDraft {
    audio::Interval interval;
    double mean_amplitude = 0.0;
    int cluster_id = -1;
};

// Ranks clusters by mean member amplitude (descending, ties to the lower
// cluster id): rank 1 -> exhalation, rank 2 -> inhalation, rest -> other.
std::vector<BreathInterval> label_clusters(const std::vector<IntervalDraft>& drafts);

// Full pipeline: trim -> normalize -> (optional classifier gate) ->
// split_nonsilent -> per-interval mel profile -> affinity propagation ->
// amplitude labeling. Deterministic for a fixed config.
SegmentationResult segment_breathing(const audio::AudioBuffer& buf,
                                     const BreathConfig& config = {});

// Pairs each inhalation with the next exhalation; means over paired cycles
// give t_i/t_e/t_tot, and rr = cycles / duration * 60. When only one phase
// was detected its interval count drives rr and the ratios stay absent.
RespiratoryIndicators respiratory_indicators(const std::vector<BreathInterval>& intervals,
                                             double total_duration_s);

struct RmseReport {
    std::optional<double> rr;
    std::optional<double> i_e_ratio;
    std::optional<double> fit;
    int pairs = 0;
};

// Per-indicator root mean square error over paired predicted/reference lists;
// each indicator uses the pairs where both sides are defined.
RmseReport rmse_vs_annotation(const std::vector<RespiratoryIndicators>& predicted,
                              const std::vector<RespiratoryIndicators>& reference);

}  // namespace s4c::breath
