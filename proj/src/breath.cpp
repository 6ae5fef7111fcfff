#include "s4c/breath.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace s4c::breath {

namespace {

constexpr double kRrNormalLo = 16.0, kRrNormalHi = 20.0;
constexpr double kIeNormalLo = 1.0 / 3.0, kIeNormalHi = 0.5;
constexpr double kFitNormalCenter = 0.421, kFitNormalSpread = 0.033;

std::optional<double> rmse_of(const std::vector<double>& diffs) {
    if (diffs.empty()) return std::nullopt;
    double acc = 0.0;
    for (double d : diffs) acc += d * d;
    return std::sqrt(acc / double(diffs.size()));
}

}  // namespace

const char* phase_name(PhaseLabel label) {
    switch (label) {
        case PhaseLabel::exhalation: return "exhalation";
        case PhaseLabel::inhalation: return "inhalation";
        case PhaseLabel::other: return "other";
    }
    return "?";
}

std::vector<double> frequency_profile(const mel::Spectrogram& spec) {
    if (spec.n_frames <= 0) throw std::invalid_argument("empty spectrogram");
    std::vector<double> profile(std::size_t(spec.n_mels), 0.0);
    for (int t = 0; t < spec.n_frames; ++t) {
        for (int m = 0; m < spec.n_mels; ++m) profile[std::size_t(m)] += spec.at(t, m);
    }
    return profile;
}

std::vector<BreathInterval> label_clusters(const std::vector<IntervalDraft>& drafts) {
    if (drafts.empty()) return {};

    struct ClusterStat {
        double amp_sum = 0.0;
        int members = 0;
    };
    std::map<int, ClusterStat> stats;
    for (const IntervalDraft& d : drafts) {
        if (d.cluster_id < 0) throw std::invalid_argument("draft interval without a cluster id");
        auto& s = stats[d.cluster_id];
        s.amp_sum += d.mean_amplitude;
        s.members += 1;
    }

    // Sort clusters by mean member amplitude, descending; exact ties go to the
    // lower cluster id.
    std::vector<std::pair<int, double>> ranked;
    for (const auto& [id, s] : stats) ranked.emplace_back(id, s.amp_sum / s.members);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::map<int, PhaseLabel> label_of;
    for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
        PhaseLabel label = PhaseLabel::other;
        if (rank == 0) label = PhaseLabel::exhalation;
        else if (rank == 1) label = PhaseLabel::inhalation;
        label_of[ranked[rank].first] = label;
    }

    std::vector<BreathInterval> out;
    out.reserve(drafts.size());
    for (const IntervalDraft& d : drafts) {
        out.push_back({d.interval, label_of.at(d.cluster_id), d.mean_amplitude, d.cluster_id});
    }
    std::sort(out.begin(), out.end(), [](const BreathInterval& a, const BreathInterval& b) {
        return a.interval.start_s < b.interval.start_s;
    });
    return out;
}

SegmentationResult segment_breathing(const audio::AudioBuffer& buf, const BreathConfig& config) {
    SegmentationResult result;

    const audio::TrimResult trimmed = audio::trim_silence(buf, config.trim_db);
    if (trimmed.all_silent) {
        result.empty_result = true;
        return result;
    }
    result.leading_offset_s = trimmed.leading_offset_s;
    result.trimmed_duration_s = trimmed.audio.duration_s();

    const audio::AudioBuffer norm = audio::normalize(trimmed.audio);
    std::vector<audio::Interval> intervals =
        audio::split_nonsilent(norm, config.split_db, config.min_gap_s, config.min_len_s);

    // Optional localization: drop intervals the classifier does not call
    // breathing. Intervals too short for every model are kept as-is.
    if (config.localizer_models && !config.localizer_models->empty()) {
        std::vector<audio::Interval> kept;
        for (const audio::Interval& iv : intervals) {
            const audio::AudioBuffer seg = audio::slice(norm, iv);
            if (static_cast<int>(seg.samples.size()) < config.mel.fft_size) {
                kept.push_back(iv);
                continue;
            }
            const mel::Spectrogram spec = mel::mel_spectrogram(seg, config.mel);
            bool applicable = false;
            for (const cnn::CnnModel* m : *config.localizer_models) {
                if (spec.n_frames >= m->config.window_frames) applicable = true;
            }
            if (!applicable) {
                kept.push_back(iv);
                continue;
            }
            const cnn::Prediction p = cnn::classify_recording(*config.localizer_models, spec);
            const int argmax =
                static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            if (argmax == static_cast<int>(cnn::AudioClass::breath)) kept.push_back(iv);
        }
        intervals = std::move(kept);
    }

    // Per-interval frequency profiles for the clustering step.
    std::vector<IntervalDraft> drafts;
    std::vector<std::vector<double>> profiles;
    for (const audio::Interval& iv : intervals) {
        const audio::AudioBuffer seg = audio::slice(norm, iv);
        if (static_cast<int>(seg.samples.size()) < config.mel.fft_size) continue;
        mel::Spectrogram spec = mel::mel_spectrogram(seg, config.mel);
        spec.origin_offset_s = iv.start_s;
        profiles.push_back(frequency_profile(spec));
        drafts.push_back({iv, audio::mean_amplitude(norm, iv), -1});
    }

    if (drafts.empty()) {
        result.empty_result = true;
        return result;
    }

    if (drafts.size() == 1) {
        drafts[0].cluster_id = 0;
    } else {
        affinity::SimilarityMatrix S = affinity::negative_sq_euclidean(profiles);
        S.set_preferences(affinity::default_preference(S) * config.preference_scale);
        const affinity::ClusterAssignment assignment = affinity::cluster(S, config.ap);
        for (std::size_t i = 0; i < drafts.size(); ++i) {
            drafts[i].cluster_id = assignment.exemplar_of[i];
        }
    }

    result.intervals = label_clusters(drafts);
    for (BreathInterval& bi : result.intervals) {
        bi.interval.start_s += result.leading_offset_s;
        bi.interval.end_s += result.leading_offset_s;
    }
    return result;
}

RespiratoryIndicators respiratory_indicators(const std::vector<BreathInterval>& intervals,
                                             double total_duration_s) {
    if (total_duration_s <= 0.0) throw std::invalid_argument("duration must be positive");

    std::vector<BreathInterval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(), [](const BreathInterval& a, const BreathInterval& b) {
        return a.interval.start_s < b.interval.start_s;
    });

    // Pair each inhalation with the nearest subsequent exhalation.
    std::vector<std::pair<double, double>> cycles;  // (t_i, t_e)
    int n_inhale = 0, n_exhale = 0;
    std::size_t exhale_cursor = 0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].label == PhaseLabel::inhalation) ++n_inhale;
        if (sorted[i].label == PhaseLabel::exhalation) ++n_exhale;
    }
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].label != PhaseLabel::inhalation) continue;
        std::size_t j = std::max(exhale_cursor, i + 1);
        while (j < sorted.size() && sorted[j].label != PhaseLabel::exhalation) ++j;
        if (j >= sorted.size()) break;
        cycles.emplace_back(sorted[i].interval.length_s(), sorted[j].interval.length_s());
        exhale_cursor = j + 1;
    }

    RespiratoryIndicators out;
    out.cycle_count = static_cast<int>(cycles.size());

    if (!cycles.empty()) {
        double ti = 0.0, te = 0.0;
        for (const auto& [i, e] : cycles) {
            ti += i;
            te += e;
        }
        ti /= double(cycles.size());
        te /= double(cycles.size());
        out.t_i = ti;
        out.t_e = te;
        out.t_tot = ti + te;
        out.i_e_ratio = ti / te;
        out.fit = ti / (ti + te);
        out.rr = double(cycles.size()) / total_duration_s * 60.0;
    } else if (n_exhale > 0) {
        out.rr = double(n_exhale) / total_duration_s * 60.0;
    } else if (n_inhale > 0) {
        out.rr = double(n_inhale) / total_duration_s * 60.0;
    }

    if (out.rr) out.rr_normal = *out.rr >= kRrNormalLo && *out.rr <= kRrNormalHi;
    if (out.i_e_ratio) {
        out.i_e_normal = *out.i_e_ratio >= kIeNormalLo && *out.i_e_ratio <= kIeNormalHi;
    }
    if (out.fit) out.fit_normal = std::abs(*out.fit - kFitNormalCenter) <= kFitNormalSpread;
    return out;
}

RmseReport rmse_vs_annotation(const std::vector<RespiratoryIndicators>& predicted,
                              const std::vector<RespiratoryIndicators>& reference) {
    if (predicted.size() != reference.size()) {
        throw std::invalid_argument("predicted/reference lists must pair up");
    }
    std::vector<double> rr_d, ie_d, fit_d;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].rr && reference[i].rr) rr_d.push_back(*predicted[i].rr - *reference[i].rr);
        if (predicted[i].i_e_ratio && reference[i].i_e_ratio) {
            ie_d.push_back(*predicted[i].i_e_ratio - *reference[i].i_e_ratio);
        }
        if (predicted[i].fit && reference[i].fit) {
            fit_d.push_back(*predicted[i].fit - *reference[i].fit);
        }
    }
    if (rr_d.empty() && ie_d.empty() && fit_d.empty()) {
        throw std::invalid_argument("no defined indicator pairs to compare");
    }
    RmseReport report;
    report.rr = rmse_of(rr_d);
    report.i_e_ratio = rmse_of(ie_d);
    report.fit = rmse_of(fit_d);
    report.pairs = static_cast<int>(std::max({rr_d.size(), ie_d.size(), fit_d.size()}));
    return report;
}

}  // namespace s4c::breath
