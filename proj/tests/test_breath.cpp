#include <doctest.h>

#include <functional>
#include <map>
#include <random>

#include "helpers/synth.hpp"
#include "helpers/wav_writer.hpp"
#include "s4c/breath.hpp"

using namespace s4c;

namespace {

mel::Spectrogram make_spec(int frames, int mels, std::function<double(int, int)> fill) {
    mel::Spectrogram spec;
    spec.n_frames = frames;
    spec.n_mels = mels;
    spec.frame_hop_s = 0.01;
    spec.values.resize(std::size_t(frames) * mels);
    for (int t = 0; t < frames; ++t) {
        for (int m = 0; m < mels; ++m) spec.at(t, m) = fill(t, m);
    }
    return spec;
}

// Count label agreements against alternating ground truth (inhale first).
int alternation_agreement(const std::vector<breath::BreathInterval>& intervals) {
    int agree = 0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const breath::PhaseLabel expected =
            i % 2 == 0 ? breath::PhaseLabel::inhalation : breath::PhaseLabel::exhalation;
        if (intervals[i].label == expected) ++agree;
    }
    return agree;
}

}  // namespace

TEST_CASE("frequency_profile sums bands over time") {
    SUBCASE("zero spectrogram gives a zero vector") {
        const auto spec = make_spec(4, 128, [](int, int) { return 0.0; });
        for (double v : breath::frequency_profile(spec)) CHECK(v == 0.0);
    }
    SUBCASE("two frames add elementwise") {
        const auto spec = make_spec(2, 128, [](int t, int m) { return t == 0 ? m : 2.0 * m; });
        const std::vector<double> profile = breath::frequency_profile(spec);
        for (int m = 0; m < 128; ++m) CHECK(profile[std::size_t(m)] == doctest::Approx(3.0 * m));
    }
    SUBCASE("random spectrogram equals an independent loop") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(0.0, 2.0);
        const auto spec = make_spec(17, 128, [&](int, int) { return dist(rng); });
        const std::vector<double> profile = breath::frequency_profile(spec);
        for (int m = 0; m < 128; ++m) {
            double acc = 0.0;
            for (int t = 0; t < 17; ++t) acc += spec.at(t, m);
            CHECK(profile[std::size_t(m)] == doctest::Approx(acc));
        }
    }
}

TEST_CASE("label_clusters ranks by mean amplitude") {
    SUBCASE("three clusters: loudest exhalation, second inhalation, rest other") {
        std::vector<breath::IntervalDraft> drafts = {
            {{0.0, 1.0}, 0.8, 0}, {{1.5, 2.5}, 0.2, 1}, {{3.0, 4.0}, 0.05, 2},
            {{4.5, 5.5}, 0.8, 0},
        };
        const auto labeled = breath::label_clusters(drafts);
        REQUIRE(labeled.size() == 4);
        CHECK(labeled[0].label == breath::PhaseLabel::exhalation);
        CHECK(labeled[1].label == breath::PhaseLabel::inhalation);
        CHECK(labeled[2].label == breath::PhaseLabel::other);
        CHECK(labeled[3].label == breath::PhaseLabel::exhalation);
    }
    SUBCASE("single cluster is all exhalation") {
        std::vector<breath::IntervalDraft> drafts = {{{0.0, 1.0}, 0.4, 0}, {{2.0, 3.0}, 0.6, 0}};
        for (const auto& bi : breath::label_clusters(drafts)) {
            CHECK(bi.label == breath::PhaseLabel::exhalation);
        }
    }
    SUBCASE("amplitude tie goes to the lower cluster id") {
        std::vector<breath::IntervalDraft> drafts = {{{0.0, 1.0}, 0.5, 3}, {{2.0, 3.0}, 0.5, 1}};
        const auto labeled = breath::label_clusters(drafts);
        // Output is time-sorted: the cluster-3 interval comes first but the
        // lower cluster id takes the exhalation rank.
        CHECK(labeled[0].cluster_id == 3);
        CHECK(labeled[0].label == breath::PhaseLabel::inhalation);
        CHECK(labeled[1].cluster_id == 1);
        CHECK(labeled[1].label == breath::PhaseLabel::exhalation);
    }
    SUBCASE("empty input, empty output") {
        CHECK(breath::label_clusters({}).empty());
    }
    SUBCASE("mean amplitude ordering invariant") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> amp(0.0, 1.0);
        std::vector<breath::IntervalDraft> drafts;
        for (int i = 0; i < 12; ++i) {
            drafts.push_back({{double(i), i + 0.5}, amp(rng), i % 4});
        }
        const auto labeled = breath::label_clusters(drafts);
        std::map<breath::PhaseLabel, std::pair<double, int>> sums;
        for (const auto& bi : labeled) {
            sums[bi.label].first += bi.mean_amplitude;
            sums[bi.label].second += 1;
        }
        if (sums.count(breath::PhaseLabel::exhalation) &&
            sums.count(breath::PhaseLabel::inhalation)) {
            // Cluster means, not individual values, drive the ranking; the
            // exhalation cluster mean must dominate.
            const auto& ex = sums[breath::PhaseLabel::exhalation];
            const auto& in = sums[breath::PhaseLabel::inhalation];
            CHECK(ex.first / ex.second >= in.first / in.second);
        }
    }
}

TEST_CASE("respiratory indicators from ten ideal cycles") {
    std::vector<breath::BreathInterval> intervals;
    for (int c = 0; c < 10; ++c) {
        const double base = 3.0 * c;
        intervals.push_back({{base, base + 1.0}, breath::PhaseLabel::inhalation, 0.1, 1});
        intervals.push_back({{base + 1.0, base + 3.0}, breath::PhaseLabel::exhalation, 0.4, 0});
    }
    const breath::RespiratoryIndicators ind = breath::respiratory_indicators(intervals, 30.0);
    CHECK(ind.cycle_count == 10);
    CHECK(*ind.rr == doctest::Approx(20.0));
    CHECK(*ind.i_e_ratio == doctest::Approx(0.5));
    CHECK(*ind.fit == doctest::Approx(1.0 / 3.0));
    CHECK(*ind.t_i == doctest::Approx(1.0));
    CHECK(*ind.t_e == doctest::Approx(2.0));
    CHECK(*ind.t_tot == doctest::Approx(3.0));
    CHECK(*ind.rr_normal);
    CHECK(*ind.i_e_normal);   // 0.5 is the upper edge of 1:2..1:3
    CHECK_FALSE(*ind.fit_normal);  // 1/3 is below 0.421 - 0.033
}

TEST_CASE("indicator degenerate cases") {
    SUBCASE("inhalations only: rr from inhalation count, ratios absent") {
        std::vector<breath::BreathInterval> intervals = {
            {{0.0, 1.0}, breath::PhaseLabel::inhalation, 0.1, 0},
            {{2.0, 3.0}, breath::PhaseLabel::inhalation, 0.1, 0},
        };
        const auto ind = breath::respiratory_indicators(intervals, 60.0);
        CHECK(ind.cycle_count == 0);
        CHECK(*ind.rr == doctest::Approx(2.0));
        CHECK(!ind.i_e_ratio);
        CHECK(!ind.fit);
        CHECK(!ind.t_i);
        CHECK(!ind.i_e_normal);
    }
    SUBCASE("exhalations only: rr from exhalation count") {
        std::vector<breath::BreathInterval> intervals = {
            {{0.0, 2.0}, breath::PhaseLabel::exhalation, 0.4, 0},
            {{3.0, 5.0}, breath::PhaseLabel::exhalation, 0.4, 0},
            {{6.0, 8.0}, breath::PhaseLabel::exhalation, 0.4, 0},
        };
        const auto ind = breath::respiratory_indicators(intervals, 30.0);
        CHECK(*ind.rr == doctest::Approx(6.0));
        CHECK(!ind.fit);
    }
    SUBCASE("nothing labeled: everything absent") {
        std::vector<breath::BreathInterval> intervals = {
            {{0.0, 1.0}, breath::PhaseLabel::other, 0.1, 0}};
        const auto ind = breath::respiratory_indicators(intervals, 10.0);
        CHECK(!ind.rr);
        CHECK(ind.cycle_count == 0);
    }
    SUBCASE("unpaired leading exhalation is excluded from the means") {
        std::vector<breath::BreathInterval> intervals = {
            {{0.0, 5.0}, breath::PhaseLabel::exhalation, 0.4, 0},  // before any inhalation
            {{6.0, 7.0}, breath::PhaseLabel::inhalation, 0.1, 1},
            {{7.5, 9.5}, breath::PhaseLabel::exhalation, 0.4, 0},
        };
        const auto ind = breath::respiratory_indicators(intervals, 30.0);
        CHECK(ind.cycle_count == 1);
        CHECK(*ind.t_e == doctest::Approx(2.0));  // the 5 s burst is not averaged in
    }
}

TEST_CASE("fit equals i_e/(1+i_e) to 1e-12") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dur(0.4, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<breath::BreathInterval> intervals;
        double t = 0.0;
        for (int c = 0; c < 6; ++c) {
            const double ti = dur(rng), te = dur(rng);
            intervals.push_back({{t, t + ti}, breath::PhaseLabel::inhalation, 0.1, 1});
            t += ti + 0.3;
            intervals.push_back({{t, t + te}, breath::PhaseLabel::exhalation, 0.4, 0});
            t += te + 0.3;
        }
        const auto ind = breath::respiratory_indicators(intervals, t);
        REQUIRE(ind.i_e_ratio);
        REQUIRE(ind.fit);
        CHECK(std::abs(*ind.fit - *ind.i_e_ratio / (1.0 + *ind.i_e_ratio)) < 1e-12);
    }
}

TEST_CASE("rmse_vs_annotation") {
    auto make = [](double rr, double ie, double fit) {
        breath::RespiratoryIndicators ind;
        ind.rr = rr;
        ind.i_e_ratio = ie;
        ind.fit = fit;
        return ind;
    };
    SUBCASE("identical lists give zero") {
        const std::vector<breath::RespiratoryIndicators> xs = {make(20, 0.5, 0.33),
                                                               make(14, 0.4, 0.28)};
        const breath::RmseReport r = breath::rmse_vs_annotation(xs, xs);
        CHECK(*r.rr == 0.0);
        CHECK(*r.i_e_ratio == 0.0);
        CHECK(*r.fit == 0.0);
    }
    SUBCASE("known rr differences") {
        const std::vector<breath::RespiratoryIndicators> pred = {make(20, 0.5, 0.33),
                                                                 make(22, 0.5, 0.33)};
        const std::vector<breath::RespiratoryIndicators> ref = {make(18, 0.5, 0.33),
                                                                make(20, 0.5, 0.33)};
        CHECK(*breath::rmse_vs_annotation(pred, ref).rr == doctest::Approx(2.0));
    }
    SUBCASE("length mismatch and empty pairing are errors") {
        CHECK_THROWS(breath::rmse_vs_annotation({make(1, 1, 0.5)}, {}));
        CHECK_THROWS(breath::rmse_vs_annotation({}, {}));
    }
}

TEST_CASE("segment_breathing on a five-cycle synthetic recording") {
    testutil::BreathSynthParams params;
    params.cycles = 5;
    params.t_i_lo = params.t_i_hi = 1.0;  // quiet 1 s inhales
    params.t_e_lo = params.t_e_hi = 2.0;  // loud 2 s exhales
    const testutil::SynthBreath synth = testutil::synth_breath(41, params);

    const breath::SegmentationResult result =
        breath::segment_breathing(synth.audio, testutil::synth_breath_config());
    REQUIRE(!result.empty_result);
    REQUIRE(result.intervals.size() == 10);
    CHECK(alternation_agreement(result.intervals) >= 9);

    // Time-sorted and disjoint.
    for (std::size_t i = 1; i < result.intervals.size(); ++i) {
        CHECK(result.intervals[i].interval.start_s >= result.intervals[i - 1].interval.end_s);
    }
}

TEST_CASE("segment_breathing trivial inputs") {
    SUBCASE("silence flags an empty result") {
        audio::AudioBuffer silence;
        silence.sample_rate = 48000;
        silence.samples.assign(48000, 0.0f);
        const auto result = breath::segment_breathing(silence);
        CHECK(result.empty_result);
        CHECK(result.intervals.empty());
    }
    SUBCASE("single continuous exhale is one exhalation interval") {
        std::mt19937_64 rng(4);
        audio::AudioBuffer buf;
        buf.sample_rate = 48000;
        buf.samples = testutil::band_noise(rng, 2 * 48000, 48000, 100.0, 800.0, 0.3);
        const auto result = breath::segment_breathing(buf, testutil::synth_breath_config());
        REQUIRE(result.intervals.size() == 1);
        CHECK(result.intervals[0].label == breath::PhaseLabel::exhalation);
    }
}

TEST_CASE("labels and indicators are invariant under exact power-of-two gain") {
    testutil::BreathSynthParams params;
    params.cycles = 6;
    const testutil::SynthBreath synth = testutil::synth_breath(117, params);

    audio::AudioBuffer scaled = synth.audio;
    for (float& x : scaled.samples) x *= 0.25f;  // exact in floating point

    const breath::BreathConfig config = testutil::synth_breath_config();
    const auto a = breath::segment_breathing(synth.audio, config);
    const auto b = breath::segment_breathing(scaled, config);
    REQUIRE(a.intervals.size() == b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        CHECK(a.intervals[i].label == b.intervals[i].label);
        CHECK(a.intervals[i].interval.start_s == b.intervals[i].interval.start_s);
        CHECK(a.intervals[i].interval.end_s == b.intervals[i].interval.end_s);
    }
    const auto ind_a = breath::respiratory_indicators(a.intervals, a.trimmed_duration_s);
    const auto ind_b = breath::respiratory_indicators(b.intervals, b.trimmed_duration_s);
    CHECK(*ind_a.rr == *ind_b.rr);
    CHECK(*ind_a.i_e_ratio == *ind_b.i_e_ratio);
    CHECK(*ind_a.fit == *ind_b.fit);
}

TEST_CASE("classifier-gated localization keeps or drops intervals") {
    // Saturated dense biases make the gate's verdict independent of the input.
    auto saturated_model = [](int favored_class) {
        cnn::ModelConfig cfg;
        cfg.input_bands = 128;
        cfg.window_frames = 16;
        cfg.blocks = 2;
        cfg.layers_per_block = 1;
        cfg.kernels = 2;
        cfg.dropout_p = 0.0;
        cnn::CnnModel model = cnn::build_model(cfg, 1, false);
        model.for_each_tensor([](cnn::Tensor& t) { std::fill(t.v.begin(), t.v.end(), 0.0); });
        model.dense.b.v[std::size_t(favored_class)] = 1000.0;
        return model;
    };

    testutil::BreathSynthParams params;
    params.cycles = 4;
    const testutil::SynthBreath synth = testutil::synth_breath(21, params);
    breath::BreathConfig config = testutil::synth_breath_config();
    const auto baseline = breath::segment_breathing(synth.audio, config);
    REQUIRE(!baseline.empty_result);

    SUBCASE("an always-breath verdict changes nothing") {
        const cnn::CnnModel keeper = saturated_model(int(cnn::AudioClass::breath));
        const std::vector<const cnn::CnnModel*> models = {&keeper};
        config.localizer_models = &models;
        const auto gated = breath::segment_breathing(synth.audio, config);
        REQUIRE(gated.intervals.size() == baseline.intervals.size());
        for (std::size_t i = 0; i < gated.intervals.size(); ++i) {
            CHECK(gated.intervals[i].interval.start_s ==
                  baseline.intervals[i].interval.start_s);
        }
    }
    SUBCASE("a never-breath verdict drops everything") {
        const cnn::CnnModel dropper = saturated_model(int(cnn::AudioClass::cough));
        const std::vector<const cnn::CnnModel*> models = {&dropper};
        config.localizer_models = &models;
        const auto gated = breath::segment_breathing(synth.audio, config);
        CHECK(gated.empty_result);
        CHECK(gated.intervals.empty());
    }
}

TEST_CASE("pipeline is deterministic for a fixed config") {
    const testutil::SynthBreath synth = testutil::synth_breath(9);
    const breath::BreathConfig config = testutil::synth_breath_config(123);
    const auto a = breath::segment_breathing(synth.audio, config);
    const auto b = breath::segment_breathing(synth.audio, config);
    REQUIRE(a.intervals.size() == b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
        CHECK(a.intervals[i].interval.start_s == b.intervals[i].interval.start_s);
        CHECK(a.intervals[i].label == b.intervals[i].label);
        CHECK(a.intervals[i].cluster_id == b.intervals[i].cluster_id);
        CHECK(a.intervals[i].mean_amplitude == b.intervals[i].mean_amplitude);
    }
}
