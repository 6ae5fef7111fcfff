// Acceptance suite: one line per criterion, nonzero exit when any fails.
//
//  1  metric reproduction from the published confusion matrices
//  2  parameter-count identity across the tuning grid
//  3  gradient correctness vs central finite differences
//  4  toy classifier competence (>= 90% holdout within 30 epochs)
//  5  breathing pipeline accuracy on synthetic ground truth
//  6  fit == i_e/(1+i_e) on every pipeline output
//  7  affinity propagation vs the brute-force oracle
//  8  knowledge-base N-Triples round trips + the worked 12-assertion example
//  9  counterfactual minimal edits vs exhaustive search
// 10  schema validation fixtures
// 11  byte-identical CLI reruns for every subcommand

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "helpers/cli_runner.hpp"
#include "helpers/fixtures.hpp"
#include "helpers/oracles.hpp"
#include "helpers/synth.hpp"
#include "helpers/toybench.hpp"
#include "helpers/wav_writer.hpp"

#include "s4c/breath.hpp"
#include "s4c/cnn.hpp"
#include "s4c/counterfactual.hpp"
#include "s4c/dataset.hpp"
#include "s4c/kb.hpp"
#include "s4c/metrics.hpp"

using namespace s4c;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title)
        : number_(number), title_(std::move(title)), start_(std::chrono::steady_clock::now()) {}

    void require(bool ok, const std::string& detail) {
        if (!ok && failure_.empty()) failure_ = detail;
        ok_ = ok_ && ok;
    }

    ~Criterion() {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        if (ok_) {
            std::printf("PASS criterion %2d: %s (%.2f s)\n", number_, title_.c_str(), seconds);
        } else {
            std::printf("FAIL criterion %2d: %s (%.2f s) -- %s\n", number_, title_.c_str(),
                        seconds, failure_.c_str());
            ++g_failures;
        }
        std::fflush(stdout);
    }

private:
    int number_;
    std::string title_;
    bool ok_ = true;
    std::string failure_;
    std::chrono::steady_clock::time_point start_;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// -------------------------------------------------------------------- 1

void criterion_metrics() {
    Criterion c(1, "published confusion matrices reproduce the reported accuracies");
    const auto start = std::chrono::steady_clock::now();
    const struct {
        const char* name;
        double accuracy;
    } cases[] = {{"coswara-short", 0.940},
                 {"coswara-long", 0.953},
                 {"coswara-multiscale", 0.954},
                 {"coughvid-coswara", 0.836}};
    for (const auto& e : cases) {
        const double acc =
            metrics::compute_metrics(metrics::published_matrix(e.name)).accuracy;
        c.require(std::abs(acc - e.accuracy) <= 1e-3,
                  std::string(e.name) + " accuracy " + num(acc) + " vs " + num(e.accuracy));
    }
    c.require(elapsed_s(start) < 1.0, "runtime over 1 s");
}

// -------------------------------------------------------------------- 2

void criterion_parameter_counts() {
    Criterion c(2, "enumerated parameter totals equal the closed form over the grid");
    const auto start = std::chrono::steady_clock::now();

    cnn::ModelConfig worked;
    worked.window_frames = 128;
    worked.blocks = 3;
    worked.layers_per_block = 1;
    worked.kernels = 64;
    c.require(cnn::build_model(worked, 1).parameter_count() == 123651,
              "d=128,b=3,l=1,k=64 should give 123651 parameters");
    worked.kernels = 128;
    c.require(cnn::build_model(worked, 1).parameter_count() == 394755,
              "d=128,b=3,l=1,k=128 should give 394755 parameters");

    int checked = 0;
    for (int d : {128, 256}) {
        for (int b : {3, 4, 5}) {
            for (int l : {1, 2, 3}) {
                for (int k : {64, 96, 128}) {
                    cnn::ModelConfig cfg;
                    cfg.window_frames = d;
                    cfg.blocks = b;
                    cfg.layers_per_block = l;
                    cfg.kernels = k;
                    const cnn::CnnModel model = cnn::build_model(cfg, 7);
                    if (model.parameter_count() != cnn::closed_form_parameter_count(cfg)) {
                        c.require(false, "mismatch at d=" + std::to_string(d) + " b=" +
                                             std::to_string(b) + " l=" + std::to_string(l) +
                                             " k=" + std::to_string(k));
                    }
                    ++checked;
                }
            }
        }
    }
    c.require(checked >= 20, "needs at least 20 legal configs");
    c.require(elapsed_s(start) < 10.0, "runtime over 10 s");
}

// -------------------------------------------------------------------- 3

void criterion_gradients() {
    Criterion c(3, "analytic gradients match central finite differences");
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);

    cnn::ModelConfig linear;
    linear.input_bands = 4;
    linear.window_frames = 4;
    linear.blocks = 0;
    linear.kernels = 1;
    linear.dropout_p = 0.0;
    cnn::Tensor input({4, 4});
    for (double& v : input.v) v = dist(rng);
    const double linear_err =
        cnn::gradient_check(cnn::build_model(linear, 12, false), input, 1);
    c.require(linear_err < 1e-8, "linear model error " + num(linear_err));

    cnn::ModelConfig tiny;
    tiny.input_bands = 8;
    tiny.window_frames = 8;
    tiny.blocks = 2;
    tiny.layers_per_block = 1;
    tiny.kernels = 2;
    tiny.dropout_p = 0.0;
    const cnn::CnnModel tiny_model = cnn::build_model(tiny, 31, false);
    c.require(tiny_model.parameter_count() < 5000, "tiny model must stay under 5k parameters");
    cnn::Tensor tiny_input({8, 8});
    for (double& v : tiny_input.v) v = dist(rng);
    const double cnn_err = cnn::gradient_check(tiny_model, tiny_input, 2);
    c.require(cnn_err < 1e-3, "tiny CNN error " + num(cnn_err));

    tiny.dropout_p = 0.5;
    cnn::GradCheckOptions opts;
    opts.fixed_dropout = true;
    const double dropout_err =
        cnn::gradient_check(cnn::build_model(tiny, 31, false), tiny_input, 0, opts);
    c.require(dropout_err < 1e-3, "fixed-mask dropout error " + num(dropout_err));

    c.require(elapsed_s(start) < 120.0, "runtime over 2 min");
}

// -------------------------------------------------------------------- 4

void criterion_toy_classifier() {
    Criterion c(4, "toy 3-class benchmark reaches 90% holdout within 30 epochs");
    const auto start = std::chrono::steady_clock::now();
    const std::vector<cnn::TrainSample> train_set = testutil::make_toy_set(100, 1001);
    const std::vector<cnn::TrainSample> test_set = testutil::make_toy_set(50, 2002);
    cnn::CnnModel model = cnn::build_model(testutil::toy_model_config(), 9, false);
    cnn::TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 7;
    cnn::train(model, train_set, cfg);
    const double acc = testutil::toy_accuracy({&model}, test_set);
    c.require(acc >= 0.90, "holdout accuracy " + num(acc));
    c.require(elapsed_s(start) < 600.0, "runtime over 10 min");
}

// ----------------------------------------------------------------- 5 & 6

void criterion_breathing() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<breath::RespiratoryIndicators> predicted, reference;
    double max_fit_gap = 0.0;
    int labeled_ok = 0, defined = 0;

    {
        Criterion c(5, "synthetic breathing suite: RR/I_E/FIT RMSE within bounds");
        std::mt19937_64 seeds(505);
        for (int rec = 0; rec < 50; ++rec) {
            testutil::BreathSynthParams params;
            params.cycles = 8 + (rec % 5);
            const testutil::SynthBreath synth = testutil::synth_breath(seeds(), params);
            const breath::SegmentationResult seg =
                breath::segment_breathing(synth.audio, testutil::synth_breath_config(rec));
            if (seg.empty_result) {
                c.require(false, "recording " + std::to_string(rec) + " found no intervals");
                continue;
            }
            const breath::RespiratoryIndicators ind =
                breath::respiratory_indicators(seg.intervals, seg.trimmed_duration_s);
            predicted.push_back(ind);
            reference.push_back(synth.reference);
            if (ind.rr && ind.i_e_ratio && ind.fit) ++labeled_ok;
            if (ind.fit && ind.i_e_ratio) {
                ++defined;
                max_fit_gap = std::max(
                    max_fit_gap, std::abs(*ind.fit - *ind.i_e_ratio / (1.0 + *ind.i_e_ratio)));
            }
        }
        c.require(labeled_ok == 50, "only " + std::to_string(labeled_ok) +
                                        "/50 recordings yielded all three indicators");
        const breath::RmseReport rmse = breath::rmse_vs_annotation(predicted, reference);
        c.require(rmse.rr && *rmse.rr <= 2.0, "RR RMSE " + num(rmse.rr.value_or(-1)));
        c.require(rmse.i_e_ratio && *rmse.i_e_ratio <= 0.10,
                  "I_E RMSE " + num(rmse.i_e_ratio.value_or(-1)));
        c.require(rmse.fit && *rmse.fit <= 0.15, "FIT RMSE " + num(rmse.fit.value_or(-1)));
        std::printf("       RR RMSE %.3f, I_E RMSE %.4f, FIT RMSE %.4f over %d recordings "
                    "(%.1f s)\n",
                    rmse.rr.value_or(-1), rmse.i_e_ratio.value_or(-1), rmse.fit.value_or(-1),
                    rmse.pairs, elapsed_s(start));
    }
    {
        Criterion c(6, "fit identity fit = i_e/(1+i_e) to 1e-12 on pipeline outputs");
        c.require(defined > 0, "no defined outputs to check");
        c.require(max_fit_gap < 1e-12, "max deviation " + num(max_fit_gap));
    }
}

// -------------------------------------------------------------------- 7

void criterion_affinity() {
    Criterion c(7, "affinity propagation within 10% of brute force; exact group recovery");
    const auto start = std::chrono::steady_clock::now();

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> sim(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(rng);
        affinity::SimilarityMatrix S(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) S.at(i, k) = sim(rng);
        }
        affinity::ApParams params;
        params.jitter_seed = trial;
        const double net = affinity::cluster(S, params).net_similarity;
        const double opt = testutil::brute_force_net_similarity(S);
        if (net < 0.9 * opt) {
            c.require(false, "instance " + std::to_string(trial) + ": net " + num(net) +
                                 " vs optimum " + num(opt));
        }
    }

    std::vector<std::vector<double>> points;
    for (double dx : {0.0, 0.1, -0.1, 0.0, 0.05}) points.push_back({dx, 0.1 - dx});
    for (double dx : {0.0, 0.1, -0.1, 0.05, -0.05}) points.push_back({10.0 + dx, 10.0 - dx});
    affinity::SimilarityMatrix S = affinity::negative_sq_euclidean(points);
    S.set_preferences(affinity::default_preference(S));
    const affinity::ClusterAssignment groups = affinity::cluster(S);
    c.require(groups.cluster_count() == 2,
              "two-group fixture gave " + std::to_string(groups.cluster_count()) + " clusters");
    bool pure = true;
    for (int i = 0; i < 5; ++i) pure = pure && groups.exemplar_of[i] == groups.exemplar_of[0];
    for (int i = 5; i < 10; ++i) pure = pure && groups.exemplar_of[i] == groups.exemplar_of[5];
    pure = pure && groups.exemplar_of[0] != groups.exemplar_of[5];
    c.require(pure, "group membership not recovered exactly");

    c.require(elapsed_s(start) < 60.0, "runtime over 1 min");
}

// -------------------------------------------------------------------- 8

dataset::UserDirectory worked_example_records() {
    dataset::UserDirectory user_dir;
    user_dir.directory_name = "11111111-2222-4333-8444-555555555551";
    user_dir.user.participant_id = user_dir.directory_name;
    user_dir.user.sex = 1;
    user_dir.user.conditions["asthma"] = true;
    dataset::SubmissionEntry sub;
    sub.directory_name = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee1";
    records::SubmissionRecord q;
    q.submission_id = sub.directory_name;
    q.covid_status = "positive";
    q.pcr_test = true;
    q.symptoms["headache"] = true;
    q.smoking = "yes";
    sub.questionnaire = q;
    sub.audio.cough = "audio.cough.mp3";
    records::ExpertCough cough;
    cough.abnormalities["audible_choking"] = true;
    sub.experts.cough = cough;
    user_dir.submissions.push_back(std::move(sub));
    return user_dir;
}

void criterion_kb() {
    Criterion c(8, "KB round trips and the worked example yields the 12 assertions");
    kb::KnowledgeBase base = kb::build_tbox();
    kb::assert_records(base, worked_example_records());
    c.require(base.abox.size() == 12,
              "worked example produced " + std::to_string(base.abox.size()) + " assertions");

    const std::string pid = "11111111-2222-4333-8444-555555555551";
    const std::string sid = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee1";
    const std::pair<std::string, std::string> concepts[] = {
        {"FemaleUser", "user:" + pid},
        {"Asthma", "condition:" + pid + ":asthma"},
        {"PositivePCR", "test:" + sid},
        {"Headache", "symptom:" + sid + ":headache"},
        {"Smoker", "questionnaire:" + sid},
        {"AudibleChoking", "characterization:" + sid + ":cough:audible_choking"},
    };
    for (const auto& expected : concepts) {
        c.require(base.abox.concept_assertions.count(expected) == 1,
                  "missing assertion " + expected.first + "(" + expected.second + ")");
    }
    const std::tuple<std::string, std::string, std::string> roles[] = {
        {"hasPreexistingCondition", "user:" + pid, "condition:" + pid + ":asthma"},
        {"hasUserInstance", "user:" + pid, "questionnaire:" + sid},
        {"hasCovidTest", "questionnaire:" + sid, "test:" + sid},
        {"hasSymptom", "questionnaire:" + sid, "symptom:" + sid + ":headache"},
        {"hasCoughAudio", "questionnaire:" + sid, "audio:" + sid + ":cough"},
        {"hasCharacterization", "audio:" + sid + ":cough",
         "characterization:" + sid + ":cough:audible_choking"},
    };
    for (const auto& expected : roles) {
        c.require(base.abox.role_assertions.count(expected) == 1,
                  "missing role assertion " + std::get<0>(expected));
    }

    const kb::KnowledgeBase back = kb::parse_ntriples_text(kb::to_ntriples(base), base.prefix);
    c.require(back.abox.concept_assertions == base.abox.concept_assertions &&
                  back.abox.role_assertions == base.abox.role_assertions &&
                  back.tbox.concept_subs == base.tbox.concept_subs &&
                  back.tbox.role_subs == base.tbox.role_subs,
              "worked example did not round trip");

    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> pick(0, 5);
    for (int trial = 0; trial < 100; ++trial) {
        kb::KnowledgeBase random_kb;
        for (int cc = 1; cc < 6; ++cc) {
            if (coin(rng)) {
                random_kb.tbox.concept_subs.emplace("C" + std::to_string(cc),
                                                    "C" + std::to_string(pick(rng) % cc));
            }
        }
        for (int r = 1; r < 3; ++r) {
            if (coin(rng)) random_kb.tbox.role_subs.emplace("r" + std::to_string(r), "r0");
        }
        for (int i = 0; i < 6; ++i) {
            random_kb.abox.concept_assertions.emplace("C" + std::to_string(pick(rng)),
                                                      "x" + std::to_string(pick(rng)));
            random_kb.abox.role_assertions.emplace("r" + std::to_string(pick(rng) % 3),
                                                   "x" + std::to_string(pick(rng)),
                                                   "x" + std::to_string(pick(rng)));
        }
        const kb::KnowledgeBase rt = kb::parse_ntriples_text(kb::to_ntriples(random_kb));
        if (!(rt.abox.concept_assertions == random_kb.abox.concept_assertions &&
              rt.abox.role_assertions == random_kb.abox.role_assertions &&
              rt.tbox.concept_subs == random_kb.tbox.concept_subs &&
              rt.tbox.role_subs == random_kb.tbox.role_subs)) {
            c.require(false, "randomized KB " + std::to_string(trial) + " did not round trip");
        }
    }
}

// -------------------------------------------------------------------- 9

void criterion_counterfactual() {
    Criterion c(9, "counterfactual edits match exhaustive search; gender fixtures behave");
    const kb::KnowledgeBase tbox = kb::build_tbox();
    using counterfactual::IndividualDescription;
    using counterfactual::TaggedConcept;

    auto describe = [](std::string id, std::vector<TaggedConcept> concepts) {
        IndividualDescription d;
        d.id = std::move(id);
        d.concepts.insert(concepts.begin(), concepts.end());
        return d;
    };

    const IndividualDescription female =
        describe("x", {{"", "FemaleUser"}, {"hasSymptom", "Headache"}});
    const IndividualDescription male_twin =
        describe("m", {{"", "MaleUser"}, {"hasSymptom", "Headache"}});
    const auto single = counterfactual::nearest_counterfactual(female, {male_twin}, tbox);
    c.require(single.edits.size() == 1 && single.edits[0].source == "FemaleUser" &&
                  single.edits[0].target == "MaleUser" &&
                  single.edits[0].kind == counterfactual::EditKind::replace,
              "gender fixture should yield exactly one replace");

    const IndividualDescription male_cough =
        describe("m2", {{"", "MaleUser"}, {"hasSymptom", "DryCough"}});
    const auto pair = counterfactual::edit_distance(female, male_cough, tbox);
    bool two_replaces = pair.edits.size() == 2;
    for (const auto& e : pair.edits) {
        two_replaces = two_replaces && e.kind == counterfactual::EditKind::replace;
    }
    c.require(two_replaces, "gender+symptom fixture should yield exactly two replaces");

    // Randomized oracle over descriptions with at most 6 concepts.
    const std::vector<TaggedConcept> pool = {
        {"", "FemaleUser"},         {"", "MaleUser"},
        {"", "User30_39"},          {"", "User40_49"},
        {"hasSymptom", "Headache"}, {"hasSymptom", "DryCough"},
        {"hasSymptom", "Fever"},    {"hasSymptom", "Fatigue"},
        {"hasPreexistingCondition", "Asthma"},
        {"hasPreexistingCondition", "Hypertension"},
        {"hasUserInstance", "Smoker"},
        {"hasUserInstance", "NeverSmoker"},
    };
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        IndividualDescription a, b;
        a.id = "a";
        b.id = "b";
        for (int i = count(rng); i > 0; --i) a.concepts.insert(pool[pick(rng)]);
        for (int i = count(rng); i > 0; --i) b.concepts.insert(pool[pick(rng)]);
        const double solver = counterfactual::edit_distance(a, b, tbox).cost;
        const double brute = testutil::brute_force_edit_cost(a, b, tbox);
        if (std::abs(solver - brute) > 1e-9) {
            c.require(false, "trial " + std::to_string(trial) + ": solver " + num(solver) +
                                 " vs exhaustive " + num(brute));
        }
    }

    // 7-of-10 gender fixture dominates the global table.
    const IndividualDescription fever_twin =
        describe("v", {{"", "FemaleUser"}, {"hasSymptom", "Fever"}});
    std::vector<counterfactual::CounterfactualResult> results;
    for (int i = 0; i < 10; ++i) {
        results.push_back(counterfactual::nearest_counterfactual(
            female, {i < 7 ? male_twin : fever_twin}, tbox));
    }
    const auto global = counterfactual::global_explanation(results);
    c.require(!global.rows.empty() && global.rows[0].source == "FemaleUser" &&
                  global.rows[0].target == "MaleUser" && global.rows[0].count == 7,
              "global table should rank the gender edit first with count 7");
}

// ------------------------------------------------------------------- 10

void criterion_validation() {
    Criterion c(10, "schema validation fixtures produce exactly the expected violations");
    using nlohmann::json;

    json high = testutil::questionnaire_json(testutil::kUserId1, testutil::kSubId1, "positive");
    high["oxygenSaturation"] = 105;
    const records::ValidationReport range_report =
        records::validate_submission(records::parse_submission(high));
    c.require(range_report.violations.size() == 1 &&
                  range_report.violations[0].field == "oxygenSaturation" &&
                  range_report.violations[0].code == "range",
              "oxygenSaturation=105 should give exactly one range violation");

    json booster = testutil::questionnaire_json(testutil::kUserId1, testutil::kSubId1, "negative");
    booster["vaccination_status"] = "booster3";
    const records::ValidationReport enum_report =
        records::validate_submission(records::parse_submission(booster));
    c.require(enum_report.violations.size() == 1 &&
                  enum_report.violations[0].field == "vaccination_status" &&
                  enum_report.violations[0].code == "enum",
              "vaccination_status=booster3 should give exactly one enum violation");

    const records::ValidationReport ok_report = records::validate_submission(
        records::parse_submission(testutil::questionnaire_json(
            testutil::kUserId1, testutil::kSubId1, "positive")));
    c.require(ok_report.conforms(), "conforming record should give zero violations");
}

// ------------------------------------------------------------------- 11

struct CliRun {
    std::string name;
    std::string args;
    std::vector<fs::path> outputs;
};

void criterion_cli_determinism() {
    Criterion c(11, "every CLI subcommand is byte-identical across two seeded runs");

    const fs::path work = fs::temp_directory_path() / "s4c_acceptance_cli";
    fs::remove_all(work);
    fs::create_directories(work);

    // Dataset fixture.
    const fs::path data = work / "data";
    testutil::build_dataset_tree(data);

    // Breathing wav fixture.
    testutil::BreathSynthParams bp;
    bp.cycles = 6;
    const testutil::SynthBreath synth = testutil::synth_breath(3, bp);
    const fs::path wav = work / "breath.wav";
    testutil::write_wav(wav, {synth.audio.samples}, synth.audio.sample_rate, 3);

    // Tiny labeled training set.
    std::mt19937_64 rng(5);
    const fs::path train_dir = work / "train";
    for (int i = 0; i < 3; ++i) {
        fs::create_directories(train_dir / "cough");
        fs::create_directories(train_dir / "breath");
        fs::create_directories(train_dir / "voice");
        std::vector<float> cough;
        for (int b = 0; b < 3; ++b) {
            auto burst = testutil::band_noise(rng, 9600, 48000, 300, 3000, 0.5);
            cough.insert(cough.end(), burst.begin(), burst.end());
            cough.insert(cough.end(), 4800, 0.0f);
        }
        testutil::write_wav(train_dir / "cough" / (std::to_string(i) + ".wav"), {cough}, 48000);
        testutil::write_wav(train_dir / "breath" / (std::to_string(i) + ".wav"),
                            {testutil::band_noise(rng, 60000, 48000, 100, 700, 0.4)}, 48000);
        testutil::write_wav(train_dir / "voice" / (std::to_string(i) + ".wav"),
                            {testutil::sine(220.0 + 15 * i, 1.3, 48000, 0.6)}, 48000);
    }

    // KB + predictions fixture for explain.
    testutil::run_cli("emit-kb " + data.string() + " --out " + (work / "kb0").string());
    nlohmann::json preds;
    preds[std::string("user:") + testutil::kUserId1] = "positive";
    preds[std::string("user:") + testutil::kUserId2] = "negative";
    preds[std::string("user:") + testutil::kUserId3] = "negative";
    testutil::write_json_file(work / "preds.json", preds);

    const std::string model_path = (work / "model.bin").string();
    const std::vector<CliRun> runs = {
        {"validate", "validate " + data.string() + " --out " + (work / "report.json").string(),
         {work / "report.json"}},
        {"stats", "stats " + data.string() + " --out " + (work / "stats.json").string(),
         {work / "stats.json"}},
        {"breath-features",
         "breath-features " + wav.string() + " --out " + (work / "bf.json").string() +
             " --trim-db -30 --split-db -25 --seed 11",
         {work / "bf.json"}},
        {"train",
         "train --data " + train_dir.string() + " --out " + model_path +
             " --relax-grid --d 32 --blocks 2 --layers 1 --kernels 2 --epochs 1 --batch 4 "
             "--seed 3",
         {work / "model.bin"}},
        {"classify",
         "classify " + wav.string() + " --model " + model_path + " --out " +
             (work / "cls.json").string(),
         {work / "cls.json"}},
        {"eval",
         "eval --confusion coswara-multiscale --out " + (work / "eval.json").string(),
         {work / "eval.json"}},
        {"sweep", "sweep --out " + (work / "sweep.tsv").string(), {work / "sweep.tsv"}},
        {"emit-kb", "emit-kb " + data.string() + " --out " + (work / "kb").string(),
         {work / "kb" / "ontology.nt", work / "kb" / "triples.nt", work / "kb" / "kb.nt"}},
        {"explain",
         "explain --kb " + (work / "kb0" / "kb.nt").string() + " --predictions " +
             (work / "preds.json").string() + " --out " + (work / "expl").string(),
         {work / "expl" / "explanations.json", work / "expl" / "global_edits.tsv"}},
    };

    for (const CliRun& run : runs) {
        const testutil::CliResult first = testutil::run_cli(run.args);
        std::vector<std::string> first_files;
        for (const fs::path& p : run.outputs) first_files.push_back(testutil::read_file(p));

        const testutil::CliResult second = testutil::run_cli(run.args);
        if (first.exit_code != 0) {
            c.require(false, run.name + " exited with " + std::to_string(first.exit_code) +
                                 ": " + first.output.substr(0, 160));
            continue;
        }
        c.require(second.exit_code == first.exit_code, run.name + " exit codes differ");
        c.require(second.output == first.output, run.name + " stdout differs between runs");
        for (std::size_t i = 0; i < run.outputs.size(); ++i) {
            const std::string again = testutil::read_file(run.outputs[i]);
            if (again != first_files[i] || first_files[i].empty()) {
                c.require(false,
                          run.name + " output file differs or is empty: " +
                              run.outputs[i].string());
            }
        }
    }
    fs::remove_all(work);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_metrics();
    criterion_parameter_counts();
    criterion_gradients();
    criterion_toy_classifier();
    criterion_breathing();
    criterion_affinity();
    criterion_kb();
    criterion_counterfactual();
    criterion_validation();
    criterion_cli_determinism();
    if (g_failures == 0) {
        std::printf("================\nall criteria passed\n");
    } else {
        std::printf("================\n%d criteria FAILED\n", g_failures);
    }
    return g_failures == 0 ? 0 : 1;
}
