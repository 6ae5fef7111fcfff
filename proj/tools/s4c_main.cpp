// s4c: command-line toolkit for the smarty4covid-style respiratory audio
// dataset layout: schema validation, summary statistics, breathing-feature
// extraction, audio-type classifier training/inference/evaluation, knowledge
// base emission, and counterfactual explanations.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "s4c/breath.hpp"
#include "s4c/cnn.hpp"
#include "s4c/counterfactual.hpp"
#include "s4c/dataset.hpp"
#include "s4c/kb.hpp"
#include "s4c/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace s4c;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitUsage = 2;

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void log_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    for (const auto& [key, value] : kv) {
        std::cout << "config " << key << " = " << value << "\n";
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::vector<std::string> sorted_subdirs(const fs::path& root) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

// ---------------------------------------------------------------- validate

struct ValidateArgs {
    std::string root;
    std::string out;
    std::string table;
};

int run_validate(const ValidateArgs& args) {
    log_config({{"root", args.root}, {"out", args.out}, {"table", args.table}});
    const dataset::DatasetIndex index = dataset::scan_dataset(args.root);

    std::string table = "directory\tsubmission\tfile\tfield\tcode\tseverity\tmessage\n";
    json reports = json::array();
    long errors = 0, warnings = 0;
    for (const std::string& name : sorted_subdirs(args.root)) {
        dataset::UserDirectory user_dir;
        try {
            user_dir = dataset::load_user_directory(fs::path(args.root) / name);
        } catch (const dataset::DatasetError& e) {
            json r;
            r["directory"] = name;
            r["violations"] =
                json::array({{{"field", "directory"}, {"code", "parse"}, {"message", e.what()},
                              {"severity", "error"}}});
            reports.push_back(r);
            ++errors;
            continue;
        }

        auto push_report = [&](records::ValidationReport r) {
            errors += r.error_count();
            warnings += static_cast<long>(r.violations.size()) - r.error_count();
            if (!r.violations.empty()) {
                json rj = records::to_json(r);
                rj["directory"] = user_dir.directory_name;
                reports.push_back(rj);
                for (const records::Violation& v : r.violations) {
                    table += user_dir.directory_name + "\t" + r.submission_id + "\t" + r.file +
                             "\t" + v.field + "\t" + v.code + "\t" +
                             (v.severity == records::Severity::error ? "error" : "warning") +
                             "\t" + v.message + "\n";
                }
            }
        };

        records::ValidationReport user_report = records::validate_user(user_dir.user);
        for (const records::Violation& w : user_dir.warnings) user_report.violations.push_back(w);
        push_report(std::move(user_report));

        for (const dataset::SubmissionEntry& sub : user_dir.submissions) {
            if (sub.questionnaire) {
                records::ValidationReport r = records::validate_submission(*sub.questionnaire);
                if (r.submission_id.empty()) r.submission_id = sub.directory_name;
                push_report(std::move(r));
            }
            if (sub.breathing_features) {
                push_report(records::validate_breathing_features(*sub.breathing_features));
            }
            push_report(records::validate_experts(sub.experts));
        }
    }

    json out;
    out["users"] = index.user_count;
    out["submissions"] = index.submission_count;
    out["errors"] = errors;
    out["warnings"] = warnings;
    out["reports"] = reports;
    if (!args.out.empty()) write_json(args.out, out);
    if (!args.table.empty()) write_text(args.table, table);

    std::cout << "validated " << index.user_count << " users, " << index.submission_count
              << " submissions: " << errors << " errors, " << warnings << " warnings\n";
    return errors == 0 ? kExitOk : kExitDataError;
}

// ------------------------------------------------------------------- stats

struct StatsArgs {
    std::string root;
    std::string out;
    std::string table;
};

int run_stats(const StatsArgs& args) {
    log_config({{"root", args.root}, {"out", args.out}, {"table", args.table}});
    const dataset::DatasetIndex index = dataset::scan_dataset(args.root);
    const dataset::SummaryStats stats = dataset::summary_stats(index);

    json out;
    out["index"] = dataset::to_json(index);
    out["stats"] = dataset::to_json(stats);
    if (!args.out.empty()) write_json(args.out, out);
    if (!args.table.empty()) {
        std::string table = "group\tkey\tvalue\n";
        auto rows = [&table](const char* group, const std::map<std::string, double>& m) {
            for (const auto& [k, v] : m) {
                table += std::string(group) + "\t" + k + "\t" + fmt(v) + "\n";
            }
        };
        rows("sex", stats.sex_proportion);
        rows("age", stats.age_proportion);
        rows("covid_status", stats.covid_status_proportion);
        table += "tested\tshare\t" + fmt(stats.tested_share) + "\n";
        rows("test_type", stats.test_type_share);
        rows("condition", stats.condition_prevalence);
        for (const auto& [vacc, symptoms] : stats.symptom_by_vaccination) {
            rows(("symptom|" + vacc).c_str(), symptoms);
        }
        for (const auto& [vacc, levels] : stats.anxiety_by_vaccination) {
            rows(("anxiety|" + vacc).c_str(), levels);
        }
        for (const auto& [age, q] : stats.oxygen_saturation_by_age) {
            table += "oxygen_q1|" + age + "\t" + std::to_string(q.n) + "\t" + fmt(q.q1) + "\n";
            table += "oxygen_median|" + age + "\t" + std::to_string(q.n) + "\t" +
                     fmt(q.median) + "\n";
            table += "oxygen_q3|" + age + "\t" + std::to_string(q.n) + "\t" + fmt(q.q3) + "\n";
        }
        write_text(args.table, table);
    }

    std::cout << "users " << index.user_count << ", submissions " << index.submission_count
              << "\n";
    for (const auto& [k, v] : stats.sex_proportion) {
        std::cout << "sex " << k << " " << fmt(v) << "\n";
    }
    std::cout << "tested_share " << fmt(stats.tested_share) << "\n";
    for (const auto& [k, v] : stats.covid_status_proportion) {
        std::cout << "covid_status " << k << " " << fmt(v) << "\n";
    }
    return kExitOk;
}

// --------------------------------------------------------- breath-features

struct BreathArgs {
    std::string input;
    std::string out;
    breath::BreathConfig config;
    std::uint64_t seed = 0;
};

json indicators_json(const breath::SegmentationResult& seg,
                     const breath::RespiratoryIndicators& ind) {
    json j;
    if (ind.rr) j["RR"] = *ind.rr;
    if (ind.i_e_ratio) j["I_E_ratio"] = *ind.i_e_ratio;
    if (ind.fit) j["FIT"] = *ind.fit;
    json inh = json::array(), exh = json::array();
    for (const breath::BreathInterval& bi : seg.intervals) {
        if (bi.label == breath::PhaseLabel::inhalation) {
            inh.push_back(json::array({bi.interval.start_s, bi.interval.end_s}));
        } else if (bi.label == breath::PhaseLabel::exhalation) {
            exh.push_back(json::array({bi.interval.start_s, bi.interval.end_s}));
        }
    }
    j["annotated_inhalation"] = inh;
    j["annotated_exhalation"] = exh;
    return j;
}

int process_recording(const fs::path& audio_path, const fs::path& out_path,
                      const breath::BreathConfig& config) {
    const audio::AudioBuffer buf = audio::load_audio(audio_path);
    const breath::SegmentationResult seg = breath::segment_breathing(buf, config);
    if (seg.empty_result) {
        std::cout << audio_path.string() << ": no breathing content detected\n";
        if (!out_path.empty()) {
            write_json(out_path, {{"annotated_inhalation", json::array()},
                                  {"annotated_exhalation", json::array()}});
        }
        return kExitDataError;
    }
    const breath::RespiratoryIndicators ind =
        breath::respiratory_indicators(seg.intervals, seg.trimmed_duration_s);
    const json j = indicators_json(seg, ind);
    if (!out_path.empty()) write_json(out_path, j);

    std::cout << audio_path.string() << ": intervals " << seg.intervals.size();
    if (ind.rr) std::cout << ", RR " << fmt(*ind.rr);
    if (ind.i_e_ratio) std::cout << ", I_E_ratio " << fmt(*ind.i_e_ratio);
    if (ind.fit) std::cout << ", FIT " << fmt(*ind.fit);
    std::cout << "\n";
    return kExitOk;
}

int run_breath_features(const BreathArgs& args) {
    breath::BreathConfig config = args.config;
    config.ap.jitter_seed = args.seed;
    log_config({{"input", args.input},
                {"out", args.out},
                {"trim_db", fmt(config.trim_db)},
                {"split_db", fmt(config.split_db)},
                {"min_gap_s", fmt(config.min_gap_s)},
                {"min_len_s", fmt(config.min_len_s)},
                {"fft_size", std::to_string(config.mel.fft_size)},
                {"hop", std::to_string(config.mel.hop)},
                {"n_mels", std::to_string(config.mel.n_mels)},
                {"damping", fmt(config.ap.damping)},
                {"seed", std::to_string(args.seed)}});

    if (fs::is_directory(args.input)) {
        const dataset::DatasetIndex index = dataset::scan_dataset(args.input);
        int failures = 0, processed = 0;
        for (const dataset::SubmissionDigest& sub : index.submissions) {
            for (const char* name : {"audio.breath_regular.wav", "audio.breath_regular.mp3"}) {
                if (std::find(sub.files_present.begin(), sub.files_present.end(), name) ==
                    sub.files_present.end()) {
                    continue;
                }
                const fs::path audio_path =
                    fs::path(args.input) / sub.user_directory / sub.directory / name;
                fs::path out_path;
                if (!args.out.empty()) {
                    out_path = fs::path(args.out) / sub.user_directory / sub.directory /
                               "breathing_features.json";
                }
                try {
                    if (process_recording(audio_path, out_path, config) != kExitOk) ++failures;
                } catch (const std::exception& e) {
                    std::cout << audio_path.string() << ": " << e.what() << "\n";
                    ++failures;
                }
                ++processed;
                break;
            }
        }
        std::cout << "processed " << processed << " recordings, " << failures << " failures\n";
        return failures == 0 ? kExitOk : kExitDataError;
    }
    return process_recording(args.input, args.out, config);
}

// ------------------------------------------------------------------- train

struct TrainArgs {
    std::string data;
    std::string out;
    cnn::ModelConfig model;
    cnn::TrainConfig train;
    mel::MelConfig mel;
    bool relax_grid = false;
};

std::vector<cnn::TrainSample> load_labeled_dir(const std::string& data, int bands,
                                               bool log_compress, mel::MelConfig mel_cfg) {
    mel_cfg.n_mels = bands;
    std::vector<cnn::TrainSample> samples;
    for (int label = 0; label < cnn::kNumClasses; ++label) {
        const fs::path class_dir =
            fs::path(data) / cnn::class_name(static_cast<cnn::AudioClass>(label));
        if (!fs::is_directory(class_dir)) continue;
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(class_dir)) {
            names.push_back(entry.path().filename().string());
        }
        std::sort(names.begin(), names.end());
        for (const std::string& name : names) {
            const audio::AudioBuffer raw = audio::load_audio(class_dir / name);
            const audio::TrimResult trimmed = audio::trim_silence(audio::normalize(raw));
            if (trimmed.all_silent ||
                static_cast<int>(trimmed.audio.samples.size()) < mel_cfg.fft_size) {
                std::cout << "skipping silent/short recording " << name << "\n";
                continue;
            }
            const mel::Spectrogram spec = mel::mel_spectrogram(trimmed.audio, mel_cfg);
            samples.push_back({cnn::to_input_tensor(spec, log_compress), label});
        }
    }
    return samples;
}

int run_train(const TrainArgs& args) {
    log_config({{"data", args.data},
                {"out", args.out},
                {"d", std::to_string(args.model.window_frames)},
                {"blocks", std::to_string(args.model.blocks)},
                {"layers", std::to_string(args.model.layers_per_block)},
                {"kernels", std::to_string(args.model.kernels)},
                {"dropout", fmt(args.model.dropout_p)},
                {"lr", fmt(args.train.lr)},
                {"batch", std::to_string(args.train.batch)},
                {"epochs", std::to_string(args.train.epochs)},
                {"seed", std::to_string(args.train.seed)}});

    const std::vector<cnn::TrainSample> samples =
        load_labeled_dir(args.data, args.model.input_bands, args.model.log_compress, args.mel);
    cnn::CnnModel model = cnn::build_model(args.model, args.train.seed, !args.relax_grid);
    const cnn::TrainHistory history = cnn::train(model, samples, args.train);
    for (const std::string& w : history.warnings) std::cout << w << "\n";
    for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
        std::cout << "epoch " << e << " loss " << fmt(history.epoch_loss[e]) << "\n";
    }
    cnn::save_model(model, args.out);
    std::cout << "saved model (" << model.parameter_count() << " parameters) to " << args.out
              << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
    std::vector<std::string> models;
    std::string input;
    std::string out;
    mel::MelConfig mel;
};

int run_classify(const ClassifyArgs& args) {
    log_config({{"input", args.input}, {"models", std::to_string(args.models.size())}});
    std::vector<cnn::CnnModel> models;
    for (const std::string& path : args.models) models.push_back(cnn::load_model(path));
    std::vector<const cnn::CnnModel*> model_ptrs;
    for (const cnn::CnnModel& m : models) model_ptrs.push_back(&m);

    mel::MelConfig mel_cfg = args.mel;
    mel_cfg.n_mels = models.front().config.input_bands;
    const audio::AudioBuffer raw = audio::load_audio(args.input);
    const audio::TrimResult trimmed = audio::trim_silence(audio::normalize(raw));
    if (trimmed.all_silent) throw std::runtime_error("recording is silent");
    const mel::Spectrogram spec = mel::mel_spectrogram(trimmed.audio, mel_cfg);
    const cnn::Prediction p = cnn::classify_recording(model_ptrs, spec);

    const int argmax = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    json out;
    out["input"] = args.input;
    out["probabilities"] = {{"cough", p[0]}, {"breath", p[1]}, {"voice", p[2]}};
    out["class"] = cnn::class_name(static_cast<cnn::AudioClass>(argmax));
    if (!args.out.empty()) write_json(args.out, out);

    std::cout << "cough " << fmt(p[0]) << ", breath " << fmt(p[1]) << ", voice " << fmt(p[2])
              << " -> " << cnn::class_name(static_cast<cnn::AudioClass>(argmax)) << "\n";
    return kExitOk;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
    std::string confusion;
    std::string out;
};

metrics::ConfusionMatrix load_matrix(const std::string& source) {
    const std::vector<std::string> builtin = metrics::published_matrix_names();
    if (std::find(builtin.begin(), builtin.end(), source) != builtin.end()) {
        return metrics::published_matrix(source);
    }
    std::ifstream in(source);
    if (!in) throw std::runtime_error("unknown fixture and unreadable file: " + source);
    std::vector<std::array<long, 3>> rows;
    long a, b, c;
    while (in >> a >> b >> c) rows.push_back({a, b, c});
    if (rows.size() != 2 && rows.size() != 3) {
        throw std::runtime_error("confusion file must hold 2 or 3 rows of 3 counts");
    }
    metrics::ConfusionMatrix cm;
    cm.detected_classes = static_cast<int>(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) cm.counts[r] = rows[r];
    return cm;
}

int run_eval(const EvalArgs& args) {
    log_config({{"confusion", args.confusion}, {"out", args.out}});
    const metrics::ConfusionMatrix cm = load_matrix(args.confusion);
    const metrics::EvalMetrics m = metrics::compute_metrics(cm);

    std::cout << metrics::format_matrix(cm);
    char acc[32], f1[32];
    std::snprintf(acc, sizeof(acc), "%.3f", m.accuracy);
    std::snprintf(f1, sizeof(f1), "%.3f", m.macro_f1);
    std::cout << "accuracy " << acc << "\nmacro_f1 " << f1 << "\n";

    if (!args.out.empty()) {
        write_json(args.out, {{"confusion", args.confusion},
                              {"accuracy", m.accuracy},
                              {"macro_f1", m.macro_f1}});
    }
    return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
    std::vector<int> d_values{128, 1024};
    std::vector<int> blocks{3, 4, 5};
    std::vector<int> layers{1, 2, 3};
    std::vector<int> kernels{64, 128};
    std::string out;
};

int run_sweep(const SweepArgs& args) {
    log_config({{"out", args.out}});
    std::string table = "d\tblocks\tlayers\tkernels\tparameters\n";
    int legal = 0, skipped = 0;
    for (int d : args.d_values) {
        for (int b : args.blocks) {
            for (int l : args.layers) {
                for (int k : args.kernels) {
                    cnn::ModelConfig cfg;
                    cfg.window_frames = d;
                    cfg.blocks = b;
                    cfg.layers_per_block = l;
                    cfg.kernels = k;
                    try {
                        cnn::validate_grid_config(cfg);
                    } catch (const std::invalid_argument&) {
                        ++skipped;
                        continue;
                    }
                    ++legal;
                    const std::size_t params = cnn::closed_form_parameter_count(cfg);
                    table += std::to_string(d) + "\t" + std::to_string(b) + "\t" +
                             std::to_string(l) + "\t" + std::to_string(k) + "\t" +
                             std::to_string(params) + "\n";
                }
            }
        }
    }
    std::cout << table;
    std::cout << "legal configs " << legal << ", skipped " << skipped << "\n";
    if (!args.out.empty()) write_text(args.out, table);
    return kExitOk;
}

// ----------------------------------------------------------------- emit-kb

struct EmitKbArgs {
    std::string root;
    std::string out;
    std::string prefix = "urn:s4c:";
};

int run_emit_kb(const EmitKbArgs& args) {
    log_config({{"root", args.root}, {"out", args.out}, {"prefix", args.prefix}});
    kb::KnowledgeBase base = kb::build_tbox(args.prefix);

    long loaded = 0, failed = 0;
    for (const std::string& name : sorted_subdirs(args.root)) {
        try {
            const dataset::UserDirectory user_dir =
                dataset::load_user_directory(fs::path(args.root) / name);
            kb::assert_records(base, user_dir);
            ++loaded;
        } catch (const std::exception& e) {
            std::cout << name << ": " << e.what() << "\n";
            ++failed;
        }
    }

    fs::create_directories(args.out);
    write_text(fs::path(args.out) / "ontology.nt", kb::tbox_ntriples(base));
    write_text(fs::path(args.out) / "triples.nt", kb::abox_ntriples(base));
    write_text(fs::path(args.out) / "kb.nt", kb::to_ntriples(base));

    std::cout << "users " << loaded << " (failed " << failed << "), concept assertions "
              << base.abox.concept_assertions.size() << ", role assertions "
              << base.abox.role_assertions.size() << "\n";
    return failed == 0 ? kExitOk : kExitDataError;
}

// ----------------------------------------------------------------- explain

struct ExplainArgs {
    std::string kb_path;
    std::string predictions;
    std::string out;
    std::string prefix = "urn:s4c:";
    std::string from_class = "positive";
    std::string to_class = "negative";
};

int run_explain(const ExplainArgs& args) {
    log_config({{"kb", args.kb_path},
                {"predictions", args.predictions},
                {"out", args.out},
                {"from", args.from_class},
                {"to", args.to_class}});

    const kb::KnowledgeBase base = kb::parse_ntriples(args.kb_path, args.prefix);

    std::ifstream pin(args.predictions);
    if (!pin) throw std::runtime_error("cannot open predictions: " + args.predictions);
    const json preds = json::parse(pin);

    std::vector<counterfactual::IndividualDescription> sources, pool;
    for (auto it = preds.begin(); it != preds.end(); ++it) {
        counterfactual::IndividualDescription d =
            counterfactual::extract_description(base, it.key());
        d.predicted_class = it.value().get<std::string>();
        if (d.predicted_class == args.from_class) {
            sources.push_back(std::move(d));
        } else if (d.predicted_class == args.to_class) {
            pool.push_back(std::move(d));
        }
    }
    if (sources.empty()) throw std::runtime_error("no individuals with class " + args.from_class);
    if (pool.empty()) throw std::runtime_error("no individuals with class " + args.to_class);

    std::vector<counterfactual::CounterfactualResult> results;
    json per_individual = json::array();
    for (const counterfactual::IndividualDescription& x : sources) {
        counterfactual::CounterfactualResult r =
            counterfactual::nearest_counterfactual(x, pool, base);
        json rj;
        rj["individual"] = r.source_id;
        rj["nearest"] = r.target_id;
        rj["cost"] = r.total_cost;
        json edits = json::array();
        for (const counterfactual::Edit& e : r.edits) {
            edits.push_back({{"kind", counterfactual::edit_kind_name(e.kind)},
                             {"role", e.role},
                             {"source", e.source},
                             {"target", e.target},
                             {"cost", e.cost}});
        }
        rj["edits"] = edits;
        per_individual.push_back(rj);
        results.push_back(std::move(r));
    }

    const counterfactual::GlobalExplanation global = counterfactual::global_explanation(results);
    std::string table = "rank\tkind\trole\tsource\ttarget\tcount\tmean_cost\n";
    json global_json = json::array();
    int rank = 1;
    for (const counterfactual::GlobalEditRow& row : global.rows) {
        table += std::to_string(rank) + "\t" + counterfactual::edit_kind_name(row.kind) + "\t" +
                 row.role + "\t" + row.source + "\t" + row.target + "\t" +
                 std::to_string(row.count) + "\t" + fmt(row.mean_cost) + "\n";
        global_json.push_back({{"rank", rank},
                               {"kind", counterfactual::edit_kind_name(row.kind)},
                               {"role", row.role},
                               {"source", row.source},
                               {"target", row.target},
                               {"count", row.count},
                               {"mean_cost", row.mean_cost}});
        ++rank;
    }

    if (!args.out.empty()) {
        fs::create_directories(args.out);
        write_json(fs::path(args.out) / "explanations.json",
                   {{"individuals", per_individual}, {"global", global_json}});
        write_text(fs::path(args.out) / "global_edits.tsv", table);
    }

    std::cout << "explained " << sources.size() << " individuals against a pool of "
              << pool.size() << "\n";
    std::cout << table;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toolkit for crowd-sourced respiratory audio datasets"};
    app.set_config("--config", "", "key-value config file; command-line flags take precedence");
    app.require_subcommand(1);

    ValidateArgs validate_args;
    CLI::App* validate = app.add_subcommand("validate", "schema-validate a dataset tree");
    validate->add_option("root", validate_args.root, "dataset root directory")->required();
    validate->add_option("--out", validate_args.out, "write the full report as json");
    validate->add_option("--table", validate_args.table, "write the violations as tsv");

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "index a dataset and report summary statistics");
    stats->add_option("root", stats_args.root, "dataset root directory")->required();
    stats->add_option("--out", stats_args.out, "write index and statistics as json");
    stats->add_option("--table", stats_args.table, "write the proportions as tsv");

    BreathArgs breath_args;
    CLI::App* bf = app.add_subcommand("breath-features",
                                      "segment breathing audio and compute indicators");
    bf->add_option("input", breath_args.input, "wav file or dataset root")->required();
    bf->add_option("--out", breath_args.out, "output json file (or directory for dataset roots)");
    bf->add_option("--trim-db", breath_args.config.trim_db, "silence trim threshold, dB");
    bf->add_option("--split-db", breath_args.config.split_db, "interval split threshold, dB");
    bf->add_option("--min-gap", breath_args.config.min_gap_s, "merge gaps shorter than this, s");
    bf->add_option("--min-len", breath_args.config.min_len_s, "drop intervals shorter than, s");
    bf->add_option("--fft-size", breath_args.config.mel.fft_size, "stft window size");
    bf->add_option("--hop", breath_args.config.mel.hop, "stft hop, samples");
    bf->add_option("--n-mels", breath_args.config.mel.n_mels, "mel band count");
    bf->add_option("--damping", breath_args.config.ap.damping, "message damping");
    bf->add_option("--max-iter", breath_args.config.ap.max_iter, "max message sweeps");
    bf->add_option("--conv-iter", breath_args.config.ap.conv_iter, "stable sweeps to converge");
    bf->add_option("--preference-scale", breath_args.config.preference_scale,
                   "multiplier on the median preference");
    bf->add_option("--seed", breath_args.seed, "tie-break jitter seed");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train an audio-type classifier");
    train->add_option("--data", train_args.data, "directory with cough/ breath/ voice/ wavs")
        ->required();
    train->add_option("--out", train_args.out, "model output path")->required();
    train->add_option("--d", train_args.model.window_frames, "window width in frames");
    train->add_option("--bands", train_args.model.input_bands, "mel bands");
    train->add_option("--blocks", train_args.model.blocks, "conv blocks");
    train->add_option("--layers", train_args.model.layers_per_block, "conv layers per block");
    train->add_option("--kernels", train_args.model.kernels, "kernels per conv layer");
    train->add_option("--dropout", train_args.model.dropout_p, "dropout probability");
    train->add_option("--lr", train_args.train.lr, "Adam learning rate");
    train->add_option("--batch", train_args.train.batch, "batch size");
    train->add_option("--epochs", train_args.train.epochs, "training epochs");
    train->add_option("--seed", train_args.train.seed, "rng seed");
    train->add_option("--fft-size", train_args.mel.fft_size, "stft window size");
    train->add_option("--hop", train_args.mel.hop, "stft hop, samples");
    train->add_flag("--relax-grid", train_args.relax_grid,
                    "allow configs outside the tuning grid");

    ClassifyArgs classify_args;
    CLI::App* classify = app.add_subcommand("classify", "classify a recording with model(s)");
    classify->add_option("--model", classify_args.models, "model file (repeat for an ensemble)")
        ->required();
    classify->add_option("input", classify_args.input, "audio file")->required();
    classify->add_option("--out", classify_args.out, "output json");
    classify->add_option("--fft-size", classify_args.mel.fft_size, "stft window size");
    classify->add_option("--hop", classify_args.mel.hop, "stft hop, samples");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "metrics from a confusion matrix");
    eval->add_option("--confusion", eval_args.confusion,
                     "builtin fixture name (coswara-short, coswara-long, coswara-multiscale, "
                     "coughvid-coswara) or a file with rows of counts")
        ->required();
    eval->add_option("--out", eval_args.out, "output json");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "enumerate the tuning grid parameter counts");
    sweep->add_option("--d", sweep_args.d_values, "window widths");
    sweep->add_option("--blocks", sweep_args.blocks, "block counts");
    sweep->add_option("--layers", sweep_args.layers, "layers per block");
    sweep->add_option("--kernels", sweep_args.kernels, "kernel counts");
    sweep->add_option("--out", sweep_args.out, "write the table as tsv");

    EmitKbArgs emit_args;
    CLI::App* emit = app.add_subcommand("emit-kb", "build the knowledge base from a dataset");
    emit->add_option("root", emit_args.root, "dataset root directory")->required();
    emit->add_option("--out", emit_args.out, "output directory")->required();
    emit->add_option("--prefix", emit_args.prefix, "IRI prefix");

    ExplainArgs explain_args;
    CLI::App* explain = app.add_subcommand("explain", "counterfactual edits over a KB");
    explain->add_option("--kb", explain_args.kb_path, "N-Triples knowledge base")->required();
    explain->add_option("--predictions", explain_args.predictions,
                        "json map of individual id to predicted class")
        ->required();
    explain->add_option("--out", explain_args.out, "output directory");
    explain->add_option("--prefix", explain_args.prefix, "IRI prefix");
    explain->add_option("--from", explain_args.from_class, "class to explain");
    explain->add_option("--to", explain_args.to_class, "desired class");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (validate->parsed()) return run_validate(validate_args);
        if (stats->parsed()) return run_stats(stats_args);
        if (bf->parsed()) return run_breath_features(breath_args);
        if (train->parsed()) return run_train(train_args);
        if (classify->parsed()) return run_classify(classify_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (emit->parsed()) return run_emit_kb(emit_args);
        if (explain->parsed()) return run_explain(explain_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitUsage;
}
