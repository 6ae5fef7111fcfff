#include "s4c/dataset.hpp"

#include <algorithm>
#include <fstream>

namespace s4c::dataset {

namespace fs = std::filesystem;
using nlohmann::json;
using records::Severity;

namespace {

const char* kDemographicsFile = "demographics_underlying_conditions.json";

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DatasetError("malformed json in " + path.string() + ": " + e.what());
    }
}

std::optional<json> try_read_json(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    return read_json_file(path);
}

// Recognized per-submission files; each audio slot also accepts a .wav
// sibling so transcoded copies stay usable.
struct KnownFile {
    const char* canonical;
    const char* alt = nullptr;
};

std::vector<std::string> sorted_entries(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        names.push_back(entry.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void scan_submission_audio(const fs::path& dir, const std::string& stem,
                           std::optional<fs::path>& slot, std::vector<std::string>& present) {
    const fs::path mp3 = dir / (stem + ".mp3");
    const fs::path wav = dir / (stem + ".wav");
    if (fs::exists(wav)) {
        slot = wav;
        present.push_back(stem + ".wav");
    }
    if (fs::exists(mp3)) {
        if (!slot) slot = mp3;
        present.push_back(stem + ".mp3");
    }
}

SubmissionEntry load_submission(const fs::path& dir) {
    SubmissionEntry entry;
    entry.directory_name = dir.filename().string();

    if (auto j = try_read_json(dir / "main_questionnaire.json")) {
        entry.questionnaire = records::parse_submission(*j);
        entry.files_present.push_back("main_questionnaire.json");
    }
    if (auto j = try_read_json(dir / "breathing_features.json")) {
        entry.breathing_features = records::parse_breathing_features(*j);
        entry.files_present.push_back("breathing_features.json");
    }
    if (auto j = try_read_json(dir / "experts.breath.json")) {
        entry.experts.breath = records::parse_expert_breath(*j);
        entry.files_present.push_back("experts.breath.json");
    }
    if (auto j = try_read_json(dir / "experts.cough.json")) {
        entry.experts.cough = records::parse_expert_cough(*j);
        entry.files_present.push_back("experts.cough.json");
    }
    if (auto j = try_read_json(dir / "experts.speech.json")) {
        entry.experts.voice = records::parse_expert_voice(*j);
        entry.files_present.push_back("experts.speech.json");
    }
    if (auto j = try_read_json(dir / "experts.medical_advice.json")) {
        entry.experts.medical_advice = records::parse_expert_advice(*j);
        entry.files_present.push_back("experts.medical_advice.json");
    }
    scan_submission_audio(dir, "audio.cough", entry.audio.cough, entry.files_present);
    scan_submission_audio(dir, "audio.breath_deep", entry.audio.breath_deep, entry.files_present);
    scan_submission_audio(dir, "audio.breath_regular", entry.audio.breath_regular,
                          entry.files_present);

    std::vector<std::string> recognized = entry.files_present;
    std::sort(recognized.begin(), recognized.end());
    for (const std::string& name : sorted_entries(dir)) {
        if (!std::binary_search(recognized.begin(), recognized.end(), name)) {
            entry.unknown_files.push_back(name);
        }
    }
    std::sort(entry.files_present.begin(), entry.files_present.end());
    return entry;
}

double proportion(long count, long total) { return total == 0 ? 0.0 : double(count) / total; }

Quartiles quartiles_of(std::vector<double> values) {
    Quartiles q;
    q.n = static_cast<long>(values.size());
    if (values.empty()) return q;
    std::sort(values.begin(), values.end());
    auto at = [&](double p) {
        const double pos = p * double(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(values.size() - 1, lo + 1);
        const double frac = pos - double(lo);
        return (1.0 - frac) * values[lo] + frac * values[hi];
    };
    q.q1 = at(0.25);
    q.median = at(0.5);
    q.q3 = at(0.75);
    return q;
}

}  // namespace

const char* sex_label(int code) {
    switch (code) {
        case 0: return "male";
        case 1: return "female";
        case 2: return "other";
    }
    return "unknown";
}

const char* age_label(int code) {
    static const char* kLabels[] = {"18-29", "30-39", "40-49", "50-59", "60-69", "70-79", "80+"};
    if (code < 0 || code > 6) return "unknown";
    return kLabels[code];
}

UserDirectory load_user_directory(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir.string());
    const fs::path demo = dir / kDemographicsFile;
    if (!fs::exists(demo)) {
        throw DatasetError("missing " + std::string(kDemographicsFile) + " in " + dir.string());
    }

    UserDirectory out;
    out.directory_name = dir.filename().string();
    out.user = records::parse_user(read_json_file(demo));
    if (!records::is_uuid_v4(out.directory_name)) {
        out.warnings.push_back({"directory", "uuid",
                                "user directory name '" + out.directory_name +
                                    "' is not a v4 UUID",
                                Severity::warning});
    }

    for (const std::string& name : sorted_entries(dir)) {
        const fs::path entry = dir / name;
        if (fs::is_directory(entry)) {
            if (!records::is_uuid_v4(name)) {
                out.warnings.push_back({"directory", "uuid",
                                        "submission directory name '" + name +
                                            "' is not a v4 UUID",
                                        Severity::warning});
            }
            out.submissions.push_back(load_submission(entry));
        } else if (name != kDemographicsFile) {
            out.warnings.push_back({"file", "unknown_key",
                                    "unrecognized file '" + name + "' in " + dir.string(),
                                    Severity::warning});
        }
    }
    return out;
}

DatasetIndex scan_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw DatasetError("dataset root missing: " + root.string());

    DatasetIndex index;
    for (const std::string& name : sorted_entries(root)) {
        const fs::path entry = root / name;
        if (!fs::is_directory(entry)) {
            index.unknown_files.push_back(name);
            continue;
        }
        UserDirectory user_dir;
        try {
            user_dir = load_user_directory(entry);
        } catch (const DatasetError& e) {
            index.unreadable_entries += 1;
            index.warnings.push_back({"directory", "parse", e.what(), Severity::warning});
            continue;
        }

        index.user_count += 1;
        UserDigest ud;
        ud.directory = user_dir.directory_name;
        ud.sex = user_dir.user.sex;
        ud.age_category = user_dir.user.age_category;
        for (const auto& [cond, flag] : user_dir.user.conditions) {
            if (flag) ud.conditions.push_back(cond);
        }
        index.users.push_back(ud);
        for (const records::Violation& w : user_dir.warnings) index.warnings.push_back(w);

        for (const SubmissionEntry& sub : user_dir.submissions) {
            index.submission_count += 1;
            SubmissionDigest sd;
            sd.user_directory = user_dir.directory_name;
            sd.directory = sub.directory_name;
            sd.files_present = sub.files_present;
            sd.user_sex = user_dir.user.sex;
            sd.user_age = user_dir.user.age_category;
            if (sub.questionnaire) {
                const records::SubmissionRecord& q = *sub.questionnaire;
                sd.covid_status = q.covid_status;
                sd.vaccination_status = q.vaccination_status;
                sd.anxiety = q.anxiety;
                for (const auto& [symptom, flag] : q.symptoms) {
                    if (flag) sd.symptoms.push_back(symptom);
                }
                sd.oxygen_saturation = q.oxygen_saturation;
                sd.pcr_test = q.pcr_test.value_or(false);
                sd.rapid_test = q.rapid_test.value_or(false);
                sd.self_test = q.self_test.value_or(false);
            }
            for (const std::string& f : sub.files_present) index.file_presence[f] += 1;
            for (const std::string& f : sub.unknown_files) {
                index.unknown_files.push_back(user_dir.directory_name + "/" +
                                              sub.directory_name + "/" + f);
            }
            index.submissions.push_back(std::move(sd));
        }
    }
    return index;
}

SummaryStats summary_stats(const DatasetIndex& index) {
    if (index.user_count == 0) throw DatasetError("empty dataset index");

    SummaryStats stats;

    std::map<std::string, long> sex_counts, age_counts;
    long sex_total = 0, age_total = 0;
    std::map<std::string, long> condition_counts;
    for (const UserDigest& u : index.users) {
        if (u.sex) {
            sex_counts[sex_label(*u.sex)] += 1;
            ++sex_total;
        }
        if (u.age_category) {
            age_counts[age_label(*u.age_category)] += 1;
            ++age_total;
        }
        for (const std::string& cond : u.conditions) condition_counts[cond] += 1;
    }
    for (const auto& [k, v] : sex_counts) stats.sex_proportion[k] = proportion(v, sex_total);
    for (const auto& [k, v] : age_counts) stats.age_proportion[k] = proportion(v, age_total);
    for (const auto& [k, v] : condition_counts) {
        stats.condition_prevalence[k] = proportion(v, index.user_count);
    }

    std::map<std::string, long> status_counts;
    long status_total = 0, tested = 0;
    long pcr = 0, rapid = 0, self = 0;
    std::map<std::string, std::map<std::string, long>> symptom_vacc;
    std::map<std::string, long> vacc_totals;
    std::map<std::string, std::map<std::string, long>> anxiety_vacc;
    std::map<std::string, long> anxiety_vacc_totals;
    std::map<std::string, std::vector<double>> oxy_by_age;

    for (const SubmissionDigest& s : index.submissions) {
        if (s.covid_status) {
            status_counts[*s.covid_status] += 1;
            ++status_total;
            if (*s.covid_status == "positive" || *s.covid_status == "negative") ++tested;
        }
        if (s.pcr_test) ++pcr;
        if (s.rapid_test) ++rapid;
        if (s.self_test) ++self;
        if (s.vaccination_status) {
            vacc_totals[*s.vaccination_status] += 1;
            for (const std::string& symptom : s.symptoms) {
                symptom_vacc[*s.vaccination_status][symptom] += 1;
            }
            if (s.anxiety) {
                anxiety_vacc[*s.vaccination_status][*s.anxiety] += 1;
                anxiety_vacc_totals[*s.vaccination_status] += 1;
            }
        }
        if (s.oxygen_saturation && s.user_age) {
            oxy_by_age[age_label(*s.user_age)].push_back(double(*s.oxygen_saturation));
        }
    }

    for (const auto& [k, v] : status_counts) {
        stats.covid_status_proportion[k] = proportion(v, status_total);
    }
    stats.tested_share = proportion(tested, index.submission_count);
    if (tested > 0) {
        stats.test_type_share["pcr_test"] = proportion(pcr, tested);
        stats.test_type_share["rapid_test"] = proportion(rapid, tested);
        stats.test_type_share["self_test"] = proportion(self, tested);
    }
    for (const auto& [vacc, symptoms] : symptom_vacc) {
        for (const auto& [symptom, count] : symptoms) {
            stats.symptom_by_vaccination[vacc][symptom] = proportion(count, vacc_totals[vacc]);
        }
    }
    for (const auto& [vacc, levels] : anxiety_vacc) {
        for (const auto& [level, count] : levels) {
            stats.anxiety_by_vaccination[vacc][level] =
                proportion(count, anxiety_vacc_totals[vacc]);
        }
    }
    for (const auto& [age, values] : oxy_by_age) {
        stats.oxygen_saturation_by_age[age] = quartiles_of(values);
    }
    return stats;
}

json to_json(const DatasetIndex& index) {
    json j;
    j["user_count"] = index.user_count;
    j["submission_count"] = index.submission_count;
    j["unreadable_entries"] = index.unreadable_entries;
    j["file_presence"] = index.file_presence;
    j["unknown_files"] = index.unknown_files;
    json warnings = json::array();
    for (const records::Violation& w : index.warnings) {
        warnings.push_back({{"field", w.field},
                            {"code", w.code},
                            {"message", w.message},
                            {"severity", w.severity == Severity::error ? "error" : "warning"}});
    }
    j["warnings"] = warnings;
    json subs = json::array();
    for (const SubmissionDigest& s : index.submissions) {
        subs.push_back({{"user", s.user_directory},
                        {"submission", s.directory},
                        {"files", s.files_present}});
    }
    j["submissions"] = subs;
    return j;
}

json to_json(const SummaryStats& stats) {
    json j;
    j["sex_proportion"] = stats.sex_proportion;
    j["age_proportion"] = stats.age_proportion;
    j["covid_status_proportion"] = stats.covid_status_proportion;
    j["tested_share"] = stats.tested_share;
    j["test_type_share"] = stats.test_type_share;
    j["condition_prevalence"] = stats.condition_prevalence;
    j["symptom_by_vaccination"] = stats.symptom_by_vaccination;
    j["anxiety_by_vaccination"] = stats.anxiety_by_vaccination;
    json oxy;
    for (const auto& [age, q] : stats.oxygen_saturation_by_age) {
        oxy[age] = {{"n", q.n}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
    }
    j["oxygen_saturation_by_age"] = oxy;
    return j;
}

}  // namespace s4c::dataset
