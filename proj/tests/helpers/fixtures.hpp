#pragma once

// Dataset-tree fixtures mirroring the published directory layout.

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace testutil {

namespace fs = std::filesystem;
using nlohmann::json;

inline const char* kUserId1 = "11111111-2222-4333-8444-555555555551";
inline const char* kUserId2 = "11111111-2222-4333-8444-555555555552";
inline const char* kUserId3 = "11111111-2222-4333-8444-555555555553";
inline const char* kSubId1 = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee1";
inline const char* kSubId2 = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee2";
inline const char* kSubId3 = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee3";
inline const char* kSubId4 = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee4";
inline const char* kSubId5 = "aaaaaaaa-bbbb-4ccc-8ddd-eeeeeeeeeee5";

inline void write_json_file(const fs::path& path, const json& j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2);
}

inline json demographics_json(const std::string& pid, int sex, int age, double bmi,
                              bool asthma = false) {
    json j;
    j["participantid"] = pid;
    j["sex"] = sex;
    j["age_category"] = age;
    j["bmi"] = bmi;
    j["asthma"] = asthma;
    j["hypertension"] = false;
    j["diabetes"] = false;
    j["registration_timestamp"] = "2022-01-15 10:00:00";
    return j;
}

inline json questionnaire_json(const std::string& pid, const std::string& sid,
                               const std::string& covid_status) {
    json j;
    j["participantid"] = pid;
    j["submissionid"] = sid;
    j["covid_status"] = covid_status;
    j["pcr_test"] = covid_status != "no";
    j["rapid_test"] = false;
    j["self_test"] = false;
    j["test_last_3_days"] = covid_status != "no";
    j["vaccination_status"] = "fully";
    j["hospitalization"] = "0";
    j["exposure_to_someone_with_covid"] = "No";
    j["travelled_abroad"] = "0";
    j["headache"] = true;
    j["has_fever"] = false;
    j["dry_cough"] = false;
    j["oxymeter"] = true;
    j["oxygenSaturation"] = 97;
    j["bpm"] = 72;
    j["smoking"] = "nev";
    j["anxiety"] = "1";
    j["working"] = "home";
    j["submission_timestamp"] = "2022-01-16 09:30:00";
    return j;
}

inline json breathing_features_json() {
    json j;
    j["RR"] = 17.5;
    j["I_E_ratio"] = 0.45;
    j["FIT"] = 0.31;
    j["annotated_inhalation"] = json::array({json::array({0.5, 1.4}), json::array({3.2, 4.0})});
    j["annotated_exhalation"] = json::array({json::array({1.6, 3.0}), json::array({4.2, 6.1})});
    return j;
}

// Three users, five submissions total (2 + 2 + 1).
inline void build_dataset_tree(const fs::path& root) {
    fs::create_directories(root);
    write_json_file(root / kUserId1 / "demographics_underlying_conditions.json",
                    demographics_json(kUserId1, 0, 1, 24.0));
    write_json_file(root / kUserId2 / "demographics_underlying_conditions.json",
                    demographics_json(kUserId2, 1, 0, 22.5, /*asthma=*/true));
    write_json_file(root / kUserId3 / "demographics_underlying_conditions.json",
                    demographics_json(kUserId3, 0, 3, 27.1));

    write_json_file(root / kUserId1 / kSubId1 / "main_questionnaire.json",
                    questionnaire_json(kUserId1, kSubId1, "positive"));
    write_json_file(root / kUserId1 / kSubId2 / "main_questionnaire.json",
                    questionnaire_json(kUserId1, kSubId2, "negative"));
    write_json_file(root / kUserId2 / kSubId3 / "main_questionnaire.json",
                    questionnaire_json(kUserId2, kSubId3, "negative"));
    write_json_file(root / kUserId2 / kSubId4 / "main_questionnaire.json",
                    questionnaire_json(kUserId2, kSubId4, "no"));
    write_json_file(root / kUserId3 / kSubId5 / "main_questionnaire.json",
                    questionnaire_json(kUserId3, kSubId5, "negative"));

    write_json_file(root / kUserId1 / kSubId1 / "breathing_features.json",
                    breathing_features_json());

    // Audio presence only; scanning never decodes.
    std::ofstream(root / kUserId1 / kSubId1 / "audio.cough.mp3").put('x');
    std::ofstream(root / kUserId2 / kSubId3 / "audio.breath_regular.mp3").put('x');
    std::ofstream(root / kUserId2 / kSubId3 / "audio.cough.mp3").put('x');
}

}  // namespace testutil
