#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace s4c::records {

enum class Severity { error, warning };

struct Violation {
    std::string field;
    std::string code;  // "range", "enum", "format", "type", "unknown_key", "uuid", "parse"
    std::string message;
    Severity severity = Severity::error;
};

struct ValidationReport {
    std::string participant_id;
    std::string submission_id;
    std::string file;
    std::vector<Violation> violations;

    bool conforms() const;     // no violations at all
    int error_count() const;   // severity == error
    void add(const std::string& field, const std::string& code, const std::string& message,
             Severity severity = Severity::error);
};

bool is_uuid_v4(const std::string& s);
bool is_iso_date(const std::string& s);  // strict yyyy-mm-dd

// Demographics and underlying-conditions record. Raw values are kept as
// parsed so validation can report out-of-domain codes; unknown keys land in
// extras and surface as warnings.
struct UserRecord {
    std::optional<std::string> participant_id;
    std::optional<int> sex;           // 0 male, 1 female, 2 other
    std::optional<int> age_category;  // 0..6 for 18-29 .. 80+
    std::optional<double> bmi;
    std::map<std::string, bool> conditions;  // the 15 underlying-condition flags
    std::optional<std::string> registration_timestamp;
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

// Main questionnaire record.
struct SubmissionRecord {
    std::optional<std::string> participant_id;
    std::optional<std::string> submission_id;
    std::optional<std::string> covid_status;  // positive / negative / no
    std::optional<bool> pcr_test, rapid_test, self_test, test_last_3_days;
    std::optional<std::string> last_negative_test_date, first_positive_test_date;
    std::optional<std::string> vaccination_status;  // no/partially/fully/booster1/booster2
    std::optional<std::string> latest_vaccination_date;
    std::optional<std::string> hospitalization;  // "0".."3"
    std::optional<std::string> exposure;         // No / Maybe / Yes
    std::optional<std::string> travelled_abroad;  // "0" / "1"
    std::map<std::string, bool> symptoms;          // the 16 symptom flags
    std::optional<bool> oxymeter;
    std::optional<int> oxygen_saturation;  // [60, 99]
    std::optional<int> bpm;                // [30, 250]
    std::optional<bool> blood_pressure_meter;
    std::optional<int> systolic_pressure, diastolic_pressure;  // [30, 260]
    std::optional<int> breath_holding;                         // >= 0
    std::map<std::string, bool> difficulties;  // the 6 difficulty flags
    std::optional<std::string> smoking;        // nev / ex / yes
    std::optional<int> years_of_quitting_smoking, years_of_smoking;
    std::optional<std::string> no_cigarettes;  // 1u / 10u / 20u / 20o
    std::optional<std::string> vaping;         // "0" / "1"
    std::optional<std::string> anxiety;        // "0".."4"
    std::optional<std::string> working;        // home/hospital/store/social/no
    std::optional<std::string> submission_timestamp;
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct BreathingFeaturesRecord {
    std::optional<double> rr, i_e_ratio, fit;
    std::vector<std::pair<double, double>> annotated_inhalation;
    std::vector<std::pair<double, double>> annotated_exhalation;
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct ExpertBreath {
    std::optional<std::string> breath_depth;
    std::map<std::string, bool> abnormalities;  // 11 flags
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct ExpertCough {
    std::optional<std::string> sex_impression;
    std::optional<std::string> patient_has;
    std::optional<std::string> cough_is;
    std::map<std::string, bool> cough_types;     // 7 flags
    std::map<std::string, bool> abnormalities;   // 6 flags
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct ExpertVoice {
    std::optional<std::string> completion, hoarseness, volume;
    std::map<std::string, bool> abnormalities;  // 6 flags
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct ExpertAdvice {
    std::optional<std::string> advice;
    std::optional<int> confidence;  // [1, 10]
    nlohmann::json extras = nlohmann::json::object();
    std::vector<Violation> type_issues;
};

struct ExpertAnnotations {
    std::optional<ExpertBreath> breath;
    std::optional<ExpertCough> cough;
    std::optional<ExpertVoice> voice;
    std::optional<ExpertAdvice> medical_advice;
};

// Schema vocabularies, exposed for the knowledge-base mapping and tests.
const std::vector<std::string>& condition_fields();   // 15
const std::vector<std::string>& symptom_fields();     // 16
const std::vector<std::string>& difficulty_fields();  // 6
const std::vector<std::string>& breath_abnormality_fields();  // 11
const std::vector<std::string>& cough_type_fields();          // 7
const std::vector<std::string>& cough_abnormality_fields();   // 6
const std::vector<std::string>& voice_abnormality_fields();   // 6

UserRecord parse_user(const nlohmann::json& j);
SubmissionRecord parse_submission(const nlohmann::json& j);
BreathingFeaturesRecord parse_breathing_features(const nlohmann::json& j);
ExpertBreath parse_expert_breath(const nlohmann::json& j);
ExpertCough parse_expert_cough(const nlohmann::json& j);
ExpertVoice parse_expert_voice(const nlohmann::json& j);
ExpertAdvice parse_expert_advice(const nlohmann::json& j);

nlohmann::json to_json(const UserRecord& r);
nlohmann::json to_json(const SubmissionRecord& r);
nlohmann::json to_json(const BreathingFeaturesRecord& r);

// Domain validation. A conforming record gives an empty report; every field
// outside its schema domain contributes exactly one violation. Pure.
ValidationReport validate_user(const UserRecord& r);
ValidationReport validate_submission(const SubmissionRecord& r);
ValidationReport validate_breathing_features(const BreathingFeaturesRecord& r);
ValidationReport validate_experts(const ExpertAnnotations& e);

nlohmann::json to_json(const ValidationReport& r);

}  // namespace s4c::records
