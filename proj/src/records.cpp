#include "s4c/records.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace s4c::records {

namespace {

using nlohmann::json;

const std::vector<std::string> kConditions = {
    "asthma",         "respiratory_deficiency", "cystic_fibrosis",
    "pneum_other",    "coronary_disease",       "hypertension",
    "valve_disease",  "heart_attack",           "stroke",
    "cardiovascular_other", "diabetes",         "kidney_disease",
    "transplant",     "cancer",                 "immunosuppression_immunodeficiency"};

const std::vector<std::string> kSymptoms = {
    "sore_throat", "dry_cough",  "wet_cough",          "sputum",
    "runny_nose",  "breath_discomfort", "has_fever",   "tremble",
    "fatigue",     "headache",   "dizziness",          "myalgias_arthralgias",
    "taste_smell_loss", "diarrhea_upset_stomach", "sneezing", "dry_throat"};

const std::vector<std::string> kDifficulties = {"leave_bed",   "leave_home", "prepare_meal",
                                                "concentrate", "self_care",  "other_difficulty"};

const std::vector<std::string> kBreathAbnormalities = {
    "dyspnea_shortness_of_breath",
    "stridor",
    "inspiratory_stridor",
    "expiratory_stridor",
    "wheezing",
    "respiratory_crackles",
    "prolonged_expiration",
    "other_and_unspecified_abnormalities_of_breathing",
    "audible_choking",
    "audible_nasal_congestion",
    "no_audible_abnormalities"};

const std::vector<std::string> kCoughTypes = {"productive",    "dry",
                                              "barking_cough", "hacking_cough",
                                              "croupy_cough",  "other_specified_cough",
                                              "can't_tell"};

const std::vector<std::string> kCoughAbnormalities = {
    "audible_dyspnea", "audible_wheezing",        "audible_stridor",
    "audible_choking", "audible_nasal_congestion", "nothing_specific"};

const std::vector<std::string> kVoiceAbnormalities = {
    "audible_dyspnea", "audible_wheezing",        "audible_stridor",
    "audible_choking", "audible_nasal_congestion", "no_audible_abnormalities"};

// Typed field extraction that records a "type" violation instead of throwing
// and tracks which keys were recognized.
class FieldReader {
public:
    FieldReader(const json& j, std::vector<Violation>& issues) : j_(j), issues_(issues) {}

    std::optional<std::string> str(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            type_issue(key, "string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<int> integer(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number_integer() && !v->is_number_unsigned()) {
            type_issue(key, "integer");
            return std::nullopt;
        }
        return v->get<int>();
    }

    std::optional<double> number(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            type_issue(key, "number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<bool> boolean(const std::string& key) {
        const json* v = get(key);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) {
            type_issue(key, "boolean");
            return std::nullopt;
        }
        return v->get<bool>();
    }

    void flags(const std::vector<std::string>& keys, std::map<std::string, bool>& out) {
        for (const std::string& key : keys) {
            if (auto v = boolean(key)) out[key] = *v;
        }
    }

    const json* get(const std::string& key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        consumed_.insert(key);
        return &*it;
    }

    json leftovers() const {
        json extras = json::object();
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!consumed_.count(it.key())) extras[it.key()] = it.value();
        }
        return extras;
    }

private:
    void type_issue(const std::string& key, const char* expected) {
        issues_.push_back({key, "type", std::string("expected ") + expected, Severity::error});
    }

    const json& j_;
    std::vector<Violation>& issues_;
    std::set<std::string> consumed_;
};

void check_enum(ValidationReport& report, const std::string& field,
                const std::optional<std::string>& value, const std::set<std::string>& allowed) {
    if (!value || allowed.count(*value)) return;
    std::string expected;
    for (const std::string& a : allowed) {
        if (!expected.empty()) expected += ", ";
        expected += a;
    }
    report.add(field, "enum", "value '" + *value + "' not in {" + expected + "}");
}

void check_range(ValidationReport& report, const std::string& field,
                 const std::optional<int>& value, long lo, long hi) {
    if (!value || (*value >= lo && *value <= hi)) return;
    report.add(field, "range",
               "value " + std::to_string(*value) + " outside [" + std::to_string(lo) + ", " +
                   std::to_string(hi) + "]");
}

void check_min(ValidationReport& report, const std::string& field,
               const std::optional<int>& value, long lo) {
    if (!value || *value >= lo) return;
    report.add(field, "range", "value " + std::to_string(*value) + " below " + std::to_string(lo));
}

void check_date(ValidationReport& report, const std::string& field,
                const std::optional<std::string>& value) {
    if (!value || is_iso_date(*value)) return;
    report.add(field, "format", "'" + *value + "' is not yyyy-mm-dd");
}

void check_uuid(ValidationReport& report, const std::string& field,
                const std::optional<std::string>& value) {
    if (!value || is_uuid_v4(*value)) return;
    report.add(field, "uuid", "'" + *value + "' is not a v4 UUID");
}

void warn_extras(ValidationReport& report, const json& extras) {
    for (auto it = extras.begin(); it != extras.end(); ++it) {
        report.add(it.key(), "unknown_key", "unrecognized field preserved as-is",
                   Severity::warning);
    }
}

void put(json& j, const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
}
void put(json& j, const char* key, const std::optional<int>& v) {
    if (v) j[key] = *v;
}
void put(json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}
void put(json& j, const char* key, const std::optional<bool>& v) {
    if (v) j[key] = *v;
}
void put_flags(json& j, const std::map<std::string, bool>& flags) {
    for (const auto& [k, v] : flags) j[k] = v;
}
void put_extras(json& j, const json& extras) {
    for (auto it = extras.begin(); it != extras.end(); ++it) j[it.key()] = it.value();
}

}  // namespace

bool ValidationReport::conforms() const { return violations.empty(); }

int ValidationReport::error_count() const {
    int n = 0;
    for (const Violation& v : violations) {
        if (v.severity == Severity::error) ++n;
    }
    return n;
}

void ValidationReport::add(const std::string& field, const std::string& code,
                           const std::string& message, Severity severity) {
    violations.push_back({field, code, message, severity});
}

bool is_uuid_v4(const std::string& s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < 36; ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (s[i] != '-') return false;
        } else if (!std::isxdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    if (s[14] != '4') return false;
    const char variant = static_cast<char>(std::tolower(static_cast<unsigned char>(s[19])));
    return variant == '8' || variant == '9' || variant == 'a' || variant == 'b';
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

const std::vector<std::string>& condition_fields() { return kConditions; }
const std::vector<std::string>& symptom_fields() { return kSymptoms; }
const std::vector<std::string>& difficulty_fields() { return kDifficulties; }
const std::vector<std::string>& breath_abnormality_fields() { return kBreathAbnormalities; }
const std::vector<std::string>& cough_type_fields() { return kCoughTypes; }
const std::vector<std::string>& cough_abnormality_fields() { return kCoughAbnormalities; }
const std::vector<std::string>& voice_abnormality_fields() { return kVoiceAbnormalities; }

UserRecord parse_user(const json& j) {
    UserRecord r;
    FieldReader f(j, r.type_issues);
    r.participant_id = f.str("participantid");
    r.sex = f.integer("sex");
    r.age_category = f.integer("age_category");
    r.bmi = f.number("bmi");
    f.flags(kConditions, r.conditions);
    r.registration_timestamp = f.str("registration_timestamp");
    r.extras = f.leftovers();
    return r;
}

SubmissionRecord parse_submission(const json& j) {
    SubmissionRecord r;
    FieldReader f(j, r.type_issues);
    r.participant_id = f.str("participantid");
    r.submission_id = f.str("submissionid");
    r.covid_status = f.str("covid_status");
    r.pcr_test = f.boolean("pcr_test");
    r.rapid_test = f.boolean("rapid_test");
    r.self_test = f.boolean("self_test");
    r.test_last_3_days = f.boolean("test_last_3_days");
    r.last_negative_test_date = f.str("last_negative_test_date");
    r.first_positive_test_date = f.str("first_positive_test_date");
    r.vaccination_status = f.str("vaccination_status");
    r.latest_vaccination_date = f.str("latest_vaccination_date");
    r.hospitalization = f.str("hospitalization");
    r.exposure = f.str("exposure_to_someone_with_covid");
    r.travelled_abroad = f.str("travelled_abroad");
    f.flags(kSymptoms, r.symptoms);
    r.oxymeter = f.boolean("oxymeter");
    r.oxygen_saturation = f.integer("oxygenSaturation");
    r.bpm = f.integer("bpm");
    r.blood_pressure_meter = f.boolean("blood_pressure_meter");
    r.systolic_pressure = f.integer("systolic_pressure");
    r.diastolic_pressure = f.integer("diastolic_pressure");
    r.breath_holding = f.integer("breath_holding");
    f.flags(kDifficulties, r.difficulties);
    r.smoking = f.str("smoking");
    r.years_of_quitting_smoking = f.integer("years_of_quitting_smoking");
    r.years_of_smoking = f.integer("years_of_smoking");
    r.no_cigarettes = f.str("no_cigarettes");
    r.vaping = f.str("vaping");
    r.anxiety = f.str("anxiety");
    r.working = f.str("working");
    r.submission_timestamp = f.str("submission_timestamp");
    r.extras = f.leftovers();
    return r;
}

BreathingFeaturesRecord parse_breathing_features(const json& j) {
    BreathingFeaturesRecord r;
    FieldReader f(j, r.type_issues);
    r.rr = f.number("RR");
    r.i_e_ratio = f.number("I_E_ratio");
    r.fit = f.number("FIT");
    auto read_pairs = [&](const char* key, std::vector<std::pair<double, double>>& out) {
        const json* v = f.get(key);
        if (!v) return;
        if (!v->is_array()) {
            r.type_issues.push_back({key, "type", "expected list of (start, end)", Severity::error});
            return;
        }
        for (const json& item : *v) {
            if (item.is_array() && item.size() == 2 && item[0].is_number() && item[1].is_number()) {
                out.emplace_back(item[0].get<double>(), item[1].get<double>());
            } else {
                r.type_issues.push_back(
                    {key, "type", "expected (start, end) number pair", Severity::error});
            }
        }
    };
    read_pairs("annotated_inhalation", r.annotated_inhalation);
    read_pairs("annotated_exhalation", r.annotated_exhalation);
    r.extras = f.leftovers();
    return r;
}

ExpertBreath parse_expert_breath(const json& j) {
    ExpertBreath r;
    FieldReader f(j, r.type_issues);
    r.breath_depth = f.str("breath_depth");
    f.flags(kBreathAbnormalities, r.abnormalities);
    r.extras = f.leftovers();
    return r;
}

ExpertCough parse_expert_cough(const json& j) {
    ExpertCough r;
    FieldReader f(j, r.type_issues);
    r.sex_impression = f.str("sex");
    r.patient_has = f.str("patient_has");
    r.cough_is = f.str("cough_is");
    f.flags(kCoughTypes, r.cough_types);
    f.flags(kCoughAbnormalities, r.abnormalities);
    r.extras = f.leftovers();
    return r;
}

ExpertVoice parse_expert_voice(const json& j) {
    ExpertVoice r;
    FieldReader f(j, r.type_issues);
    r.completion = f.str("completion");
    r.hoarseness = f.str("hoarseness");
    r.volume = f.str("volume");
    f.flags(kVoiceAbnormalities, r.abnormalities);
    r.extras = f.leftovers();
    return r;
}

ExpertAdvice parse_expert_advice(const json& j) {
    ExpertAdvice r;
    FieldReader f(j, r.type_issues);
    r.advice = f.str("advice");
    r.confidence = f.integer("confidence");
    r.extras = f.leftovers();
    return r;
}

json to_json(const UserRecord& r) {
    json j = json::object();
    put(j, "participantid", r.participant_id);
    put(j, "sex", r.sex);
    put(j, "age_category", r.age_category);
    put(j, "bmi", r.bmi);
    put_flags(j, r.conditions);
    put(j, "registration_timestamp", r.registration_timestamp);
    put_extras(j, r.extras);
    return j;
}

json to_json(const SubmissionRecord& r) {
    json j = json::object();
    put(j, "participantid", r.participant_id);
    put(j, "submissionid", r.submission_id);
    put(j, "covid_status", r.covid_status);
    put(j, "pcr_test", r.pcr_test);
    put(j, "rapid_test", r.rapid_test);
    put(j, "self_test", r.self_test);
    put(j, "test_last_3_days", r.test_last_3_days);
    put(j, "last_negative_test_date", r.last_negative_test_date);
    put(j, "first_positive_test_date", r.first_positive_test_date);
    put(j, "vaccination_status", r.vaccination_status);
    put(j, "latest_vaccination_date", r.latest_vaccination_date);
    put(j, "hospitalization", r.hospitalization);
    put(j, "exposure_to_someone_with_covid", r.exposure);
    put(j, "travelled_abroad", r.travelled_abroad);
    put_flags(j, r.symptoms);
    put(j, "oxymeter", r.oxymeter);
    put(j, "oxygenSaturation", r.oxygen_saturation);
    put(j, "bpm", r.bpm);
    put(j, "blood_pressure_meter", r.blood_pressure_meter);
    put(j, "systolic_pressure", r.systolic_pressure);
    put(j, "diastolic_pressure", r.diastolic_pressure);
    put(j, "breath_holding", r.breath_holding);
    put_flags(j, r.difficulties);
    put(j, "smoking", r.smoking);
    put(j, "years_of_quitting_smoking", r.years_of_quitting_smoking);
    put(j, "years_of_smoking", r.years_of_smoking);
    put(j, "no_cigarettes", r.no_cigarettes);
    put(j, "vaping", r.vaping);
    put(j, "anxiety", r.anxiety);
    put(j, "working", r.working);
    put(j, "submission_timestamp", r.submission_timestamp);
    put_extras(j, r.extras);
    return j;
}

json to_json(const BreathingFeaturesRecord& r) {
    json j = json::object();
    put(j, "RR", r.rr);
    put(j, "I_E_ratio", r.i_e_ratio);
    put(j, "FIT", r.fit);
    auto pairs = [](const std::vector<std::pair<double, double>>& v) {
        json arr = json::array();
        for (const auto& [a, b] : v) arr.push_back(json::array({a, b}));
        return arr;
    };
    j["annotated_inhalation"] = pairs(r.annotated_inhalation);
    j["annotated_exhalation"] = pairs(r.annotated_exhalation);
    put_extras(j, r.extras);
    return j;
}

ValidationReport validate_user(const UserRecord& r) {
    ValidationReport report;
    report.participant_id = r.participant_id.value_or("");
    report.file = "demographics_underlying_conditions.json";
    for (const Violation& v : r.type_issues) report.violations.push_back(v);

    check_uuid(report, "participantid", r.participant_id);
    if (r.sex && (*r.sex < 0 || *r.sex > 2)) {
        report.add("sex", "enum", "value " + std::to_string(*r.sex) + " not in {0, 1, 2}");
    }
    if (r.age_category && (*r.age_category < 0 || *r.age_category > 6)) {
        report.add("age_category", "enum",
                   "value " + std::to_string(*r.age_category) + " not in 0..6");
    }
    if (r.bmi && *r.bmi < 0.0) {
        report.add("bmi", "range", "bmi must be non-negative");
    }
    warn_extras(report, r.extras);
    return report;
}

ValidationReport validate_submission(const SubmissionRecord& r) {
    ValidationReport report;
    report.participant_id = r.participant_id.value_or("");
    report.submission_id = r.submission_id.value_or("");
    report.file = "main_questionnaire.json";
    for (const Violation& v : r.type_issues) report.violations.push_back(v);

    check_uuid(report, "participantid", r.participant_id);
    check_uuid(report, "submissionid", r.submission_id);
    check_enum(report, "covid_status", r.covid_status, {"positive", "negative", "no"});
    check_date(report, "last_negative_test_date", r.last_negative_test_date);
    check_date(report, "first_positive_test_date", r.first_positive_test_date);
    check_enum(report, "vaccination_status", r.vaccination_status,
               {"no", "partially", "fully", "booster1", "booster2"});
    check_date(report, "latest_vaccination_date", r.latest_vaccination_date);
    check_enum(report, "hospitalization", r.hospitalization, {"0", "1", "2", "3"});
    check_enum(report, "exposure_to_someone_with_covid", r.exposure, {"No", "Maybe", "Yes"});
    check_enum(report, "travelled_abroad", r.travelled_abroad, {"0", "1"});
    check_range(report, "oxygenSaturation", r.oxygen_saturation, 60, 99);
    check_range(report, "bpm", r.bpm, 30, 250);
    check_range(report, "systolic_pressure", r.systolic_pressure, 30, 260);
    check_range(report, "diastolic_pressure", r.diastolic_pressure, 30, 260);
    check_min(report, "breath_holding", r.breath_holding, 0);
    check_enum(report, "smoking", r.smoking, {"nev", "ex", "yes"});
    check_min(report, "years_of_quitting_smoking", r.years_of_quitting_smoking, 0);
    check_min(report, "years_of_smoking", r.years_of_smoking, 0);
    check_enum(report, "no_cigarettes", r.no_cigarettes, {"1u", "10u", "20u", "20o"});
    check_enum(report, "vaping", r.vaping, {"0", "1"});
    check_enum(report, "anxiety", r.anxiety, {"0", "1", "2", "3", "4"});
    check_enum(report, "working", r.working, {"home", "hospital", "store", "social", "no"});
    warn_extras(report, r.extras);
    return report;
}

ValidationReport validate_breathing_features(const BreathingFeaturesRecord& r) {
    ValidationReport report;
    report.file = "breathing_features.json";
    for (const Violation& v : r.type_issues) report.violations.push_back(v);

    auto check_value = [&](const char* field, const std::optional<double>& v) {
        if (v && *v < 0.0) report.add(field, "range", "must be non-negative");
    };
    check_value("RR", r.rr);
    check_value("I_E_ratio", r.i_e_ratio);
    check_value("FIT", r.fit);

    auto check_pairs = [&](const char* field, const std::vector<std::pair<double, double>>& v) {
        for (const auto& [start, end] : v) {
            if (start < 0.0 || end < 0.0) {
                report.add(field, "range", "times must be non-negative");
            } else if (start >= end) {
                report.add(field, "range", "start must precede end");
            }
        }
    };
    check_pairs("annotated_inhalation", r.annotated_inhalation);
    check_pairs("annotated_exhalation", r.annotated_exhalation);
    warn_extras(report, r.extras);
    return report;
}

ValidationReport validate_experts(const ExpertAnnotations& e) {
    ValidationReport report;
    report.file = "experts.*.json";
    if (e.breath) {
        for (const Violation& v : e.breath->type_issues) report.violations.push_back(v);
        check_enum(report, "breath_depth", e.breath->breath_depth,
                   {"Can breathe deeply enough", "Cannot breathe deeply enough"});
        warn_extras(report, e.breath->extras);
    }
    if (e.cough) {
        for (const Violation& v : e.cough->type_issues) report.violations.push_back(v);
        check_enum(report, "sex", e.cough->sex_impression, {"Male", "Female", "Can't tell"});
        check_enum(report, "patient_has", e.cough->patient_has,
                   {"An upper respiratory tract infection", "A lower respiratory tract infection",
                    "Obstructive lung disease (Asthma, COPD, ...)", "Nothing (healthy cough)"});
        check_enum(report, "cough_is", e.cough->cough_is,
                   {"Pseudo cough/Healthy cough", "Mild (from a sick person)",
                    "Severe (from a sick person)", "Can't tell"});
        warn_extras(report, e.cough->extras);
    }
    if (e.voice) {
        for (const Violation& v : e.voice->type_issues) report.violations.push_back(v);
        check_enum(report, "completion", e.voice->completion, {"Yes", "No"});
        check_enum(report, "hoarseness", e.voice->hoarseness, {"Yes", "No"});
        check_enum(report, "volume", e.voice->volume, {"Low (whisper)", "Normal"});
        warn_extras(report, e.voice->extras);
    }
    if (e.medical_advice) {
        for (const Violation& v : e.medical_advice->type_issues) report.violations.push_back(v);
        check_enum(report, "advice", e.medical_advice->advice,
                   {"Seek for medical advice", "Repeat the Smarty4Covid test in 24 hours",
                    "In case you notice changes in your health status, repeat the Smarty4Covid "
                    "test"});
        check_range(report, "confidence", e.medical_advice->confidence, 1, 10);
        warn_extras(report, e.medical_advice->extras);
    }
    return report;
}

json to_json(const ValidationReport& r) {
    json j = json::object();
    if (!r.participant_id.empty()) j["participantid"] = r.participant_id;
    if (!r.submission_id.empty()) j["submissionid"] = r.submission_id;
    if (!r.file.empty()) j["file"] = r.file;
    json arr = json::array();
    for (const Violation& v : r.violations) {
        arr.push_back({{"field", v.field},
                       {"code", v.code},
                       {"message", v.message},
                       {"severity", v.severity == Severity::error ? "error" : "warning"}});
    }
    j["violations"] = arr;
    return j;
}

}  // namespace s4c::records
