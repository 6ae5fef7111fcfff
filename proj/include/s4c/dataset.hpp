#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s4c/records.hpp"

namespace s4c::dataset {

struct AudioRefs {
    std::optional<std::filesystem::path> cough;
    std::optional<std::filesystem::path> breath_deep;
    std::optional<std::filesystem::path> breath_regular;
};

struct SubmissionEntry {
    std::string directory_name;  // submission id per the layout
    std::optional<records::SubmissionRecord> questionnaire;
    std::optional<records::BreathingFeaturesRecord> breathing_features;
    records::ExpertAnnotations experts;
    AudioRefs audio;
    std::vector<std::string> files_present;  // canonical recognized names
    std::vector<std::string> unknown_files;
};

struct UserDirectory {
    std::string directory_name;  // participant id per the layout
    records::UserRecord user;
    std::vector<SubmissionEntry> submissions;
    std::vector<records::Violation> warnings;  // non-UUID names, unknown files
};

class DatasetError : public std::runtime_error {
public:
    explicit DatasetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Loads one user directory of the published layout. Missing optional files
// yield absent fields; a missing or malformed demographics json throws
// DatasetError with a file locator.
UserDirectory load_user_directory(const std::filesystem::path& dir);

struct UserDigest {
    std::string directory;
    std::optional<int> sex, age_category;
    std::vector<std::string> conditions;  // flags that are true
};

struct SubmissionDigest {
    std::string user_directory, directory;
    std::vector<std::string> files_present;
    std::optional<int> user_sex, user_age;
    std::optional<std::string> covid_status, vaccination_status, anxiety;
    std::vector<std::string> symptoms;  // flags that are true
    std::optional<int> oxygen_saturation;
    bool pcr_test = false, rapid_test = false, self_test = false;
};

struct DatasetIndex {
    long user_count = 0;
    long submission_count = 0;
    std::vector<UserDigest> users;
    std::vector<SubmissionDigest> submissions;
    std::map<std::string, long> file_presence;  // canonical name -> count
    long unreadable_entries = 0;
    std::vector<std::string> unknown_files;  // paths relative to the root
    std::vector<records::Violation> warnings;
};

// Walks every user directory under root (sorted for determinism). Unreadable
// entries are tallied, never silently dropped. Throws DatasetError when the
// root itself is missing.
DatasetIndex scan_dataset(const std::filesystem::path& root);

struct Quartiles {
    long n = 0;
    double q1 = 0.0, median = 0.0, q3 = 0.0;
};

struct SummaryStats {
    std::map<std::string, double> sex_proportion;           // per user
    std::map<std::string, double> age_proportion;           // per user
    std::map<std::string, double> covid_status_proportion;  // per submission
    double tested_share = 0.0;  // submissions with a positive/negative result
    std::map<std::string, double> test_type_share;          // of tested submissions
    std::map<std::string, double> condition_prevalence;     // per user
    std::map<std::string, std::map<std::string, double>> symptom_by_vaccination;
    std::map<std::string, std::map<std::string, double>> anxiety_by_vaccination;
    std::map<std::string, Quartiles> oxygen_saturation_by_age;
};

// Proportions per the declared denominators: demographics and conditions per
// user, symptoms and tests per submission. Throws on an empty index.
SummaryStats summary_stats(const DatasetIndex& index);

nlohmann::json to_json(const DatasetIndex& index);
nlohmann::json to_json(const SummaryStats& stats);

const char* sex_label(int code);           // male / female / other
const char* age_label(int code);           // 18-29 .. 80+

}  // namespace s4c::dataset
