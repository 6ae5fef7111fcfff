#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "s4c/kb.hpp"

namespace s4c::counterfactual {

// A concept in a description, tagged with the role it was reached through so
// that, say, a symptom never matches a preexisting condition. Direct types
// carry an empty role.
struct TaggedConcept {
    std::string role;
    std::string concept_name;

    auto operator<=>(const TaggedConcept&) const = default;
};

struct IndividualDescription {
    std::string id;
    std::set<TaggedConcept> concepts;
    std::string predicted_class;  // "positive" / "negative"
};

enum class EditKind : int { add = 0, remove = 1, replace = 2 };
const char* edit_kind_name(EditKind kind);

struct Edit {
    EditKind kind = EditKind::add;
    std::string role;    // shared tag of source/target
    std::string source;  // remove/replace
    std::string target;  // add/replace
    double cost = 1.0;

    auto operator<=>(const Edit&) const = default;
};

struct EditDistanceResult {
    double cost = 0.0;
    std::vector<Edit> edits;  // deterministic order
};

// Minimum-cost edit sequence turning a's concept set into b's. Unmatched
// concepts cost 1 to remove or add; same-tagged pairs sharing an ancestor may
// be replaced at the normalized hierarchy path length, which undercuts
// remove+add for related concepts. The pairing is a minimum-cost assignment.
EditDistanceResult edit_distance(const IndividualDescription& a, const IndividualDescription& b,
                                 const kb::KnowledgeBase& tbox);

// Replacement cost between two concepts, or nullopt when replacement is not
// allowed (no common subsumer).
std::optional<double> replace_cost(const kb::KnowledgeBase& tbox, const std::string& from,
                                   const std::string& to);

struct CounterfactualResult {
    std::string source_id;
    std::string target_id;
    std::vector<Edit> edits;
    double total_cost = 0.0;
};

// Pool member minimizing the edit distance; ties break to the
// lexicographically smaller individual id. The pool must be non-empty.
CounterfactualResult nearest_counterfactual(const IndividualDescription& x,
                                            const std::vector<IndividualDescription>& pool,
                                            const kb::KnowledgeBase& tbox);

struct GlobalEditRow {
    EditKind kind;
    std::string role;
    std::string source;
    std::string target;
    long count = 0;
    double mean_cost = 0.0;
};

struct GlobalExplanation {
    std::vector<GlobalEditRow> rows;  // sorted by count descending
    long total_edits = 0;
};

// Edit frequency table over all per-individual results.
GlobalExplanation global_explanation(const std::vector<CounterfactualResult>& results);

// Flattens a user individual of the KB into a tagged description: direct
// types plus the types of role successors (transitively), each tagged with
// the role of the edge that reached them.
IndividualDescription extract_description(const kb::KnowledgeBase& kb, const std::string& user_id);

// Pluggable classifier over descriptions.
using DescriptionClassifier = std::function<std::string(const IndividualDescription&)>;

// Simple tabular stand-in classifier: "positive" when the description carries
// any of the listed concepts, else "negative".
DescriptionClassifier concept_rule_classifier(std::set<std::string> positive_markers);

}  // namespace s4c::counterfactual
