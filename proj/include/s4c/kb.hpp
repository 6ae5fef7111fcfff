#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "s4c/dataset.hpp"

namespace s4c::kb {

class KbError : public std::runtime_error {
public:
    explicit KbError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mutually disjoint name sets.
struct Vocabulary {
    std::set<std::string> concepts;
    std::set<std::string> roles;
    std::set<std::string> individuals;
};

// Terminology: inclusion axioms plus role typing. Concept and role graphs are
// acyclic (checked on construction).
struct TBox {
    std::set<std::pair<std::string, std::string>> concept_subs;  // (C, D) meaning C is-a D
    std::set<std::pair<std::string, std::string>> role_subs;     // (r, s)
    std::map<std::string, std::string> role_domain;
    std::map<std::string, std::string> role_range;
};

// Assertions over individuals.
struct ABox {
    std::set<std::pair<std::string, std::string>> concept_assertions;  // (C, a)
    std::set<std::tuple<std::string, std::string, std::string>> role_assertions;  // (r, a, b)

    std::size_t size() const { return concept_assertions.size() + role_assertions.size(); }
};

struct KnowledgeBase {
    std::string prefix = "urn:s4c:";
    Vocabulary vocab;
    TBox tbox;
    ABox abox;
};

// The terminology shipped with the toolkit: audio, characterization,
// condition, symptom, user, questionnaire and test hierarchies plus the role
// set. Backed by the reviewable data/kb_hierarchy.json mapping file.
KnowledgeBase build_tbox(const std::string& prefix = "urn:s4c:");

// Reflexive-transitive subsumers of a concept or role; unknown names throw.
std::set<std::string> subsumers(const KnowledgeBase& kb, const std::string& concept_name);
std::set<std::string> role_subsumers(const KnowledgeBase& kb, const std::string& role);

// Adds one individual per participant, questionnaire, audio file, test,
// symptom, condition and characterization, linked through the declared roles,
// with concept assertions driven by the record values. Unmapped enum values
// throw KbError naming the field.
void assert_records(KnowledgeBase& kb, const dataset::UserDirectory& user_dir);

// One triple per line "<s> <p> <o> .", UTF-8, LF, lexicographically sorted.
std::string to_ntriples(const KnowledgeBase& kb);
std::string tbox_ntriples(const KnowledgeBase& kb);
std::string abox_ntriples(const KnowledgeBase& kb);
void emit_ntriples(const KnowledgeBase& kb, const std::filesystem::path& path);

// Inverse of emit_ntriples for KBs using the same IRI prefix; malformed lines
// raise KbError with the line number.
KnowledgeBase parse_ntriples_text(const std::string& text, const std::string& prefix = "urn:s4c:");
KnowledgeBase parse_ntriples(const std::filesystem::path& path,
                             const std::string& prefix = "urn:s4c:");

// Conjunctive instance query: all listed concepts must subsume an asserted
// type, and every (role, inner) constraint needs a successor (via the role or
// any subrole) satisfying the inner query.
struct ConceptQuery {
    std::vector<std::string> concepts;
    std::vector<std::pair<std::string, ConceptQuery>> successors;
};

std::set<std::string> query_instances(const KnowledgeBase& kb, const ConceptQuery& query);

// Schema-value -> concept mapping tables loaded from the hierarchy data file;
// exposed for the counterfactual pipeline and tests.
const std::map<std::string, std::string>& mapping_table(const std::string& table);

}  // namespace s4c::kb
