#include "s4c/kb.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace s4c::kb {

const char* embedded_hierarchy_json();  // generated from data/kb_hierarchy.json

namespace {

using nlohmann::json;

const char* kTypeIri = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const char* kSubClassIri = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
const char* kSubPropertyIri = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
const char* kDomainIri = "http://www.w3.org/2000/01/rdf-schema#domain";
const char* kRangeIri = "http://www.w3.org/2000/01/rdf-schema#range";

struct HierarchyData {
    json root;
    std::map<std::string, std::map<std::string, std::string>> mappings;
};

void flatten_mappings(const json& node, const std::string& key_prefix,
                      std::map<std::string, std::string>& out) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = key_prefix.empty() ? it.key() : key_prefix + ":" + it.key();
        if (it.value().is_object()) {
            flatten_mappings(it.value(), key, out);
        } else {
            out[key] = it.value().get<std::string>();
        }
    }
}

const HierarchyData& hierarchy_data() {
    static const HierarchyData data = [] {
        HierarchyData d;
        d.root = json::parse(embedded_hierarchy_json());
        for (auto it = d.root["mappings"].begin(); it != d.root["mappings"].end(); ++it) {
            flatten_mappings(it.value(), "", d.mappings[it.key()]);
        }
        return d;
    }();
    return data;
}

// DFS cycle check over a child -> parents edge set.
void check_acyclic(const std::set<std::pair<std::string, std::string>>& edges,
                   const char* what) {
    std::map<std::string, std::vector<std::string>> up;
    std::set<std::string> nodes;
    for (const auto& [child, parent] : edges) {
        up[child].push_back(parent);
        nodes.insert(child);
        nodes.insert(parent);
    }
    std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
    std::vector<std::pair<std::string, std::size_t>> stack;
    for (const std::string& start : nodes) {
        if (state[start] != 0) continue;
        stack.emplace_back(start, 0);
        state[start] = 1;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            const auto& parents = up[node];
            if (next < parents.size()) {
                const std::string& parent = parents[next++];
                if (state[parent] == 1) {
                    throw KbError(std::string(what) + " hierarchy has a cycle through " + parent);
                }
                if (state[parent] == 0) {
                    state[parent] = 1;
                    stack.emplace_back(parent, 0);
                }
            } else {
                state[node] = 2;
                stack.pop_back();
            }
        }
    }
}

std::string iri(const KnowledgeBase& kb, const std::string& name) {
    return "<" + kb.prefix + name + ">";
}

void require_concept(const KnowledgeBase& kb, const std::string& name) {
    if (!kb.vocab.concepts.count(name)) throw KbError("unknown concept: " + name);
}

void require_role(const KnowledgeBase& kb, const std::string& name) {
    if (!kb.vocab.roles.count(name)) throw KbError("unknown role: " + name);
}

void assert_concept(KnowledgeBase& kb, const std::string& concept_name,
                    const std::string& individual) {
    require_concept(kb, concept_name);
    kb.vocab.individuals.insert(individual);
    kb.abox.concept_assertions.emplace(concept_name, individual);
}

void assert_role(KnowledgeBase& kb, const std::string& role, const std::string& a,
                 const std::string& b) {
    require_role(kb, role);
    kb.vocab.individuals.insert(a);
    kb.vocab.individuals.insert(b);
    kb.abox.role_assertions.emplace(role, a, b);
}

std::string mapped(const std::string& table, const std::string& field, const std::string& value) {
    const auto& m = mapping_table(table);
    auto it = m.find(value);
    if (it == m.end()) {
        throw KbError("field '" + field + "': unmapped value '" + value + "'");
    }
    return it->second;
}

// Reflexive-transitive closure over an is-a edge set.
std::set<std::string> closure(const std::set<std::pair<std::string, std::string>>& edges,
                              const std::string& start) {
    std::set<std::string> out{start};
    std::vector<std::string> frontier{start};
    while (!frontier.empty()) {
        const std::string node = frontier.back();
        frontier.pop_back();
        for (const auto& [child, parent] : edges) {
            if (child == node && !out.count(parent)) {
                out.insert(parent);
                frontier.push_back(parent);
            }
        }
    }
    return out;
}

bool valid_iri_body(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c == ' ' || c == '<' || c == '>' || c == '"' || c == '\t') return false;
    }
    return true;
}

std::string strip_prefix(const std::string& iri_body, const std::string& prefix) {
    if (iri_body.rfind(prefix, 0) == 0) return iri_body.substr(prefix.size());
    return iri_body;
}

}  // namespace

const std::map<std::string, std::string>& mapping_table(const std::string& table) {
    const auto& data = hierarchy_data();
    auto it = data.mappings.find(table);
    if (it == data.mappings.end()) throw KbError("unknown mapping table: " + table);
    return it->second;
}

KnowledgeBase build_tbox(const std::string& prefix) {
    const json& root = hierarchy_data().root;
    KnowledgeBase kb;
    kb.prefix = prefix;

    for (const json& c : root["concepts"]) {
        kb.vocab.concepts.insert(c["name"].get<std::string>());
    }
    for (const json& c : root["concepts"]) {
        const std::string name = c["name"].get<std::string>();
        if (!c.contains("parents")) continue;
        for (const json& parent : c["parents"]) {
            const std::string p = parent.get<std::string>();
            if (!kb.vocab.concepts.count(p)) throw KbError("undeclared parent concept: " + p);
            kb.tbox.concept_subs.emplace(name, p);
        }
    }

    for (const json& r : root["roles"]) {
        kb.vocab.roles.insert(r["name"].get<std::string>());
    }
    for (const json& r : root["roles"]) {
        const std::string name = r["name"].get<std::string>();
        if (r.contains("parents")) {
            for (const json& parent : r["parents"]) {
                const std::string p = parent.get<std::string>();
                if (!kb.vocab.roles.count(p)) throw KbError("undeclared parent role: " + p);
                kb.tbox.role_subs.emplace(name, p);
            }
        }
        const std::string domain = r["domain"].get<std::string>();
        const std::string range = r["range"].get<std::string>();
        if (!kb.vocab.concepts.count(domain)) throw KbError("undeclared domain: " + domain);
        if (!kb.vocab.concepts.count(range)) throw KbError("undeclared range: " + range);
        kb.tbox.role_domain[name] = domain;
        kb.tbox.role_range[name] = range;
    }

    for (const std::string& c : kb.vocab.concepts) {
        if (kb.vocab.roles.count(c)) throw KbError("name in both CN and RN: " + c);
    }
    check_acyclic(kb.tbox.concept_subs, "concept");
    check_acyclic(kb.tbox.role_subs, "role");
    return kb;
}

std::set<std::string> subsumers(const KnowledgeBase& kb, const std::string& concept_name) {
    require_concept(kb, concept_name);
    return closure(kb.tbox.concept_subs, concept_name);
}

std::set<std::string> role_subsumers(const KnowledgeBase& kb, const std::string& role) {
    require_role(kb, role);
    return closure(kb.tbox.role_subs, role);
}

void assert_records(KnowledgeBase& kb, const dataset::UserDirectory& user_dir) {
    const std::string pid = user_dir.user.participant_id.value_or(user_dir.directory_name);
    const std::string user = "user:" + pid;
    kb.vocab.individuals.insert(user);

    if (user_dir.user.sex) {
        assert_concept(kb, mapped("sex", "sex", std::to_string(*user_dir.user.sex)), user);
    }
    if (user_dir.user.age_category) {
        assert_concept(kb, mapped("age", "age_category", std::to_string(*user_dir.user.age_category)),
                       user);
    }
    for (const auto& [field, flag] : user_dir.user.conditions) {
        if (!flag) continue;
        const std::string individual = "condition:" + pid + ":" + field;
        assert_concept(kb, mapped("conditions", field, field), individual);
        assert_role(kb, "hasPreexistingCondition", user, individual);
    }

    for (const dataset::SubmissionEntry& sub : user_dir.submissions) {
        std::string sid = sub.directory_name;
        if (sub.questionnaire && sub.questionnaire->submission_id) {
            sid = *sub.questionnaire->submission_id;
        }
        const std::string quest = "questionnaire:" + sid;
        kb.vocab.individuals.insert(quest);
        assert_role(kb, "hasUserInstance", user, quest);

        if (sub.questionnaire) {
            const records::SubmissionRecord& q = *sub.questionnaire;
            if (q.smoking) assert_concept(kb, mapped("smoking", "smoking", *q.smoking), quest);
            if (q.vaccination_status) {
                assert_concept(
                    kb, mapped("vaccination", "vaccination_status", *q.vaccination_status), quest);
            }
            if (q.anxiety) assert_concept(kb, mapped("anxiety", "anxiety", *q.anxiety), quest);
            if (q.working) assert_concept(kb, mapped("working", "working", *q.working), quest);
            if (q.hospitalization) {
                assert_concept(kb, mapped("hospitalization", "hospitalization", *q.hospitalization),
                               quest);
            }

            if (q.covid_status && *q.covid_status != "no") {
                const std::string& outcome = *q.covid_status;
                if (outcome != "positive" && outcome != "negative") {
                    throw KbError("field 'covid_status': unmapped value '" + outcome + "'");
                }
                std::string type;
                if (q.pcr_test.value_or(false)) type = "pcr";
                else if (q.rapid_test.value_or(false)) type = "rapid";
                else if (q.self_test.value_or(false)) type = "self";
                const std::string test = "test:" + sid;
                if (!type.empty()) {
                    assert_concept(kb, mapped("tests", "covid_status", outcome + ":" + type), test);
                } else {
                    assert_concept(kb, outcome == "positive" ? "PositiveTest" : "NegativeTest",
                                   test);
                }
                assert_role(kb, "hasCovidTest", quest, test);
            }

            for (const auto& [field, flag] : q.symptoms) {
                if (!flag) continue;
                const std::string individual = "symptom:" + sid + ":" + field;
                assert_concept(kb, mapped("symptoms", field, field), individual);
                assert_role(kb, "hasSymptom", quest, individual);
            }
        }

        // Audio individuals exist when the file or expert labels for it do.
        auto audio_individual = [&](const char* kind) { return "audio:" + sid + ":" + kind; };
        auto link_audio = [&](const char* kind) {
            const std::string individual = audio_individual(kind);
            assert_role(kb, mapping_table("audio_roles").at(kind), quest, individual);
            return individual;
        };

        if (sub.audio.cough) link_audio("cough");
        if (sub.audio.breath_deep) link_audio("breath_deep");
        if (sub.audio.breath_regular) link_audio("breath_regular");

        auto characterize = [&](const std::string& audio, const std::string& source,
                                const std::string& key, const std::string& concept_name) {
            const std::string individual = "characterization:" + sid + ":" + source + ":" + key;
            assert_concept(kb, concept_name, individual);
            assert_role(kb, "hasCharacterization", audio, individual);
        };

        if (sub.experts.cough) {
            const records::ExpertCough& e = *sub.experts.cough;
            const std::string audio = link_audio("cough");  // set semantics dedupe
            for (const auto& [field, flag] : e.cough_types) {
                if (flag) characterize(audio, "cough", field, mapped("cough_types", field, field));
            }
            for (const auto& [field, flag] : e.abnormalities) {
                if (flag) {
                    characterize(audio, "cough", field, mapped("cough_abnormalities", field, field));
                }
            }
            if (e.patient_has) {
                characterize(audio, "cough", "patient_has",
                             mapped("patient_has", "patient_has", *e.patient_has));
            }
            // "Can't tell" is a legal answer that asserts nothing.
            if (e.cough_is && *e.cough_is != "Can't tell") {
                characterize(audio, "cough", "cough_is", mapped("cough_is", "cough_is", *e.cough_is));
            }
        }

        if (sub.experts.breath) {
            const records::ExpertBreath& e = *sub.experts.breath;
            // Breath labels attach to the deep-breathing recording when
            // present, otherwise to the regular one.
            const char* kind = sub.audio.breath_deep || !sub.audio.breath_regular
                                   ? "breath_deep"
                                   : "breath_regular";
            const std::string audio = link_audio(kind);
            for (const auto& [field, flag] : e.abnormalities) {
                if (flag) {
                    characterize(audio, "breath", field,
                                 mapped("breath_abnormalities", field, field));
                }
            }
            if (e.breath_depth) {
                characterize(audio, "breath", "breath_depth",
                             mapped("breath_depth", "breath_depth", *e.breath_depth));
            }
        }

        if (sub.experts.voice) {
            const records::ExpertVoice& e = *sub.experts.voice;
            // Voice recordings are not in the public dataset; labels still get
            // an audio individual linked through hasVoiceAudio.
            const std::string voice = audio_individual("voice");
            assert_role(kb, "hasVoiceAudio", quest, voice);
            for (const auto& [field, flag] : e.abnormalities) {
                if (flag) {
                    characterize(voice, "voice", field, mapped("voice_abnormalities", field, field));
                }
            }
            const auto& flags = mapping_table("voice_flags");
            if (e.completion && flags.count("completion:" + *e.completion)) {
                characterize(voice, "voice", "completion", flags.at("completion:" + *e.completion));
            }
            if (e.hoarseness && flags.count("hoarseness:" + *e.hoarseness)) {
                characterize(voice, "voice", "hoarseness", flags.at("hoarseness:" + *e.hoarseness));
            }
            if (e.volume && flags.count("volume:" + *e.volume)) {
                characterize(voice, "voice", "volume", flags.at("volume:" + *e.volume));
            }
        }
    }
}

std::string tbox_ntriples(const KnowledgeBase& kb) {
    std::vector<std::string> lines;
    for (const auto& [c, d] : kb.tbox.concept_subs) {
        lines.push_back(iri(kb, c) + " <" + kSubClassIri + "> " + iri(kb, d) + " .");
    }
    for (const auto& [r, s] : kb.tbox.role_subs) {
        lines.push_back(iri(kb, r) + " <" + kSubPropertyIri + "> " + iri(kb, s) + " .");
    }
    for (const auto& [r, c] : kb.tbox.role_domain) {
        lines.push_back(iri(kb, r) + " <" + kDomainIri + "> " + iri(kb, c) + " .");
    }
    for (const auto& [r, c] : kb.tbox.role_range) {
        lines.push_back(iri(kb, r) + " <" + kRangeIri + "> " + iri(kb, c) + " .");
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& line : lines) out += line + "\n";
    return out;
}

std::string abox_ntriples(const KnowledgeBase& kb) {
    std::vector<std::string> lines;
    for (const auto& [c, a] : kb.abox.concept_assertions) {
        lines.push_back(iri(kb, a) + " <" + kTypeIri + "> " + iri(kb, c) + " .");
    }
    for (const auto& [r, a, b] : kb.abox.role_assertions) {
        lines.push_back(iri(kb, a) + " " + iri(kb, r) + " " + iri(kb, b) + " .");
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& line : lines) out += line + "\n";
    return out;
}

std::string to_ntriples(const KnowledgeBase& kb) {
    std::vector<std::string> lines;
    std::istringstream both(tbox_ntriples(kb) + abox_ntriples(kb));
    std::string line;
    while (std::getline(both, line)) {
        if (!line.empty()) lines.push_back(line);
    }
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const std::string& l : lines) out += l + "\n";
    return out;
}

void emit_ntriples(const KnowledgeBase& kb, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw KbError("cannot write " + path.string());
    out << to_ntriples(kb);
}

KnowledgeBase parse_ntriples_text(const std::string& text, const std::string& prefix) {
    KnowledgeBase kb;
    kb.prefix = prefix;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t pos = 0;
        auto skip_ws = [&] {
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        };
        skip_ws();
        if (pos >= line.size() || line[pos] == '#') continue;

        auto fail = [&](const std::string& why) {
            throw KbError("line " + std::to_string(line_no) + ": " + why);
        };
        auto read_iri = [&]() -> std::string {
            skip_ws();
            if (pos >= line.size() || line[pos] != '<') fail("expected '<'");
            const std::size_t close = line.find('>', pos);
            if (close == std::string::npos) fail("unterminated IRI");
            const std::string body = line.substr(pos + 1, close - pos - 1);
            if (!valid_iri_body(body)) fail("invalid IRI: <" + body + ">");
            pos = close + 1;
            return body;
        };

        const std::string subject = read_iri();
        const std::string predicate = read_iri();
        const std::string object = read_iri();
        skip_ws();
        if (pos >= line.size() || line[pos] != '.') fail("missing terminal ' .'");
        ++pos;
        skip_ws();
        if (pos != line.size()) fail("trailing content after '.'");

        const std::string s = strip_prefix(subject, prefix);
        const std::string o = strip_prefix(object, prefix);
        if (predicate == kTypeIri) {
            kb.abox.concept_assertions.emplace(o, s);
            kb.vocab.concepts.insert(o);
            kb.vocab.individuals.insert(s);
        } else if (predicate == kSubClassIri) {
            kb.tbox.concept_subs.emplace(s, o);
            kb.vocab.concepts.insert(s);
            kb.vocab.concepts.insert(o);
        } else if (predicate == kSubPropertyIri) {
            kb.tbox.role_subs.emplace(s, o);
            kb.vocab.roles.insert(s);
            kb.vocab.roles.insert(o);
        } else if (predicate == kDomainIri) {
            kb.tbox.role_domain[s] = o;
            kb.vocab.roles.insert(s);
            kb.vocab.concepts.insert(o);
        } else if (predicate == kRangeIri) {
            kb.tbox.role_range[s] = o;
            kb.vocab.roles.insert(s);
            kb.vocab.concepts.insert(o);
        } else {
            const std::string r = strip_prefix(predicate, prefix);
            kb.abox.role_assertions.emplace(r, s, o);
            kb.vocab.roles.insert(r);
            kb.vocab.individuals.insert(s);
            kb.vocab.individuals.insert(o);
        }
    }
    check_acyclic(kb.tbox.concept_subs, "concept");
    check_acyclic(kb.tbox.role_subs, "role");
    return kb;
}

KnowledgeBase parse_ntriples(const std::filesystem::path& path, const std::string& prefix) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw KbError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_ntriples_text(buffer.str(), prefix);
}

namespace {

bool satisfies(const KnowledgeBase& kb, const std::string& individual, const ConceptQuery& query,
               const std::map<std::string, std::set<std::string>>& types_of,
               const std::map<std::string, std::vector<std::pair<std::string, std::string>>>&
                   successors_of) {
    for (const std::string& wanted : query.concepts) {
        require_concept(kb, wanted);
        bool found = false;
        auto it = types_of.find(individual);
        if (it != types_of.end()) {
            for (const std::string& asserted : it->second) {
                if (subsumers(kb, asserted).count(wanted)) {
                    found = true;
                    break;
                }
            }
        }
        if (!found) return false;
    }
    for (const auto& [role, inner] : query.successors) {
        require_role(kb, role);
        bool found = false;
        auto it = successors_of.find(individual);
        if (it != successors_of.end()) {
            for (const auto& [r, b] : it->second) {
                if (!kb.vocab.roles.count(r)) continue;
                if (role_subsumers(kb, r).count(role) &&
                    satisfies(kb, b, inner, types_of, successors_of)) {
                    found = true;
                    break;
                }
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

std::set<std::string> query_instances(const KnowledgeBase& kb, const ConceptQuery& query) {
    std::map<std::string, std::set<std::string>> types_of;
    for (const auto& [c, a] : kb.abox.concept_assertions) types_of[a].insert(c);
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> successors_of;
    for (const auto& [r, a, b] : kb.abox.role_assertions) successors_of[a].emplace_back(r, b);

    std::set<std::string> out;
    for (const std::string& individual : kb.vocab.individuals) {
        if (satisfies(kb, individual, query, types_of, successors_of)) out.insert(individual);
    }
    return out;
}

}  // namespace s4c::kb
