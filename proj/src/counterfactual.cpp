#include "s4c/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace s4c::counterfactual {

namespace {

constexpr double kBig = 1e9;

// Longest root distance in the concept hierarchy; at least 1.
int hierarchy_depth(const kb::KnowledgeBase& tbox) {
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& [child, parent] : tbox.tbox.concept_subs) parents[child].push_back(parent);

    std::map<std::string, int> memo;
    std::function<int(const std::string&)> depth = [&](const std::string& c) -> int {
        auto it = memo.find(c);
        if (it != memo.end()) return it->second;
        memo[c] = 0;  // settled before recursion; hierarchy is acyclic
        int best = 0;
        for (const std::string& p : parents[c]) best = std::max(best, 1 + depth(p));
        memo[c] = best;
        return best;
    };

    int h = 1;
    for (const std::string& c : tbox.vocab.concepts) h = std::max(h, depth(c));
    return h;
}

// Shortest undirected path between two concepts over subsumption edges.
std::optional<int> undirected_path(const kb::KnowledgeBase& tbox, const std::string& from,
                                   const std::string& to) {
    if (from == to) return 0;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& [child, parent] : tbox.tbox.concept_subs) {
        adj[child].push_back(parent);
        adj[parent].push_back(child);
    }
    std::map<std::string, int> dist{{from, 0}};
    std::deque<std::string> frontier{from};
    while (!frontier.empty()) {
        const std::string node = frontier.front();
        frontier.pop_front();
        for (const std::string& next : adj[node]) {
            if (dist.count(next)) continue;
            dist[next] = dist[node] + 1;
            if (next == to) return dist[next];
            frontier.push_back(next);
        }
    }
    return std::nullopt;
}

// Minimum-cost perfect assignment on a square matrix (potentials method).
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(std::size_t(n) + 1, 0.0), v(std::size_t(n) + 1, 0.0);
    std::vector<int> p(std::size_t(n) + 1, 0), way(std::size_t(n) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(std::size_t(n) + 1, kBig * 4);
        std::vector<char> used(std::size_t(n) + 1, 0);
        do {
            used[std::size_t(j0)] = 1;
            const int i0 = p[std::size_t(j0)];
            int j1 = -1;
            double delta = kBig * 4;
            for (int j = 1; j <= n; ++j) {
                if (used[std::size_t(j)]) continue;
                const double cur =
                    cost[std::size_t(i0) - 1][std::size_t(j) - 1] - u[std::size_t(i0)] -
                    v[std::size_t(j)];
                if (cur < minv[std::size_t(j)]) {
                    minv[std::size_t(j)] = cur;
                    way[std::size_t(j)] = j0;
                }
                if (minv[std::size_t(j)] < delta) {
                    delta = minv[std::size_t(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[std::size_t(j)]) {
                    u[std::size_t(p[std::size_t(j)])] += delta;
                    v[std::size_t(j)] -= delta;
                } else {
                    minv[std::size_t(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[std::size_t(j0)] != 0);
        do {
            const int j1 = way[std::size_t(j0)];
            p[std::size_t(j0)] = p[std::size_t(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(std::size_t(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[std::size_t(j)] > 0) row_to_col[std::size_t(p[std::size_t(j)]) - 1] = j - 1;
    }
    return row_to_col;
}

void require_resolvable(const kb::KnowledgeBase& tbox, const IndividualDescription& d) {
    for (const TaggedConcept& tc : d.concepts) {
        if (!tbox.vocab.concepts.count(tc.concept_name)) {
            throw kb::KbError("description '" + d.id + "' uses unknown concept: " + tc.concept_name);
        }
    }
}

}  // namespace

const char* edit_kind_name(EditKind kind) {
    switch (kind) {
        case EditKind::add: return "add";
        case EditKind::remove: return "remove";
        case EditKind::replace: return "replace";
    }
    return "?";
}

std::optional<double> replace_cost(const kb::KnowledgeBase& tbox, const std::string& from,
                                   const std::string& to) {
    const std::set<std::string> from_up = kb::subsumers(tbox, from);
    const std::set<std::string> to_up = kb::subsumers(tbox, to);
    const bool related = std::any_of(from_up.begin(), from_up.end(),
                                     [&](const std::string& c) { return to_up.count(c) > 0; });
    if (!related) return std::nullopt;
    const auto path = undirected_path(tbox, from, to);
    if (!path) return std::nullopt;
    const double h = double(hierarchy_depth(tbox));
    return std::clamp(double(*path) / (2.0 * h), 0.0, 2.0);
}

EditDistanceResult edit_distance(const IndividualDescription& a, const IndividualDescription& b,
                                 const kb::KnowledgeBase& tbox) {
    require_resolvable(tbox, a);
    require_resolvable(tbox, b);

    std::vector<TaggedConcept> only_a, only_b;
    std::set_difference(a.concepts.begin(), a.concepts.end(), b.concepts.begin(),
                        b.concepts.end(), std::back_inserter(only_a));
    std::set_difference(b.concepts.begin(), b.concepts.end(), a.concepts.begin(),
                        a.concepts.end(), std::back_inserter(only_b));

    const int na = static_cast<int>(only_a.size());
    const int nb = static_cast<int>(only_b.size());
    EditDistanceResult result;
    if (na == 0 && nb == 0) return result;

    const int m = na + nb;
    std::vector<std::vector<double>> cost(std::size_t(m), std::vector<double>(std::size_t(m), kBig));
    for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
            if (only_a[std::size_t(i)].role != only_b[std::size_t(j)].role) continue;
            if (auto rc = replace_cost(tbox, only_a[std::size_t(i)].concept_name,
                                       only_b[std::size_t(j)].concept_name)) {
                cost[std::size_t(i)][std::size_t(j)] = *rc;
            }
        }
        cost[std::size_t(i)][std::size_t(nb + i)] = 1.0;  // remove a_i
    }
    for (int s = 0; s < nb; ++s) {
        cost[std::size_t(na + s)][std::size_t(s)] = 1.0;  // add b_s
        for (int t = 0; t < na; ++t) cost[std::size_t(na + s)][std::size_t(nb + t)] = 0.0;
    }

    const std::vector<int> assign = hungarian(cost);
    for (int i = 0; i < m; ++i) {
        const int j = assign[std::size_t(i)];
        if (i < na && j < nb) {
            result.edits.push_back({EditKind::replace, only_a[std::size_t(i)].role,
                                    only_a[std::size_t(i)].concept_name, only_b[std::size_t(j)].concept_name,
                                    cost[std::size_t(i)][std::size_t(j)]});
        } else if (i < na) {
            result.edits.push_back(
                {EditKind::remove, only_a[std::size_t(i)].role, only_a[std::size_t(i)].concept_name, "",
                 1.0});
        } else if (j < nb) {
            result.edits.push_back(
                {EditKind::add, only_b[std::size_t(j)].role, "", only_b[std::size_t(j)].concept_name,
                 1.0});
        }
    }
    std::sort(result.edits.begin(), result.edits.end());
    for (const Edit& e : result.edits) result.cost += e.cost;
    return result;
}

CounterfactualResult nearest_counterfactual(const IndividualDescription& x,
                                            const std::vector<IndividualDescription>& pool,
                                            const kb::KnowledgeBase& tbox) {
    if (pool.empty()) throw std::invalid_argument("empty counterfactual pool");

    CounterfactualResult best;
    bool have = false;
    for (const IndividualDescription& candidate : pool) {
        EditDistanceResult d = edit_distance(x, candidate, tbox);
        const bool better =
            !have || d.cost < best.total_cost ||
            (d.cost == best.total_cost && candidate.id < best.target_id);
        if (better) {
            best.source_id = x.id;
            best.target_id = candidate.id;
            best.edits = std::move(d.edits);
            best.total_cost = d.cost;
            have = true;
        }
    }
    return best;
}

GlobalExplanation global_explanation(const std::vector<CounterfactualResult>& results) {
    if (results.empty()) throw std::invalid_argument("no counterfactual results to aggregate");

    std::map<std::tuple<EditKind, std::string, std::string, std::string>,
             std::pair<long, double>>
        table;
    for (const CounterfactualResult& r : results) {
        for (const Edit& e : r.edits) {
            auto& [count, cost_sum] = table[{e.kind, e.role, e.source, e.target}];
            count += 1;
            cost_sum += e.cost;
        }
    }

    GlobalExplanation out;
    for (const auto& [key, value] : table) {
        const auto& [kind, role, source, target] = key;
        const auto& [count, cost_sum] = value;
        out.rows.push_back({kind, role, source, target, count, cost_sum / double(count)});
        out.total_edits += count;
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const GlobalEditRow& a, const GlobalEditRow& b) {
                         return a.count > b.count;
                     });
    return out;
}

IndividualDescription extract_description(const kb::KnowledgeBase& kb, const std::string& user_id) {
    if (!kb.vocab.individuals.count(user_id)) {
        throw kb::KbError("unknown individual: " + user_id);
    }

    std::map<std::string, std::set<std::string>> types_of;
    for (const auto& [c, a] : kb.abox.concept_assertions) types_of[a].insert(c);
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> successors_of;
    for (const auto& [r, a, b] : kb.abox.role_assertions) successors_of[a].emplace_back(r, b);

    IndividualDescription out;
    out.id = user_id;

    std::set<std::string> visited{user_id};
    // (individual, role of the edge that reached it)
    std::deque<std::pair<std::string, std::string>> frontier{{user_id, ""}};
    while (!frontier.empty()) {
        const auto [individual, via_role] = frontier.front();
        frontier.pop_front();
        for (const std::string& c : types_of[individual]) out.concepts.insert({via_role, c});
        for (const auto& [role, successor] : successors_of[individual]) {
            if (visited.count(successor)) continue;
            visited.insert(successor);
            frontier.emplace_back(successor, role);
        }
    }
    return out;
}

DescriptionClassifier concept_rule_classifier(std::set<std::string> positive_markers) {
    return [markers = std::move(positive_markers)](const IndividualDescription& d) {
        for (const TaggedConcept& tc : d.concepts) {
            if (markers.count(tc.concept_name)) return std::string("positive");
        }
        return std::string("negative");
    };
}

}  // namespace s4c::counterfactual
