#include "s4c/metrics.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace s4c::metrics {

namespace {

// Per-class F1 over a binary split given true/false positive/negative counts.
double f1_score(long tp, long fp, long fn) {
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

const std::map<std::string, ConfusionMatrix>& published_matrices() {
    static const std::map<std::string, ConfusionMatrix> fixtures = [] {
        std::map<std::string, ConfusionMatrix> m;
        // External evaluation of the three classifier scales on the Coswara
        // corpus, detected x actual over {cough, breath, voice}.
        ConfusionMatrix short_scale;
        short_scale.counts = {{{944, 75, 21}, {15, 845, 9}, {6, 45, 935}}};
        m["coswara-short"] = short_scale;

        ConfusionMatrix long_scale;
        long_scale.counts = {{{948, 64, 17}, {7, 873, 10}, {10, 28, 938}}};
        m["coswara-long"] = long_scale;

        ConfusionMatrix multiscale;
        multiscale.counts = {{{949, 60, 24}, {11, 881, 10}, {5, 24, 931}}};
        m["coswara-multiscale"] = multiscale;

        // COUGHVID cough-detector baseline on the same corpus, cough vs rest.
        ConfusionMatrix coughvid;
        coughvid.detected_classes = 2;
        coughvid.counts = {{{677, 163, 24}, {288, 802, 941}, {0, 0, 0}}};
        m["coughvid-coswara"] = coughvid;
        return m;
    }();
    return fixtures;
}

}  // namespace

long ConfusionMatrix::total() const {
    long t = 0;
    for (int r = 0; r < detected_classes; ++r) {
        for (int c = 0; c < 3; ++c) t += counts[std::size_t(r)][std::size_t(c)];
    }
    return t;
}

long ConfusionMatrix::correct() const {
    if (detected_classes == 3) {
        return counts[0][0] + counts[1][1] + counts[2][2];
    }
    // Binary rows: "cough" matches actual cough, "no cough" matches the rest.
    return counts[0][0] + counts[1][1] + counts[1][2];
}

ConfusionMatrix evaluate(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.empty() || predicted.size() != actual.size()) {
        throw std::invalid_argument("predicted/actual labels must be aligned and non-empty");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || predicted[i] >= 3 || actual[i] < 0 || actual[i] >= 3) {
            throw std::invalid_argument("labels must lie in [0, 3)");
        }
        cm.counts[std::size_t(predicted[i])][std::size_t(actual[i])]++;
    }
    return cm;
}

ConfusionMatrix cough_vs_rest(const ConfusionMatrix& cm) {
    if (cm.detected_classes != 3) throw std::invalid_argument("expected a 3x3 matrix");
    ConfusionMatrix out;
    out.detected_classes = 2;
    out.counts = {};
    for (int c = 0; c < 3; ++c) {
        out.counts[0][std::size_t(c)] = cm.counts[0][std::size_t(c)];
        out.counts[1][std::size_t(c)] =
            cm.counts[1][std::size_t(c)] + cm.counts[2][std::size_t(c)];
    }
    return out;
}

EvalMetrics compute_metrics(const ConfusionMatrix& cm, const std::vector<cnn::Prediction>* probs,
                            const std::vector<int>* actual) {
    const long total = cm.total();
    if (total == 0) throw std::invalid_argument("empty confusion matrix");

    EvalMetrics out;
    out.accuracy = double(cm.correct()) / double(total);

    if (cm.detected_classes == 3) {
        double f1_sum = 0.0;
        for (int c = 0; c < 3; ++c) {
            const long tp = cm.counts[std::size_t(c)][std::size_t(c)];
            long fp = 0, fn = 0;
            for (int o = 0; o < 3; ++o) {
                if (o == c) continue;
                fp += cm.counts[std::size_t(c)][std::size_t(o)];
                fn += cm.counts[std::size_t(o)][std::size_t(c)];
            }
            f1_sum += f1_score(tp, fp, fn);
        }
        out.macro_f1 = f1_sum / 3.0;
    } else {
        // Macro F1 over the two detected classes of the binary reduction.
        const long tp = cm.counts[0][0];
        const long fp = cm.counts[0][1] + cm.counts[0][2];
        const long fn = cm.counts[1][0];
        const long tn = cm.counts[1][1] + cm.counts[1][2];
        out.macro_f1 = 0.5 * (f1_score(tp, fp, fn) + f1_score(tn, fn, fp));
    }

    if (probs && actual) out.c_statistic = macro_ovr_auc(*probs, *actual);
    return out;
}

double macro_ovr_auc(const std::vector<cnn::Prediction>& probs, const std::vector<int>& actual) {
    if (probs.empty() || probs.size() != actual.size()) {
        throw std::invalid_argument("probabilities/labels must be aligned and non-empty");
    }
    double auc_sum = 0.0;
    int classes_with_auc = 0;
    for (int c = 0; c < cnn::kNumClasses; ++c) {
        std::vector<std::pair<double, int>> scored;  // (score, is_positive)
        long n_pos = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            const int pos = actual[i] == c ? 1 : 0;
            n_pos += pos;
            scored.emplace_back(probs[i][std::size_t(c)], pos);
        }
        const long n_neg = static_cast<long>(scored.size()) - n_pos;
        if (n_pos == 0 || n_neg == 0) continue;

        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        // Mann-Whitney rank sum with average ranks on score ties.
        double rank_sum_pos = 0.0;
        std::size_t i = 0;
        while (i < scored.size()) {
            std::size_t j = i;
            while (j < scored.size() && scored[j].first == scored[i].first) ++j;
            const double avg_rank = 0.5 * double(i + 1 + j);  // 1-based inclusive range
            for (std::size_t t = i; t < j; ++t) {
                if (scored[t].second) rank_sum_pos += avg_rank;
            }
            i = j;
        }
        const double u = rank_sum_pos - double(n_pos) * (n_pos + 1) / 2.0;
        auc_sum += u / (double(n_pos) * double(n_neg));
        ++classes_with_auc;
    }
    if (classes_with_auc == 0) throw std::invalid_argument("no class has both outcomes");
    return auc_sum / classes_with_auc;
}

const ConfusionMatrix& published_matrix(const std::string& name) {
    const auto& m = published_matrices();
    auto it = m.find(name);
    if (it == m.end()) throw std::invalid_argument("unknown confusion fixture: " + name);
    return it->second;
}

std::vector<std::string> published_matrix_names() {
    std::vector<std::string> names;
    for (const auto& [name, _] : published_matrices()) names.push_back(name);
    return names;
}

std::string format_matrix(const ConfusionMatrix& cm) {
    static const char* kActual[3] = {"cough", "breath", "voice"};
    std::ostringstream out;
    out << "detected\\actual";
    for (const char* name : kActual) out << "\t" << name;
    out << "\n";
    for (int r = 0; r < cm.detected_classes; ++r) {
        if (cm.detected_classes == 2) {
            out << (r == 0 ? "cough" : "no_cough");
        } else {
            out << kActual[r];
        }
        for (int c = 0; c < 3; ++c) out << "\t" << cm.counts[std::size_t(r)][std::size_t(c)];
        out << "\n";
    }
    return out.str();
}

}  // namespace s4c::metrics
