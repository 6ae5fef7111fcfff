#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "s4c/cnn.hpp"

namespace s4c::metrics {

// Counts laid out detected x actual. Three detected rows for the full
// classifier, two (cough / no-cough) for the binary reduction; always three
// actual columns {cough, breath, voice}.
struct ConfusionMatrix {
    int detected_classes = 3;
    std::array<std::array<long, 3>, 3> counts{};

    long total() const;
    long correct() const;  // diagonal, or the binary-reduction equivalent
};

struct EvalMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::optional<double> c_statistic;  // macro one-vs-rest ROC area
};

// Tallies aligned predicted/actual label sequences into a 3x3 matrix.
ConfusionMatrix evaluate(const std::vector<int>& predicted, const std::vector<int>& actual);

// Collapses breath/voice into a single "no cough" detected row.
ConfusionMatrix cough_vs_rest(const ConfusionMatrix& cm);

// Accuracy and macro F1 from the matrix; the c-statistic additionally needs
// the per-sample probability vectors and actual labels.
EvalMetrics compute_metrics(const ConfusionMatrix& cm,
                            const std::vector<cnn::Prediction>* probs = nullptr,
                            const std::vector<int>* actual = nullptr);

// Macro one-vs-rest area under the ROC curve (rank statistic, ties averaged).
double macro_ovr_auc(const std::vector<cnn::Prediction>& probs, const std::vector<int>& actual);

// Published external-evaluation matrices shipped as named fixtures:
// "coswara-short", "coswara-long", "coswara-multiscale" (3x3) and
// "coughvid-coswara" (2x3 cough-detector baseline).
const ConfusionMatrix& published_matrix(const std::string& name);
std::vector<std::string> published_matrix_names();

// Matrix rendered in detected x actual orientation with class headers.
std::string format_matrix(const ConfusionMatrix& cm);

}  // namespace s4c::metrics
