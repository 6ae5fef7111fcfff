#pragma once

#include <cstdint>
#include <vector>

namespace s4c::affinity {

// Dense n x n similarity matrix; the diagonal holds the exemplar preferences.
struct SimilarityMatrix {
    int n = 0;
    std::vector<double> s;  // row-major

    explicit SimilarityMatrix(int size = 0) : n(size), s(std::size_t(size) * size, 0.0) {}
    double at(int i, int k) const { return s[std::size_t(i) * n + k]; }
    double& at(int i, int k) { return s[std::size_t(i) * n + k]; }
    void set_preferences(double p) {
        for (int i = 0; i < n; ++i) at(i, i) = p;
    }
};

struct ClusterAssignment {
    std::vector<int> exemplar_of;  // exemplar index per point
    std::vector<int> exemplars;    // sorted, unique
    int iterations = 0;
    bool converged = false;
    double net_similarity = 0.0;   // sum of member similarities plus exemplar preferences

    int cluster_count() const { return static_cast<int>(exemplars.size()); }
};

struct ApParams {
    double damping = 0.9;      // in [0.5, 1)
    int max_iter = 1000;
    int conv_iter = 50;        // stop after this many stable sweeps
    std::uint64_t jitter_seed = 0;
};

// Exemplar clustering by responsibility/availability message passing with
// damping. A seeded jitter of relative magnitude 1e-12 is added to the
// similarities to break degenerate ties, so runs are deterministic per seed.
ClusterAssignment cluster(const SimilarityMatrix& S, const ApParams& params = {});

// Median of the off-diagonal similarities; the usual default preference.
double default_preference(const SimilarityMatrix& S);

// Negative squared Euclidean distances between row vectors, preferences left 0.
SimilarityMatrix negative_sq_euclidean(const std::vector<std::vector<double>>& points);

}  // namespace s4c::affinity
