#include "s4c/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

namespace s4c::affinity {

namespace {

void validate(const SimilarityMatrix& S) {
    if (S.n < 1) throw std::invalid_argument("similarity matrix must have n >= 1");
    if (S.s.size() != std::size_t(S.n) * S.n) {
        throw std::invalid_argument("similarity matrix is not square");
    }
    for (double v : S.s) {
        if (!std::isfinite(v)) throw std::invalid_argument("similarity matrix has non-finite entries");
    }
}

}  // namespace

ClusterAssignment cluster(const SimilarityMatrix& S, const ApParams& params) {
    validate(S);
    if (params.damping < 0.5 || params.damping >= 1.0) {
        throw std::invalid_argument("damping must lie in [0.5, 1)");
    }
    const int n = S.n;

    ClusterAssignment result;
    if (n == 1) {
        result.exemplar_of = {0};
        result.exemplars = {0};
        result.converged = true;
        result.net_similarity = S.at(0, 0);
        return result;
    }

    // Jittered working copy; breaks exact ties deterministically.
    SimilarityMatrix W = S;
    std::mt19937_64 rng(params.jitter_seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : W.s) v += (1e-12 * std::abs(v) + 1e-300) * uni(rng);

    std::vector<double> R(std::size_t(n) * n, 0.0);
    std::vector<double> A(std::size_t(n) * n, 0.0);
    const double lambda = params.damping;

    std::vector<int> decision(n, -1);
    int stable_sweeps = 0;
    int it = 0;

    // Decisions can plateau for long stretches while heavily damped messages
    // are still in flight, so stability alone is not convergence: the message
    // residual must have settled too.
    double scale = 1e-12;
    for (double v : W.s) scale = std::max(scale, std::abs(v));
    const double residual_tol = 1e-8 * scale;
    double residual = std::numeric_limits<double>::infinity();

    std::vector<double> col_pos(n);  // per-column positive responsibility sums

    for (it = 1; it <= params.max_iter; ++it) {
        residual = 0.0;
        // Responsibilities: r(i,k) <- s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        for (int i = 0; i < n; ++i) {
            double max1 = -std::numeric_limits<double>::infinity();
            double max2 = -std::numeric_limits<double>::infinity();
            int arg1 = -1;
            for (int k = 0; k < n; ++k) {
                const double v = A[std::size_t(i) * n + k] + W.at(i, k);
                if (v > max1) {
                    max2 = max1;
                    max1 = v;
                    arg1 = k;
                } else if (v > max2) {
                    max2 = v;
                }
            }
            for (int k = 0; k < n; ++k) {
                const double cap = (k == arg1) ? max2 : max1;
                const double r_new = W.at(i, k) - cap;
                double& r = R[std::size_t(i) * n + k];
                const double updated = lambda * r + (1.0 - lambda) * r_new;
                residual = std::max(residual, std::abs(updated - r));
                r = updated;
            }
        }

        // Availabilities: a(i,k) <- min(0, r(k,k) + sum_{i' not in {i,k}} max(0, r(i',k)))
        // and a(k,k) <- sum_{i' != k} max(0, r(i',k)).
        for (int k = 0; k < n; ++k) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (i != k) sum += std::max(0.0, R[std::size_t(i) * n + k]);
            }
            col_pos[k] = sum;
        }
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                double a_new;
                if (i == k) {
                    a_new = col_pos[k];
                } else {
                    const double without_i =
                        col_pos[k] - std::max(0.0, R[std::size_t(i) * n + k]);
                    a_new = std::min(0.0, R[std::size_t(k) * n + k] + without_i);
                }
                double& a = A[std::size_t(i) * n + k];
                const double updated = lambda * a + (1.0 - lambda) * a_new;
                residual = std::max(residual, std::abs(updated - a));
                a = updated;
            }
        }

        // Current per-point decisions; convergence = stable for conv_iter sweeps.
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            double best = -std::numeric_limits<double>::infinity();
            int arg = i;
            for (int k = 0; k < n; ++k) {
                const double v = A[std::size_t(i) * n + k] + R[std::size_t(i) * n + k];
                if (v > best) {
                    best = v;
                    arg = k;
                }
            }
            if (decision[i] != arg) {
                decision[i] = arg;
                changed = true;
            }
        }
        stable_sweeps = changed ? 0 : stable_sweeps + 1;
        if (stable_sweeps >= params.conv_iter && residual <= residual_tol) break;
    }

    result.iterations = std::min(it, params.max_iter);
    result.converged = stable_sweeps >= params.conv_iter;

    // Exemplars are the self-electing points; fall back to the strongest
    // candidate if the messages elected none.
    std::set<int> exemplar_set;
    for (int i = 0; i < n; ++i) {
        if (decision[i] == i) exemplar_set.insert(i);
    }
    if (exemplar_set.empty()) {
        int best_k = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k) {
            const double v = A[std::size_t(k) * n + k] + R[std::size_t(k) * n + k];
            if (v > best) {
                best = v;
                best_k = k;
            }
        }
        exemplar_set.insert(best_k);
    }

    result.exemplars.assign(exemplar_set.begin(), exemplar_set.end());
    result.exemplar_of.resize(n);
    for (int i = 0; i < n; ++i) {
        if (exemplar_set.count(i)) {
            result.exemplar_of[i] = i;
            continue;
        }
        int best_k = result.exemplars.front();
        double best = -std::numeric_limits<double>::infinity();
        for (int k : result.exemplars) {
            if (W.at(i, k) > best) {
                best = W.at(i, k);
                best_k = k;
            }
        }
        result.exemplar_of[i] = best_k;
    }

    result.net_similarity = 0.0;
    for (int i = 0; i < n; ++i) result.net_similarity += S.at(i, result.exemplar_of[i]);
    return result;
}

double default_preference(const SimilarityMatrix& S) {
    validate(S);
    if (S.n < 2) throw std::invalid_argument("default_preference needs n >= 2");
    std::vector<double> off;
    off.reserve(std::size_t(S.n) * (S.n - 1));
    for (int i = 0; i < S.n; ++i) {
        for (int k = 0; k < S.n; ++k) {
            if (i != k) off.push_back(S.at(i, k));
        }
    }
    std::sort(off.begin(), off.end());
    const std::size_t m = off.size();
    return (m % 2 == 1) ? off[m / 2] : 0.5 * (off[m / 2 - 1] + off[m / 2]);
}

SimilarityMatrix negative_sq_euclidean(const std::vector<std::vector<double>>& points) {
    const int n = static_cast<int>(points.size());
    SimilarityMatrix S(n);
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            if (points[i].size() != points[k].size()) {
                throw std::invalid_argument("points must share a dimension");
            }
            double d2 = 0.0;
            for (std::size_t j = 0; j < points[i].size(); ++j) {
                const double d = points[i][j] - points[k][j];
                d2 += d * d;
            }
            S.at(i, k) = -d2;
            S.at(k, i) = -d2;
        }
    }
    return S;
}

}  // namespace s4c::affinity
