// Test-only brute-force evaluators, kept independent of the sparse library
// code paths they are used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Dense thresholded cosine matrix over raw (unnormalized) vectors, strict
// cutoff, unit diagonal for every term. Rows of `vectors` with zero norm are
// treated as unembedded (diagonal only).
inline Eigen::MatrixXd similarity(const Eigen::MatrixXd& vectors, double alpha_word) {
    const int n = static_cast<int>(vectors.rows());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) c(i, i) = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double ni = vectors.row(i).norm(), nj = vectors.row(j).norm();
            if (ni <= 0.0 || nj <= 0.0) continue;
            double cos = vectors.row(i).dot(vectors.row(j)) / (ni * nj);
            if (cos > alpha_word) c(i, j) = cos;
        }
    return c;
}

inline Eigen::MatrixXd tf_idf(const Eigen::MatrixXd& a) {
    const int n_docs = static_cast<int>(a.rows());
    const int n_terms = static_cast<int>(a.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_docs, n_terms);
    for (int t = 0; t < n_terms; ++t) {
        int df = 0;
        for (int d = 0; d < n_docs; ++d)
            if (a(d, t) > 0) ++df;
        if (df == 0) continue;
        double idf = std::log(static_cast<double>(n_docs) / df);
        for (int d = 0; d < n_docs; ++d) out(d, t) = a(d, t) * idf;
    }
    return out;
}

inline double mu(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c, int d, int t) {
    double sum = 0.0;
    int count = 0;
    for (int tp = 0; tp < a.cols(); ++tp)
        if (a(d, tp) > 0 && c(t, tp) != 0.0) {
            sum += c(t, tp);
            ++count;
        }
    return count > 0 ? sum / count : 0.0;
}

inline Eigen::VectorXd idf_star(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    const int n_docs = static_cast<int>(a.rows());
    const int n_terms = static_cast<int>(a.cols());
    Eigen::VectorXd idf(n_terms);
    for (int t = 0; t < n_terms; ++t) {
        double mu_sum = 0.0;
        for (int d = 0; d < n_docs; ++d) mu_sum += mu(a, c, d, t);
        idf[t] = std::log(static_cast<double>(n_docs) / mu_sum);
    }
    return idf;
}

inline Eigen::MatrixXd cluwords(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
    const Eigen::MatrixXd ac = a * c;
    const Eigen::VectorXd idf = idf_star(a, c);
    Eigen::MatrixXd out = ac;
    for (int t = 0; t < a.cols(); ++t) out.col(t) *= idf[t];
    return out;
}

// Literal two-branch evaluation of the pseudo-frequency boost: for each
// (d, t), if t is related to an entity present in d and some related term of
// t occurs in d, add the max AC weight over those related terms.
inline Eigen::MatrixXd neice(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                             const std::vector<std::set<int>>& doc_entity_terms) {
    const Eigen::MatrixXd ac = a * c;
    const Eigen::VectorXd idf = idf_star(a, c);
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (int d = 0; d < a.rows(); ++d)
        for (int t = 0; t < a.cols(); ++t) {
            double tf = ac(d, t);
            if (doc_entity_terms[static_cast<std::size_t>(d)].count(t)) {
                double best = 0.0;
                bool any = false;
                for (int tp = 0; tp < a.cols(); ++tp)
                    if (a(d, tp) > 0 && c(t, tp) != 0.0) {
                        any = true;
                        best = std::max(best, ac(d, tp));
                    }
                if (any) tf += best;
            }
            out(d, t) = tf * idf[t];
        }
    return out;
}

}  // namespace oracle
