#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "neice/common.hpp"
#include "neice/corpus.hpp"

namespace neice {

struct NmfOptions {
    int max_iter = 300;
    double tol = 1e-5;  // stop when relative loss improvement falls below
    std::uint64_t seed = 42;
    enum class Init { nndsvd, random } init = Init::nndsvd;
    // Test hook: start from explicit factors instead of the built-in init.
    std::optional<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> init_factors;  // (H0, W0)
};

struct TopicModel {
    Eigen::MatrixXd h;  // |D| x K document-topic
    Eigen::MatrixXd w;  // K x |V| topic-word
    int k = 0;
    std::uint64_t seed = 0;
    int iterations = 0;
    std::vector<double> loss_trace;  // Frobenius reconstruction error per iteration
};

// Multiplicative-update NMF (Frobenius loss), M ~= H W. Deterministic for a
// fixed (M, k, opts).
TopicModel nmf(const SpMat& m, int k, const NmfOptions& opts = {});

struct TopicSummary {
    int topic_id = 0;
    std::vector<std::pair<std::string, double>> top_terms;  // weight desc, ties lexicographic
};

std::vector<TopicSummary> top_words(const TopicModel& model, const Vocabulary& vocab, int t);

// Dense binary dump (int64 rows, int64 cols, row-major little-endian
// doubles) for W and H, plus a JSON manifest.
void save_model(const std::string& dir, const TopicModel& model, double final_loss);
Eigen::MatrixXd load_dense_matrix(const std::string& path);

}  // namespace neice
