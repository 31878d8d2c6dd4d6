#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "neice/common.hpp"
#include "neice/corpus.hpp"

namespace neice {

// Joint word/entity vectors restricted to the working vocabulary and the
// accepted entity set. Vectors are stored L2-normalized; zero-norm rows are
// rejected at load time.
class EmbeddingTable {
public:
    EmbeddingTable(int dim, Eigen::MatrixXd vectors,
                   std::unordered_map<std::string, int> word_rows,
                   std::unordered_map<std::string, int> entity_rows);

    int dim() const { return dim_; }
    bool has_word(const std::string& w) const { return word_rows_.count(w) > 0; }
    bool has_entity(const std::string& e) const { return entity_rows_.count(e) > 0; }
    std::optional<Eigen::VectorXd> word_vector(const std::string& w) const;
    std::optional<Eigen::VectorXd> entity_vector(const std::string& e) const;
    std::size_t n_words() const { return word_rows_.size(); }
    std::size_t n_entities() const { return entity_rows_.size(); }

    const Eigen::MatrixXd& vectors() const { return vectors_; }
    const std::unordered_map<std::string, int>& word_rows() const { return word_rows_; }

private:
    int dim_;
    Eigen::MatrixXd vectors_;  // one normalized vector per row
    std::unordered_map<std::string, int> word_rows_;
    std::unordered_map<std::string, int> entity_rows_;
};

struct EmbeddingLoadStats {
    std::size_t file_vectors = 0;
    std::size_t words_loaded = 0;
    std::size_t entities_loaded = 0;
    double vocab_coverage = 0.0;
    double entity_coverage = 0.0;
};

// word2vec text format: header "count dim", then "token v1 ... v_dim".
// Entity rows carry entity_prefix; only vocabulary terms and requested
// entity ids are retained.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               const std::vector<std::string>& entities,
                               const std::string& entity_prefix = "ENTITY/",
                               EmbeddingLoadStats* stats = nullptr);

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Sparse |V| x |V| word-similarity matrix: entries are cosines strictly above
// alpha_word; every term keeps a unit diagonal, embedded or not.
struct SimilarityMatrix {
    SpMat c;
    double alpha_word = 0.0;
};

SimilarityMatrix build_similarity_matrix(const EmbeddingTable& table, const Vocabulary& vocab,
                                         double alpha_word);

// E^e: vocabulary terms with cos(v_e, v_t) >= alpha_ent (non-strict).
// Unembedded entities yield an empty set. Returned term ids are sorted.
std::vector<int> entity_related_words(const EmbeddingTable& table, const Vocabulary& vocab,
                                      const std::string& entity_id, double alpha_ent);

}  // namespace neice
