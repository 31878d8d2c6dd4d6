#pragma once

#include <map>
#include <string>
#include <vector>

#include "neice/common.hpp"
#include "neice/corpus.hpp"
#include "neice/embeddings.hpp"

namespace neice {

enum class ReprKind { tfidf, cluwords, neice };

std::string to_string(ReprKind kind);
ReprKind repr_kind_from_string(const std::string& s);

struct WeightedDocTermMatrix {
    SpMat m;  // |D| x |V|, nonnegative
    ReprKind kind = ReprKind::tfidf;
    double alpha_word = 0.0;
    double alpha_ent = 0.0;
};

// tf_idf(t,d) = A_{d,t} * log(|D| / n_t)
WeightedDocTermMatrix tf_idf(const SpMat& bow);

// mu(t,d): mean similarity between t and the terms of d it is related to
// under C's support; 0 when no such term exists.
double compute_mu(const SpMat& bow, const SpMat& c, int doc, int term);

// A*_{d,t} = (AC)_{d,t} * log(|D| / sum_d mu(t,d))
WeightedDocTermMatrix cluwords(const SpMat& bow, const SimilarityMatrix& sim);

// A^NE: same idf factor, but tf gets a pseudo-frequency boost for terms
// related to an entity present in the document.
using EntityRelatedMap = std::map<std::string, std::vector<int>>;

WeightedDocTermMatrix neice_matrix(const SpMat& bow, const SimilarityMatrix& sim,
                                   const std::vector<std::vector<std::string>>& doc_entities,
                                   const EntityRelatedMap& entity_related, double alpha_ent);

// Triplet text dump "row col value" per line, for external comparison.
void dump_triplets(const SpMat& m, const std::string& path);

}  // namespace neice
