#pragma once

#include <string>
#include <vector>

#include "neice/corpus.hpp"

namespace neice {

// Planted-topic corpus generator: disjoint per-block vocabularies, an
// optional shared "ambiguous" pool, and optional per-block entity mentions
// with annotations and a matching synthetic embedding file.
struct SynthOptions {
    int n_topics = 3;
    int n_docs = 200;
    int terms_per_topic = 20;
    int doc_len = 12;             // tokens per document
    int shared_terms = 0;         // ambiguous pool size (0 = fully disjoint)
    double ambiguous_rate = 0.3;  // per-token probability of drawing from the pool
    bool with_entities = false;
    double entity_confidence = 0.95;
    int embedding_dim_extra = 4;  // dim = n_topics + extra
    double embedding_noise = 0.05;
    std::uint64_t seed = 1;
};

struct SynthCorpus {
    std::vector<RawDocument> documents;
    std::vector<EntityAnnotation> annotations;
    std::vector<std::string> embedding_lines;          // word2vec text format incl. header
    std::vector<std::vector<std::string>> block_terms; // planted vocabulary per topic
    std::vector<std::string> shared_pool;
    std::vector<std::string> entity_ids;               // one per block
    std::vector<int> doc_block;                        // planted block per document

    // Writes corpus.jsonl, annotations.jsonl, embeddings.txt into dir.
    void write(const std::string& dir) const;
};

SynthCorpus generate_synthetic(const SynthOptions& opts);

// Fraction of top words that fall in the summary's dominant planted block.
double topic_purity(const std::vector<std::string>& top_terms,
                    const std::vector<std::vector<std::string>>& block_terms);

}  // namespace neice
