#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "neice/common.hpp"
#include "neice/text.hpp"

namespace neice {

struct RawDocument {
    std::string id;
    std::string title;
    std::string description;
};

struct EntityAnnotation {
    std::string doc_id;
    std::string field;  // "title" or "description"
    int start = 0;      // character offsets, [start, end)
    int end = 0;
    std::string entity_id;
    double confidence = 0.0;
};

struct PreprocessConfig {
    WordSet stopwords;
    WordSet name_list;
    int min_term_freq = 5;
    double min_confidence = 0.9;
    bool dedup_titles = false;
};

class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> terms);

    int index_of(const std::string& term) const;  // -1 if absent
    const std::string& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
    int size() const { return static_cast<int>(terms_.size()); }
    const std::vector<std::string>& terms() const { return terms_; }

private:
    std::vector<std::string> terms_;  // sorted lexicographically
    std::unordered_map<std::string, int> index_;
};

struct IngestReport {
    int docs_read = 0;
    int docs_kept = 0;
    int dropped_short = 0;      // <= 3 tokens after tokenization
    int dropped_empty = 0;      // no in-vocab tokens and no accepted entities
    int dropped_duplicate = 0;  // duplicate titles (only when dedup enabled)
    int unknown_doc_warnings = 0;
    int annotations_read = 0;
    int annotations_accepted = 0;
};

struct Corpus {
    std::vector<std::string> doc_ids;
    std::vector<std::vector<int>> docs;  // token indices into vocab, in order
    Vocabulary vocab;
    std::vector<std::vector<std::string>> doc_entities;         // unique accepted ids
    std::vector<std::vector<std::string>> doc_entity_mentions;  // one entry per accepted mention
    SpMat bow;  // |D| x |V| raw counts

    // Raw-field statistics over kept documents (whitespace words).
    double mean_title_words = 0.0;
    double mean_description_words = 0.0;

    int n_docs() const { return static_cast<int>(docs.size()); }
};

std::vector<RawDocument> read_corpus_jsonl(const std::string& path);
std::vector<EntityAnnotation> read_annotations_jsonl(const std::string& path);

std::vector<std::string> tokenize(const RawDocument& raw, const PreprocessConfig& config);

// Confidence filter: strictly greater than min_confidence.
// Returns per-document accepted annotations keyed by doc id.
std::unordered_map<std::string, std::vector<EntityAnnotation>> ingest_annotations(
    const std::vector<EntityAnnotation>& annotations,
    const std::vector<RawDocument>& docs, double min_confidence, IngestReport& report);

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokenized_docs,
                            int min_term_freq, const WordSet& name_list,
                            const WordSet& entity_terms = {});

SpMat build_bow(const std::vector<std::vector<int>>& docs, const Vocabulary& vocab);

Corpus build_corpus(const std::vector<RawDocument>& raw_docs,
                    const std::vector<EntityAnnotation>& annotations,
                    const PreprocessConfig& config, IngestReport& report);

}  // namespace neice
