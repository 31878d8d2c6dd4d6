#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "neice/common.hpp"
#include "neice/nmf.hpp"
#include "neice/text.hpp"

namespace neice {

// Boolean sliding-window co-occurrence counts over a reference corpus: a
// term or pair is counted at most once per window.
struct CooccurrenceIndex {
    std::int64_t window_count = 0;
    int window_size = 110;
    std::unordered_map<std::string, std::int64_t> term_counts;
    std::unordered_map<std::string, std::int64_t> pair_counts;  // key "a\tb", a < b

    std::int64_t term_count(const std::string& t) const;
    std::int64_t pair_count(const std::string& a, const std::string& b) const;
};

// Windows of width window_size stepped by one token; a document shorter than
// the window contributes a single whole-document window. An optional filter
// restricts counting to the given terms.
CooccurrenceIndex build_index(const std::vector<std::vector<std::string>>& docs, int window_size,
                              const WordSet* filter = nullptr);

struct CoherenceDiagnostics {
    std::vector<std::string> missing_terms;  // zero reference count
    int zero_norm_vectors = 0;
    int degenerate_pairs = 0;  // NPMI forced to 0 by convention
};

// NPMI(t_i,t_j) per window-probability estimates; identical terms score 1,
// zero-count marginals score 0 by convention (flagged).
double npmi(const CooccurrenceIndex& index, const std::string& a, const std::string& b,
            CoherenceDiagnostics* diag = nullptr);

// C_V of one topic: mean cosine between each top word's NPMI vector and the
// columnwise sum vector over all top words.
double cv_topic(const CooccurrenceIndex& index, const std::vector<std::string>& top_terms,
                CoherenceDiagnostics* diag = nullptr);

struct CoherenceReport {
    std::vector<double> topic_cv;
    double mean_cv = 0.0;
    std::vector<std::vector<std::string>> topics;
    CoherenceDiagnostics diagnostics;
};

CoherenceReport score_model(const CooccurrenceIndex& index,
                            const std::vector<TopicSummary>& summaries);

void save_report_json(const CoherenceReport& report, const std::string& path);

// Binary cache keyed by (corpus hash, window_size, filter hash).
void save_index(const CooccurrenceIndex& index, const std::string& path);
CooccurrenceIndex load_index(const std::string& path);
std::string index_cache_name(std::uint64_t corpus_hash, int window_size,
                             std::uint64_t filter_hash);

}  // namespace neice
