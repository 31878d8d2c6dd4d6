#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "neice/coherence.hpp"
#include "neice/corpus.hpp"
#include "neice/embeddings.hpp"
#include "neice/nmf.hpp"
#include "neice/representation.hpp"
#include "neice/synthesis.hpp"

namespace neice {

struct PipelineConfig {
    std::string corpus_path;
    std::string annotations_path;  // optional; empty = no entities
    std::string embeddings_path;   // optional for representation=tfidf
    std::string stopwords_path;    // optional
    std::string names_path;        // optional
    std::string reference_path;    // optional; empty = score against the corpus itself
    std::string output_dir = "neice_out";

    ReprKind representation = ReprKind::cluwords;
    double alpha_word = 0.4;
    double alpha_ent = 0.3;
    std::vector<int> k_values{20, 50, 100, 200};
    int top_t = 10;
    int min_term_freq = 5;
    double min_confidence = 0.9;
    int window_size = 110;
    bool dedup_titles = false;
    bool normalize_rows = false;
    std::string entity_prefix = "ENTITY/";
    NmfOptions nmf;

    std::vector<double> alpha_word_grid{0.2, 0.3, 0.4, 0.5};
    std::vector<double> alpha_ent_grid{0.3, 0.4};
    int parallel_jobs = 1;

    static PipelineConfig load(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void validate() const;
    nlohmann::json to_json() const;
};

struct DatasetStats {
    int n_docs = 0;
    int vocab_size = 0;
    std::int64_t ne_mentions = 0;
    int docs_with_ne = 0;
    double mean_title_words = 0.0;
    double mean_description_words = 0.0;
};

DatasetStats dataset_stats(const Corpus& corpus);

struct RunRecord {
    double alpha_word = 0.0;
    double alpha_ent = 0.0;
    ReprKind representation = ReprKind::cluwords;
    std::map<int, std::vector<TopicSummary>> topics_by_k;
    std::map<int, CoherenceReport> coherence_by_k;
    DatasetStats stats;
    std::string output_dir;
    double elapsed_seconds = 0.0;
    bool failed = false;
    std::string error;
};

// Immutable shared stage artifacts, reusable across grid points: C depends
// only on alpha_word and the E^e sets only on alpha_ent.
class StageCache {
public:
    void prepare(const PipelineConfig& config);
    bool ready() const { return corpus_.has_value(); }

    const Corpus& corpus() const { return *corpus_; }
    const IngestReport& ingest_report() const { return ingest_report_; }
    const EmbeddingTable& embeddings() const { return *embeddings_; }
    bool has_embeddings() const { return embeddings_.has_value(); }
    const std::vector<std::vector<std::string>>& reference_docs() const { return reference_docs_; }
    const std::map<std::string, std::uint64_t>& input_hashes() const { return input_hashes_; }

    const SimilarityMatrix& similarity(double alpha_word);
    const EntityRelatedMap& entity_related(double alpha_ent);

private:
    std::optional<Corpus> corpus_;
    IngestReport ingest_report_;
    std::optional<EmbeddingTable> embeddings_;
    std::vector<std::vector<std::string>> reference_docs_;
    std::map<std::string, std::uint64_t> input_hashes_;
    std::map<double, SimilarityMatrix> sim_by_alpha_;
    std::map<double, EntityRelatedMap> related_by_alpha_;
};

// Full run at the config's (alpha_word, alpha_ent) for every K. Writes topic
// lists, model dumps, coherence reports, and a reproducibility manifest under
// the given directory; removes it again if any stage fails.
RunRecord run_pipeline(const PipelineConfig& config);
RunRecord run_point(const PipelineConfig& config, StageCache& cache, double alpha_word,
                    double alpha_ent, const std::string& out_dir, bool with_scoring = true);

// Grid sweep over (alpha_word_grid x alpha_ent_grid) sharing ingest,
// embeddings, and per-alpha artifacts. Emits a comparison table.
std::vector<RunRecord> sweep(const PipelineConfig& config);

}  // namespace neice
