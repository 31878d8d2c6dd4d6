#include "neice/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace neice {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string alpha_tag(double a) {
    std::ostringstream os;
    os << a;
    std::string s = os.str();
    std::replace(s.begin(), s.end(), '.', 'p');
    return s;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    PipelineConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ": expected key = value on line " + std::to_string(line_no));
        config.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return config;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
    try {
        if (key == "corpus") corpus_path = value;
        else if (key == "annotations") annotations_path = value;
        else if (key == "embeddings") embeddings_path = value;
        else if (key == "stopwords") stopwords_path = value;
        else if (key == "names") names_path = value;
        else if (key == "reference") reference_path = value;
        else if (key == "output") output_dir = value;
        else if (key == "representation") representation = repr_kind_from_string(value);
        else if (key == "alpha_word") alpha_word = std::stod(value);
        else if (key == "alpha_ent") alpha_ent = std::stod(value);
        else if (key == "k") {
            k_values.clear();
            for (const auto& v : split_list(value)) k_values.push_back(std::stoi(v));
        } else if (key == "t") top_t = std::stoi(value);
        else if (key == "min_term_freq") min_term_freq = std::stoi(value);
        else if (key == "min_confidence") min_confidence = std::stod(value);
        else if (key == "window_size") window_size = std::stoi(value);
        else if (key == "dedup_titles") dedup_titles = (value == "true" || value == "1");
        else if (key == "normalize_rows") normalize_rows = (value == "true" || value == "1");
        else if (key == "entity_prefix") entity_prefix = value;
        else if (key == "max_iter") nmf.max_iter = std::stoi(value);
        else if (key == "tol") nmf.tol = std::stod(value);
        else if (key == "seed") nmf.seed = std::stoull(value);
        else if (key == "init")
            nmf.init = value == "random" ? NmfOptions::Init::random : NmfOptions::Init::nndsvd;
        else if (key == "alpha_word_grid") {
            alpha_word_grid.clear();
            for (const auto& v : split_list(value)) alpha_word_grid.push_back(std::stod(v));
        } else if (key == "alpha_ent_grid") {
            alpha_ent_grid.clear();
            for (const auto& v : split_list(value)) alpha_ent_grid.push_back(std::stod(v));
        } else if (key == "jobs") parallel_jobs = std::stoi(value);
        else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
        throw ConfigError("bad value for config key " + key + ": " + value);
    } catch (const std::out_of_range&) {
        throw ConfigError("bad value for config key " + key + ": " + value);
    }
}

void PipelineConfig::validate() const {
    if (corpus_path.empty()) throw ConfigError("corpus path is required");
    if (alpha_word < 0.0 || alpha_word >= 1.0) throw ConfigError("alpha_word must be in [0,1)");
    if (alpha_ent < 0.0 || alpha_ent >= 1.0) throw ConfigError("alpha_ent must be in [0,1)");
    if (k_values.empty()) throw ConfigError("at least one K value is required");
    for (int k : k_values)
        if (k < 2) throw ConfigError("K values must be >= 2");
    if (top_t < 2) throw ConfigError("T must be >= 2");
    if (min_term_freq < 1) throw ConfigError("min_term_freq must be >= 1");
    if (min_confidence < 0.0 || min_confidence > 1.0)
        throw ConfigError("min_confidence must be in [0,1]");
    if (window_size < 1) throw ConfigError("window_size must be >= 1");
    if (representation != ReprKind::tfidf && embeddings_path.empty())
        throw ConfigError("embeddings path is required for representation=" +
                          to_string(representation));
    if (parallel_jobs < 1) throw ConfigError("jobs must be >= 1");
}

nlohmann::json PipelineConfig::to_json() const {
    return nlohmann::json{{"corpus", corpus_path},
                          {"annotations", annotations_path},
                          {"embeddings", embeddings_path},
                          {"stopwords", stopwords_path},
                          {"names", names_path},
                          {"reference", reference_path},
                          {"output", output_dir},
                          {"representation", to_string(representation)},
                          {"alpha_word", alpha_word},
                          {"alpha_ent", alpha_ent},
                          {"k", k_values},
                          {"t", top_t},
                          {"min_term_freq", min_term_freq},
                          {"min_confidence", min_confidence},
                          {"window_size", window_size},
                          {"dedup_titles", dedup_titles},
                          {"normalize_rows", normalize_rows},
                          {"entity_prefix", entity_prefix},
                          {"max_iter", nmf.max_iter},
                          {"tol", nmf.tol},
                          {"seed", nmf.seed},
                          {"init", nmf.init == NmfOptions::Init::random ? "random" : "nndsvd"},
                          {"alpha_word_grid", alpha_word_grid},
                          {"alpha_ent_grid", alpha_ent_grid},
                          {"jobs", parallel_jobs}};
}

DatasetStats dataset_stats(const Corpus& corpus) {
    DatasetStats stats;
    stats.n_docs = corpus.n_docs();
    stats.vocab_size = corpus.vocab.size();
    for (const auto& mentions : corpus.doc_entity_mentions) {
        stats.ne_mentions += static_cast<std::int64_t>(mentions.size());
        if (!mentions.empty()) ++stats.docs_with_ne;
    }
    stats.mean_title_words = corpus.mean_title_words;
    stats.mean_description_words = corpus.mean_description_words;
    return stats;
}

void StageCache::prepare(const PipelineConfig& config) {
    if (corpus_) return;
    config.validate();

    PreprocessConfig pre;
    if (!config.stopwords_path.empty()) pre.stopwords = load_word_list(config.stopwords_path);
    if (!config.names_path.empty()) pre.name_list = load_word_list(config.names_path);
    pre.min_term_freq = config.min_term_freq;
    pre.min_confidence = config.min_confidence;
    pre.dedup_titles = config.dedup_titles;

    auto raw = read_corpus_jsonl(config.corpus_path);
    input_hashes_["corpus"] = hash_file(config.corpus_path);
    std::vector<EntityAnnotation> annotations;
    if (!config.annotations_path.empty()) {
        annotations = read_annotations_jsonl(config.annotations_path);
        input_hashes_["annotations"] = hash_file(config.annotations_path);
    }
    corpus_ = build_corpus(raw, annotations, pre, ingest_report_);

    if (!config.embeddings_path.empty()) {
        std::set<std::string> entity_set;
        for (const auto& es : corpus_->doc_entities) entity_set.insert(es.begin(), es.end());
        std::vector<std::string> entities(entity_set.begin(), entity_set.end());
        EmbeddingLoadStats estats;
        embeddings_ = load_embeddings(config.embeddings_path, corpus_->vocab, entities,
                                      config.entity_prefix, &estats);
        input_hashes_["embeddings"] = hash_file(config.embeddings_path);
    }

    if (config.reference_path.empty()) {
        // Score against the modeling corpus itself.
        for (const auto& doc : corpus_->docs) {
            std::vector<std::string> tokens;
            for (int t : doc) tokens.push_back(corpus_->vocab.term(t));
            reference_docs_.push_back(std::move(tokens));
        }
    } else {
        input_hashes_["reference"] = hash_file(config.reference_path);
        if (config.reference_path.ends_with(".jsonl")) {
            for (const auto& d : read_corpus_jsonl(config.reference_path))
                reference_docs_.push_back(tokenize(d.title + " " + d.description, pre.stopwords));
        } else {
            std::ifstream in(config.reference_path);
            if (!in) throw DataError("cannot open reference corpus: " + config.reference_path);
            std::string line;
            while (std::getline(in, line))
                if (auto toks = tokenize(line, pre.stopwords); !toks.empty())
                    reference_docs_.push_back(std::move(toks));
        }
        if (reference_docs_.empty()) throw DataError("reference corpus is empty");
    }
}

const SimilarityMatrix& StageCache::similarity(double alpha_word) {
    auto it = sim_by_alpha_.find(alpha_word);
    if (it == sim_by_alpha_.end()) {
        if (!embeddings_) throw ConfigError("similarity matrix requested without embeddings");
        it = sim_by_alpha_
                 .emplace(alpha_word, build_similarity_matrix(*embeddings_, corpus_->vocab,
                                                              alpha_word))
                 .first;
    }
    return it->second;
}

const EntityRelatedMap& StageCache::entity_related(double alpha_ent) {
    auto it = related_by_alpha_.find(alpha_ent);
    if (it == related_by_alpha_.end()) {
        EntityRelatedMap map;
        if (embeddings_) {
            std::set<std::string> entity_set;
            for (const auto& es : corpus_->doc_entities) entity_set.insert(es.begin(), es.end());
            for (const auto& e : entity_set) {
                auto related = entity_related_words(*embeddings_, corpus_->vocab, e, alpha_ent);
                if (!related.empty()) map.emplace(e, std::move(related));
            }
        }
        it = related_by_alpha_.emplace(alpha_ent, std::move(map)).first;
    }
    return it->second;
}

namespace {

SpMat l1_normalize_rows(const SpMat& m) {
    SpMat out = m;
    for (int d = 0; d < out.outerSize(); ++d) {
        double sum = 0.0;
        for (SpMat::InnerIterator it(out, d); it; ++it) sum += it.value();
        if (sum > 0.0)
            for (SpMat::InnerIterator it(out, d); it; ++it) it.valueRef() /= sum;
    }
    return out;
}

void write_topic_files(const std::string& dir, int k,
                       const std::vector<TopicSummary>& summaries) {
    std::ofstream txt(dir + "/topics_k" + std::to_string(k) + ".txt");
    if (!txt) throw DataError("cannot write topic list in " + dir);
    for (const auto& s : summaries) {
        for (std::size_t i = 0; i < s.top_terms.size(); ++i)
            txt << (i ? "\t" : "") << s.top_terms[i].first;
        txt << '\n';
    }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : summaries) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& [term, weight] : s.top_terms)
            terms.push_back({{"term", term}, {"weight", weight}});
        j.push_back({{"topic", s.topic_id}, {"terms", terms}});
    }
    std::ofstream js(dir + "/topics_k" + std::to_string(k) + ".json");
    if (!js) throw DataError("cannot write topic json in " + dir);
    js << j.dump(2) << '\n';
}

}  // namespace

RunRecord run_point(const PipelineConfig& config, StageCache& cache, double alpha_word,
                    double alpha_ent, const std::string& out_dir, bool with_scoring) {
    const auto start = std::chrono::steady_clock::now();
    cache.prepare(config);

    RunRecord record;
    record.alpha_word = alpha_word;
    record.alpha_ent = alpha_ent;
    record.representation = config.representation;
    record.output_dir = out_dir;
    record.stats = dataset_stats(cache.corpus());

    fs::create_directories(out_dir);
    try {
        const Corpus& corpus = cache.corpus();

        WeightedDocTermMatrix repr;
        switch (config.representation) {
            case ReprKind::tfidf:
                repr = tf_idf(corpus.bow);
                break;
            case ReprKind::cluwords:
                repr = cluwords(corpus.bow, cache.similarity(alpha_word));
                break;
            case ReprKind::neice:
                repr = neice_matrix(corpus.bow, cache.similarity(alpha_word),
                                    corpus.doc_entities, cache.entity_related(alpha_ent),
                                    alpha_ent);
                break;
        }
        if (config.normalize_rows) repr.m = l1_normalize_rows(repr.m);

        for (int k : config.k_values) {
            TopicModel model = nmf(repr.m, k, config.nmf);
            auto summaries = top_words(model, corpus.vocab, config.top_t);
            write_topic_files(out_dir, k, summaries);
            save_model(out_dir + "/model_k" + std::to_string(k), model,
                       model.loss_trace.back());

            if (with_scoring) {
                WordSet filter;
                for (const auto& s : summaries)
                    for (const auto& [term, weight] : s.top_terms) filter.insert(term);
                CooccurrenceIndex index =
                    build_index(cache.reference_docs(), config.window_size, &filter);
                CoherenceReport report = score_model(index, summaries);
                save_report_json(report, out_dir + "/coherence_k" + std::to_string(k) + ".json");
                record.coherence_by_k[k] = std::move(report);
            }
            record.topics_by_k[k] = std::move(summaries);
        }

        nlohmann::json manifest;
        manifest["config"] = config.to_json();
        // The manifest must be identical for reruns regardless of where they
        // are written, so the output location is not part of it.
        manifest["config"].erase("output");
        manifest["alpha_word"] = alpha_word;
        manifest["alpha_ent"] = alpha_ent;
        manifest["seed"] = config.nmf.seed;
        for (const auto& [name, h] : cache.input_hashes()) {
            std::ostringstream os;
            os << std::hex << h;
            manifest["input_hashes"][name] = os.str();
        }
        manifest["stats"] = {{"n_docs", record.stats.n_docs},
                             {"vocab_size", record.stats.vocab_size},
                             {"ne_mentions", record.stats.ne_mentions},
                             {"docs_with_ne", record.stats.docs_with_ne},
                             {"mean_title_words", record.stats.mean_title_words},
                             {"mean_description_words", record.stats.mean_description_words}};
        std::ofstream mf(out_dir + "/manifest.json");
        if (!mf) throw DataError("cannot write manifest in " + out_dir);
        mf << manifest.dump(2) << '\n';
    } catch (...) {
        fs::remove_all(out_dir);  // no partial outputs
        throw;
    }

    record.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream tf(out_dir + "/timings.json");
    tf << nlohmann::json{{"elapsed_seconds", record.elapsed_seconds}}.dump(2) << '\n';
    return record;
}

RunRecord run_pipeline(const PipelineConfig& config) {
    StageCache cache;
    return run_point(config, cache, config.alpha_word, config.alpha_ent, config.output_dir);
}

std::vector<RunRecord> sweep(const PipelineConfig& config) {
    config.validate();
    if (config.alpha_word_grid.empty()) throw ConfigError("alpha_word_grid is empty");
    if (config.representation == ReprKind::neice && config.alpha_ent_grid.empty())
        throw ConfigError("alpha_ent_grid is empty");

    StageCache cache;
    cache.prepare(config);

    // Grid points as (alpha_word, alpha_ent); non-entity representations
    // ignore alpha_ent and sweep alpha_word only.
    std::vector<std::pair<double, double>> points;
    if (config.representation == ReprKind::neice) {
        for (double aw : config.alpha_word_grid)
            for (double ae : config.alpha_ent_grid) points.emplace_back(aw, ae);
    } else if (config.representation == ReprKind::cluwords) {
        for (double aw : config.alpha_word_grid) points.emplace_back(aw, 0.0);
    } else {
        points.emplace_back(0.0, 0.0);
    }

    // Shared artifacts are built up-front so grid points only factorize and
    // score; afterwards the cache is read-only.
    if (config.representation != ReprKind::tfidf)
        for (const auto& [aw, ae] : points) {
            cache.similarity(aw);
            if (config.representation == ReprKind::neice) cache.entity_related(ae);
        }

    std::vector<RunRecord> records(points.size());
    auto run_one = [&](std::size_t i) {
        const auto& [aw, ae] = points[i];
        std::string dir = config.output_dir + "/run_aw" + alpha_tag(aw);
        if (config.representation == ReprKind::neice) dir += "_ae" + alpha_tag(ae);
        try {
            records[i] = run_point(config, cache, aw, ae, dir);
        } catch (const std::exception& ex) {
            records[i].alpha_word = aw;
            records[i].alpha_ent = ae;
            records[i].failed = true;
            records[i].error = ex.what();
        }
    };

    if (config.parallel_jobs > 1 && points.size() > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const auto n_threads =
            std::min<std::size_t>(static_cast<std::size_t>(config.parallel_jobs), points.size());
        for (std::size_t w = 0; w < n_threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < points.size();) run_one(i);
            });
        for (auto& th : pool) th.join();
    } else {
        for (std::size_t i = 0; i < points.size(); ++i) run_one(i);
    }

    // Comparison table: rows = parameter pairs, columns = K, cells = mean C_V.
    fs::create_directories(config.output_dir);
    std::ofstream table(config.output_dir + "/sweep_table.tsv");
    table << "alpha_word\talpha_ent";
    for (int k : config.k_values) table << "\tK=" << k;
    table << '\n';
    table << std::fixed;
    table.precision(4);
    nlohmann::json sweep_json = nlohmann::json::array();
    for (const auto& r : records) {
        table << r.alpha_word << '\t' << r.alpha_ent;
        nlohmann::json row{{"alpha_word", r.alpha_word},
                           {"alpha_ent", r.alpha_ent},
                           {"failed", r.failed}};
        if (r.failed) row["error"] = r.error;
        for (int k : config.k_values) {
            if (r.failed || !r.coherence_by_k.count(k)) {
                table << "\t-";
            } else {
                table << '\t' << r.coherence_by_k.at(k).mean_cv;
                row["mean_cv"][std::to_string(k)] = r.coherence_by_k.at(k).mean_cv;
            }
        }
        table << '\n';
        sweep_json.push_back(std::move(row));
    }
    std::ofstream js(config.output_dir + "/sweep.json");
    js << sweep_json.dump(2) << '\n';
    return records;
}

}  // namespace neice
