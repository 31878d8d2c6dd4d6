#include "neice/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

namespace neice {

namespace {

std::string lowercase(std::string s) {
    for (auto& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

void mask_span(std::string& text, int start, int end) {
    for (int i = start; i < end; ++i) text[static_cast<std::size_t>(i)] = ' ';
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    for (std::size_t i = 0; i < terms_.size(); ++i) index_[terms_[i]] = static_cast<int>(i);
    if (index_.size() != terms_.size()) throw DataError("vocabulary contains duplicate terms");
}

int Vocabulary::index_of(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? -1 : it->second;
}

std::vector<RawDocument> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::vector<RawDocument> docs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("id"))
            throw DataError("corpus " + path + ": malformed line " + std::to_string(line_no));
        RawDocument d;
        d.id = j.at("id").get<std::string>();
        d.title = j.value("title", "");
        d.description = j.value("description", "");
        docs.push_back(std::move(d));
    }
    return docs;
}

std::vector<EntityAnnotation> read_annotations_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open annotation file: " + path);
    std::vector<EntityAnnotation> anns;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("doc_id") || !j.contains("field") ||
            !j.contains("start") || !j.contains("end") || !j.contains("entity_id") ||
            !j.contains("confidence"))
            throw DataError("annotations " + path + ": malformed line " + std::to_string(line_no));
        EntityAnnotation a;
        a.doc_id = j.at("doc_id").get<std::string>();
        a.field = j.at("field").get<std::string>();
        a.start = j.at("start").get<int>();
        a.end = j.at("end").get<int>();
        a.entity_id = j.at("entity_id").get<std::string>();
        a.confidence = j.at("confidence").get<double>();
        if (a.field != "title" && a.field != "description")
            throw DataError("annotations " + path + ": bad field on line " + std::to_string(line_no));
        if (a.confidence < 0.0 || a.confidence > 1.0)
            throw DataError("annotations " + path + ": confidence out of range on line " +
                            std::to_string(line_no));
        anns.push_back(std::move(a));
    }
    return anns;
}

std::vector<std::string> tokenize(const RawDocument& raw, const PreprocessConfig& config) {
    return tokenize(raw.title + " " + raw.description, config.stopwords);
}

std::unordered_map<std::string, std::vector<EntityAnnotation>> ingest_annotations(
    const std::vector<EntityAnnotation>& annotations, const std::vector<RawDocument>& docs,
    double min_confidence, IngestReport& report) {
    std::unordered_map<std::string, const RawDocument*> by_id;
    for (const auto& d : docs) by_id[d.id] = &d;

    std::unordered_map<std::string, std::vector<EntityAnnotation>> accepted;
    for (const auto& a : annotations) {
        ++report.annotations_read;
        auto it = by_id.find(a.doc_id);
        if (it == by_id.end()) {
            ++report.unknown_doc_warnings;
            continue;
        }
        const std::string& field = a.field == "title" ? it->second->title : it->second->description;
        if (a.start < 0 || a.end > static_cast<int>(field.size()) || a.start >= a.end)
            throw DataError("annotation span out of bounds for doc " + a.doc_id);
        if (a.confidence > min_confidence) {  // strict: a score equal to the threshold is rejected
            accepted[a.doc_id].push_back(a);
            ++report.annotations_accepted;
        }
    }
    return accepted;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& tokenized_docs,
                            int min_term_freq, const WordSet& name_list,
                            const WordSet& entity_terms) {
    if (min_term_freq < 1) throw ConfigError("min_term_freq must be >= 1");
    std::map<std::string, int> freq;  // ordered: deterministic vocabulary order
    for (const auto& doc : tokenized_docs)
        for (const auto& tok : doc) ++freq[tok];

    std::vector<std::string> terms;
    for (const auto& [term, count] : freq) {
        if (count < min_term_freq) continue;
        if (name_list.count(term) || entity_terms.count(term)) continue;
        terms.push_back(term);
    }
    if (terms.empty()) throw DataError("vocabulary is empty after filtering");
    return Vocabulary(std::move(terms));
}

SpMat build_bow(const std::vector<std::vector<int>>& docs, const Vocabulary& vocab) {
    std::vector<Eigen::Triplet<double>> trips;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        std::map<int, int> counts;
        for (int t : docs[d]) ++counts[t];
        for (const auto& [t, c] : counts)
            trips.emplace_back(static_cast<int>(d), t, static_cast<double>(c));
    }
    SpMat bow(static_cast<int>(docs.size()), vocab.size());
    bow.setFromTriplets(trips.begin(), trips.end());
    return bow;
}

Corpus build_corpus(const std::vector<RawDocument>& raw_docs,
                    const std::vector<EntityAnnotation>& annotations,
                    const PreprocessConfig& config, IngestReport& report) {
    std::vector<const RawDocument*> docs;
    WordSet seen_titles;
    for (const auto& d : raw_docs) {
        ++report.docs_read;
        if (config.dedup_titles && !seen_titles.insert(d.title).second) {
            ++report.dropped_duplicate;
            continue;
        }
        docs.push_back(&d);
    }

    std::vector<RawDocument> kept_raw;  // filtered on token length before annotation masking
    for (const auto* d : docs) {
        if (tokenize(*d, config).size() > 3) {
            kept_raw.push_back(*d);
        } else {
            ++report.dropped_short;
        }
    }

    auto accepted = ingest_annotations(annotations, kept_raw, config.min_confidence, report);

    // Mask accepted mentions out of the word stream, then tokenize.
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(kept_raw.size());
    WordSet entity_terms;
    for (const auto& d : kept_raw) {
        std::string title = d.title, descr = d.description;
        if (auto it = accepted.find(d.id); it != accepted.end()) {
            for (const auto& a : it->second) {
                mask_span(a.field == "title" ? title : descr, a.start, a.end);
                entity_terms.insert(lowercase(a.entity_id));
            }
        }
        tokenized.push_back(tokenize(title + " " + descr, config.stopwords));
    }

    Vocabulary vocab = build_vocabulary(tokenized, config.min_term_freq, config.name_list,
                                        entity_terms);

    Corpus corpus;
    corpus.vocab = vocab;
    std::size_t title_words = 0, descr_words = 0;
    for (std::size_t i = 0; i < kept_raw.size(); ++i) {
        std::vector<int> ids;
        for (const auto& tok : tokenized[i]) {
            int t = vocab.index_of(tok);
            if (t >= 0) ids.push_back(t);
        }
        std::vector<std::string> unique_entities, mentions;
        if (auto it = accepted.find(kept_raw[i].id); it != accepted.end()) {
            for (const auto& a : it->second) mentions.push_back(a.entity_id);
            unique_entities = mentions;
            std::sort(unique_entities.begin(), unique_entities.end());
            unique_entities.erase(std::unique(unique_entities.begin(), unique_entities.end()),
                                  unique_entities.end());
        }
        if (ids.empty() && unique_entities.empty()) {
            ++report.dropped_empty;
            continue;
        }
        corpus.doc_ids.push_back(kept_raw[i].id);
        corpus.docs.push_back(std::move(ids));
        corpus.doc_entities.push_back(std::move(unique_entities));
        corpus.doc_entity_mentions.push_back(std::move(mentions));
        title_words += raw_word_count(kept_raw[i].title);
        descr_words += raw_word_count(kept_raw[i].description);
    }
    if (corpus.docs.empty()) throw DataError("all documents were dropped during ingestion");

    corpus.bow = build_bow(corpus.docs, vocab);
    const double n = static_cast<double>(corpus.docs.size());
    corpus.mean_title_words = static_cast<double>(title_words) / n;
    corpus.mean_description_words = static_cast<double>(descr_words) / n;
    report.docs_kept = corpus.n_docs();
    return corpus;
}

}  // namespace neice
