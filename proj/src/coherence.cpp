#include "neice/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace neice {

namespace {

constexpr double kJointSmoothing = 1e-12;  // added to joint p before logs

std::string pair_key(const std::string& a, const std::string& b) {
    return a < b ? a + '\t' + b : b + '\t' + a;
}

}  // namespace

std::int64_t CooccurrenceIndex::term_count(const std::string& t) const {
    auto it = term_counts.find(t);
    return it == term_counts.end() ? 0 : it->second;
}

std::int64_t CooccurrenceIndex::pair_count(const std::string& a, const std::string& b) const {
    auto it = pair_counts.find(pair_key(a, b));
    return it == pair_counts.end() ? 0 : it->second;
}

CooccurrenceIndex build_index(const std::vector<std::vector<std::string>>& docs, int window_size,
                              const WordSet* filter) {
    if (window_size < 1) throw ConfigError("window_size must be >= 1");
    if (docs.empty()) throw DataError("reference corpus is empty");

    CooccurrenceIndex index;
    index.window_size = window_size;
    for (const auto& doc : docs) {
        if (doc.empty()) continue;
        const int n = static_cast<int>(doc.size());
        const int n_windows = std::max(1, n - window_size + 1);
        for (int w0 = 0; w0 < n_windows; ++w0) {
            ++index.window_count;
            const int w1 = std::min(w0 + window_size, n);
            std::set<std::string> seen;  // ordered: deterministic pair iteration
            for (int i = w0; i < w1; ++i) {
                if (filter && !filter->count(doc[static_cast<std::size_t>(i)])) continue;
                seen.insert(doc[static_cast<std::size_t>(i)]);
            }
            for (auto it = seen.begin(); it != seen.end(); ++it) {
                ++index.term_counts[*it];
                for (auto jt = std::next(it); jt != seen.end(); ++jt)
                    ++index.pair_counts[pair_key(*it, *jt)];
            }
        }
    }
    if (index.window_count == 0) throw DataError("reference corpus has no usable windows");
    return index;
}

double npmi(const CooccurrenceIndex& index, const std::string& a, const std::string& b,
            CoherenceDiagnostics* diag) {
    const double n = static_cast<double>(index.window_count);
    const double pa = static_cast<double>(index.term_count(a)) / n;
    const double pb = static_cast<double>(index.term_count(b)) / n;
    if (pa <= 0.0 || pb <= 0.0) {
        if (diag) ++diag->degenerate_pairs;
        return 0.0;
    }
    if (a == b) return 1.0;
    const double pj = static_cast<double>(index.pair_count(a, b)) / n + kJointSmoothing;
    const double denom = -std::log(pj);
    if (denom <= 0.0) {  // joint probability 1: NPMI undefined
        if (diag) ++diag->degenerate_pairs;
        return 0.0;
    }
    return std::log(pj / (pa * pb)) / denom;
}

double cv_topic(const CooccurrenceIndex& index, const std::vector<std::string>& top_terms,
                CoherenceDiagnostics* diag) {
    const int t = static_cast<int>(top_terms.size());
    if (t < 2) throw ConfigError("cv_topic requires at least 2 top terms");

    Eigen::MatrixXd vec(t, t);  // row i = NPMI vector of term i (j = i included)
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < t; ++j)
            vec(i, j) = npmi(index, top_terms[static_cast<std::size_t>(i)],
                             top_terms[static_cast<std::size_t>(j)], diag);

    const Eigen::VectorXd agg = vec.colwise().sum();  // v_NPMI(t_{1:T})
    const double agg_norm = agg.norm();
    double acc = 0.0;
    for (int i = 0; i < t; ++i) {
        const double vi_norm = vec.row(i).norm();
        if (vi_norm <= 0.0 || agg_norm <= 0.0) {
            if (diag) ++diag->zero_norm_vectors;
            continue;  // contribution 0
        }
        acc += vec.row(i).dot(agg) / (vi_norm * agg_norm);
    }
    return acc / t;
}

CoherenceReport score_model(const CooccurrenceIndex& index,
                            const std::vector<TopicSummary>& summaries) {
    if (summaries.empty()) throw ConfigError("score_model: no topics given");
    CoherenceReport report;
    std::set<std::string> missing;
    for (const auto& summary : summaries) {
        std::vector<std::string> terms;
        for (const auto& [term, weight] : summary.top_terms) {
            terms.push_back(term);
            if (index.term_count(term) == 0) missing.insert(term);
        }
        report.topics.push_back(terms);
        report.topic_cv.push_back(cv_topic(index, terms, &report.diagnostics));
    }
    report.diagnostics.missing_terms.assign(missing.begin(), missing.end());
    double sum = 0.0;
    for (double cv : report.topic_cv) sum += cv;
    report.mean_cv = sum / static_cast<double>(report.topic_cv.size());
    return report;
}

void save_report_json(const CoherenceReport& report, const std::string& path) {
    nlohmann::json j;
    j["mean_cv"] = report.mean_cv;
    j["topics"] = nlohmann::json::array();
    for (std::size_t k = 0; k < report.topic_cv.size(); ++k)
        j["topics"].push_back({{"topic", k},
                               {"cv", report.topic_cv[k]},
                               {"top_words", report.topics[k]}});
    j["diagnostics"] = {{"missing_terms", report.diagnostics.missing_terms},
                        {"zero_norm_vectors", report.diagnostics.zero_norm_vectors},
                        {"degenerate_pairs", report.diagnostics.degenerate_pairs}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write coherence report: " + path);
    out << j.dump(2) << '\n';
}

namespace {

void write_string(std::ofstream& out, const std::string& s) {
    std::uint32_t n = static_cast<std::uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(s.data(), n);
}

std::string read_string(std::ifstream& in) {
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw DataError("truncated co-occurrence index cache");
    return s;
}

}  // namespace

void save_index(const CooccurrenceIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write index cache: " + path);
    const char magic[8] = {'N', 'E', 'C', 'O', 'I', 'D', 'X', '1'};
    out.write(magic, sizeof magic);
    out.write(reinterpret_cast<const char*>(&index.window_count), sizeof index.window_count);
    out.write(reinterpret_cast<const char*>(&index.window_size), sizeof index.window_size);
    std::uint64_t nt = index.term_counts.size(), np = index.pair_counts.size();
    out.write(reinterpret_cast<const char*>(&nt), sizeof nt);
    out.write(reinterpret_cast<const char*>(&np), sizeof np);
    for (const auto& [k, v] : index.term_counts) {
        write_string(out, k);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    for (const auto& [k, v] : index.pair_counts) {
        write_string(out, k);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

CooccurrenceIndex load_index(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open index cache: " + path);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::string(magic, 8) != "NECOIDX1")
        throw DataError("bad index cache magic: " + path);
    CooccurrenceIndex index;
    in.read(reinterpret_cast<char*>(&index.window_count), sizeof index.window_count);
    in.read(reinterpret_cast<char*>(&index.window_size), sizeof index.window_size);
    std::uint64_t nt = 0, np = 0;
    in.read(reinterpret_cast<char*>(&nt), sizeof nt);
    in.read(reinterpret_cast<char*>(&np), sizeof np);
    for (std::uint64_t i = 0; i < nt; ++i) {
        std::string k = read_string(in);
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        index.term_counts[k] = v;
    }
    for (std::uint64_t i = 0; i < np; ++i) {
        std::string k = read_string(in);
        std::int64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        index.pair_counts[k] = v;
    }
    if (!in) throw DataError("truncated index cache: " + path);
    return index;
}

std::string index_cache_name(std::uint64_t corpus_hash, int window_size,
                             std::uint64_t filter_hash) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "coidx_%016llx_w%d_%016llx.bin",
                  static_cast<unsigned long long>(corpus_hash), window_size,
                  static_cast<unsigned long long>(filter_hash));
    return buf;
}

}  // namespace neice
