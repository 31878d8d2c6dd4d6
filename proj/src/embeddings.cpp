#include "neice/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

namespace neice {

EmbeddingTable::EmbeddingTable(int dim, Eigen::MatrixXd vectors,
                               std::unordered_map<std::string, int> word_rows,
                               std::unordered_map<std::string, int> entity_rows)
    : dim_(dim),
      vectors_(std::move(vectors)),
      word_rows_(std::move(word_rows)),
      entity_rows_(std::move(entity_rows)) {}

std::optional<Eigen::VectorXd> EmbeddingTable::word_vector(const std::string& w) const {
    auto it = word_rows_.find(w);
    if (it == word_rows_.end()) return std::nullopt;
    return vectors_.row(it->second).transpose();
}

std::optional<Eigen::VectorXd> EmbeddingTable::entity_vector(const std::string& e) const {
    auto it = entity_rows_.find(e);
    if (it == entity_rows_.end()) return std::nullopt;
    return vectors_.row(it->second).transpose();
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               const std::vector<std::string>& entities,
                               const std::string& entity_prefix, EmbeddingLoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError("embedding file is empty: " + path);
    std::istringstream hs(header);
    std::size_t count = 0;
    int dim = 0;
    if (!(hs >> count >> dim) || dim <= 0)
        throw DataError("embedding file " + path + ": bad header line");

    WordSet wanted_entities(entities.begin(), entities.end());
    std::vector<Eigen::VectorXd> rows;
    std::unordered_map<std::string, int> word_rows, entity_rows;

    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        bool is_entity = token.rfind(entity_prefix, 0) == 0;
        std::string key = is_entity ? token.substr(entity_prefix.size()) : token;
        bool want = is_entity ? wanted_entities.count(key) > 0 : vocab.index_of(key) >= 0;
        if (!want) continue;
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) {
            if (!(ls >> v[i]))
                throw DataError("embedding file " + path + ": dimension mismatch on line " +
                                std::to_string(line_no));
        }
        double extra;
        if (ls >> extra)
            throw DataError("embedding file " + path + ": dimension mismatch on line " +
                            std::to_string(line_no));
        if (!v.allFinite())
            throw DataError("embedding file " + path + ": non-finite vector on line " +
                            std::to_string(line_no));
        double norm = v.norm();
        if (norm <= 0.0)
            throw DataError("embedding file " + path + ": zero-norm vector on line " +
                            std::to_string(line_no));
        v /= norm;
        auto& target = is_entity ? entity_rows : word_rows;
        if (target.count(key)) continue;  // first occurrence wins
        target[key] = static_cast<int>(rows.size());
        rows.push_back(std::move(v));
    }

    if (word_rows.empty()) throw DataError("embedding file " + path + ": no vocabulary coverage");

    Eigen::MatrixXd m(static_cast<int>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<int>(i)) = rows[i];

    if (stats) {
        stats->file_vectors = count;
        stats->words_loaded = word_rows.size();
        stats->entities_loaded = entity_rows.size();
        stats->vocab_coverage =
            vocab.size() ? static_cast<double>(word_rows.size()) / vocab.size() : 0.0;
        stats->entity_coverage = wanted_entities.empty()
                                     ? 0.0
                                     : static_cast<double>(entity_rows.size()) /
                                           static_cast<double>(wanted_entities.size());
    }
    return EmbeddingTable(dim, std::move(m), std::move(word_rows), std::move(entity_rows));
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw NumericError("cosine: dimension mismatch");
    double nu = u.norm(), nv = v.norm();
    if (nu <= 0.0 || nv <= 0.0) throw NumericError("cosine: zero-norm vector");
    return u.dot(v) / (nu * nv);
}

SimilarityMatrix build_similarity_matrix(const EmbeddingTable& table, const Vocabulary& vocab,
                                         double alpha_word) {
    if (alpha_word < 0.0 || alpha_word >= 1.0) throw ConfigError("alpha_word must be in [0,1)");

    // Rows of N are the normalized vectors of embedded vocabulary terms, so
    // each blocked product N_block * N^T is a slab of exact cosines.
    std::vector<int> term_of_row;  // embedded-row -> vocab term id
    for (int t = 0; t < vocab.size(); ++t)
        if (table.has_word(vocab.term(t))) term_of_row.push_back(t);
    const int n_emb = static_cast<int>(term_of_row.size());

    Eigen::MatrixXd n(n_emb, table.dim());
    for (int i = 0; i < n_emb; ++i) {
        auto it = table.word_rows().find(vocab.term(term_of_row[static_cast<std::size_t>(i)]));
        n.row(i) = table.vectors().row(it->second);
    }

    const int block = 256;
    const int n_blocks = n_emb == 0 ? 0 : (n_emb + block - 1) / block;
    std::vector<std::vector<Eigen::Triplet<double>>> block_trips(
        static_cast<std::size_t>(n_blocks));

    auto work = [&](int b) {
        const int r0 = b * block;
        const int r1 = std::min(r0 + block, n_emb);
        Eigen::MatrixXd slab = n.middleRows(r0, r1 - r0) * n.transpose();
        auto& out = block_trips[static_cast<std::size_t>(b)];
        for (int i = r0; i < r1; ++i) {
            const int t = term_of_row[static_cast<std::size_t>(i)];
            for (int j = 0; j < n_emb; ++j) {
                if (j == i) continue;
                double s = slab(i - r0, j);
                if (s > alpha_word)
                    out.emplace_back(t, term_of_row[static_cast<std::size_t>(j)], s);
            }
        }
    };

    unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    if (n_blocks > 1 && n_threads > 1) {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (unsigned w = 0; w < std::min<unsigned>(n_threads, static_cast<unsigned>(n_blocks));
             ++w)
            pool.emplace_back([&] {
                for (int b; (b = next.fetch_add(1)) < n_blocks;) work(b);
            });
        for (auto& th : pool) th.join();
    } else {
        for (int b = 0; b < n_blocks; ++b) work(b);
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (int t = 0; t < vocab.size(); ++t) trips.emplace_back(t, t, 1.0);
    for (const auto& bt : block_trips) trips.insert(trips.end(), bt.begin(), bt.end());

    SimilarityMatrix sim;
    sim.alpha_word = alpha_word;
    sim.c = SpMat(vocab.size(), vocab.size());
    sim.c.setFromTriplets(trips.begin(), trips.end());
    return sim;
}

std::vector<int> entity_related_words(const EmbeddingTable& table, const Vocabulary& vocab,
                                      const std::string& entity_id, double alpha_ent) {
    if (alpha_ent < 0.0 || alpha_ent >= 1.0) throw ConfigError("alpha_ent must be in [0,1)");
    auto ev = table.entity_vector(entity_id);
    if (!ev) return {};  // unembedded entity contributes nothing
    std::vector<int> related;
    for (int t = 0; t < vocab.size(); ++t) {
        auto it = table.word_rows().find(vocab.term(t));
        if (it == table.word_rows().end()) continue;
        double s = ev->dot(table.vectors().row(it->second));
        if (s >= alpha_ent) related.push_back(t);
    }
    return related;
}

}  // namespace neice
