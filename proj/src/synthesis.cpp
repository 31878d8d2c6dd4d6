#include "neice/synthesis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace neice {

namespace {

std::string suffix26(int j) {
    std::string s;
    s.push_back(static_cast<char>('a' + (j / 26) % 26));
    s.push_back(static_cast<char>('a' + j % 26));
    return s;
}

std::string block_term(int block, int j) {
    return std::string(1, static_cast<char>('a' + block)) + "w" + suffix26(j);
}

std::string shared_term(int j) { return "zs" + suffix26(j); }

std::string mention_token(int block) {
    return std::string("xent") + static_cast<char>('a' + block);
}

}  // namespace

SynthCorpus generate_synthetic(const SynthOptions& opts) {
    if (opts.n_topics < 1 || opts.n_topics > 24)
        throw ConfigError("synth: n_topics must be in [1,24]");
    if (opts.n_docs < 1 || opts.terms_per_topic < 1 || opts.doc_len < 4)
        throw ConfigError("synth: bad corpus dimensions (doc_len must be >= 4)");

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> pick_term(0, opts.terms_per_topic - 1);

    SynthCorpus out;
    for (int b = 0; b < opts.n_topics; ++b) {
        std::vector<std::string> terms;
        for (int j = 0; j < opts.terms_per_topic; ++j) terms.push_back(block_term(b, j));
        out.block_terms.push_back(std::move(terms));
        out.entity_ids.push_back(std::string("Entity_") + static_cast<char>('A' + b));
    }
    for (int j = 0; j < opts.shared_terms; ++j) out.shared_pool.push_back(shared_term(j));

    // Embeddings: block centers are one-hot axes; block terms sit near their
    // center, shared terms between two consecutive centers, entities exactly
    // on their center.
    const int dim = opts.n_topics + opts.embedding_dim_extra;
    auto make_vector = [&](const Eigen::VectorXd& center) {
        Eigen::VectorXd v = center;
        for (int i = 0; i < dim; ++i) v[i] += opts.embedding_noise * gauss(rng);
        v.normalize();
        return v;
    };
    auto format_line = [&](const std::string& token, const Eigen::VectorXd& v) {
        std::ostringstream os;
        os.precision(9);
        os << token;
        for (int i = 0; i < dim; ++i) os << ' ' << v[i];
        return os.str();
    };

    std::vector<std::string> body;
    for (int b = 0; b < opts.n_topics; ++b) {
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
        center[b] = 1.0;
        for (const auto& t : out.block_terms[static_cast<std::size_t>(b)])
            body.push_back(format_line(t, make_vector(center)));
        body.push_back(format_line("ENTITY/" + out.entity_ids[static_cast<std::size_t>(b)], center));
    }
    for (int j = 0; j < opts.shared_terms; ++j) {
        const int b1 = opts.n_topics == 1 ? 0 : j % opts.n_topics;
        const int b2 = opts.n_topics == 1 ? 0 : (b1 + 1) % opts.n_topics;
        Eigen::VectorXd center = Eigen::VectorXd::Zero(dim);
        center[b1] = M_SQRT1_2;
        center[b2] = M_SQRT1_2;
        body.push_back(format_line(out.shared_pool[static_cast<std::size_t>(j)],
                                   make_vector(center)));
    }
    out.embedding_lines.push_back(std::to_string(body.size()) + " " + std::to_string(dim));
    out.embedding_lines.insert(out.embedding_lines.end(), body.begin(), body.end());

    // Pool terms eligible per block: those whose center pair involves it.
    std::vector<std::vector<int>> pool_of_block(static_cast<std::size_t>(opts.n_topics));
    for (int j = 0; j < opts.shared_terms; ++j) {
        const int b1 = opts.n_topics == 1 ? 0 : j % opts.n_topics;
        const int b2 = opts.n_topics == 1 ? 0 : (b1 + 1) % opts.n_topics;
        pool_of_block[static_cast<std::size_t>(b1)].push_back(j);
        if (b2 != b1) pool_of_block[static_cast<std::size_t>(b2)].push_back(j);
    }

    for (int d = 0; d < opts.n_docs; ++d) {
        const int b = d % opts.n_topics;
        const auto& pool = pool_of_block[static_cast<std::size_t>(b)];
        std::vector<std::string> tokens;
        for (int i = 0; i < opts.doc_len; ++i) {
            if (!pool.empty() && unif(rng) < opts.ambiguous_rate) {
                std::uniform_int_distribution<std::size_t> pick_shared(0, pool.size() - 1);
                tokens.push_back(
                    out.shared_pool[static_cast<std::size_t>(pool[pick_shared(rng)])]);
            } else {
                tokens.push_back(out.block_terms[static_cast<std::size_t>(b)]
                                                [static_cast<std::size_t>(pick_term(rng))]);
            }
        }

        RawDocument doc;
        doc.id = "doc" + std::to_string(d);
        doc.title = tokens[0] + " " + tokens[1] + " " + tokens[2];
        std::string descr;
        for (std::size_t i = 3; i < tokens.size(); ++i) {
            if (!descr.empty()) descr += ' ';
            descr += tokens[i];
        }
        if (opts.with_entities) {
            const std::string mention = mention_token(b);
            const int start = static_cast<int>(descr.size()) + 1;
            descr += ' ' + mention;
            EntityAnnotation a;
            a.doc_id = doc.id;
            a.field = "description";
            a.start = start;
            a.end = start + static_cast<int>(mention.size());
            a.entity_id = out.entity_ids[static_cast<std::size_t>(b)];
            a.confidence = opts.entity_confidence;
            out.annotations.push_back(std::move(a));
        }
        doc.description = std::move(descr);
        out.documents.push_back(std::move(doc));
        out.doc_block.push_back(b);
    }
    return out;
}

void SynthCorpus::write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/corpus.jsonl");
        if (!out) throw DataError("cannot write " + dir + "/corpus.jsonl");
        for (const auto& d : documents)
            out << nlohmann::json{{"id", d.id}, {"title", d.title}, {"description", d.description}}
                       .dump()
                << '\n';
    }
    {
        std::ofstream out(dir + "/annotations.jsonl");
        if (!out) throw DataError("cannot write " + dir + "/annotations.jsonl");
        for (const auto& a : annotations)
            out << nlohmann::json{{"doc_id", a.doc_id}, {"field", a.field},     {"start", a.start},
                                  {"end", a.end},       {"entity_id", a.entity_id},
                                  {"confidence", a.confidence}}
                       .dump()
                << '\n';
    }
    {
        std::ofstream out(dir + "/embeddings.txt");
        if (!out) throw DataError("cannot write " + dir + "/embeddings.txt");
        for (const auto& line : embedding_lines) out << line << '\n';
    }
}

double topic_purity(const std::vector<std::string>& top_terms,
                    const std::vector<std::vector<std::string>>& block_terms) {
    if (top_terms.empty()) return 0.0;
    std::vector<int> hits(block_terms.size(), 0);
    for (const auto& term : top_terms)
        for (std::size_t b = 0; b < block_terms.size(); ++b)
            if (std::find(block_terms[b].begin(), block_terms[b].end(), term) !=
                block_terms[b].end())
                ++hits[b];
    const int best = *std::max_element(hits.begin(), hits.end());
    return static_cast<double>(best) / static_cast<double>(top_terms.size());
}

}  // namespace neice
