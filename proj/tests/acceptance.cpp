// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL] line;
// the exit code is nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "neice/pipeline.hpp"
#include "oracle.hpp"
#include "test_helpers.hpp"

using namespace neice;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool ok = true;
    std::ostringstream detail;
};

void require(Criterion& c, bool cond, const std::string& what) {
    if (!cond) {
        c.ok = false;
        if (c.detail.tellp() > 0) c.detail << "; ";
        c.detail << what;
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct IngestedSynth {
    Corpus corpus;
    EmbeddingTable table{1, Eigen::MatrixXd::Ones(1, 1), {{"_", 0}}, {}};
    SynthCorpus synth;
};

IngestedSynth ingest_synth(const SynthOptions& opts, const std::string& dir) {
    IngestedSynth out;
    out.synth = generate_synthetic(opts);
    out.synth.write(dir);
    auto docs = read_corpus_jsonl(dir + "/corpus.jsonl");
    auto anns = read_annotations_jsonl(dir + "/annotations.jsonl");
    PreprocessConfig pre;
    pre.min_term_freq = 2;
    IngestReport report;
    out.corpus = build_corpus(docs, anns, pre, report);
    out.table = load_embeddings(dir + "/embeddings.txt", out.corpus.vocab,
                                out.synth.entity_ids);
    return out;
}

// Max off-diagonal cosine among embedded vocabulary terms.
double max_offdiag_cosine(const EmbeddingTable& table, const Vocabulary& vocab) {
    std::vector<int> rows;
    for (int t = 0; t < vocab.size(); ++t)
        if (auto v = table.word_vector(vocab.term(t))) rows.push_back(t);
    double best = -1.0;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            best = std::max(best, cosine(*table.word_vector(vocab.term(rows[i])),
                                         *table.word_vector(vocab.term(rows[j]))));
    return best;
}

// --- criterion 1: TF-IDF limit case ---------------------------------------
Criterion criterion_tfidf_limit() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    helpers::TempDir dir("acc1");
    SynthOptions opts;
    opts.n_topics = 3;
    opts.n_docs = 50;
    opts.terms_per_topic = 8;
    opts.doc_len = 10;
    opts.seed = 101;
    auto fixture = ingest_synth(opts, dir.str());

    const double cutoff = max_offdiag_cosine(fixture.table, fixture.corpus.vocab);
    const double alpha = std::min(0.999999, cutoff + 1e-9);
    auto sim = build_similarity_matrix(fixture.table, fixture.corpus.vocab, alpha);
    require(c, sim.c.nonZeros() == fixture.corpus.vocab.size(),
            "similarity above the largest cosine must be the identity");

    Eigen::MatrixXd got = helpers::to_dense(cluwords(fixture.corpus.bow, sim).m);
    Eigen::MatrixXd expect = helpers::to_dense(tf_idf(fixture.corpus.bow).m);
    double worst = 0.0;
    for (int d = 0; d < expect.rows(); ++d)
        for (int t = 0; t < expect.cols(); ++t) {
            const double denom = std::max(std::abs(expect(d, t)), 1e-12);
            worst = std::max(worst, std::abs(got(d, t) - expect(d, t)) / denom);
        }
    require(c, worst <= 1e-9, "relative deviation " + std::to_string(worst));
    require(c, seconds_since(t0) < 1.0, "runtime over 1 s");
    return c;
}

// --- criterion 2: entity-free degeneracy -----------------------------------
Criterion criterion_degeneracy() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    helpers::TempDir dir("acc2");
    SynthOptions opts;
    opts.n_topics = 3;
    opts.n_docs = 60;
    opts.terms_per_topic = 8;
    opts.doc_len = 10;
    opts.shared_terms = 4;
    opts.ambiguous_rate = 0.2;
    opts.seed = 202;
    auto fixture = ingest_synth(opts, dir.str());

    auto sim = build_similarity_matrix(fixture.table, fixture.corpus.vocab, 0.3);
    std::vector<std::vector<std::string>> no_entities(fixture.corpus.docs.size());
    auto base = cluwords(fixture.corpus.bow, sim);
    auto ne = neice_matrix(fixture.corpus.bow, sim, no_entities, {}, 0.4);
    require(c, ne.m.nonZeros() == base.m.nonZeros(), "sparsity structure differs");
    require(c, (helpers::to_dense(ne.m) - helpers::to_dense(base.m)).cwiseAbs().maxCoeff() == 0.0,
            "weights are not bitwise identical");

    // End-to-end: topic lists must coincide at a fixed seed.
    helpers::write_file(dir.file("empty.jsonl"), "");
    PipelineConfig config;
    config.corpus_path = dir.file("corpus.jsonl");
    config.embeddings_path = dir.file("embeddings.txt");
    config.alpha_word = 0.3;
    config.alpha_ent = 0.4;
    config.k_values = {3};
    config.top_t = 5;
    config.min_term_freq = 2;
    config.window_size = 20;
    config.nmf.max_iter = 60;

    config.representation = ReprKind::cluwords;
    config.output_dir = dir.file("clu");
    run_pipeline(config);
    config.representation = ReprKind::neice;
    config.annotations_path = dir.file("empty.jsonl");
    config.output_dir = dir.file("ne");
    run_pipeline(config);
    require(c, helpers::read_file(dir.file("clu/topics_k3.txt")) ==
                   helpers::read_file(dir.file("ne/topics_k3.txt")),
            "end-to-end topic lists differ");
    require(c, seconds_since(t0) < 5.0, "runtime over 5 s");
    return c;
}

// --- criterion 3: formula oracle equivalence -------------------------------
Criterion criterion_formula_oracle() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> n_docs_dist(2, 10), n_terms_dist(4, 20), count_dist(0, 3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double worst = 0.0;
    for (int trial = 0; trial < 120 && c.ok; ++trial) {
        const int n_docs = n_docs_dist(rng);
        const int n_terms = n_terms_dist(rng);
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_docs, n_terms);
        for (int d = 0; d < n_docs; ++d)
            for (int t = 0; t < n_terms; ++t)
                if (unif(rng) < 0.4) a(d, t) = count_dist(rng);
        for (int t = 0; t < n_terms; ++t)
            if (a.col(t).sum() == 0) a(t % n_docs, t) = 1;

        Eigen::MatrixXd vectors(n_terms, 6);
        for (int i = 0; i < n_terms; ++i)
            for (int j = 0; j < 6; ++j) vectors(i, j) = unif(rng) - 0.3;
        const double alpha = 0.2 + 0.3 * unif(rng);
        Eigen::MatrixXd cdense = oracle::similarity(vectors, alpha);

        SimilarityMatrix sim;
        sim.alpha_word = alpha;
        sim.c = helpers::to_sparse(cdense);
        auto bow = helpers::to_sparse(a);

        Eigen::MatrixXd got = helpers::to_dense(cluwords(bow, sim).m);
        worst = std::max(worst, (got - oracle::cluwords(a, cdense)).cwiseAbs().maxCoeff());

        for (int d = 0; d < n_docs; ++d)
            for (int t = 0; t < n_terms; ++t)
                worst = std::max(worst, std::abs(compute_mu(bow, sim.c, d, t) -
                                                 oracle::mu(a, cdense, d, t)));

        // One synthetic entity covering a random slice of the vocabulary.
        std::vector<int> e_terms;
        for (int t = 0; t < n_terms; ++t)
            if (unif(rng) < 0.3) e_terms.push_back(t);
        EntityRelatedMap related;
        std::vector<std::vector<std::string>> doc_entities(static_cast<std::size_t>(n_docs));
        std::vector<std::set<int>> doc_entity_terms(static_cast<std::size_t>(n_docs));
        if (!e_terms.empty()) {
            related["E"] = e_terms;
            for (int d = 0; d < n_docs; ++d)
                if (unif(rng) < 0.5) {
                    doc_entities[static_cast<std::size_t>(d)].push_back("E");
                    doc_entity_terms[static_cast<std::size_t>(d)].insert(e_terms.begin(),
                                                                         e_terms.end());
                }
        }
        Eigen::MatrixXd got_ne =
            helpers::to_dense(neice_matrix(bow, sim, doc_entities, related, 0.4).m);
        worst = std::max(worst,
                         (got_ne - oracle::neice(a, cdense, doc_entity_terms)).cwiseAbs().maxCoeff());
        require(c, worst <= 1e-9, "trial " + std::to_string(trial) + " deviation " +
                                      std::to_string(worst));
    }
    require(c, seconds_since(t0) < 30.0, "runtime over 30 s");
    return c;
}

// --- criterion 4: factorization contract -----------------------------------
Criterion criterion_nmf() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 100 && c.ok; ++trial) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(15, 12);
        for (int i = 0; i < 15; ++i)
            for (int j = 0; j < 12; ++j)
                if (unif(rng) < 0.5) m(i, j) = unif(rng);
        if (m.sum() == 0.0) m(0, 0) = 1.0;
        NmfOptions opts;
        opts.max_iter = 50;
        opts.seed = 9000 + static_cast<std::uint64_t>(trial);
        auto model = nmf(helpers::to_sparse(m), 4, opts);
        const double slack = 1e-9 * model.loss_trace.front();
        for (std::size_t i = 1; i < model.loss_trace.size(); ++i)
            require(c, model.loss_trace[i] <= model.loss_trace[i - 1] + slack,
                    "loss increased on trial " + std::to_string(trial));
    }

    Eigen::VectorXd h(10), w(8);
    for (int i = 0; i < 10; ++i) h(i) = 0.2 + unif(rng);
    for (int j = 0; j < 8; ++j) w(j) = 0.2 + unif(rng);
    Eigen::MatrixXd rank1 = h * w.transpose();
    auto model = nmf(helpers::to_sparse(rank1), 1, {});
    const double rel = (model.h * model.w - rank1).norm() / rank1.norm();
    require(c, rel < 1e-3, "rank-1 relative error " + std::to_string(rel));
    require(c, seconds_since(t0) < 30.0, "runtime over 30 s");
    return c;
}

// --- criterion 5: planted-topic recovery -----------------------------------
Criterion criterion_planted_recovery() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthOptions opts;
        opts.n_topics = 3;
        opts.n_docs = 200;
        opts.terms_per_topic = 20;  // 60 planted terms
        opts.doc_len = 12;
        opts.seed = seed;
        auto synth = generate_synthetic(opts);

        std::vector<std::vector<std::string>> tokenized;
        for (const auto& d : synth.documents)
            tokenized.push_back(tokenize(d.title + " " + d.description, {}));
        auto vocab = build_vocabulary(tokenized, 1, {});
        std::vector<std::vector<int>> docs;
        for (const auto& toks : tokenized) {
            std::vector<int> ids;
            for (const auto& t : toks) ids.push_back(vocab.index_of(t));
            docs.push_back(std::move(ids));
        }
        auto weighted = tf_idf(build_bow(docs, vocab));
        NmfOptions opts_nmf;
        opts_nmf.seed = seed;
        auto model = nmf(weighted.m, 3, opts_nmf);
        for (const auto& summary : top_words(model, vocab, 10)) {
            std::vector<std::string> terms;
            for (const auto& [t, wgt] : summary.top_terms) terms.push_back(t);
            const double purity = topic_purity(terms, synth.block_terms);
            require(c, purity >= 0.9,
                    "seed " + std::to_string(seed) + " topic " +
                        std::to_string(summary.topic_id) + " purity " + std::to_string(purity));
        }
    }
    require(c, seconds_since(t0) < 30.0, "runtime over 30 s");
    return c;
}

// --- criterion 6: entity boost improves coherence --------------------------
Criterion criterion_entity_boost() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    int wins = 0;
    std::ostringstream scores;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        helpers::TempDir dir("acc6_" + std::to_string(seed));
        SynthOptions opts;
        opts.n_topics = 3;
        opts.n_docs = 200;
        opts.terms_per_topic = 10;
        opts.doc_len = 12;
        opts.shared_terms = 10;
        opts.ambiguous_rate = 0.35;
        opts.with_entities = true;
        opts.seed = seed;
        generate_synthetic(opts).write(dir.str());

        PipelineConfig config;
        config.corpus_path = dir.file("corpus.jsonl");
        config.annotations_path = dir.file("annotations.jsonl");
        config.embeddings_path = dir.file("embeddings.txt");
        config.alpha_word = 0.3;
        config.alpha_ent = 0.8;
        config.k_values = {3};
        config.top_t = 10;
        config.min_term_freq = 2;
        config.nmf.seed = seed;

        config.representation = ReprKind::cluwords;
        config.output_dir = dir.file("clu");
        RunRecord clu = run_pipeline(config);
        config.representation = ReprKind::neice;
        config.output_dir = dir.file("ne");
        RunRecord ne = run_pipeline(config);

        const double cv_clu = clu.coherence_by_k.at(3).mean_cv;
        const double cv_ne = ne.coherence_by_k.at(3).mean_cv;
        if (cv_ne > cv_clu) ++wins;
        scores << " seed " << seed << ": " << cv_ne << (cv_ne > cv_clu ? " > " : " <= ")
               << cv_clu;
    }
    require(c, wins >= 8, "only " + std::to_string(wins) + "/10 wins;" + scores.str());
    require(c, seconds_since(t0) < 120.0, "runtime over 2 min");
    return c;
}

// --- criterion 7: coherence oracle -----------------------------------------
Criterion criterion_coherence_oracle() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();

    // Three-document reference: windows {a b}, {a}, {b}.
    CooccurrenceIndex idx = build_index({{"a", "b"}, {"a"}, {"b"}}, 110);
    const double pa = 2.0 / 3.0, pb = 2.0 / 3.0, pab = 1.0 / 3.0 + 1e-12;
    const double npmi_ab = std::log(pab / (pa * pb)) / -std::log(pab);
    require(c, std::abs(npmi(idx, "a", "b") - npmi_ab) <= 1e-9, "NPMI hand value");
    require(c, npmi(idx, "a", "a") == 1.0, "self NPMI");

    const std::vector<double> va{1.0, npmi_ab}, vb{npmi_ab, 1.0};
    const auto cos2 = [](const std::vector<double>& x, const std::vector<double>& y) {
        const double dot = x[0] * y[0] + x[1] * y[1];
        return dot / (std::hypot(x[0], x[1]) * std::hypot(y[0], y[1]));
    };
    const std::vector<double> sum{va[0] + vb[0], va[1] + vb[1]};
    const double cv_hand = 0.5 * (cos2(va, sum) + cos2(vb, sum));
    require(c, std::abs(cv_topic(idx, {"a", "b"}) - cv_hand) <= 1e-9, "C_V hand value");

    std::mt19937_64 rng(707);
    std::uniform_int_distribution<int> pick(0, 11);
    int checked = 0;
    for (int trial = 0; trial < 14; ++trial) {
        std::vector<std::vector<std::string>> docs;
        for (int d = 0; d < 30; ++d) {
            std::vector<std::string> doc;
            for (int i = 0; i < 15; ++i) doc.push_back("w" + std::to_string(pick(rng)));
            docs.push_back(std::move(doc));
        }
        CooccurrenceIndex ridx = build_index(docs, 5);
        for (int i = 0; i < 12; ++i)
            for (int j = i; j < 12; ++j) {
                const std::string a = "w" + std::to_string(i), b = "w" + std::to_string(j);
                const double ab = npmi(ridx, a, b);
                require(c, npmi(ridx, b, a) == ab, "NPMI asymmetric");
                require(c, ab <= 1.0 + 1e-12 && ab >= -1.0 - 1e-12, "NPMI out of range");
                ++checked;
            }
    }
    require(c, checked >= 1000, "need >= 1000 randomized pairs");
    require(c, seconds_since(t0) < 10.0, "runtime over 10 s");
    return c;
}

// --- criterion 8: determinism ----------------------------------------------
Criterion criterion_determinism() {
    Criterion c;
    helpers::TempDir dir("acc8");
    SynthOptions opts;
    opts.n_topics = 3;
    opts.n_docs = 80;
    opts.terms_per_topic = 8;
    opts.doc_len = 10;
    opts.shared_terms = 4;
    opts.with_entities = true;
    opts.seed = 808;
    generate_synthetic(opts).write(dir.str());

    PipelineConfig config;
    config.corpus_path = dir.file("corpus.jsonl");
    config.annotations_path = dir.file("annotations.jsonl");
    config.embeddings_path = dir.file("embeddings.txt");
    config.representation = ReprKind::neice;
    config.alpha_word = 0.3;
    config.alpha_ent = 0.6;
    config.k_values = {3, 5};
    config.top_t = 8;
    config.min_term_freq = 2;
    config.window_size = 20;
    config.nmf.max_iter = 80;

    config.output_dir = dir.file("run_a");
    run_pipeline(config);
    config.output_dir = dir.file("run_b");
    run_pipeline(config);

    for (const auto& entry : fs::recursive_directory_iterator(dir.file("run_a"))) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = fs::relative(entry.path(), dir.file("run_a")).string();
        if (rel == "timings.json") continue;  // wall clock, excluded by design
        require(c, helpers::read_file(entry.path().string()) ==
                       helpers::read_file(dir.file("run_b/" + rel)),
                rel + " differs between runs");
    }
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Criterion (*run)();
    };
    const Entry entries[] = {
        {"criterion 1: TF-IDF limit case", criterion_tfidf_limit},
        {"criterion 2: entity-free degeneracy", criterion_degeneracy},
        {"criterion 3: representation formula oracle", criterion_formula_oracle},
        {"criterion 4: factorization contract", criterion_nmf},
        {"criterion 5: planted-topic recovery", criterion_planted_recovery},
        {"criterion 6: entity boost improves coherence", criterion_entity_boost},
        {"criterion 7: coherence oracle", criterion_coherence_oracle},
        {"criterion 8: run determinism", criterion_determinism},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        Criterion result;
        try {
            result = entry.run();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail << "exception: " << e.what();
        }
        if (result.ok) {
            std::cout << "[PASS] " << entry.name << "\n";
        } else {
            ++failures;
            std::cout << "[FAIL] " << entry.name << " (" << result.detail.str() << ")\n";
        }
    }
    return failures == 0 ? 0 : 1;
}
