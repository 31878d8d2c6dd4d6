#include "neice/representation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

namespace neice {

namespace {

constexpr double kDropBelow = 1e-12;  // sparse fill-in control

void parallel_rows(int n, const std::function<void(int)>& body) {
    unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    if (n < 64 || n_threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_threads; ++w)
        pool.emplace_back([&] {
            for (int i; (i = next.fetch_add(1)) < n;) body(i);
        });
    for (auto& th : pool) th.join();
}

struct CluwordsParts {
    SpMat ac;                 // tf* = A C
    std::vector<double> idf;  // idf*(t) = log(|D| / sum_d mu(t,d))
};

CluwordsParts compute_parts(const SpMat& bow, const SpMat& c) {
    const int n_docs = static_cast<int>(bow.rows());
    const int n_terms = static_cast<int>(bow.cols());
    if (c.rows() != n_terms || c.cols() != n_terms)
        throw NumericError("similarity matrix shape does not match vocabulary");

    std::vector<std::vector<std::pair<int, double>>> ac_rows(
        static_cast<std::size_t>(n_docs));
    std::vector<std::vector<double>> mu_partial(static_cast<std::size_t>(n_docs));

    parallel_rows(n_docs, [&](int d) {
        // Row of AC via dense scratch accumulation.
        std::vector<double> scratch(static_cast<std::size_t>(n_terms), 0.0);
        std::vector<int> touched;
        for (SpMat::InnerIterator it(bow, d); it; ++it) {
            const double a = it.value();
            for (SpMat::InnerIterator jt(c, static_cast<int>(it.col())); jt; ++jt) {
                auto t = static_cast<std::size_t>(jt.col());
                if (scratch[t] == 0.0) touched.push_back(static_cast<int>(t));
                scratch[t] += a * jt.value();
            }
        }
        std::sort(touched.begin(), touched.end());
        auto& row = ac_rows[static_cast<std::size_t>(d)];
        for (int t : touched) {
            if (scratch[static_cast<std::size_t>(t)] >= kDropBelow)
                row.emplace_back(t, scratch[static_cast<std::size_t>(t)]);
            scratch[static_cast<std::size_t>(t)] = 0.0;
        }

        // mu(t,d) for every t related to a term of d: mean of C_{t,t'} over
        // the distinct terms t' of d with C_{t,t'} != 0.
        std::vector<double> sum(static_cast<std::size_t>(n_terms), 0.0);
        std::vector<int> cnt(static_cast<std::size_t>(n_terms), 0);
        touched.clear();
        for (SpMat::InnerIterator it(bow, d); it; ++it) {
            for (SpMat::InnerIterator jt(c, static_cast<int>(it.col())); jt; ++jt) {
                auto t = static_cast<std::size_t>(jt.col());  // C symmetric: jt.value = C_{t,t'}
                if (cnt[t] == 0) touched.push_back(static_cast<int>(t));
                sum[t] += jt.value();
                ++cnt[t];
            }
        }
        auto& mu = mu_partial[static_cast<std::size_t>(d)];
        mu.assign(static_cast<std::size_t>(n_terms), 0.0);
        for (int t : touched) {
            auto ut = static_cast<std::size_t>(t);
            mu[ut] = sum[ut] / cnt[ut];
        }
    });

    std::vector<double> mu_sum(static_cast<std::size_t>(n_terms), 0.0);
    for (const auto& mu : mu_partial)
        for (int t = 0; t < n_terms; ++t) mu_sum[static_cast<std::size_t>(t)] += mu[static_cast<std::size_t>(t)];

    CluwordsParts parts;
    parts.idf.resize(static_cast<std::size_t>(n_terms));
    for (int t = 0; t < n_terms; ++t) {
        double s = mu_sum[static_cast<std::size_t>(t)];
        if (s <= 0.0)
            throw NumericError("idf* undefined: term " + std::to_string(t) +
                               " has zero mean-similarity mass");
        parts.idf[static_cast<std::size_t>(t)] = std::log(static_cast<double>(n_docs) / s);
    }

    std::vector<Eigen::Triplet<double>> trips;
    for (int d = 0; d < n_docs; ++d)
        for (const auto& [t, v] : ac_rows[static_cast<std::size_t>(d)]) trips.emplace_back(d, t, v);
    parts.ac = SpMat(n_docs, n_terms);
    parts.ac.setFromTriplets(trips.begin(), trips.end());
    return parts;
}

SpMat scale_columns(const SpMat& m, const std::vector<double>& idf) {
    std::vector<Eigen::Triplet<double>> trips;
    for (int d = 0; d < m.outerSize(); ++d)
        for (SpMat::InnerIterator it(m, d); it; ++it) {
            double v = it.value() * idf[static_cast<std::size_t>(it.col())];
            if (v >= kDropBelow) trips.emplace_back(d, static_cast<int>(it.col()), v);
        }
    SpMat out(m.rows(), m.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

std::string to_string(ReprKind kind) {
    switch (kind) {
        case ReprKind::tfidf: return "tfidf";
        case ReprKind::cluwords: return "cluwords";
        case ReprKind::neice: return "neice";
    }
    return "?";
}

ReprKind repr_kind_from_string(const std::string& s) {
    if (s == "tfidf") return ReprKind::tfidf;
    if (s == "cluwords") return ReprKind::cluwords;
    if (s == "neice") return ReprKind::neice;
    throw ConfigError("unknown representation kind: " + s);
}

WeightedDocTermMatrix tf_idf(const SpMat& bow) {
    const int n_docs = static_cast<int>(bow.rows());
    const int n_terms = static_cast<int>(bow.cols());
    std::vector<int> df(static_cast<std::size_t>(n_terms), 0);
    for (int d = 0; d < bow.outerSize(); ++d)
        for (SpMat::InnerIterator it(bow, d); it; ++it)
            if (it.value() > 0) ++df[static_cast<std::size_t>(it.col())];

    std::vector<Eigen::Triplet<double>> trips;
    for (int d = 0; d < bow.outerSize(); ++d)
        for (SpMat::InnerIterator it(bow, d); it; ++it) {
            auto t = static_cast<std::size_t>(it.col());
            if (df[t] == 0) throw NumericError("tf_idf: term with zero document frequency");
            double v = it.value() * std::log(static_cast<double>(n_docs) / df[t]);
            if (v >= kDropBelow) trips.emplace_back(d, static_cast<int>(it.col()), v);
        }
    WeightedDocTermMatrix out;
    out.kind = ReprKind::tfidf;
    out.m = SpMat(n_docs, n_terms);
    out.m.setFromTriplets(trips.begin(), trips.end());
    return out;
}

double compute_mu(const SpMat& bow, const SpMat& c, int doc, int term) {
    std::vector<char> in_doc(static_cast<std::size_t>(bow.cols()), 0);
    for (SpMat::InnerIterator it(bow, doc); it; ++it)
        in_doc[static_cast<std::size_t>(it.col())] = 1;
    double sum = 0.0;
    int count = 0;
    for (SpMat::InnerIterator jt(c, term); jt; ++jt) {
        if (in_doc[static_cast<std::size_t>(jt.col())]) {
            sum += jt.value();
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

WeightedDocTermMatrix cluwords(const SpMat& bow, const SimilarityMatrix& sim) {
    CluwordsParts parts = compute_parts(bow, sim.c);
    WeightedDocTermMatrix out;
    out.kind = ReprKind::cluwords;
    out.alpha_word = sim.alpha_word;
    out.m = scale_columns(parts.ac, parts.idf);
    return out;
}

WeightedDocTermMatrix neice_matrix(const SpMat& bow, const SimilarityMatrix& sim,
                                   const std::vector<std::vector<std::string>>& doc_entities,
                                   const EntityRelatedMap& entity_related, double alpha_ent) {
    const int n_docs = static_cast<int>(bow.rows());
    const int n_terms = static_cast<int>(bow.cols());
    if (static_cast<int>(doc_entities.size()) != n_docs)
        throw NumericError("doc_entities size does not match corpus");

    CluwordsParts parts = compute_parts(bow, sim.c);

    std::vector<std::vector<Eigen::Triplet<double>>> row_trips(
        static_cast<std::size_t>(n_docs));
    parallel_rows(n_docs, [&](int d) {
        std::vector<char> in_doc(static_cast<std::size_t>(n_terms), 0);
        for (SpMat::InnerIterator it(bow, d); it; ++it)
            in_doc[static_cast<std::size_t>(it.col())] = 1;

        std::vector<double> ac_row(static_cast<std::size_t>(n_terms), 0.0);
        for (SpMat::InnerIterator it(parts.ac, d); it; ++it)
            ac_row[static_cast<std::size_t>(it.col())] = it.value();

        // Candidate terms related to any accepted embedded entity of d.
        std::vector<char> boosted(static_cast<std::size_t>(n_terms), 0);
        std::vector<int> candidates;
        for (const auto& e : doc_entities[static_cast<std::size_t>(d)]) {
            auto it = entity_related.find(e);
            if (it == entity_related.end()) continue;
            for (int t : it->second)
                if (!boosted[static_cast<std::size_t>(t)]) {
                    boosted[static_cast<std::size_t>(t)] = 1;
                    candidates.push_back(t);
                }
        }
        std::sort(candidates.begin(), candidates.end());

        // tf^NE: add max_{t' in V^{d,t}} (AC)_{d,t'} where V^{d,t} is the set
        // of terms of d related to t under C. The boost is applied once per
        // term regardless of how many entities select it.
        std::vector<std::pair<int, double>> boosts;
        for (int t : candidates) {
            double best = 0.0;
            bool any = false;
            for (SpMat::InnerIterator jt(sim.c, t); jt; ++jt) {
                if (in_doc[static_cast<std::size_t>(jt.col())]) {
                    any = true;
                    best = std::max(best, ac_row[static_cast<std::size_t>(jt.col())]);
                }
            }
            if (any) boosts.emplace_back(t, best);
        }

        auto& out = row_trips[static_cast<std::size_t>(d)];
        for (const auto& [t, b] : boosts)
            ac_row[static_cast<std::size_t>(t)] += b;
        std::vector<int> cols;
        for (SpMat::InnerIterator it(parts.ac, d); it; ++it)
            cols.push_back(static_cast<int>(it.col()));
        for (const auto& [t, b] : boosts)
            if (std::find(cols.begin(), cols.end(), t) == cols.end()) cols.push_back(t);
        std::sort(cols.begin(), cols.end());
        for (int t : cols) {
            double v = ac_row[static_cast<std::size_t>(t)] * parts.idf[static_cast<std::size_t>(t)];
            if (v >= kDropBelow) out.emplace_back(d, t, v);
        }
    });

    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& rt : row_trips) trips.insert(trips.end(), rt.begin(), rt.end());
    WeightedDocTermMatrix out;
    out.kind = ReprKind::neice;
    out.alpha_word = sim.alpha_word;
    out.alpha_ent = alpha_ent;
    out.m = SpMat(n_docs, n_terms);
    out.m.setFromTriplets(trips.begin(), trips.end());
    return out;
}

void dump_triplets(const SpMat& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write triplet dump: " + path);
    out.precision(17);
    for (int d = 0; d < m.outerSize(); ++d)
        for (SpMat::InnerIterator it(m, d); it; ++it)
            out << d << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace neice
