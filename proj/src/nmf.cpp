#include "neice/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <json.hpp>

namespace neice {

namespace {

constexpr double kEps = 1e-10;  // zero-locking guard

// Randomized truncated SVD. With a fixed seed the sketch depends on M only
// through left-multiplication, so permuting rows of M permutes U rows and
// leaves S, V unchanged.
void truncated_svd(const SpMat& m, int k, std::uint64_t seed, Eigen::MatrixXd& u,
                   Eigen::VectorXd& s, Eigen::MatrixXd& v) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    const int p = std::min(std::min(rows, cols), k + 8);  // oversampled rank

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd omega(cols, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < cols; ++i) omega(i, j) = gauss(rng);

    Eigen::MatrixXd y = m * omega;
    Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() *
                        Eigen::MatrixXd::Identity(rows, p);
    for (int it = 0; it < 2; ++it) {  // power iterations sharpen the spectrum
        Eigen::MatrixXd z = m.transpose() * q;
        Eigen::MatrixXd qz = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() *
                             Eigen::MatrixXd::Identity(cols, p);
        y = m * qz;
        q = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() *
            Eigen::MatrixXd::Identity(rows, p);
    }

    Eigen::MatrixXd b = q.transpose() * m;  // p x cols
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = (q * svd.matrixU()).leftCols(k);
    s = svd.singularValues().head(k);
    v = svd.matrixV().leftCols(k);
}

// NNDSVD initialization (Boutsidis & Gallopoulos), zeros filled with the
// matrix mean to avoid locked entries.
void nndsvd_init(const SpMat& m, int k, std::uint64_t seed, Eigen::MatrixXd& h,
                 Eigen::MatrixXd& w) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;
    truncated_svd(m, k, seed, u, s, v);

    h = Eigen::MatrixXd::Zero(rows, k);
    w = Eigen::MatrixXd::Zero(k, cols);
    h.col(0) = std::sqrt(std::max(s[0], 0.0)) * u.col(0).cwiseAbs();
    w.row(0) = std::sqrt(std::max(s[0], 0.0)) * v.col(0).cwiseAbs().transpose();

    for (int j = 1; j < k; ++j) {
        Eigen::VectorXd x = u.col(j), y = v.col(j);
        Eigen::VectorXd xp = x.cwiseMax(0.0), xn = (-x).cwiseMax(0.0);
        Eigen::VectorXd yp = y.cwiseMax(0.0), yn = (-y).cwiseMax(0.0);
        const double mp = xp.norm() * yp.norm();
        const double mn = xn.norm() * yn.norm();
        Eigen::VectorXd bu, bv;
        double sigma;
        if (mp >= mn) {
            bu = mp > 0 ? Eigen::VectorXd(xp / xp.norm()) : xp;
            bv = mp > 0 ? Eigen::VectorXd(yp / yp.norm()) : yp;
            sigma = s[j] * mp;
        } else {
            bu = xn / xn.norm();
            bv = yn / yn.norm();
            sigma = s[j] * mn;
        }
        h.col(j) = std::sqrt(std::max(sigma, 0.0)) * bu;
        w.row(j) = std::sqrt(std::max(sigma, 0.0)) * bv.transpose();
    }

    const double mean = m.sum() / (static_cast<double>(rows) * cols);
    const double fill = std::max(mean / 100.0, kEps);
    h = h.unaryExpr([&](double x) { return x < kEps ? fill : x; });
    w = w.unaryExpr([&](double x) { return x < kEps ? fill : x; });
}

void random_init(const SpMat& m, int k, std::uint64_t seed, Eigen::MatrixXd& h,
                 Eigen::MatrixXd& w) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(kEps, 1.0);
    const double scale = std::sqrt(m.sum() / (static_cast<double>(m.rows()) * m.cols() * k) + kEps);
    h.resize(m.rows(), k);
    w.resize(k, m.cols());
    for (int i = 0; i < h.rows(); ++i)
        for (int j = 0; j < k; ++j) h(i, j) = scale * unif(rng);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < w.cols(); ++j) w(i, j) = scale * unif(rng);
}

double frobenius_loss(const SpMat& m, double m_sq, const Eigen::MatrixXd& h,
                      const Eigen::MatrixXd& w) {
    // ||M - HW||_F^2 = ||M||^2 - 2<M, HW> + tr((H^T H)(W W^T))
    double cross = 0.0;
    for (int d = 0; d < m.outerSize(); ++d)
        for (SpMat::InnerIterator it(m, d); it; ++it)
            cross += it.value() * h.row(d).dot(w.col(it.col()));
    const Eigen::MatrixXd hth = h.transpose() * h;
    const Eigen::MatrixXd wwt = w * w.transpose();
    double sq = m_sq - 2.0 * cross + (hth.cwiseProduct(wwt)).sum();
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace

TopicModel nmf(const SpMat& m, int k, const NmfOptions& opts) {
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    if (k < 1 || k > std::min(rows, cols))
        throw ConfigError("nmf: k must be in [1, min(|D|,|V|)]");
    if (opts.max_iter < 1) throw ConfigError("nmf: max_iter must be >= 1");
    if (m.nonZeros() == 0) throw NumericError("nmf: input matrix is all zero");
    double m_sq = 0.0;
    for (int d = 0; d < m.outerSize(); ++d)
        for (SpMat::InnerIterator it(m, d); it; ++it) {
            if (it.value() < 0.0) throw NumericError("nmf: input matrix has negative entries");
            m_sq += it.value() * it.value();
        }

    TopicModel model;
    model.k = k;
    model.seed = opts.seed;
    Eigen::MatrixXd h, w;
    if (opts.init_factors) {
        h = opts.init_factors->first;
        w = opts.init_factors->second;
        if (h.rows() != rows || h.cols() != k || w.rows() != k || w.cols() != cols)
            throw ConfigError("nmf: injected factors have wrong shape");
    } else if (opts.init == NmfOptions::Init::nndsvd) {
        nndsvd_init(m, k, opts.seed, h, w);
    } else {
        random_init(m, k, opts.seed, h, w);
    }

    model.loss_trace.push_back(frobenius_loss(m, m_sq, h, w));
    const SpMat mt = m.transpose();

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        // H <- H .* (M W^T) ./ (H (W W^T))
        {
            const Eigen::MatrixXd num = m * w.transpose();
            const Eigen::MatrixXd den = h * (w * w.transpose());
            h = (h.array() * num.array() / (den.array() + kEps)).cwiseMax(kEps).matrix();
        }
        // W <- W .* (H^T M) ./ ((H^T H) W)
        {
            const Eigen::MatrixXd num = (mt * h).transpose();
            const Eigen::MatrixXd den = (h.transpose() * h) * w;
            w = (w.array() * num.array() / (den.array() + kEps)).cwiseMax(kEps).matrix();
        }
        model.loss_trace.push_back(frobenius_loss(m, m_sq, h, w));
        ++model.iterations;
        const double prev = model.loss_trace[model.loss_trace.size() - 2];
        const double cur = model.loss_trace.back();
        if (prev > 0.0 && (prev - cur) / prev < opts.tol && (prev - cur) >= 0.0) break;
    }

    if (!h.allFinite() || !w.allFinite()) throw NumericError("nmf: non-finite factor entries");
    model.h = std::move(h);
    model.w = std::move(w);
    return model;
}

std::vector<TopicSummary> top_words(const TopicModel& model, const Vocabulary& vocab, int t) {
    if (t < 1) throw ConfigError("top_words: T must be >= 1");
    const int n_terms = static_cast<int>(model.w.cols());
    const int take = std::min(t, n_terms);
    std::vector<TopicSummary> out;
    for (int k = 0; k < model.k; ++k) {
        std::vector<int> order(static_cast<std::size_t>(n_terms));
        for (int i = 0; i < n_terms; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            double wa = model.w(k, a), wb = model.w(k, b);
            if (wa != wb) return wa > wb;
            return vocab.term(a) < vocab.term(b);
        });
        TopicSummary summary;
        summary.topic_id = k;
        for (int i = 0; i < take; ++i)
            summary.top_terms.emplace_back(vocab.term(order[static_cast<std::size_t>(i)]),
                                           model.w(k, order[static_cast<std::size_t>(i)]));
        out.push_back(std::move(summary));
    }
    return out;
}

namespace {

void write_dense(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write matrix: " + path);
    std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j) {
            double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

}  // namespace

void save_model(const std::string& dir, const TopicModel& model, double final_loss) {
    std::filesystem::create_directories(dir);
    write_dense(dir + "/W.bin", model.w);
    write_dense(dir + "/H.bin", model.h);
    nlohmann::json manifest{{"k", model.k},
                            {"seed", model.seed},
                            {"iterations", model.iterations},
                            {"final_loss", final_loss}};
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw DataError("cannot write model manifest in " + dir);
    out << manifest.dump(2) << '\n';
}

Eigen::MatrixXd load_dense_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open matrix: " + path);
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in || rows < 0 || cols < 0) throw DataError("bad matrix header: " + path);
    Eigen::MatrixXd m(rows, cols);
    for (std::int64_t i = 0; i < rows; ++i)
        for (std::int64_t j = 0; j < cols; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof v);
            if (!in) throw DataError("truncated matrix file: " + path);
            m(i, j) = v;
        }
    return m;
}

}  // namespace neice
