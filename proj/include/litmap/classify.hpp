// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The litmap Authors

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "litmap/corpus.hpp"
#include "litmap/embed.hpp"
#include "litmap/error.hpp"
#include "litmap/matrix.hpp"
#include "litmap/parallel.hpp"

namespace litmap::classify {

/// Feature rows with binary labels: 1 = level-0 (relevant), 0 = level-1.
struct LabeledSet {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t positives() const noexcept { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1)); }
    std::size_t negatives() const noexcept { return size() - positives(); }

    void add(std::span<const double> x, int label) {
        features.append_row(x);
        labels.push_back(label);
    }
};

struct SplitConfig {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct Split {
    LabeledSet train;
    LabeledSet test;
    std::vector<std::size_t> train_indices;  // rows of the input, ascending
    std::vector<std::size_t> test_indices;
};

namespace detail {

inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(rng() % i)]);
}

// floor(n * (1 - f)), immune to 10 * 0.2 landing just under 2.
inline std::size_t test_count(std::size_t n, double train_fraction) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - train_fraction) + 1e-9));
}

inline LabeledSet subset(const LabeledSet& s, const std::vector<std::size_t>& rows) {
    LabeledSet out;
    for (auto r : rows) out.add(s.features.row(r), s.labels[r]);
    return out;
}

inline double sigmoid(double z) noexcept {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
inline double softplus(double t) noexcept { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

}  // namespace detail

/// Train/test partition, deterministic per seed. Stratified splits apply the
/// fraction to each class separately; test sizes are rounded down.
inline Split split(const LabeledSet& set, const SplitConfig& cfg) {
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw Error(ErrorKind::InvalidArgument, "train fraction must lie in (0, 1)");
    if (set.positives() < 2 || set.negatives() < 2)
        throw Error(ErrorKind::ClassTooSmall, "each class needs at least 2 members (have " + std::to_string(set.positives()) +
                                                  " positive, " + std::to_string(set.negatives()) + " negative)");
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> train, test;
    auto take = [&](std::vector<std::size_t> rows) {
        detail::shuffle(rows, rng);
        const auto n_test = detail::test_count(rows.size(), cfg.train_fraction);
        test.insert(test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
        train.insert(train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
    };
    if (cfg.stratified) {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < set.size(); ++i) (set.labels[i] == 1 ? pos : neg).push_back(i);
        take(std::move(pos));
        take(std::move(neg));
    } else {
        std::vector<std::size_t> all(set.size());
        std::iota(all.begin(), all.end(), 0);
        take(std::move(all));
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    Split out;
    out.train = detail::subset(set, train);
    out.test = detail::subset(set, test);
    out.train_indices = std::move(train);
    out.test_indices = std::move(test);
    return out;
}

struct LogRegModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t iterations = 0;
    double final_loss = 0.0;
    double l2 = 0.0;
    std::vector<double> loss_history;  // objective before each step, then final
    std::size_t step_halvings = 0;     // times the step was halved to keep loss monotone

    std::size_t dimension() const noexcept { return weights.size(); }

    static LogRegModel zeros(std::size_t dim) {
        LogRegModel m;
        m.weights.assign(dim, 0.0);
        return m;
    }
};

struct FitOptions {
    std::size_t max_iters = 1000;
    double learning_rate = 0.1;
    double tol = 1e-7;  // on the gradient norm
    double l2 = 0.0;
};

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;

    double grad_norm() const {
        double s = grad_b * grad_b;
        for (double g : grad_w) s += g * g;
        return std::sqrt(s);
    }
};

/// Mean log-loss plus (l2 / 2) |w|^2, and its analytic gradient.
inline LossAndGradient loss_and_gradient(const LabeledSet& set, std::span<const double> w, double b, double l2) {
    const std::size_t n = set.size();
    const std::size_t d = w.size();
    LossAndGradient out;
    out.grad_w.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = set.features.row(i);
        const double z = dot(w, x) + b;
        const int y = set.labels[i];
        out.loss += y == 1 ? detail::softplus(-z) : detail::softplus(z);
        const double r = detail::sigmoid(z) - static_cast<double>(y);
        for (std::size_t j = 0; j < d; ++j) out.grad_w[j] += r * x[j];
        out.grad_b += r;
    }
    const double inv = 1.0 / static_cast<double>(n);
    out.loss *= inv;
    out.grad_b *= inv;
    double wsq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        out.grad_w[j] = out.grad_w[j] * inv + l2 * w[j];
        wsq += w[j] * w[j];
    }
    out.loss += 0.5 * l2 * wsq;
    return out;
}

/// Full-batch gradient descent from zero weights. Stops when the gradient
/// norm drops below `tol` or after max_iters steps. A step that would raise
/// the objective is retried with half the step size.
inline LogRegModel fit_logreg(const LabeledSet& train, const FitOptions& opt = {}) {
    if (!train.features.all_finite()) throw Error(ErrorKind::DegenerateInput, "non-finite training vector");
    if (train.positives() == 0 || train.negatives() == 0) throw Error(ErrorKind::OneClassOnly, "training needs both classes");
    if (!(opt.learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be positive");

    LogRegModel m = LogRegModel::zeros(train.features.cols());
    m.l2 = opt.l2;
    double lr = opt.learning_rate;
    auto current = loss_and_gradient(train, m.weights, m.bias, opt.l2);
    std::vector<double> w_next(m.weights.size());
    while (m.iterations < opt.max_iters && current.grad_norm() >= opt.tol) {
        m.loss_history.push_back(current.loss);
        for (;;) {
            for (std::size_t j = 0; j < w_next.size(); ++j) w_next[j] = m.weights[j] - lr * current.grad_w[j];
            const double b_next = m.bias - lr * current.grad_b;
            auto next = loss_and_gradient(train, w_next, b_next, opt.l2);
            if (next.loss <= current.loss || lr < 1e-12) {
                m.weights.swap(w_next);
                m.bias = b_next;
                current = std::move(next);
                break;
            }
            lr *= 0.5;
            ++m.step_halvings;
        }
        ++m.iterations;
    }
    m.final_loss = current.loss;
    m.loss_history.push_back(current.loss);
    return m;
}

inline double decision_value(const LogRegModel& m, std::span<const double> x) {
    if (x.size() != m.dimension())
        throw Error(ErrorKind::BadDimension, "vector has " + std::to_string(x.size()) + " components, model " +
                                                 std::to_string(m.dimension()));
    return dot(m.weights, x) + m.bias;
}

inline double predict_proba(const LogRegModel& m, std::span<const double> x) { return detail::sigmoid(decision_value(m, x)); }

/// Probability that a random positive outscores a random negative (ties
/// count one half), computed exactly from grouped sorted scores.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::InvalidArgument, "scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::uint64_t negatives_below = 0, twice_wins = 0, pos = 0, neg = 0;
    for (std::size_t g = 0; g < order.size();) {
        std::size_t h = g;
        std::uint64_t gp = 0, gn = 0;
        for (; h < order.size() && scores[order[h]] == scores[order[g]]; ++h) (labels[order[h]] == 1 ? gp : gn) += 1;
        twice_wins += 2 * gp * negatives_below + gp * gn;
        negatives_below += gn;
        pos += gp;
        neg += gn;
        g = h;
    }
    if (pos == 0 || neg == 0) throw Error(ErrorKind::OneClassOnly, "AUC needs both classes");
    return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

inline std::vector<double> score_all(const LogRegModel& m, const Matrix& x, std::size_t threads = default_threads()) {
    std::vector<double> out(x.rows());
    parallel_for(
        x.rows(),
        [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) out[i] = predict_proba(m, x.row(i));
        },
        threads);
    return out;
}

struct FilterConfig {
    double threshold = 0.75;
    bool strict = true;  // accept score > threshold; otherwise score >= threshold

    void validate() const {
        if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorKind::InvalidArgument, "threshold must lie in (0, 1)");
    }
    bool accepts(double score) const noexcept { return strict ? score > threshold : score >= threshold; }
};

struct Candidate {
    Document doc;
    std::vector<double> features;
};

struct ScoredDocument {
    Document doc;
    double score = 0.0;
};

/// Candidates whose score passes the threshold, by descending score (ties by id).
inline std::vector<ScoredDocument> filter_candidates(const LogRegModel& m, std::span<const Candidate> candidates,
                                                     const FilterConfig& cfg = {}, std::size_t threads = default_threads()) {
    cfg.validate();
    std::vector<double> scores(candidates.size());
    parallel_for(
        candidates.size(),
        [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) scores[i] = predict_proba(m, candidates[i].features);
        },
        threads);
    std::vector<ScoredDocument> out;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (cfg.accepts(scores[i])) out.push_back({candidates[i].doc, scores[i]});
    std::sort(out.begin(), out.end(), [](const ScoredDocument& a, const ScoredDocument& b) {
        return a.score != b.score ? a.score > b.score : a.doc.id < b.doc.id;
    });
    return out;
}

inline constexpr std::size_t kHistogramBins = 20;

struct ScoreHistogram {
    std::string name;
    std::array<std::size_t, kHistogramBins> bins{};  // [i/20, (i+1)/20), last bin closed
    double mean = 0.0;
    std::size_t count = 0;
};

inline ScoreHistogram histogram(std::string name, std::span<const double> scores) {
    ScoreHistogram h;
    h.name = std::move(name);
    h.count = scores.size();
    double sum = 0.0;
    for (double s : scores) {
        const auto bin = std::min<std::size_t>(kHistogramBins - 1, static_cast<std::size_t>(std::clamp(s, 0.0, 1.0) * kHistogramBins));
        ++h.bins[bin];
        sum += s;
    }
    h.mean = scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
    return h;
}

struct NamedSet {
    std::string name;
    Matrix features;
};

struct EvaluationReport {
    double auc = 0.0;
    std::vector<ScoreHistogram> histograms;  // "level0", "level1", then extra sets
};

/// Test-split AUC plus score histograms for each class and each extra set.
inline EvaluationReport evaluate(const LogRegModel& m, const LabeledSet& test, std::span<const NamedSet> extra = {}) {
    EvaluationReport r;
    const auto scores = score_all(m, test.features);
    r.auc = roc_auc(scores, test.labels);
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < scores.size(); ++i) (test.labels[i] == 1 ? pos : neg).push_back(scores[i]);
    r.histograms.push_back(histogram("level0", pos));
    r.histograms.push_back(histogram("level1", neg));
    for (const auto& set : extra) r.histograms.push_back(histogram(set.name, score_all(m, set.features)));
    return r;
}

/// AUC of the optimal rule for two unit-variance Gaussians whose means are
/// `separation` apart: Phi(separation / sqrt 2).
inline double gaussian_auc(double separation) { return 0.5 * std::erfc(-separation / 2.0); }

// ---------------------------------------------------------------------------
// Model file: four "key value" header lines, then one weight per line.

inline void save_model(const LogRegModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path + "' for writing");
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "dimension " << m.dimension() << '\n'
        << "bias " << num(m.bias) << '\n'
        << "iterations " << m.iterations << '\n'
        << "loss " << num(m.final_loss) << '\n';
    for (double w : m.weights) out << num(w) << '\n';
    if (!out) throw Error(ErrorKind::IoFailure, "write to '" + path + "' failed");
}

inline LogRegModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::NoModel, "cannot open model file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    auto header = [&](const char* key) {
        ++lineno;
        if (!std::getline(in, line)) throw Error(ErrorKind::MalformedRecord, std::string("missing '") + key + "' line", lineno);
        std::istringstream ss(line);
        std::string k, v, extra;
        if (!(ss >> k >> v) || k != key || (ss >> extra))
            throw Error(ErrorKind::MalformedRecord, std::string("expected '") + key + " <value>'", lineno);
        return v;
    };
    auto to_double = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        // stod accepts "nan"/"inf"; the model must be finite.
        if (used != s.size() || !std::isfinite(v)) throw Error(ErrorKind::MalformedRecord, "bad number '" + s + "'", lineno);
        return v;
    };
    auto to_size = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
            throw Error(ErrorKind::MalformedRecord, "bad count '" + s + "'", lineno);
        return static_cast<std::size_t>(std::stoull(s));
    };
    LogRegModel m;
    const auto dim = to_size(header("dimension"));
    m.bias = to_double(header("bias"));
    m.iterations = to_size(header("iterations"));
    m.final_loss = to_double(header("loss"));
    m.weights.reserve(dim);
    while (std::getline(in, line)) {
        ++lineno;
        if (text::is_blank(line)) continue;
        m.weights.push_back(to_double(std::string(text::trim(line))));
    }
    if (m.weights.size() != dim)
        throw Error(ErrorKind::MalformedRecord, "expected " + std::to_string(dim) + " weights, found " + std::to_string(m.weights.size()));
    return m;
}

// ---------------------------------------------------------------------------
// Corpus glue

using EmbeddingIndex = std::unordered_map<std::string, EmbeddingVector>;

inline EmbeddingIndex index_embeddings(const std::vector<EmbeddingRecord>& records) {
    EmbeddingIndex idx;
    for (const auto& r : records) idx.insert_or_assign(r.doc_id, r.vector);
    return idx;
}

/// level0/level1 documents that have an embedding, with their ids row-aligned.
inline std::pair<LabeledSet, std::vector<std::string>> labeled_set(const Corpus& corpus, const EmbeddingIndex& embeddings) {
    LabeledSet set;
    std::vector<std::string> ids;
    for (const auto& d : corpus) {
        if (d.label == Label::Unlabeled) continue;
        const auto it = embeddings.find(d.id);
        if (it == embeddings.end()) continue;
        set.add(it->second.values(), d.label == Label::Level0 ? 1 : 0);
        ids.push_back(d.id);
    }
    return {std::move(set), std::move(ids)};
}

/// Unlabeled, embedded documents published on or after `since` (all dated
/// and undated ones when `since` is empty).
inline std::vector<Candidate> candidates(const Corpus& corpus, const EmbeddingIndex& embeddings, std::optional<Date> since) {
    std::vector<Candidate> out;
    for (const auto& d : corpus) {
        if (d.label != Label::Unlabeled) continue;
        if (since && (!d.published || *d.published < *since)) continue;
        const auto it = embeddings.find(d.id);
        if (it == embeddings.end()) continue;
        const auto v = it->second.values();
        out.push_back({d, std::vector<double>(v.begin(), v.end())});
    }
    return out;
}

}  // namespace litmap::classify
