#include "annodyn/expertise.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "annodyn/errors.hpp"
#include "annodyn/parallel.hpp"
#include "annodyn/rng.hpp"
#include "annodyn/stats.hpp"

namespace annodyn {

namespace {

constexpr double kRidge = 1e-6;
constexpr double kGradTol = 1e-8;
constexpr int kMaxNewton = 100;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// penalized negative log-likelihood; log(1 + e^z) computed overflow-free
double penalized_nll(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& w) {
    Eigen::VectorXd z = X * w;
    double f = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        f += std::max(z[i], 0.0) + std::log1p(std::exp(-std::abs(z[i]))) - y[i] * z[i];
    return f + 0.5 * kRidge * w.squaredNorm();
}

// damped Newton on the ridge-penalized likelihood; X already carries the
// intercept column
Eigen::VectorXd fit_core(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index m = X.cols();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (int iter = 0; iter < kMaxNewton; ++iter) {
        Eigen::VectorXd p(X.rows());
        Eigen::VectorXd z = X * w;
        for (Eigen::Index i = 0; i < z.size(); ++i) p[i] = sigmoid(z[i]);
        Eigen::VectorXd g = X.transpose() * (p - y) + kRidge * w;
        if (g.norm() <= kGradTol) break;
        Eigen::VectorXd wgt = p.array() * (1.0 - p.array());
        Eigen::MatrixXd h = X.transpose() * wgt.asDiagonal() * X;
        h.diagonal().array() += kRidge;
        Eigen::VectorXd d = h.ldlt().solve(-g);
        double f0 = penalized_nll(X, y, w);
        double slope = g.dot(d);
        double t = 1.0;
        while (t > 1e-18 && penalized_nll(X, y, w + t * d) > f0 + 1e-4 * t * slope) t *= 0.5;
        w += t * d;
    }
    return w;
}

struct Normalizer {
    std::vector<double> mean, std;
};

// zero mean, unit variance per column; a constant column keeps scale 1
Normalizer fit_normalizer(const std::vector<std::vector<double>>& rows,
                          const std::vector<std::size_t>& cols) {
    Normalizer nz;
    const double n = static_cast<double>(rows.size());
    for (std::size_t c : cols) {
        double s = 0.0;
        for (const auto& r : rows) s += r[c];
        double m = s / n;
        double ss = 0.0;
        for (const auto& r : rows) ss += (r[c] - m) * (r[c] - m);
        double sd = std::sqrt(ss / n);
        nz.mean.push_back(m);
        nz.std.push_back(sd == 0.0 ? 1.0 : sd);
    }
    return nz;
}

std::vector<std::size_t> all_columns(std::size_t width) {
    std::vector<std::size_t> cols(width);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return cols;
}

void check_rows(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    if (rows.empty()) throw DomainError("logit fit needs at least one row");
    if (rows.size() != labels.size())
        throw DomainError("logit fit: row and label counts differ");
    const std::size_t width = rows.front().size();
    if (width == 0) throw DomainError("logit fit: rows have no features");
    for (const auto& r : rows)
        if (r.size() != width) throw DomainError("logit fit: ragged feature rows");
    bool pos = false, neg = false;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DomainError("logit fit: labels must be 0 or 1");
        (y == 1 ? pos : neg) = true;
    }
    if (!pos || !neg) throw DomainError("logit fit: both classes must be present");
}

// design matrix of the selected, normalized columns plus intercept
Eigen::MatrixXd design(const std::vector<std::vector<double>>& rows,
                       const std::vector<std::size_t>& subset_rows,
                       const std::vector<std::size_t>& cols, const Normalizer& nz) {
    Eigen::MatrixXd X(subset_rows.size(), cols.size() + 1);
    for (std::size_t i = 0; i < subset_rows.size(); ++i) {
        const auto& r = rows[subset_rows[i]];
        for (std::size_t j = 0; j < cols.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (r[cols[j]] - nz.mean[j]) / nz.std[j];
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols.size())) = 1.0;
    }
    return X;
}

Eigen::VectorXd pick_labels(const std::vector<int>& labels,
                            const std::vector<std::size_t>& subset_rows) {
    Eigen::VectorXd y(subset_rows.size());
    for (std::size_t i = 0; i < subset_rows.size(); ++i)
        y[static_cast<Eigen::Index>(i)] = static_cast<double>(labels[subset_rows[i]]);
    return y;
}

bool two_classes(const std::vector<int>& labels, const std::vector<std::size_t>& subset_rows) {
    bool pos = false, neg = false;
    for (std::size_t i : subset_rows) (labels[i] == 1 ? pos : neg) = true;
    return pos && neg;
}

CoefficientSummary summarize(std::vector<double>& draws) {
    std::sort(draws.begin(), draws.end());
    CoefficientSummary s;
    s.mean = mean_of(draws);
    s.ci_low = percentile_sorted(draws, 2.5);
    s.ci_high = percentile_sorted(draws, 97.5);
    return s;
}

std::vector<SocialEdge> dedupe(std::vector<SocialEdge> edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

} // namespace

std::array<double, kFeatureCount> FeatureVector::as_array() const {
    return {mean_quality_tags, mean_annotation_gap,  first_annotation_count,
            mean_song_originality, mean_edit_gap, first_edit_count};
}

std::vector<LabeledUser> build_labels(const Corpus& corpus, std::size_t min_annotations,
                                      std::size_t min_edits) {
    std::vector<std::size_t> eligible;
    for (std::size_t u = 0; u < corpus.users.size(); ++u)
        if (corpus.user_annotations[u].size() >= min_annotations &&
            corpus.user_edits[u].size() >= min_edits)
            eligible.push_back(u);
    if (eligible.size() < 3)
        throw DomainError("expert labeling needs at least 3 qualifying users, found " +
                          std::to_string(eligible.size()));
    std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
        if (corpus.users[a].iq != corpus.users[b].iq) return corpus.users[a].iq < corpus.users[b].iq;
        return a < b; // table index order is id order
    });
    std::size_t third = eligible.size() / 3;
    std::vector<LabeledUser> out;
    for (std::size_t i = 0; i < third; ++i)
        out.push_back({eligible[i], ExpertLabel::normal_expert});
    for (std::size_t i = eligible.size() - third; i < eligible.size(); ++i)
        out.push_back({eligible[i], ExpertLabel::super_expert});
    std::sort(out.begin(), out.end(),
              [](const LabeledUser& a, const LabeledUser& b) { return a.user < b.user; });
    return out;
}

FeatureVector extract_features(const Corpus& corpus, std::size_t user,
                               const OriginalityModel& model, std::size_t window) {
    if (window < 2) throw DomainError("feature window must cover at least 2 events");
    const auto& anns = corpus.user_annotations[user];
    const auto& edits = corpus.user_edits[user];
    if (anns.size() < window || edits.size() < window)
        throw DomainError("user " + corpus.users[user].user_id + " has fewer than " +
                          std::to_string(window) + " annotations or edits");

    FeatureVector f;
    double tag_sum = 0.0, gap_sum = 0.0, orig_sum = 0.0;
    std::size_t orig_n = 0;
    for (std::size_t i = 0; i < window; ++i) {
        const Annotation& a = corpus.annotations[anns[i]];
        tag_sum += static_cast<double>(quality_tag_count(a.body_html));
        if (i > 0)
            gap_sum += static_cast<double>(a.created_at -
                                           corpus.annotations[anns[i - 1]].created_at);
        std::size_t song = corpus.song_index.at(corpus.segments[corpus.segment_index.at(
                                                                    a.segment_id)]
                                                    .song_id);
        if (corpus.song_annotations[song].front() == anns[i]) f.first_annotation_count += 1.0;
        try {
            orig_sum += originality(strip_headers(corpus.songs[song].raw_lyrics), model);
            ++orig_n;
        } catch (const DomainError&) {
            // song with no scored word stays out of the mean
        }
    }
    f.mean_quality_tags = tag_sum / static_cast<double>(window);
    f.mean_annotation_gap = gap_sum / static_cast<double>(window - 1);
    f.mean_song_originality = orig_n == 0 ? 0.0 : orig_sum / static_cast<double>(orig_n);

    double edit_gap_sum = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
        const Edit& e = corpus.edits[edits[i]];
        if (i > 0)
            edit_gap_sum +=
                static_cast<double>(e.created_at - corpus.edits[edits[i - 1]].created_at);
        std::size_t ann = corpus.annotation_index.at(e.annotation_id);
        if (corpus.annotation_edits[ann].front() == edits[i]) f.first_edit_count += 1.0;
    }
    f.mean_edit_gap = edit_gap_sum / static_cast<double>(window - 1);
    return f;
}

ExpertDataset build_expert_dataset(const Corpus& corpus, std::size_t window,
                                   std::size_t min_annotations, std::size_t min_edits) {
    std::vector<LabeledUser> labeled = build_labels(corpus, min_annotations, min_edits);
    OriginalityModel model = build_idf(corpus);
    ExpertDataset ds;
    for (const LabeledUser& lu : labeled) {
        ds.users.push_back(lu.user);
        ds.labels.push_back(lu.label == ExpertLabel::super_expert ? 1 : 0);
        auto arr = extract_features(corpus, lu.user, model, window).as_array();
        ds.rows.emplace_back(arr.begin(), arr.end());
    }
    return ds;
}

double LogitModel::predict(std::span<const double> raw) const {
    if (raw.size() != coefficients.size())
        throw DomainError("prediction input width does not match the model");
    double z = intercept;
    for (std::size_t j = 0; j < raw.size(); ++j)
        z += coefficients[j] * (raw[j] - feature_mean[j]) / feature_std[j];
    return sigmoid(z);
}

LogitModel fit_logit(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels) {
    check_rows(rows, labels);
    const std::vector<std::size_t> cols = all_columns(rows.front().size());
    Normalizer nz = fit_normalizer(rows, cols);
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Eigen::VectorXd w = fit_core(design(rows, idx, cols, nz), pick_labels(labels, idx));
    LogitModel m;
    m.coefficients.assign(w.data(), w.data() + cols.size());
    m.intercept = w[static_cast<Eigen::Index>(cols.size())];
    m.feature_mean = std::move(nz.mean);
    m.feature_std = std::move(nz.std);
    return m;
}

BootstrapResult fit_logit_bootstrap(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels, std::size_t n_boot,
                                    std::uint64_t seed, int threads) {
    check_rows(rows, labels);
    if (n_boot == 0) throw DomainError("bootstrap needs at least one resample");
    const std::size_t n = rows.size();
    const std::vector<std::size_t> cols = all_columns(rows.front().size());
    const Normalizer nz = fit_normalizer(rows, cols);

    const std::size_t m = cols.size() + 1;
    std::vector<std::vector<double>> draws(n_boot);
    std::vector<std::size_t> redrawn(n_boot, 0);
    parallel_for(n_boot, threads, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        std::vector<std::size_t> pick(n);
        for (;;) {
            for (std::size_t i = 0; i < n; ++i) pick[i] = rng.below(n);
            if (two_classes(labels, pick)) break;
            ++redrawn[r];
        }
        Eigen::VectorXd w = fit_core(design(rows, pick, cols, nz), pick_labels(labels, pick));
        draws[r].assign(w.data(), w.data() + m);
    });

    BootstrapResult res;
    std::vector<double> column(n_boot);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < n_boot; ++r) column[r] = draws[r][j];
        if (j < cols.size())
            res.coefficients.push_back(summarize(column));
        else
            res.intercept = summarize(column);
    }
    for (std::size_t c : redrawn) res.redrawn += c;
    return res;
}

EvalResult evaluate(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                    const std::vector<std::size_t>& predictor_subset, std::size_t n_splits,
                    double train_frac, std::uint64_t seed, int threads) {
    check_rows(rows, labels);
    if (n_splits == 0) throw DomainError("evaluation needs at least one split");
    if (predictor_subset.empty()) throw DomainError("evaluation needs at least one predictor");
    for (std::size_t c : predictor_subset)
        if (c >= rows.front().size())
            throw DomainError("predictor column " + std::to_string(c) + " out of range");
    const std::size_t n = rows.size();
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
    if (n_train == 0 || n_train >= n)
        throw DomainError("training fraction leaves an empty split");

    std::vector<double> accs(n_splits), aucs(n_splits), majs(n_splits);
    std::vector<std::size_t> redrawn(n_splits, 0);
    parallel_for(n_splits, threads, [&](std::size_t s) {
        Rng rng(derive_seed(seed, s));
        std::vector<std::size_t> order(n);
        std::vector<std::size_t> train, test;
        for (;;) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            for (std::size_t i = n - 1; i > 0; --i)
                std::swap(order[i], order[rng.below(i + 1)]);
            test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
            if (two_classes(labels, test)) break;
            ++redrawn[s];
        }
        train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));

        std::vector<std::vector<double>> train_rows;
        train_rows.reserve(train.size());
        for (std::size_t i : train) train_rows.push_back(rows[i]);
        Normalizer nz = fit_normalizer(train_rows, predictor_subset);
        std::vector<std::size_t> train_local(train.size());
        std::iota(train_local.begin(), train_local.end(), std::size_t{0});
        Eigen::VectorXd w = fit_core(design(train_rows, train_local, predictor_subset, nz),
                                     pick_labels(labels, train));

        std::vector<std::vector<double>> test_rows;
        test_rows.reserve(test.size());
        for (std::size_t i : test) test_rows.push_back(rows[i]);
        std::vector<std::size_t> test_local(test.size());
        std::iota(test_local.begin(), test_local.end(), std::size_t{0});
        Eigen::MatrixXd Xt = design(test_rows, test_local, predictor_subset, nz);
        Eigen::VectorXd z = Xt * w;

        std::vector<double> scores(test.size());
        std::vector<int> truth(test.size());
        std::size_t correct = 0, positives = 0;
        for (std::size_t i = 0; i < test.size(); ++i) {
            scores[i] = sigmoid(z[static_cast<Eigen::Index>(i)]);
            truth[i] = labels[test[i]];
            int pred = scores[i] >= 0.5 ? 1 : 0;
            if (pred == truth[i]) ++correct;
            if (truth[i] == 1) ++positives;
        }
        accs[s] = static_cast<double>(correct) / static_cast<double>(test.size());
        aucs[s] = auc_score(scores, truth);
        majs[s] = static_cast<double>(std::max(positives, test.size() - positives)) /
                  static_cast<double>(test.size());
    });

    EvalResult res;
    res.accuracy_mean = mean_of(accs);
    res.accuracy_std = sample_std(accs);
    res.auc_mean = mean_of(aucs);
    res.auc_std = sample_std(aucs);
    res.majority_mean = mean_of(majs);
    res.majority_std = sample_std(majs);
    for (std::size_t c : redrawn) res.redrawn += c;
    return res;
}

double auc_score(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw DomainError("auc: score and label counts differ");
    const std::size_t n = scores.size();
    std::size_t pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw DomainError("auc: labels must be 0 or 1");
        if (y == 1) ++pos;
    }
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) throw DomainError("auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // average ranks over ties, 1-based
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    double p = static_cast<double>(pos);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

std::map<std::string, double> pagerank(const std::vector<SocialEdge>& edges, double damping,
                                       double tol) {
    if (damping < 0.0 || damping >= 1.0)
        throw DomainError("pagerank damping must lie in [0, 1)");
    std::vector<SocialEdge> unique_edges = dedupe(edges);
    std::map<std::string, std::size_t> index;
    for (const SocialEdge& e : unique_edges) {
        index.emplace(e.follower_id, 0);
        index.emplace(e.followee_id, 0);
    }
    if (index.empty()) throw DomainError("pagerank needs at least one node");
    std::size_t n = 0;
    for (auto& [id, idx] : index) idx = n++;

    std::vector<std::vector<std::size_t>> out_links(n);
    for (const SocialEdge& e : unique_edges)
        out_links[index[e.follower_id]].push_back(index[e.followee_id]);

    const double nd = static_cast<double>(n);
    std::vector<double> x(n, 1.0 / nd), next(n);
    for (int iter = 0; iter < 100000; ++iter) {
        double dangling = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (out_links[i].empty()) dangling += x[i];
        std::fill(next.begin(), next.end(), (1.0 - damping) / nd + damping * dangling / nd);
        for (std::size_t i = 0; i < n; ++i) {
            if (out_links[i].empty()) continue;
            double share = damping * x[i] / static_cast<double>(out_links[i].size());
            for (std::size_t j : out_links[i]) next[j] += share;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta += std::abs(next[i] - x[i]);
        x.swap(next);
        if (delta <= tol) break;
    }

    std::map<std::string, double> out;
    for (const auto& [id, idx] : index) out.emplace(id, x[idx]);
    return out;
}

std::map<std::string, std::int64_t> in_degree(const std::vector<SocialEdge>& edges) {
    std::map<std::string, std::int64_t> out;
    for (const SocialEdge& e : dedupe(edges)) {
        out.emplace(e.follower_id, 0);
        ++out[e.followee_id];
    }
    return out;
}

} // namespace annodyn
