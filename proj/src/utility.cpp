#include "annodyn/utility.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "annodyn/errors.hpp"

namespace annodyn {
namespace {

constexpr double kTol = 1e-9;

// rows of the constraint matrix G, feasibility is G p >= 0 for
// p = (b, a1, a2, c1, c2)
constexpr double kConstraints[5][5] = {
    {1, 0, 0, 0, 0},   // b
    {0, 1, 0, 0, 0},   // a1
    {0, -2, 1, 0, 0},  // a2 - 2 a1
    {0, 0, 0, 1, 0},   // c1
    {0, 0, 0, -2, 1},  // c2 - 2 c1
};

double constraint_value(int i, const Eigen::VectorXd& p) {
    double v = 0.0;
    for (int j = 0; j < 5; ++j) v += kConstraints[i][j] * p[j];
    return v;
}

// 0-based right-inclusive bin of num/den over [0,1]; 0 joins bin 0
std::size_t q_bin_exact(std::int64_t num, std::int64_t den, std::int64_t bins) {
    if (num == 0) return 0;
    std::int64_t scaled = num * bins;
    return static_cast<std::size_t>((scaled + den - 1) / den - 1);
}

// cheapest feasible (a1, a2, c1, c2) producing the effective quadratic:
// the pair differences pin a1, c1 at the nonnegative corner, then (a2, c2)
// solve a 1-D projection along a2 - c2 = d1
UtilityParams min_norm_lift(const EffectiveParams& eff) {
    UtilityParams p;
    p.b = std::max(0.0, eff.b);
    p.a1 = std::max(0.0, -eff.d2);
    p.c1 = std::max(0.0, eff.d2);
    p.c2 = std::max({2.0 * p.c1, 2.0 * p.a1 - eff.d1, -eff.d1 / 2.0});
    p.a2 = std::max(p.c2 + eff.d1, 2.0 * p.a1);
    return p;
}

double residual_at(const RankHistogram& hist, const EffectiveParams& eff) {
    double ssr = 0.0;
    for (std::size_t j = 0; j < hist.midpoints.size(); ++j) {
        double x = hist.midpoints[j];
        double r = eff.b + eff.d2 * x * x + eff.d1 * x - hist.density[j];
        ssr += r * r;
    }
    return ssr;
}

} // namespace

UserClasses split_user_classes(const Corpus& corpus, int min_annotations) {
    std::vector<std::size_t> eligible;
    for (std::size_t u = 0; u < corpus.users.size(); ++u)
        if (std::ssize(corpus.user_annotations[u]) >= min_annotations) eligible.push_back(u);

    // users table is id-sorted, so (iq, index) is (iq, user_id)
    std::sort(eligible.begin(), eligible.end(), [&corpus](std::size_t a, std::size_t b) {
        if (corpus.users[a].iq != corpus.users[b].iq) return corpus.users[a].iq < corpus.users[b].iq;
        return a < b;
    });

    std::size_t third = eligible.size() / 3;
    UserClasses classes;
    classes.low_iq.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(third));
    classes.high_iq.assign(eligible.end() - static_cast<std::ptrdiff_t>(third), eligible.end());
    std::sort(classes.low_iq.begin(), classes.low_iq.end());
    std::sort(classes.high_iq.begin(), classes.high_iq.end());
    return classes;
}

RankHistogram class_histogram(const Corpus& corpus, const std::vector<std::size_t>& members,
                              int bins) {
    if (members.empty()) throw DomainError("class has no members");
    if (bins < 1) throw DomainError("bin count must be positive");

    // rank of each annotation within its song
    std::vector<std::int64_t> rank(corpus.annotations.size(), 0);
    for (const auto& anns : corpus.song_annotations)
        for (std::size_t i = 0; i < anns.size(); ++i)
            rank[anns[i]] = static_cast<std::int64_t>(i) + 1;

    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    std::int64_t total = 0;
    for (std::size_t u : members) {
        for (std::size_t ann : corpus.user_annotations[u]) {
            std::size_t seg = corpus.segment_index.at(corpus.annotations[ann].segment_id);
            std::size_t song = corpus.song_index.at(corpus.segments[seg].song_id);
            std::int64_t n = std::ssize(corpus.song_annotations[song]);
            if (n < 2) continue;
            ++counts[q_bin_exact(rank[ann] - 1, n - 1, bins)];
            ++total;
        }
    }
    if (total < bins)
        throw DomainError("only " + std::to_string(total) + " ranked annotations for " +
                          std::to_string(bins) + " bins; use coarser binning");

    RankHistogram hist;
    double width = 1.0 / bins;
    for (int i = 0; i <= bins; ++i) hist.edges.push_back(static_cast<double>(i) / bins);
    for (int i = 0; i < bins; ++i) {
        hist.midpoints.push_back((static_cast<double>(i) + 0.5) / bins);
        hist.density.push_back(static_cast<double>(counts[static_cast<std::size_t>(i)]) /
                               (static_cast<double>(total) * width));
    }
    return hist;
}

double evaluate_utility(const UtilityParams& params, double x) {
    if (!params.feasible()) throw DomainError("utility parameters violate shape constraints");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("coverage outside [0,1]");
    return params.b + (params.c1 - params.a1) * x * x + (params.a2 - params.c2) * x;
}

FitResult fit_utility(const RankHistogram& hist) {
    std::size_t t = hist.midpoints.size();
    if (t < 5 || hist.density.size() != t)
        throw DomainError("fit needs at least 5 histogram bins");

    Eigen::MatrixXd X(static_cast<Eigen::Index>(t), 5);
    Eigen::VectorXd y(static_cast<Eigen::Index>(t));
    for (std::size_t j = 0; j < t; ++j) {
        double x = hist.midpoints[j];
        Eigen::Index row = static_cast<Eigen::Index>(j);
        X(row, 0) = 1.0;
        X(row, 1) = -x * x;
        X(row, 2) = x;
        X(row, 3) = x * x;
        X(row, 4) = -x;
        y[row] = hist.density[j];
    }

    bool found = false;
    double best_residual = 0.0;
    Eigen::VectorXd best_p(5);

    for (unsigned mask = 0; mask < 32; ++mask) {
        std::vector<int> active_rows;
        for (int i = 0; i < 5; ++i)
            if (mask & (1u << i)) active_rows.push_back(i);

        Eigen::VectorXd p(5);
        if (active_rows.size() == 5) {
            p.setZero(); // every constraint tight pins the origin
        } else {
            // basis Z of the nullspace of the active constraint rows
            Eigen::MatrixXd Z;
            if (active_rows.empty()) {
                Z = Eigen::MatrixXd::Identity(5, 5);
            } else {
                Eigen::MatrixXd GA(static_cast<Eigen::Index>(active_rows.size()), 5);
                for (std::size_t r = 0; r < active_rows.size(); ++r)
                    for (int jcol = 0; jcol < 5; ++jcol)
                        GA(static_cast<Eigen::Index>(r), jcol) = kConstraints[active_rows[r]][jcol];
                Eigen::FullPivLU<Eigen::MatrixXd> lu(GA);
                lu.setThreshold(1e-10);
                Z = lu.kernel();
            }
            Eigen::MatrixXd M = X * Z;
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
            if (svd.singularValues().size() == 0 ||
                svd.singularValues()(svd.singularValues().size() - 1) <
                    1e-9 * svd.singularValues()(0)) {
                continue; // reduced system rank deficient: minimizer not unique here
            }
            p = Z * svd.solve(y);
        }

        bool ok = true;
        for (int i = 0; i < 5 && ok; ++i) ok = constraint_value(i, p) >= -kTol;
        if (!ok) continue;

        double residual = (X * p - y).squaredNorm();
        if (!found || residual < best_residual) {
            found = true;
            best_residual = residual;
            best_p = p;
        }
    }
    if (!found) throw Error("no feasible fit candidate; histogram is malformed");

    FitResult result;
    result.effective.b = std::max(0.0, best_p[0]);
    result.effective.d2 = best_p[3] - best_p[1];
    result.effective.d1 = best_p[2] - best_p[4];
    result.params = min_norm_lift(result.effective);
    result.residual = residual_at(hist, result.effective);
    Eigen::VectorXd lifted(5);
    lifted << result.params.b, result.params.a1, result.params.a2, result.params.c1,
        result.params.c2;
    for (int i = 0; i < 5; ++i) result.active[static_cast<std::size_t>(i)] =
        std::abs(constraint_value(i, lifted)) <= 1e-7;
    return result;
}

} // namespace annodyn
