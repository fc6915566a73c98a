#include "support/oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "support/builders.hpp"

namespace oracles {

double percentile_exact(std::vector<double> values, std::int64_t pct_num, std::int64_t pct_den) {
    if (values.empty()) throw std::invalid_argument("empty");
    std::sort(values.begin(), values.end());
    // rank = (m-1) * pct / 100, split into whole + fraction exactly
    std::int64_t m = static_cast<std::int64_t>(values.size());
    std::int64_t num = (m - 1) * pct_num;
    std::int64_t den = 100 * pct_den;
    std::int64_t lo = num / den;
    std::int64_t rem = num % den;
    if (rem == 0) return values[static_cast<std::size_t>(lo)];
    long double frac = static_cast<long double>(rem) / static_cast<long double>(den);
    long double a = values[static_cast<std::size_t>(lo)];
    long double b = values[static_cast<std::size_t>(lo + 1)];
    return static_cast<double>(a + (b - a) * frac);
}

long double pearson_naive(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("bad input");
    long double n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        syy += static_cast<long double>(y[i]) * y[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    long double cov = sxy - sx * sy / n;
    long double vx = sxx - sx * sx / n;
    long double vy = syy - sy * sy / n;
    return cov / std::sqrt(vx * vy);
}

namespace {

// nearest point of {(u,v): u >= 0, v >= 2u} — either the point itself, the
// v-axis half-line, or the ray v = 2u
void project_pair(double& u, double& v) {
    if (u >= 0.0 && v >= 2.0 * u) return;
    double au = 0.0, av = std::max(v, 0.0);
    double t = std::max(0.0, (u + 2.0 * v) / 5.0);
    double bu = t, bv = 2.0 * t;
    double da = (u - au) * (u - au) + (v - av) * (v - av);
    double db = (u - bu) * (u - bu) + (v - bv) * (v - bv);
    if (da <= db) {
        u = au;
        v = av;
    } else {
        u = bu;
        v = bv;
    }
}

} // namespace

double fit_residual_pgd(const std::vector<double>& xs, const std::vector<double>& ys,
                        int iterations) {
    std::size_t t = xs.size();
    // design rows (1, -x^2, x, x^2, -x) for p = (b, a1, a2, c1, c2)
    auto predict = [&](const std::array<double, 5>& p, double x) {
        return p[0] - p[1] * x * x + p[2] * x + p[3] * x * x - p[4] * x;
    };
    auto grad = [&](const std::array<double, 5>& p, std::array<double, 5>& g) {
        g.fill(0.0);
        for (std::size_t j = 0; j < t; ++j) {
            double x = xs[j];
            double r = predict(p, x) - ys[j];
            g[0] += 2.0 * r;
            g[1] += 2.0 * r * (-x * x);
            g[2] += 2.0 * r * x;
            g[3] += 2.0 * r * (x * x);
            g[4] += 2.0 * r * (-x);
        }
    };
    // Lipschitz bound via the Frobenius norm of 2 X^T X
    double fro = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        double x = xs[j];
        double row[5] = {1.0, -x * x, x, x * x, -x};
        for (double e : row) fro += e * e;
    }
    double step = 1.0 / (2.0 * fro);

    std::array<double, 5> p{}, prev{}, z{};
    double theta = 1.0;
    std::array<double, 5> g{};
    for (int it = 0; it < iterations; ++it) {
        grad(z, g);
        std::array<double, 5> next;
        for (int i = 0; i < 5; ++i) next[i] = z[i] - step * g[i];
        next[0] = std::max(next[0], 0.0);
        project_pair(next[1], next[2]);
        project_pair(next[3], next[4]);
        double theta_next = (1.0 + std::sqrt(1.0 + 4.0 * theta * theta)) / 2.0;
        for (int i = 0; i < 5; ++i)
            z[i] = next[i] + (theta - 1.0) / theta_next * (next[i] - prev[i]);
        prev = p = next;
        theta = theta_next;
    }
    double ssr = 0.0;
    for (std::size_t j = 0; j < t; ++j) {
        double r = predict(p, xs[j]) - ys[j];
        ssr += r * r;
    }
    return ssr;
}

std::vector<double> analytic_class_bin_mass(const std::vector<double>& high_eff,
                                            const std::vector<double>& low_eff,
                                            double high_share, bool for_high, int bins,
                                            int grid) {
    auto quad = [](const std::vector<double>& e, double x) {
        return e[0] + e[1] * x * x + e[2] * x; // (b, d2, d1)
    };
    std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
    double total = 0.0;
    for (int gidx = 0; gidx < grid; ++gidx) {
        double x = (static_cast<double>(gidx) + 0.5) / grid;
        double uh = high_share * quad(high_eff, x);
        double ul = (1.0 - high_share) * quad(low_eff, x);
        double f = (for_high ? uh : ul) / (uh + ul);
        int b = std::min(static_cast<int>(x * bins), bins - 1);
        mass[static_cast<std::size_t>(b)] += f;
        total += f;
    }
    for (double& m : mass) m /= total;
    return mass;
}

std::vector<double> logit_gd_reference(const std::vector<std::vector<double>>& rows,
                                       const std::vector<int>& labels, double ridge,
                                       int max_iters) {
    const std::size_t n = rows.size();
    const std::size_t d = rows.front().size();
    // z-score each column (population std, constant columns keep scale 1)
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (const auto& r : rows) s += r[j];
        mean[j] = s / static_cast<double>(n);
        double ss = 0.0;
        for (const auto& r : rows) ss += (r[j] - mean[j]) * (r[j] - mean[j]);
        sd[j] = std::sqrt(ss / static_cast<double>(n));
        if (sd[j] == 0.0) sd[j] = 1.0;
    }
    std::vector<std::vector<double>> X(n, std::vector<double>(d + 1, 1.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) X[i][j] = (rows[i][j] - mean[j]) / sd[j];

    auto value_grad = [&](const std::vector<double>& w, std::vector<double>& g) {
        std::fill(g.begin(), g.end(), 0.0);
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = 0.0;
            for (std::size_t j = 0; j <= d; ++j) z += X[i][j] * w[j];
            f += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - labels[i] * z;
            double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            double r = p - static_cast<double>(labels[i]);
            for (std::size_t j = 0; j <= d; ++j) g[j] += X[i][j] * r;
        }
        for (std::size_t j = 0; j <= d; ++j) {
            f += 0.5 * ridge * w[j] * w[j];
            g[j] += ridge * w[j];
        }
        return f;
    };

    std::vector<double> w(d + 1, 0.0), g(d + 1), trial(d + 1), gt(d + 1);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        double f = value_grad(w, g);
        double gn = 0.0;
        for (double v : g) gn += v * v;
        if (std::sqrt(gn) <= 1e-11) break;
        step *= 2.0; // allow recovery after conservative steps
        for (;;) {
            for (std::size_t j = 0; j <= d; ++j) trial[j] = w[j] - step * g[j];
            if (value_grad(trial, gt) <= f - 0.5 * step * gn || step < 1e-18) break;
            step *= 0.5;
        }
        w.swap(trial);
    }
    return w;
}

double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                wins += 1.0;
            else if (scores[i] == scores[j])
                wins += 0.5;
        }
    }
    if (pairs == 0) throw std::invalid_argument("auc needs both classes");
    return wins / static_cast<double>(pairs);
}

std::vector<double> pagerank_dense(std::size_t n,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                   double damping) {
    std::vector<std::size_t> outdeg(n, 0);
    for (const auto& [from, to] : edges) ++outdeg[from];
    // column i of P: where node i sends its mass
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = i == j ? 1.0 : 0.0;
    for (const auto& [from, to] : edges)
        a[to][from] -= damping / static_cast<double>(outdeg[from]);
    for (std::size_t i = 0; i < n; ++i)
        if (outdeg[i] == 0)
            for (std::size_t j = 0; j < n; ++j) a[j][i] -= damping / static_cast<double>(n);

    std::vector<double> b(n, (1.0 - damping) / static_cast<double>(n));
    // Gaussian elimination with partial pivoting
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double factor = a[r][col] / a[col][col];
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
        x[ri] = s / a[ri][ri];
    }
    return x;
}

} // namespace oracles

namespace testsupport {

std::vector<std::string> to_jsonl_lines(const annodyn::Corpus& c) {
    using nlohmann::json;
    std::vector<std::string> lines;
    auto emit = [&lines](json j) { lines.push_back(j.dump()); };
    for (const auto& u : c.users) {
        json j{{"kind", "user"}, {"user_id", u.user_id}, {"iq", u.iq}};
        if (u.registered_at) j["registered_at"] = *u.registered_at;
        emit(j);
    }
    for (const auto& s : c.songs) {
        json j{{"kind", "song"}, {"song_id", s.song_id}, {"raw_lyrics", s.raw_lyrics}};
        if (s.view_count) j["view_count"] = *s.view_count;
        emit(j);
    }
    for (const auto& s : c.segments)
        emit({{"kind", "segment"},
              {"segment_id", s.segment_id},
              {"song_id", s.song_id},
              {"segment_text", s.segment_text}});
    for (const auto& a : c.annotations)
        emit({{"kind", "annotation"},
              {"annotation_id", a.annotation_id},
              {"segment_id", a.segment_id},
              {"author_id", a.author_id},
              {"created_at", a.created_at},
              {"body_html", a.body_html}});
    for (const auto& e : c.edits)
        emit({{"kind", "edit"},
              {"edit_id", e.edit_id},
              {"annotation_id", e.annotation_id},
              {"author_id", e.author_id},
              {"created_at", e.created_at},
              {"body_html", e.body_html}});
    for (const auto& e : c.social_edges)
        emit({{"kind", "social_edge"},
              {"follower_id", e.follower_id},
              {"followee_id", e.followee_id}});
    return lines;
}

} // namespace testsupport
