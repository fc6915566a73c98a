#include "annodyn/dynamics.hpp"

#include <algorithm>
#include <map>

#include "annodyn/errors.hpp"
#include "annodyn/rng.hpp"
#include "annodyn/stats.hpp"

namespace annodyn {
namespace {

// Sorted-accumulation mean: one multiset of values gives one result no
// matter the order events arrived in.
std::optional<double> mean_sorted(std::vector<double>& values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// 0-based bin of q = num/den over `bins` right-inclusive bins of [0,1]:
// bin i gets i/bins < q <= (i+1)/bins, except q = 0 joins bin 0.
std::size_t q_bin(std::int64_t num, std::int64_t den, std::int64_t bins) {
    if (num == 0) return 0;
    std::int64_t scaled = num * bins; // ceil(scaled/den) - 1
    return static_cast<std::size_t>((scaled + den - 1) / den - 1);
}

const Annotation& parent_annotation(const Corpus& corpus, const RankedEvent& e) {
    if (e.kind == EventKind::annotation) return corpus.annotations[e.record];
    return corpus.annotations[e.subject];
}

const std::string& event_body(const Corpus& corpus, const RankedEvent& e) {
    if (e.kind == EventKind::edit && !e.initial_revision) return corpus.edits[e.record].body_html;
    return corpus.annotations[e.record].body_html;
}

} // namespace

std::vector<RankedEvent> rank_events(const Corpus& corpus, bool collapse_self_edit_runs) {
    std::vector<RankedEvent> out;
    out.reserve(corpus.annotations.size() * 2 + corpus.edits.size());

    for (std::size_t song = 0; song < corpus.songs.size(); ++song) {
        const auto& anns = corpus.song_annotations[song];
        std::size_t n = anns.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Annotation& a = corpus.annotations[anns[i]];
            RankedEvent e;
            e.kind = EventKind::annotation;
            e.actor = corpus.user_of(a.author_id);
            e.subject = song;
            e.record = anns[i];
            e.time_rank = static_cast<std::int64_t>(i) + 1;
            if (n >= 2)
                e.proportional_rank = static_cast<double>(i) / static_cast<double>(n - 1);
            e.created_at = a.created_at;
            out.push_back(e);
        }
    }

    for (std::size_t ann = 0; ann < corpus.annotations.size(); ++ann) {
        const Annotation& a = corpus.annotations[ann];
        RankedEvent initial;
        initial.kind = EventKind::edit;
        initial.initial_revision = true;
        initial.actor = corpus.user_of(a.author_id);
        initial.subject = ann;
        initial.record = ann;
        initial.time_rank = 0;
        initial.created_at = a.created_at;
        out.push_back(initial);

        std::size_t last_actor = initial.actor;
        std::int64_t rank = 0;
        for (std::size_t edit_idx : corpus.annotation_edits[ann]) {
            const Edit& ed = corpus.edits[edit_idx];
            std::size_t actor = corpus.user_of(ed.author_id);
            if (collapse_self_edit_runs && actor == last_actor) continue;
            RankedEvent e;
            e.kind = EventKind::edit;
            e.actor = actor;
            e.subject = ann;
            e.record = edit_idx;
            e.time_rank = ++rank;
            e.created_at = ed.created_at;
            out.push_back(e);
            last_actor = actor;
        }
    }
    return out;
}

std::optional<double> event_value(const Corpus& corpus, const RankedEvent& e, EventValue value,
                                  const OriginalityModel* model) {
    switch (value) {
    case EventValue::actor_iq:
        return static_cast<double>(corpus.users[e.actor].iq);
    case EventValue::actor_total_annotations:
        return static_cast<double>(corpus.user_annotations[e.actor].size());
    case EventValue::quality_tags:
        return static_cast<double>(quality_tag_count(event_body(corpus, e)));
    case EventValue::length:
        return static_cast<double>(annotation_length(event_body(corpus, e)));
    case EventValue::segment_originality: {
        if (!model) throw DomainError("segment originality needs an idf model");
        const Annotation& a = parent_annotation(corpus, e);
        try {
            return originality(corpus.segments[corpus.segment_index.at(a.segment_id)].segment_text,
                               *model);
        } catch (const DomainError&) {
            return std::nullopt;
        }
    }
    }
    throw DomainError("unknown event value");
}

BinnedCurve curve_vs_proportional_rank(const Corpus& corpus,
                                       const std::vector<RankedEvent>& events, EventValue value,
                                       int bins, const OriginalityModel* model) {
    if (bins < 1) throw DomainError("bin count must be positive");
    std::vector<std::vector<double>> acc(static_cast<std::size_t>(bins));
    for (const RankedEvent& e : events) {
        if (e.kind != EventKind::annotation || !e.proportional_rank) continue;
        std::int64_t n = std::ssize(corpus.song_annotations[e.subject]);
        std::size_t bin = q_bin(e.time_rank - 1, n - 1, bins);
        std::optional<double> v = event_value(corpus, e, value, model);
        if (!v) continue;
        acc[bin].push_back(*v);
    }

    BinnedCurve curve;
    for (int i = 0; i < bins; ++i) {
        curve.bin_lo.push_back(static_cast<double>(i) / bins);
        curve.bin_hi.push_back(static_cast<double>(i + 1) / bins);
        curve.count.push_back(std::ssize(acc[static_cast<std::size_t>(i)]));
        curve.mean.push_back(mean_sorted(acc[static_cast<std::size_t>(i)]));
        curve.boot_std.push_back(0.0);
    }
    return curve;
}

std::vector<BinnedCurve> edit_strata_curves(const Corpus& corpus,
                                            const std::vector<RankedEvent>& events,
                                            EventValue value, int max_total_edits,
                                            const OriginalityModel* model) {
    if (max_total_edits < 0) throw DomainError("stratum bound must be non-negative");
    // regroup revision sequences by annotation; map keeps subject order canonical
    std::map<std::size_t, std::vector<const RankedEvent*>> revisions;
    for (const RankedEvent& e : events)
        if (e.kind == EventKind::edit) revisions[e.subject].push_back(&e);

    std::size_t strata = static_cast<std::size_t>(max_total_edits) + 1;
    std::vector<std::vector<std::vector<double>>> acc(strata);
    for (std::size_t k = 0; k < strata; ++k) acc[k].resize(k + 1);

    for (auto& [subject, revs] : revisions) {
        std::size_t k = revs.size() - 1; // ranks 0..k
        if (k >= strata) continue;
        for (const RankedEvent* e : revs) {
            std::optional<double> v = event_value(corpus, *e, value, model);
            if (!v) continue;
            acc[k][static_cast<std::size_t>(e->time_rank)].push_back(*v);
        }
    }

    std::vector<BinnedCurve> curves(strata);
    for (std::size_t k = 0; k < strata; ++k) {
        for (std::size_t r = 0; r <= k; ++r) {
            curves[k].bin_lo.push_back(static_cast<double>(r));
            curves[k].bin_hi.push_back(static_cast<double>(r));
            curves[k].count.push_back(std::ssize(acc[k][r]));
            curves[k].mean.push_back(mean_sorted(acc[k][r]));
            curves[k].boot_std.push_back(0.0);
        }
    }
    return curves;
}

namespace {

struct UserSeries {
    // per grid point: events within the day bound, over the original order
    std::vector<std::int64_t> cum_count;
    std::vector<double> cum_sum;
};

std::optional<double> lifespan_event_value(const Corpus& corpus, LifespanValue value,
                                           bool edit_family, std::size_t record,
                                           const OriginalityModel* model) {
    switch (value) {
    case LifespanValue::is_first_annotation: {
        const Annotation& a = corpus.annotations[record];
        std::size_t seg = corpus.segment_index.at(a.segment_id);
        std::size_t song = corpus.song_index.at(corpus.segments[seg].song_id);
        return corpus.song_annotations[song].front() == record ? 1.0 : 0.0;
    }
    case LifespanValue::quality_tags:
        return static_cast<double>(quality_tag_count(corpus.annotations[record].body_html));
    case LifespanValue::length:
        return static_cast<double>(annotation_length(corpus.annotations[record].body_html));
    case LifespanValue::segment_originality: {
        if (!model) throw DomainError("segment originality needs an idf model");
        const Annotation& a = corpus.annotations[record];
        std::size_t seg = corpus.segment_index.at(a.segment_id);
        try {
            return originality(corpus.segments[seg].segment_text, *model);
        } catch (const DomainError&) {
            return std::nullopt;
        }
    }
    case LifespanValue::edit_length:
        (void)edit_family;
        return static_cast<double>(annotation_length(corpus.edits[record].body_html));
    }
    throw DomainError("unknown lifespan value");
}

std::optional<BinnedCurve> stratum_curve(const std::vector<UserSeries>& series,
                                         const std::vector<std::size_t>& members,
                                         const std::vector<double>& grid_days,
                                         const LifespanParams& params, std::uint64_t stratum_tag) {
    if (members.empty()) return std::nullopt;
    std::size_t g = grid_days.size();

    BinnedCurve curve;
    curve.bin_lo.assign(g, 0.0);
    curve.bin_hi = grid_days;
    for (std::size_t k = 0; k < g; ++k) {
        std::int64_t cnt = 0;
        double sum = 0.0;
        for (std::size_t u : members) {
            cnt += series[u].cum_count[k];
            sum += series[u].cum_sum[k];
        }
        curve.count.push_back(cnt);
        curve.mean.push_back(cnt > 0 ? std::optional<double>(sum / static_cast<double>(cnt))
                                     : std::nullopt);
    }

    std::vector<std::vector<double>> replicate_means(g);
    std::size_t m = members.size();
    for (int r = 0; r < params.n_boot; ++r) {
        Rng rng(derive_seed(derive_seed(params.seed, stratum_tag), static_cast<std::uint64_t>(r)));
        std::vector<std::int64_t> mult(m, 0);
        for (std::size_t draw = 0; draw < m; ++draw) ++mult[rng.below(m)];
        for (std::size_t k = 0; k < g; ++k) {
            std::int64_t cnt = 0;
            double sum = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                if (!mult[j]) continue;
                cnt += mult[j] * series[members[j]].cum_count[k];
                sum += static_cast<double>(mult[j]) * series[members[j]].cum_sum[k];
            }
            if (cnt > 0) replicate_means[k].push_back(sum / static_cast<double>(cnt));
        }
    }
    for (std::size_t k = 0; k < g; ++k) {
        curve.boot_std.push_back(replicate_means[k].size() >= 2 ? sample_std(replicate_means[k])
                                                                : 0.0);
    }
    return curve;
}

} // namespace

LifespanResult lifespan_curves(const Corpus& corpus, LifespanValue value,
                               const LifespanParams& params, const OriginalityModel* model) {
    if (params.grid_points < 1) throw DomainError("grid_points must be positive");
    if (params.n_boot < 1) throw DomainError("n_boot must be positive");
    if (!(params.horizon_days > 0)) throw DomainError("horizon_days must be positive");

    bool edit_family = value == LifespanValue::edit_length;
    const auto& per_user = edit_family ? corpus.user_edits : corpus.user_annotations;

    std::vector<double> grid_days;
    for (int k = 1; k <= params.grid_points; ++k)
        grid_days.push_back(params.horizon_days * k / params.grid_points);

    std::size_t g = grid_days.size();
    std::vector<UserSeries> series(corpus.users.size());
    std::vector<std::size_t> qualifying;
    for (std::size_t u = 0; u < corpus.users.size(); ++u) {
        const auto& records = per_user[u];
        if (std::ssize(records) < params.min_events) continue;
        std::int64_t t0 = edit_family ? corpus.edits[records.front()].created_at
                                      : corpus.annotations[records.front()].created_at;
        // (offset seconds, value), sorted; record order is already time order
        std::vector<std::pair<double, double>> events;
        for (std::size_t rec : records) {
            std::int64_t t = edit_family ? corpus.edits[rec].created_at
                                         : corpus.annotations[rec].created_at;
            double offset_days = static_cast<double>(t - t0) / 86400.0;
            if (offset_days > params.horizon_days) continue;
            std::optional<double> v = lifespan_event_value(corpus, value, edit_family, rec, model);
            if (!v) continue;
            events.emplace_back(offset_days, *v);
        }
        std::sort(events.begin(), events.end());
        UserSeries s;
        s.cum_count.assign(g, 0);
        s.cum_sum.assign(g, 0.0);
        std::size_t pos = 0;
        std::int64_t cnt = 0;
        double sum = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            while (pos < events.size() && events[pos].first <= grid_days[k]) {
                ++cnt;
                sum += events[pos].second;
                ++pos;
            }
            s.cum_count[k] = cnt;
            s.cum_sum[k] = sum;
        }
        series[u] = std::move(s);
        qualifying.push_back(u);
    }

    std::vector<std::size_t> high, mid;
    for (std::size_t u : qualifying) {
        std::int64_t iq = corpus.users[u].iq;
        if (iq >= kHighIqThreshold) high.push_back(u);
        if (iq >= kMidIqLow && iq <= kMidIqHigh) mid.push_back(u);
    }

    LifespanResult result;
    result.high_iq = stratum_curve(series, high, grid_days, params, 1);
    result.mid_iq = stratum_curve(series, mid, grid_days, params, 2);
    result.all = stratum_curve(series, qualifying, grid_days, params, 3);
    return result;
}

} // namespace annodyn
