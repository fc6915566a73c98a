#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "annodyn/corpus.hpp"
#include "annodyn/textmetrics.hpp"

namespace annodyn {

enum class EventKind { annotation, edit };

/// One time-ranked event. Annotation events rank annotations within their
/// song (R = 1..n). Edit events rank the revision history of one annotation:
/// rank 0 is the initial annotation itself (initial_revision set, record
/// indexes the annotations table), ranks 1..k are the edit records.
struct RankedEvent {
    EventKind kind = EventKind::annotation;
    bool initial_revision = false;
    std::size_t actor = 0;   // users table index
    std::size_t subject = 0; // song index (annotation events) or annotation index (edit events)
    std::size_t record = 0;  // annotations or edits table index, by kind/initial_revision
    std::int64_t time_rank = 0;
    std::optional<double> proportional_rank; // (R-1)/(n-1); absent when n < 2 and for edits
    std::int64_t created_at = 0;
};

/// collapse_self_edit_runs drops an edit whose author also produced the
/// previous retained revision of the same annotation; ranks are reassigned
/// afterwards, so rank 0 always stays the initial annotation.
std::vector<RankedEvent> rank_events(const Corpus& corpus, bool collapse_self_edit_runs = false);

enum class EventValue {
    actor_iq,
    actor_total_annotations,
    quality_tags,
    length,
    segment_originality,
};

/// Value of one event, absent when undefined (rarity score with no known
/// token). segment_originality requires a model.
std::optional<double> event_value(const Corpus& corpus, const RankedEvent& event, EventValue value,
                                  const OriginalityModel* model = nullptr);

struct BinnedCurve {
    std::vector<double> bin_lo;
    std::vector<double> bin_hi;
    std::vector<std::optional<double>> mean; // absent for empty bins
    std::vector<std::int64_t> count;
    std::vector<double> boot_std; // zero when the curve is not bootstrapped
};

/// Mean of `value` per proportional-rank bin over annotation events with a
/// defined q. A value equal to a bin's upper edge belongs to that bin and
/// q = 0 belongs to the first; assignment is computed in integer arithmetic
/// from (R, n), so edge cases never depend on rounding.
BinnedCurve curve_vs_proportional_rank(const Corpus& corpus,
                                       const std::vector<RankedEvent>& events, EventValue value,
                                       int bins = 20, const OriginalityModel* model = nullptr);

/// One curve per stratum k = 0..max_total_edits, stratum k holding the
/// annotations with exactly k retained edits; curve point r is the mean of
/// `value` over the stratum's rank-r revisions.
std::vector<BinnedCurve> edit_strata_curves(const Corpus& corpus,
                                            const std::vector<RankedEvent>& events,
                                            EventValue value, int max_total_edits = 9,
                                            const OriginalityModel* model = nullptr);

enum class LifespanValue {
    is_first_annotation, // 1 when the annotation is its song's earliest
    quality_tags,
    length,
    segment_originality,
    edit_length, // length of edit bodies; switches the event family to edits
};

struct LifespanParams {
    double horizon_days = 1500.0;
    int min_events = 10;  // user inclusion threshold, counted over the event family
    int n_boot = 100;     // bootstrap replicates over users
    int grid_points = 50; // evaluation days horizon*k/grid_points, k = 1..grid_points
    std::uint64_t seed = 0;
};

inline constexpr std::int64_t kHighIqThreshold = 100000;
inline constexpr std::int64_t kMidIqLow = 10000;
inline constexpr std::int64_t kMidIqHigh = 50000;

/// Cumulative averages over user lifespans. Point k pools every qualifying
/// stratum user's events within horizon*k/grid_points days of that user's
/// first event (boundary inclusive); mean comes from the original sample,
/// boot_std from user-level bootstrap resampling. bin_lo is 0 throughout
/// (bins are cumulative), bin_hi is the day offset.
struct LifespanResult {
    std::optional<BinnedCurve> high_iq; // iq >= 100000
    std::optional<BinnedCurve> mid_iq;  // 10000 <= iq <= 50000
    std::optional<BinnedCurve> all;     // every qualifying user
};

LifespanResult lifespan_curves(const Corpus& corpus, LifespanValue value,
                               const LifespanParams& params = {},
                               const OriginalityModel* model = nullptr);

} // namespace annodyn
