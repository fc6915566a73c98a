#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "annodyn/corpus.hpp"
#include "annodyn/textmetrics.hpp"

namespace annodyn {

enum class ExpertLabel { normal_expert, super_expert };

struct LabeledUser {
    std::size_t user = 0; // index into Corpus::users
    ExpertLabel label = ExpertLabel::normal_expert;
};

/// Users with at least `min_annotations` annotations and at least
/// `min_edits` edits, split into IQ thirds: the top third are super
/// experts, the bottom third normal experts, the middle third is dropped.
/// Equal IQs break by user id. Results come back in id order. Fewer than
/// 3 eligible users is an error.
std::vector<LabeledUser> build_labels(const Corpus& corpus, std::size_t min_annotations = 30,
                                      std::size_t min_edits = 30);

inline constexpr std::size_t kFeatureCount = 6;

/// Early-window behavior summary for one user. Column order in as_array():
/// mean_quality_tags, mean_annotation_gap, first_annotation_count,
/// mean_song_originality, mean_edit_gap, first_edit_count.
struct FeatureVector {
    double mean_quality_tags = 0.0;      // tag occurrences per annotation body
    double mean_annotation_gap = 0.0;    // seconds between consecutive annotations
    double first_annotation_count = 0.0; // annotations that opened their song
    double mean_song_originality = 0.0;  // over the window's songs with a score
    double mean_edit_gap = 0.0;          // seconds between consecutive edits
    double first_edit_count = 0.0;       // edits that were their annotation's first

    std::array<double, kFeatureCount> as_array() const;
};

/// Features over the user's first `window` annotations and first `window`
/// edits in time order (id tiebreak); the user needs at least `window` of
/// each. Gap features average the window - 1 consecutive gaps. `model`
/// scores the annotated songs' stripped lyrics; songs without any scored
/// word are left out of the originality mean.
FeatureVector extract_features(const Corpus& corpus, std::size_t user,
                               const OriginalityModel& model, std::size_t window = 15);

struct ExpertDataset {
    std::vector<std::size_t> users;        // corpus indices, id order
    std::vector<int> labels;               // 1 = super expert
    std::vector<std::vector<double>> rows; // parallel to users, kFeatureCount wide
};

/// Labels plus feature rows for every labeled user. The idf model is
/// built from the corpus itself.
ExpertDataset build_expert_dataset(const Corpus& corpus, std::size_t window = 15,
                                   std::size_t min_annotations = 30, std::size_t min_edits = 30);

/// Logistic model over z-scored features. The normalization constants
/// come from the fitting data and are applied to raw inputs in predict(),
/// so affinely rescaling a raw feature column changes nothing downstream.
struct LogitModel {
    std::vector<double> coefficients; // per feature, normalized scale
    double intercept = 0.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_std; // constant columns get 1 to stay finite

    double predict(std::span<const double> raw) const; // P(label = 1)
};

/// Maximum-likelihood fit by damped Newton steps to gradient norm 1e-8
/// (at most 100 steps, Armijo backtracking). A uniform L2 penalty of 1e-6
/// keeps separable inputs bounded; its bias is negligible at that size.
/// Both label values must appear.
LogitModel fit_logit(const std::vector<std::vector<double>>& rows,
                     const std::vector<int>& labels);

struct CoefficientSummary {
    double mean = 0.0;
    double ci_low = 0.0;  // 2.5th percentile across resamples
    double ci_high = 0.0; // 97.5th percentile
};

struct BootstrapResult {
    std::vector<CoefficientSummary> coefficients; // per feature column
    CoefficientSummary intercept;
    std::size_t redrawn = 0; // single-class resamples replaced
};

/// Percentile bootstrap over rows: n_boot resamples with replacement, one
/// Newton fit each. Features are z-scored once on the full input before
/// resampling. A resample containing a single class is redrawn (and
/// counted). Deterministic in (seed); independent of thread count.
BootstrapResult fit_logit_bootstrap(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels, std::size_t n_boot = 10000,
                                    std::uint64_t seed = 0, int threads = 1);

struct EvalResult {
    double accuracy_mean = 0.0, accuracy_std = 0.0;
    double auc_mean = 0.0, auc_std = 0.0;
    double majority_mean = 0.0, majority_std = 0.0; // most-common-test-label guess
    std::size_t redrawn = 0; // splits whose test side missed a class
};

/// Repeated random-split evaluation of a predictor subset: per split, fit
/// on the training share (z-scored on training rows only) and score the
/// held-out rows. Accuracy thresholds the probability at 0.5; AUC is the
/// rank statistic. A split whose test side has one class is redrawn.
/// Means and standard deviations are taken across splits.
EvalResult evaluate(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                    const std::vector<std::size_t>& predictor_subset, std::size_t n_splits = 1000,
                    double train_frac = 0.75, std::uint64_t seed = 0, int threads = 1);

/// Area under the ROC curve by the average-rank statistic; tied scores
/// count half a pair. Labels are 0/1 and both classes must appear.
double auc_score(std::span<const double> scores, std::span<const int> labels);

/// Damped PageRank with uniform teleport, iterated to an L1 change of at
/// most `tol`. Nodes are the ids appearing in `edges`; repeated pairs
/// count once; the mass of nodes without outgoing edges spreads
/// uniformly. Scores sum to 1. An empty edge list has no nodes and is an
/// error.
std::map<std::string, double> pagerank(const std::vector<SocialEdge>& edges,
                                       double damping = 0.85, double tol = 1e-10);

/// Follower count per node; both endpoints of every edge get an entry and
/// repeated pairs count once.
std::map<std::string, std::int64_t> in_degree(const std::vector<SocialEdge>& edges);

} // namespace annodyn
