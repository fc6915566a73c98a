#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "annodyn/corpus.hpp"

namespace annodyn {

enum class ClassLabel { high_iq, low_iq };

/// Per-class utility of adding an annotation at coverage x:
///   u(x) = b + f(x) - g(x),  f(x) = -a1 x^2 + a2 x,  g(x) = -c1 x^2 + c2 x.
/// The shape constraints keep f and g nonnegative, nondecreasing and concave
/// on [0,1].
struct UtilityParams {
    double b = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    bool feasible(double tol = 1e-9) const {
        return b >= -tol && a1 >= -tol && a2 - 2.0 * a1 >= -tol && c1 >= -tol &&
               c2 - 2.0 * c1 >= -tol;
    }
};

/// The identifiable part of UtilityParams: u(x) = b + d2 x^2 + d1 x.
/// (a1, a2, c1, c2) only enter through d2 = c1 - a1 and d1 = a2 - c2, so raw
/// coefficient vectors are solver-dependent; these three numbers are not.
struct EffectiveParams {
    double b = 0.0;
    double d2 = 0.0;
    double d1 = 0.0;
};

struct RankHistogram {
    std::vector<double> edges;     // bins + 1 ascending edges over [0,1]
    std::vector<double> midpoints; // x_j, one per bin
    std::vector<double> density;   // y_j, heights; sum of density*width = 1
};

/// Top and bottom IQ thirds among users with at least min_annotations
/// annotations. Ranking sorts by (iq, user_id); each class holds
/// floor(T/3) users, returned as ascending table indices.
struct UserClasses {
    std::vector<std::size_t> high_iq;
    std::vector<std::size_t> low_iq;
};

UserClasses split_user_classes(const Corpus& corpus, int min_annotations = 10);

/// Density histogram of proportional time ranks over all annotations by the
/// given users (annotations weighted equally; q-less single-annotation songs
/// excluded). A q equal to a bin's upper edge belongs to that bin.
RankHistogram class_histogram(const Corpus& corpus, const std::vector<std::size_t>& members,
                              int bins = 20);

/// u(x) for x in [0,1]; params must satisfy their invariants.
double evaluate_utility(const UtilityParams& params, double x);

struct FitResult {
    UtilityParams params;       // minimum-norm representative of the optimum
    EffectiveParams effective;
    double residual = 0.0;      // sum of squared errors at the midpoints
    // which constraints the returned params sit on: b, a1, a2-2a1, c1, c2-2c1
    std::array<bool, 5> active{};
};

/// Least-squares fit of u to (midpoint, density) pairs under the shape
/// constraints, by exhaustive active-set enumeration: every subset of the
/// five inequalities is solved as an equality-constrained problem, feasible
/// candidates compete on residual. Subsets whose reduced system is rank
/// deficient are skipped; the optimum is always attained at a full-rank one.
FitResult fit_utility(const RankHistogram& hist);

} // namespace annodyn
