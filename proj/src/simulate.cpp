#include "annodyn/simulate.hpp"

#include <string>

#include "annodyn/errors.hpp"
#include "annodyn/parallel.hpp"
#include "annodyn/rng.hpp"

namespace annodyn {
namespace {

// right-inclusive bin over [0,1] from exact integers, 0 in bin 0
std::size_t slot_bin(std::int64_t num, std::int64_t den, std::int64_t bins) {
    if (num == 0) return 0;
    std::int64_t scaled = num * bins;
    return static_cast<std::size_t>((scaled + den - 1) / den - 1);
}

} // namespace

SimRun simulate(const UtilityParams& high, const UtilityParams& low, const SimParams& params) {
    int M = params.slots_per_song;
    int S = params.songs;
    if (M < 2) throw DomainError("need at least 2 slots per song");
    if (S < 1) throw DomainError("need at least one song");
    if (!(params.high_share > 0.0 && params.high_share < 1.0))
        throw DomainError("high_share must lie strictly inside (0,1)");

    // per-slot sampling probabilities, checked once up front
    std::vector<double> p_high(static_cast<std::size_t>(M));
    std::vector<double> xs(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        double x = static_cast<double>(i) / static_cast<double>(M - 1);
        double uh = params.high_share * evaluate_utility(high, x);
        double ul = (1.0 - params.high_share) * evaluate_utility(low, x);
        if (!(uh > 0.0) || !(ul > 0.0))
            throw DomainError("class utilities must be strictly positive on the slot grid (x=" +
                              std::to_string(x) + ")");
        xs[static_cast<std::size_t>(i)] = x;
        p_high[static_cast<std::size_t>(i)] = uh / (uh + ul);
    }

    SimRun run;
    run.seed = params.seed;
    run.slots_per_song = M;
    run.songs = S;
    run.high_share = params.high_share;
    run.events.resize(static_cast<std::size_t>(M) * static_cast<std::size_t>(S));

    parallel_for(static_cast<std::size_t>(S), params.threads, [&](std::size_t song) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(song)));
        std::size_t base = song * static_cast<std::size_t>(M);
        for (int i = 0; i < M; ++i) {
            SimEvent& e = run.events[base + static_cast<std::size_t>(i)];
            e.song = static_cast<std::int32_t>(song);
            e.slot = static_cast<std::int32_t>(i);
            e.x = xs[static_cast<std::size_t>(i)];
            e.cls = rng.uniform() < p_high[static_cast<std::size_t>(i)] ? ClassLabel::high_iq
                                                                        : ClassLabel::low_iq;
        }
    });
    return run;
}

RankHistogram class_conditional_density(const SimRun& run, ClassLabel cls, int bins) {
    if (run.events.empty()) throw DomainError("empty simulation run");
    if (bins < 1) throw DomainError("bin count must be positive");

    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    std::int64_t total = 0;
    std::int64_t den = run.slots_per_song - 1;
    for (const SimEvent& e : run.events) {
        if (e.cls != cls) continue;
        ++counts[slot_bin(e.slot, den, bins)];
        ++total;
    }
    if (total == 0) throw DomainError("no events of the requested class");

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

} // namespace annodyn
