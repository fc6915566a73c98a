#pragma once

#include <cstdint>
#include <vector>

#include "annodyn/utility.hpp"

namespace annodyn {

struct SimEvent {
    std::int32_t song = 0;
    std::int32_t slot = 0;   // i = 0..M-1
    double x = 0.0;          // coverage proxy i/(M-1)
    ClassLabel cls = ClassLabel::high_iq;
};

struct SimRun {
    std::uint64_t seed = 0;
    int slots_per_song = 0; // M
    int songs = 0;          // S
    double high_share = 0.5;
    std::vector<SimEvent> events; // exactly S*M, song-major, slots in order
};

struct SimParams {
    int slots_per_song = 50;
    int songs = 1;
    std::uint64_t seed = 0;
    double high_share = 0.5; // relative population weight of the high class
    int threads = 1;
};

/// Fill every slot of every song with an author class drawn with probability
/// proportional to population weight times class utility at the slot's
/// coverage x = i/(M-1). Per-song RNG streams are derived from the seed, so
/// a run is bit-identical for any thread count.
SimRun simulate(const UtilityParams& high, const UtilityParams& low, const SimParams& params);

/// Density histogram of x over the run's events of one class. Same binning
/// rule as rank histograms: a value on a bin's upper edge belongs to the
/// bin, x = 0 to the first.
RankHistogram class_conditional_density(const SimRun& run, ClassLabel cls, int bins = 10);

} // namespace annodyn
