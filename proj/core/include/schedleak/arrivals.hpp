#pragma once

#include <cstdint>
#include <vector>

#include "schedleak/timebase.hpp"

namespace schedleak {

/// Poisson job source for one user.
///
/// For a fixed seed and scale the generated stream is deterministic;
/// replication r of an experiment uses seed = base_seed + r.
struct PoissonSource {
    int owner{1};
    double rate{0.0};          // jobs per unit time, > 0
    TickDuration job_size;     // default set to one unit by generate()
    std::uint64_t seed{0};
};

/// One user's arrival times, strictly increasing on the tick grid.
struct ArrivalTrace {
    int owner{1};
    TickDuration job_size;
    std::vector<TickTime> arrivals;
    TickTime horizon;  // generation horizon; arrivals all lie in (0, horizon]
};

/// Per-clock-period arrival counts X_1..X_N; counts[k-1] is the number of
/// arrivals in ((k-1)c, kc] (right endpoint inclusive).
struct ClockBinning {
    TickDuration clock_period;
    std::int64_t horizon_periods{0};
    std::vector<std::int64_t> counts;
};

/// Samples exponential inter-arrival gaps in real arithmetic and quantizes
/// each instant to the tick grid (floor). Collisions are resolved by shifting
/// the later arrival one tick forward, and an instant that quantizes to tick
/// zero is shifted to tick one for the same reason: all arrivals stay
/// strictly ordered inside (0, horizon]. Both events vanish as the scale
/// grows.
ArrivalTrace generate(const PoissonSource& source, TickTime horizon, const TickScale& scale);

/// Bins a trace into N periods of length c. Throws HorizonError if N*c
/// extends past the trace's generation horizon.
ClockBinning bin_counts(const ArrivalTrace& trace, TickDuration c, std::int64_t periods);

/// Unbiased sample variance of the binned counts; needs at least 2 periods.
double empirical_count_variance(const ClockBinning& binning);

}  // namespace schedleak
