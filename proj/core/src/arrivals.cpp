#include "schedleak/arrivals.hpp"

#include <algorithm>
#include <cmath>

#include "schedleak/rng.hpp"

namespace schedleak {

ArrivalTrace generate(const PoissonSource& source, TickTime horizon, const TickScale& scale) {
    if (source.rate <= 0.0) throw ConfigError("PoissonSource: rate must be > 0");

    ArrivalTrace trace;
    trace.owner = source.owner;
    trace.job_size = source.job_size.ticks() > 0
                         ? source.job_size
                         : TickDuration{scale.ticks_per_unit()};
    trace.horizon = horizon;

    const double horizon_units = scale.units(horizon);
    trace.arrivals.reserve(static_cast<std::size_t>(source.rate * horizon_units) + 16);

    Rng rng(source.seed);
    double t = 0.0;  // running instant in units
    Ticks prev_tick = 0;
    for (;;) {
        t += rng.next_exponential(source.rate);
        if (t >= horizon_units) break;
        Ticks tick = static_cast<Ticks>(std::floor(t * static_cast<double>(scale.ticks_per_unit())));
        // strict ordering: collisions (and tick 0) shift one tick forward
        tick = std::max(tick, prev_tick + 1);
        if (tick > horizon.ticks()) break;
        trace.arrivals.emplace_back(tick);
        prev_tick = tick;
    }
    return trace;
}

ClockBinning bin_counts(const ArrivalTrace& trace, TickDuration c, std::int64_t periods) {
    if (c.ticks() <= 0) throw ConfigError("bin_counts: clock period must be positive");
    if (periods < 0) throw ConfigError("bin_counts: negative period count");
    if (periods * c.ticks() > trace.horizon.ticks())
        throw HorizonError("bin_counts: N*c exceeds the generation horizon");

    ClockBinning binning;
    binning.clock_period = c;
    binning.horizon_periods = periods;
    binning.counts.assign(static_cast<std::size_t>(periods), 0);
    for (const TickTime& a : trace.arrivals) {
        if (a.ticks() <= 0) continue;              // bins start after time zero
        const std::int64_t k = (a.ticks() + c.ticks() - 1) / c.ticks();  // right-inclusive
        if (k >= 1 && k <= periods) ++binning.counts[static_cast<std::size_t>(k - 1)];
    }
    return binning;
}

double empirical_count_variance(const ClockBinning& binning) {
    const std::int64_t n = static_cast<std::int64_t>(binning.counts.size());
    if (n < 2) throw StatsError("empirical_count_variance: need at least 2 periods");
    double mean = 0.0;
    for (std::int64_t x : binning.counts) mean += static_cast<double>(x);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::int64_t x : binning.counts) {
        const double d = static_cast<double>(x) - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(n - 1);
}

}  // namespace schedleak
