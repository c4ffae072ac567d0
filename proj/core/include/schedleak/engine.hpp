#pragma once

#include <cstdint>
#include <vector>

#include "schedleak/arrivals.hpp"
#include "schedleak/policy.hpp"
#include "schedleak/timebase.hpp"

namespace schedleak {

/// One completed unit of work. Service is non-preemptive and takes exactly
/// `size` ticks once started, so departure >= arrival + size always.
struct Job {
    int owner{0};
    std::int64_t seq{0};
    TickTime arrival;
    TickDuration size;
    TickTime departure;
};

struct SimulationResult {
    TickScale scale;
    TickTime horizon;
    std::vector<std::vector<Job>> users;  // index owner-1; FIFO per user
    std::vector<AccServeScheduler::Period> acc_serve_periods;  // AccumulateServe runs only
    Ticks busy_ticks{0};   // server busy time inside [0, horizon)
    Ticks idle_ticks{0};   // horizon - busy_ticks
    std::int64_t censored_jobs{0};  // departures past the horizon (still served)
};

/// Runs one simulation to completion: every admitted job is served, the
/// event order is deterministic, and at equal ticks arrivals are processed
/// before dispatch decisions (a job arriving exactly when the server frees
/// can be chosen). Seals exclude same-tick arrivals. The run is a pure
/// function of (config, traces, seed).
SimulationResult run(const PolicyConfig& policy, const std::vector<ArrivalTrace>& traces,
                     TickTime horizon, std::uint64_t seed, const TickScale& scale);

/// Drops all jobs arriving before `warmup` (and accumulate periods sealed at
/// or before it) from the result's statistics.
SimulationResult warmup_trim(const SimulationResult& result, TickTime warmup);

}  // namespace schedleak
