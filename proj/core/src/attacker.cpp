#include "schedleak/attacker.hpp"

#include <cmath>
#include <string>

namespace schedleak {

const char* estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::FcfsExact: return "fcfs_exact";
        case EstimatorKind::StatisticalMean: return "statistical_mean";
        case EstimatorKind::AccServeGenie: return "acc_serve_genie";
        case EstimatorKind::PtdmaGenie: return "ptdma_genie";
    }
    return "?";
}

ArrivalTrace gen_probes_thm2(TickDuration c, double lambda1, double lambda2, TickTime horizon,
                             const TickScale& scale, int owner) {
    if (c.ticks() <= 0) throw ConfigError("gen_probes_thm2: clock period must be positive");
    if (lambda1 <= 0.0 || lambda1 >= 1.0 - lambda2)
        throw ConfigError("gen_probes_thm2: need 0 < lambda1 < 1 - lambda2 to keep the queue stable");

    const std::int64_t ceil_c = scale.ceil_div_units(c);
    if (c.ticks() % ceil_c != 0)
        throw NonRepresentableError("gen_probes_thm2: c/ceil(c) is not a whole tick count");
    const Ticks period = c.ticks() / ceil_c;

    const double size_real = lambda1 * static_cast<double>(period);
    const Ticks size = static_cast<Ticks>(size_real + 0.5);
    if (size < 1 || std::abs(size_real - static_cast<double>(size)) > 1e-6)
        throw NonRepresentableError("gen_probes_thm2: probe size lambda1*c/ceil(c) is not a whole tick count");

    const std::int64_t whole_periods = horizon.ticks() / c.ticks();
    const std::int64_t n = whole_periods * ceil_c;

    ArrivalTrace trace;
    trace.owner = owner;
    trace.job_size = TickDuration{size};
    trace.horizon = horizon;
    trace.arrivals.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 1; k <= n; ++k) trace.arrivals.emplace_back(k * period);
    return trace;
}

ArrivalTrace gen_probes_periodic(TickDuration period, TickDuration size, TickTime horizon,
                                 int owner) {
    if (period.ticks() <= 0 || size.ticks() <= 0)
        throw ConfigError("gen_probes_periodic: period and size must be positive");
    ArrivalTrace trace;
    trace.owner = owner;
    trace.job_size = size;
    trace.horizon = horizon;
    for (Ticks t = period.ticks(); t <= horizon.ticks(); t += period.ticks())
        trace.arrivals.emplace_back(t);
    return trace;
}

ProbeObservation observations_from(const SimulationResult& result, int owner) {
    if (owner < 1 || static_cast<std::size_t>(owner) > result.users.size())
        throw ConfigError("observations_from: no such user");
    ProbeObservation obs;
    Ticks prev_departure = -1;
    for (const Job& job : result.users[static_cast<std::size_t>(owner - 1)]) {
        if (job.departure.ticks() <= prev_departure)
            throw ObservationError("observations_from: departures not strictly increasing");
        prev_departure = job.departure.ticks();
        obs.probes.push_back({job.arrival, job.size, job.departure});
    }
    return obs;
}

FcfsReconstruction estimate_fcfs_exact(const ProbeObservation& obs, TickDuration c,
                                       std::int64_t periods, const TickScale& scale) {
    if (periods < 0) throw ConfigError("estimate_fcfs_exact: negative period count");
    const std::int64_t ceil_c = scale.ceil_div_units(c);
    if (c.ticks() % ceil_c != 0)
        throw ObservationError("estimate_fcfs_exact: c/ceil(c) is not a whole tick count");
    const Ticks probe_period = c.ticks() / ceil_c;
    const Ticks unit = scale.ticks_per_unit();
    const std::int64_t n = periods * ceil_c;
    if (static_cast<std::int64_t>(obs.probes.size()) < n)
        throw ObservationError("estimate_fcfs_exact: not enough probes for the requested periods");

    FcfsReconstruction rec;
    rec.sub_intervals.reserve(static_cast<std::size_t>(n));
    rec.period_counts.assign(static_cast<std::size_t>(periods), 0);

    Ticks prev_departure = 0;  // t'_0: no earlier probe
    for (std::int64_t k = 1; k <= n; ++k) {
        const auto& probe = obs.probes[static_cast<std::size_t>(k - 1)];
        const Ticks t = probe.issue.ticks();
        const Ticks s = probe.size.ticks();
        const Ticks dep = probe.departure.ticks();
        if (t != k * probe_period)
            throw ObservationError("estimate_fcfs_exact: probes do not follow the periodic pattern");

        int which;
        std::int64_t count;
        if (prev_departure < t) {
            if (dep == t + s) {
                which = 1;  // went straight into service: nothing queued ahead
                count = 0;
            } else if (dep > t + s) {
                which = 2;  // delayed by victim work that arrived since the last idle point
                count = scale.ceil_div_units(TickDuration{dep - (t + s)});
            } else {
                throw ObservationError("estimate_fcfs_exact: departure before issue+size");
            }
        } else {
            // server continuously busy between the two departures: the gap is
            // this probe plus a whole number of unit victim jobs
            which = 3;
            const Ticks gap = dep - s - prev_departure;
            if (gap < 0 || gap % unit != 0)
                throw ObservationError(
                    "estimate_fcfs_exact: busy-period gap is not a whole number of unit jobs "
                    "(observation/policy mismatch)");
            count = gap / unit;
        }
        rec.sub_intervals.push_back({which, count});
        rec.period_counts[static_cast<std::size_t>((k - 1) / ceil_c)] += count;
        prev_departure = dep;
    }
    return rec;
}

std::vector<double> estimate_statistical_mean(double lambda2, TickDuration c,
                                              std::int64_t periods, const TickScale& scale) {
    if (lambda2 < 0.0) throw ConfigError("estimate_statistical_mean: negative rate");
    return std::vector<double>(static_cast<std::size_t>(periods), lambda2 * scale.units(c));
}

namespace {

std::vector<double> genie_estimate(const std::vector<std::int64_t>& totals, TickDuration period,
                                   TickDuration c, std::int64_t periods, const char* what) {
    if (c.ticks() <= 0 || period.ticks() <= 0)
        throw ConfigError(std::string(what) + ": periods must be positive");
    if (period.ticks() % c.ticks() != 0)
        throw AlignmentError(std::string(what) +
                             ": period must be an integer multiple of the clock period (C1)");
    const std::int64_t per_batch = period.ticks() / c.ticks();
    if (periods > static_cast<std::int64_t>(totals.size()) * per_batch)
        throw AlignmentError(std::string(what) + ": not enough batch totals for the clock horizon");
    const double fraction = static_cast<double>(c.ticks()) / static_cast<double>(period.ticks());
    std::vector<double> est(static_cast<std::size_t>(periods));
    for (std::int64_t k = 0; k < periods; ++k)
        est[static_cast<std::size_t>(k)] =
            fraction * static_cast<double>(totals[static_cast<std::size_t>(k / per_batch)]);
    return est;
}

}  // namespace

std::vector<double> estimate_acc_serve_genie(const std::vector<std::int64_t>& batch_counts,
                                             TickDuration accumulate_period, TickDuration c,
                                             std::int64_t periods) {
    return genie_estimate(batch_counts, accumulate_period, c, periods, "acc_serve_genie");
}

std::vector<double> estimate_ptdma_genie(const std::vector<std::int64_t>& window_counts,
                                         TickDuration adaptation_period, TickDuration c,
                                         std::int64_t periods) {
    return genie_estimate(window_counts, adaptation_period, c, periods, "ptdma_genie");
}

}  // namespace schedleak
