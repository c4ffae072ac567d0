#pragma once

#include <cstdint>
#include <vector>

#include "schedleak/arrivals.hpp"
#include "schedleak/engine.hpp"
#include "schedleak/timebase.hpp"

namespace schedleak {

enum class ProbeKind { PeriodicThm2, PeriodicGeneric };

/// Attacker probe pattern. The rate budget lambda1 must stay below
/// 1 - lambda2 to keep the shared queue stable, and the probe period and
/// size must be exact tick counts.
struct ProbeStrategy {
    ProbeKind kind{ProbeKind::PeriodicThm2};
    double rate{0.0};         // lambda1 budget (size/period)
    TickDuration period;
    TickDuration probe_size;
    int owner{2};
};

/// What the attacker knows per probe: issue time, size, departure time.
struct ProbeObservation {
    struct Probe {
        TickTime issue;
        TickDuration size;
        TickTime departure;
    };
    std::vector<Probe> probes;
};

enum class EstimatorKind { FcfsExact, StatisticalMean, AccServeGenie, PtdmaGenie };

const char* estimator_name(EstimatorKind kind);

/// The zero-error probe pattern against FCFS: one probe every c/ceil(c)
/// units (at most one unit, so probes straddle every unit-size job), each of
/// size lambda1 * c/ceil(c), the first one period in. Generates exactly the
/// probes covering the first floor(horizon/c) whole clock periods.
ArrivalTrace gen_probes_thm2(TickDuration c, double lambda1, double lambda2, TickTime horizon,
                             const TickScale& scale, int owner = 2);

/// A plain periodic probe stream (period/size free), for delay load and for
/// showing that probe patterns do not move the genie estimates.
ArrivalTrace gen_probes_periodic(TickDuration period, TickDuration size, TickTime horizon,
                                 int owner = 2);

/// Pulls the attacker's observation tuple out of a finished run.
ProbeObservation observations_from(const SimulationResult& result, int owner);

/// Per-sub-interval reconstruction detail for the FCFS attack; `which_case`
/// is 1 (probe went straight into service), 2 (probe was delayed, server
/// idle before it arrived) or 3 (previous probe departed after this one
/// arrived).
struct FcfsReconstruction {
    struct SubInterval {
        int which_case;
        std::int64_t count;  // reconstructed arrivals in ((k-1)p, kp]
    };
    std::vector<SubInterval> sub_intervals;   // one per probe
    std::vector<std::int64_t> period_counts;  // one per clock period
};

/// Exact reconstruction of the victim's per-period counts from FCFS probe
/// observations, assuming unit victim jobs and the gen_probes_thm2 pattern.
///
/// Per sub-interval k (with t'_0 = 0):
///   t'_{k-1} <  t_k and t'_k = t_k + s_k  ->  0
///   t'_{k-1} <  t_k and t'_k > t_k + s_k  ->  ceil((t'_k - t_k - s_k) / unit)
///   t'_{k-1} >= t_k                       ->  (t'_k - s_k - t'_{k-1}) / unit
/// and period counts are sums of ceil(c) consecutive sub-intervals.
///
/// Throws ObservationError when a reconstructed count is negative or not a
/// whole number of units, which signals an observation/policy mismatch.
FcfsReconstruction estimate_fcfs_exact(const ProbeObservation& obs, TickDuration c,
                                       std::int64_t periods, const TickScale& scale);

/// Estimate ignoring all observations: the per-period statistical mean
/// lambda2 * c for every period.
std::vector<double> estimate_statistical_mean(double lambda2, TickDuration c,
                                              std::int64_t periods, const TickScale& scale);

/// Genie estimate under accumulate-and-serve: given the per-batch victim
/// totals B_m (ground truth side information), each clock period inside
/// batch m gets (c/T) * B_m. Requires T to be a multiple of c with both
/// grids anchored at time zero, so every clock period sits inside one batch.
std::vector<double> estimate_acc_serve_genie(const std::vector<std::int64_t>& batch_counts,
                                             TickDuration accumulate_period, TickDuration c,
                                             std::int64_t periods);

/// Genie estimate under p-TDMA from per-adaptation-window victim totals;
/// same construction with L in place of T.
std::vector<double> estimate_ptdma_genie(const std::vector<std::int64_t>& window_counts,
                                         TickDuration adaptation_period, TickDuration c,
                                         std::int64_t periods);

}  // namespace schedleak
