#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "schedleak/arrivals.hpp"
#include "schedleak/engine.hpp"

namespace schedleak {

// ---------------------------------------------------------------------------
// Closed forms

/// The no-observation estimation error lambda2 * c: the variance of the
/// per-period Poisson count, and the ceiling any policy can reach.
double privacy_max(double lambda2, double c);

/// Privacy floor of accumulate-and-serve: lambda2*c*(1 - c/T)+ .
double privacy_bound_acc_serve(double lambda2, double c, double T);

/// Privacy floor of p-TDMA: lambda2*c*(1 - c/L)+ .
double privacy_bound_ptdma(double lambda2, double c, double L);

/// M/D/1 mean delay 1 + lambda/(2(1-lambda)). Throws UnstableError at
/// lambda >= 1.
double delay_fcfs(double lambda);

/// TDMA mean delay 1 + M/2 + sum_i (lambda_i/lambda) * lambda_i M^2 /
/// (2(1 - lambda_i M)); each user needs lambda_i < 1/M.
double delay_tdma(std::span<const double> rates);

/// Load threshold (2T + 1 - sqrt(1 + 4T)) / (2T) where the steady-state
/// backlog bound switches branches.
double lambda_star(double T);

/// Steady-state mean backlog bound for accumulate-and-serve, by numeric
/// minimization of (lambda*T + (alpha - lambda*T)^2) / (2(alpha - lambda*T))
/// over alpha in (lambda*T, T]. Equals sqrt(lambda*T) below lambda_star(T)
/// and (lambda + T(1-lambda)^2) / (2(1-lambda)) above it.
double queue_bound_acc_serve(double lambda, double T);

/// Reference upper-bound formula for the accumulate-and-serve mean delay:
/// 1 + lambda(T+1)/2 plus the backlog-bound branch. Note its light-load
/// limit is 1, below the T/2 every buffered job waits on average; measured
/// means exceed it at low loads. See delay_bound_acc_serve_conservative for
/// a bound the simulation respects.
double delay_bound_acc_serve(double lambda, double T);

/// Mean-delay upper bound assembled from the policy's waiting components:
/// T/2 to the seal, the steady-state backlog bound, lambda*T/2 inside the
/// batch, and one unit of service. Dominates the simulated mean at every
/// tested load, and its light-load limit over delay_fcfs is 1 + T/2.
double delay_bound_acc_serve_conservative(double lambda, double T);

/// p-TDMA steady-state mean delay 1 + 1/(2(1-lambda)) + (M-1)/(1-lambda);
/// independent of the adaptation period.
double delay_ptdma(double lambda, int num_users);

// ---------------------------------------------------------------------------
// Empirical reports

enum class BoundKind { Exact, Lower, Upper };

const char* bound_kind_name(BoundKind kind);

/// Empirical MSE of an estimator against the binned truth, with a
/// cross-replication standard error and the closed-form reference it is
/// compared to.
struct EstimationReport {
    std::string policy;
    std::string estimator;
    double empirical_mse{0.0};
    double std_error{0.0};
    int replications{0};
    double closed_form{0.0};
    BoundKind bound_kind{BoundKind::Exact};
    std::map<std::string, double> params;
};

/// Mean delay (units) with a cross-replication standard error next to its
/// closed-form reference.
struct DelayReport {
    std::string policy;
    std::vector<double> per_user_mean;  // index owner-1; NaN when a user had no jobs
    double aggregate_mean{0.0};         // job-weighted across all users
    double std_error{0.0};
    int replications{0};
    double closed_form{0.0};
    BoundKind bound_kind{BoundKind::Exact};
    std::map<std::string, double> params;
};

/// Mean squared error of one replication's estimates against its truth.
/// Throws StatsError("Misaligned...") if the lengths differ.
double mse_against(const ClockBinning& truth, std::span<const double> estimates);

/// Aggregates per-replication MSEs into an EstimationReport (mean and
/// standard error of the mean across replications; needs >= 2).
EstimationReport empirical_privacy(const std::string& policy, const std::string& estimator,
                                   std::span<const double> per_replication_mse,
                                   double closed_form, BoundKind kind);

/// One run's delay observations: jobs arriving at or after the warmup with
/// departures inside the horizon (in-flight jobs at the horizon are censored
/// out of delay statistics).
struct DelaySample {
    std::vector<double> per_user_sum;      // delay sums in units
    std::vector<std::int64_t> per_user_n;  //
    double aggregate_sum{0.0};
    std::int64_t aggregate_n{0};
};

DelaySample delay_sample(const SimulationResult& result, TickTime warmup);

/// Aggregates per-replication delay samples (job-weighted within a
/// replication, then averaged across replications with a standard error).
/// Throws StatsError("NoJobs") when nothing survived warmup/censoring.
DelayReport empirical_delay(const std::string& policy, std::span<const DelaySample> samples,
                            double closed_form, BoundKind kind);

/// Mean end-of-period sealed backlog (units) over accumulate periods sealed
/// after the warmup.
double acc_serve_backlog_mean(const SimulationResult& result, TickTime warmup);

/// Checks the end-of-period backlog recursion
/// next_backlog = max(0, backlog + batch - T) exactly, for every recorded
/// consecutive pair of periods.
bool acc_serve_recursion_holds(const SimulationResult& result, TickDuration accumulate_period);

}  // namespace schedleak
