#include "schedleak/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schedleak {

double privacy_max(double lambda2, double c) {
    if (lambda2 < 0.0 || c <= 0.0) throw ConfigError("privacy_max: need lambda2 >= 0 and c > 0");
    return lambda2 * c;
}

double privacy_bound_acc_serve(double lambda2, double c, double T) {
    if (T <= 0.0) throw ConfigError("privacy_bound_acc_serve: T must be positive");
    return privacy_max(lambda2, c) * std::max(0.0, 1.0 - c / T);
}

double privacy_bound_ptdma(double lambda2, double c, double L) {
    if (L <= 0.0) throw ConfigError("privacy_bound_ptdma: L must be positive");
    return privacy_max(lambda2, c) * std::max(0.0, 1.0 - c / L);
}

double delay_fcfs(double lambda) {
    if (lambda < 0.0) throw ConfigError("delay_fcfs: negative rate");
    if (lambda >= 1.0) throw UnstableError("delay_fcfs: lambda >= 1");
    return 1.0 + lambda / (2.0 * (1.0 - lambda));
}

double delay_tdma(std::span<const double> rates) {
    const int m = static_cast<int>(rates.size());
    if (m < 1) throw ConfigError("delay_tdma: need at least one rate");
    double lambda = 0.0;
    for (double r : rates) {
        if (r < 0.0) throw ConfigError("delay_tdma: negative rate");
        if (r * m >= 1.0) throw UnstableError("delay_tdma: lambda_i >= 1/M");
        lambda += r;
    }
    if (lambda <= 0.0) throw ConfigError("delay_tdma: total rate must be positive");
    double sum = 0.0;
    for (double r : rates)
        sum += (r / lambda) * (r * m * m) / (2.0 * (1.0 - r * m));
    return 1.0 + m / 2.0 + sum;
}

double lambda_star(double T) {
    if (T <= 0.0) throw ConfigError("lambda_star: T must be positive");
    return (2.0 * T + 1.0 - std::sqrt(1.0 + 4.0 * T)) / (2.0 * T);
}

double queue_bound_acc_serve(double lambda, double T) {
    if (T <= 0.0) throw ConfigError("queue_bound_acc_serve: T must be positive");
    if (lambda < 0.0) throw ConfigError("queue_bound_acc_serve: negative rate");
    if (lambda >= 1.0) throw UnstableError("queue_bound_acc_serve: lambda >= 1");
    if (lambda == 0.0) return 0.0;
    // minimize f(u) = (lambda*T)/(2u) + u/2 over u = alpha - lambda*T in
    // (0, T(1-lambda)]; f is convex, so golden-section search converges
    const double lt = lambda * T;
    auto f = [lt](double u) { return (lt + u * u) / (2.0 * u); };
    double lo = 1e-12 * T;
    double hi = T * (1.0 - lambda);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (hi - lo) > 1e-13 * T; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - phi * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + phi * (hi - lo); f2 = f(x2);
        }
    }
    // the feasible boundary alpha = T is a candidate when the interior
    // minimum falls outside
    return std::min(f(0.5 * (lo + hi)), f(T * (1.0 - lambda)));
}

double delay_bound_acc_serve(double lambda, double T) {
    if (lambda >= 1.0) throw UnstableError("delay_bound_acc_serve: lambda >= 1");
    if (lambda < 0.0 || T <= 0.0) throw ConfigError("delay_bound_acc_serve: bad arguments");
    if (lambda == 0.0) return 1.0;
    const double branch = lambda > lambda_star(T)
                              ? (lambda + T * (1.0 - lambda) * (1.0 - lambda)) / (2.0 * (1.0 - lambda))
                              : std::sqrt(lambda * T);
    return 1.0 + lambda * (T + 1.0) / 2.0 + branch;
}

double delay_bound_acc_serve_conservative(double lambda, double T) {
    if (lambda >= 1.0) throw UnstableError("delay_bound_acc_serve_conservative: lambda >= 1");
    if (lambda < 0.0 || T <= 0.0)
        throw ConfigError("delay_bound_acc_serve_conservative: bad arguments");
    return 1.0 + T / 2.0 + lambda * T / 2.0 + queue_bound_acc_serve(lambda, T);
}

double delay_ptdma(double lambda, int num_users) {
    if (num_users < 1) throw ConfigError("delay_ptdma: need at least one user");
    if (lambda < 0.0) throw ConfigError("delay_ptdma: negative rate");
    if (lambda >= 1.0) throw UnstableError("delay_ptdma: lambda >= 1");
    return 1.0 + 1.0 / (2.0 * (1.0 - lambda)) + (num_users - 1) / (1.0 - lambda);
}

// ---------------------------------------------------------------------------

const char* bound_kind_name(BoundKind kind) {
    switch (kind) {
        case BoundKind::Exact: return "exact";
        case BoundKind::Lower: return "lower";
        case BoundKind::Upper: return "upper";
    }
    return "?";
}

double mse_against(const ClockBinning& truth, std::span<const double> estimates) {
    if (truth.counts.size() != estimates.size())
        throw StatsError("Misaligned: estimate and truth period counts differ");
    if (truth.counts.empty()) throw StatsError("Misaligned: no periods");
    double sum = 0.0;
    for (std::size_t k = 0; k < estimates.size(); ++k) {
        const double d = static_cast<double>(truth.counts[k]) - estimates[k];
        sum += d * d;
    }
    return sum / static_cast<double>(estimates.size());
}

namespace {

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_and_se(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw StatsError("need at least 2 replications for a standard error");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n))};
}

}  // namespace

EstimationReport empirical_privacy(const std::string& policy, const std::string& estimator,
                                   std::span<const double> per_replication_mse,
                                   double closed_form, BoundKind kind) {
    const MeanSe ms = mean_and_se(per_replication_mse);
    EstimationReport report;
    report.policy = policy;
    report.estimator = estimator;
    report.empirical_mse = ms.mean;
    report.std_error = ms.se;
    report.replications = static_cast<int>(per_replication_mse.size());
    report.closed_form = closed_form;
    report.bound_kind = kind;
    return report;
}

DelaySample delay_sample(const SimulationResult& result, TickTime warmup) {
    DelaySample sample;
    sample.per_user_sum.assign(result.users.size(), 0.0);
    sample.per_user_n.assign(result.users.size(), 0);
    for (std::size_t u = 0; u < result.users.size(); ++u) {
        for (const Job& job : result.users[u]) {
            if (job.arrival < warmup) continue;
            if (job.departure > result.horizon) continue;  // censored
            const double d = result.scale.units(job.departure - job.arrival);
            sample.per_user_sum[u] += d;
            ++sample.per_user_n[u];
            sample.aggregate_sum += d;
            ++sample.aggregate_n;
        }
    }
    return sample;
}

DelayReport empirical_delay(const std::string& policy, std::span<const DelaySample> samples,
                            double closed_form, BoundKind kind) {
    if (samples.size() < 2) throw StatsError("empirical_delay: need at least 2 replications");
    std::vector<double> per_rep;
    per_rep.reserve(samples.size());
    std::size_t num_users = 0;
    for (const DelaySample& s : samples) {
        if (s.aggregate_n == 0) throw StatsError("NoJobs: a replication has no uncensored jobs");
        per_rep.push_back(s.aggregate_sum / static_cast<double>(s.aggregate_n));
        num_users = std::max(num_users, s.per_user_sum.size());
    }
    const MeanSe ms = mean_and_se(per_rep);

    DelayReport report;
    report.policy = policy;
    report.aggregate_mean = ms.mean;
    report.std_error = ms.se;
    report.replications = static_cast<int>(samples.size());
    report.closed_form = closed_form;
    report.bound_kind = kind;
    report.per_user_mean.assign(num_users, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t u = 0; u < num_users; ++u) {
        double sum = 0.0;
        std::int64_t n = 0;
        for (const DelaySample& s : samples) {
            if (u < s.per_user_sum.size()) {
                sum += s.per_user_sum[u];
                n += s.per_user_n[u];
            }
        }
        if (n > 0) report.per_user_mean[u] = sum / static_cast<double>(n);
    }
    return report;
}

double acc_serve_backlog_mean(const SimulationResult& result, TickTime warmup) {
    double sum = 0.0;
    std::int64_t n = 0;
    for (const auto& p : result.acc_serve_periods) {
        if (p.seal_tick <= warmup.ticks()) continue;
        sum += static_cast<double>(p.backlog_before_seal);
        ++n;
    }
    if (n == 0) throw StatsError("acc_serve_backlog_mean: no periods after warmup");
    return sum / static_cast<double>(n) / static_cast<double>(result.scale.ticks_per_unit());
}

bool acc_serve_recursion_holds(const SimulationResult& result, TickDuration accumulate_period) {
    const auto& ps = result.acc_serve_periods;
    for (std::size_t m = 0; m + 1 < ps.size(); ++m) {
        const Ticks expected =
            std::max<Ticks>(0, ps[m].backlog_before_seal + ps[m].batch_ticks -
                                   accumulate_period.ticks());
        if (ps[m + 1].backlog_before_seal != expected) return false;
    }
    return true;
}

}  // namespace schedleak
