// Acceptance suite: one line per criterion, non-zero exit on any failure.
// Run a single criterion by passing its number (1..10) as the only argument.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "schedleak/experiment.hpp"

using namespace schedleak;

namespace {

const TickScale kScale{kDefaultTicksPerUnit};

TickTime at(double units) { return TickTime{kScale.duration_from_double(units).ticks()}; }
TickDuration dur(double units) { return kScale.duration_from_double(units); }

void for_each_replication(int n, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(worker_count(), n));
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                body(i);
            }
        });
    for (auto& t : pool) t.join();
}

ExperimentConfig privacy_base(PolicyKind policy, EstimatorKind estimator, double lambda2,
                              double horizon, int reps, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Privacy;
    cfg.policy = policy;
    cfg.estimator = estimator;
    cfg.alice_rate = lambda2;
    cfg.clock_period_units = 2.0;
    cfg.horizon_units = horizon;
    cfg.replications = reps;
    cfg.base_seed = seed;
    return cfg;
}

// --- criteria -------------------------------------------------------------

bool criterion_1(std::ostream& os) {
    // exact reconstruction under FCFS across 100 seeds and three probe rates
    bool pass = true;
    for (double lambda1 : {0.01, 0.1, 0.3}) {
        ExperimentConfig cfg = privacy_base(PolicyKind::Fcfs, EstimatorKind::FcfsExact, 0.2,
                                            100000.0, 100, 1000);
        cfg.attacker = {true, ProbeKind::PeriodicThm2, lambda1, 0.0, 0.0, 2};
        const PrivacyOutcome out = run_privacy_experiment(cfg);
        os << " lambda1=" << lambda1 << " mse=" << out.report.empirical_mse;
        pass = pass && out.report.empirical_mse == 0.0;
    }
    return pass;
}

bool criterion_2(std::ostream& os) {
    bool pass = true;
    for (double lambda2 : {0.2, 0.45}) {
        ExperimentConfig cfg = privacy_base(PolicyKind::Tdma, EstimatorKind::StatisticalMean,
                                            lambda2, 100000.0, 30, 2000);
        const PrivacyOutcome out = run_privacy_experiment(cfg);
        const double ref = privacy_max(lambda2, 2.0);
        const bool ok = std::abs(out.report.empirical_mse - ref) <= 3.0 * out.report.std_error;
        os << " lambda2=" << lambda2 << " mse=" << out.report.empirical_mse << " ref=" << ref
           << " se=" << out.report.std_error << (ok ? "" : " OUT-OF-BAND");
        pass = pass && ok;
    }
    return pass;
}

bool criterion_3(std::ostream& os) {
    bool pass = true;
    for (double T : {4.0, 10.0, 20.0}) {
        ExperimentConfig cfg = privacy_base(PolicyKind::AccumulateServe,
                                            EstimatorKind::AccServeGenie, 0.2, 100000.0, 30, 3000);
        cfg.accumulate_period_units = T;
        const PrivacyOutcome out = run_privacy_experiment(cfg);
        const double ref = privacy_bound_acc_serve(0.2, 2.0, T);
        const bool ok = std::abs(out.report.empirical_mse - ref) <= 3.0 * out.report.std_error;
        os << " T=" << T << " mse=" << out.report.empirical_mse << " ref=" << ref
           << " se=" << out.report.std_error << (ok ? "" : " OUT-OF-BAND");
        pass = pass && ok;
    }
    return pass;
}

bool criterion_4(std::ostream& os) {
    PolicyConfig acc{PolicyKind::AccumulateServe, 2, dur(10.0), {}, {}, {}};
    PoissonSource src{1, 0.2, TickDuration{}, 424242};
    const TickTime horizon = at(20000.0);
    const ArrivalTrace alice = generate(src, horizon, kScale);
    const ArrivalTrace probes_a = gen_probes_periodic(dur(1.0), dur(0.3), horizon, 2);
    const ArrivalTrace probes_b = gen_probes_periodic(dur(0.5), dur(0.05), horizon, 2);
    const SimulationResult run_a = run(acc, {alice, probes_a}, horizon, 1, kScale);
    const SimulationResult run_b = run(acc, {alice, probes_b}, horizon, 1, kScale);

    bool departures_differ = run_a.users[1].size() != run_b.users[1].size();
    for (std::size_t i = 0; !departures_differ && i < run_a.users[1].size(); ++i)
        departures_differ = run_a.users[1][i].departure != run_b.users[1][i].departure;

    const std::int64_t batches = horizon.ticks() / dur(10.0).ticks();
    const std::int64_t periods = batches * 5;
    const auto est_a = estimate_acc_serve_genie(bin_counts(alice, dur(10.0), batches).counts,
                                                dur(10.0), dur(2.0), periods);
    const auto est_b = estimate_acc_serve_genie(bin_counts(alice, dur(10.0), batches).counts,
                                                dur(10.0), dur(2.0), periods);
    const bool identical = est_a == est_b;
    os << " probe departures differ=" << (departures_differ ? "yes" : "no")
       << " genie estimates bitwise identical=" << (identical ? "yes" : "no");
    return departures_differ && identical;
}

ExperimentConfig delay_base(PolicyKind policy, std::vector<double> rates, double horizon,
                            int reps, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Delay;
    cfg.policy = policy;
    cfg.user_rates = std::move(rates);
    cfg.horizon_units = horizon;
    cfg.replications = reps;
    cfg.base_seed = seed;
    return cfg;
}

bool criterion_5(std::ostream& os) {
    bool pass = true;
    const double refs[] = {1.2142857143, 1.5, 3.0};
    const double lambdas[] = {0.3, 0.5, 0.8};
    for (int i = 0; i < 3; ++i) {
        const ExperimentConfig cfg = delay_base(
            PolicyKind::Fcfs, {lambdas[i] / 2.0, lambdas[i] / 2.0}, 500000.0, 30, 5000 + i);
        const DelayOutcome out = run_delay_experiment(cfg);
        const bool ok = std::abs(out.report.aggregate_mean - refs[i]) <= 0.02 * refs[i];
        os << " lambda=" << lambdas[i] << " mean=" << out.report.aggregate_mean
           << " ref=" << refs[i] << (ok ? "" : " OUT-OF-BAND");
        pass = pass && ok;
    }
    return pass;
}

bool criterion_6(std::ostream& os) {
    const ExperimentConfig cfg = delay_base(PolicyKind::Tdma, {0.2, 0.2}, 500000.0, 30, 6000);
    const DelayOutcome out = run_delay_experiment(cfg);
    const double ref = 2.6666666667;
    os << " mean=" << out.report.aggregate_mean << " ref=" << ref;
    return std::abs(out.report.aggregate_mean - ref) <= 0.03 * ref;
}

bool criterion_7(std::ostream& os) {
    // NOTE: the delay half of this criterion fails as specified. The branch
    // formula delay_bound_acc_serve omits the T/2 buffering wait every
    // accumulate-and-serve job pays before its seal (its light-load limit is
    // 1, yet no buffered job can average below 1 + T/2), so a faithful
    // simulation sits above it at these loads. The component-form bound is
    // reported alongside and holds. See the README formula notes.
    bool pass = true;
    const double T = 5.0;
    struct Load { std::vector<double> rates; double lambda; };
    for (const Load& load : {Load{{0.15, 0.15}, 0.3}, Load{{0.2, 0.45}, 0.65}}) {
        const int reps = 30;
        const TickTime horizon = at(500000.0);
        const TickTime warmup = at(50000.0);
        std::vector<double> delay_means(reps), backlog_means(reps);
        for_each_replication(reps, [&](int rep) {
            std::vector<ArrivalTrace> traces;
            for (int user = 1; user <= 2; ++user) {
                PoissonSource src{user, load.rates[static_cast<std::size_t>(user - 1)],
                                  TickDuration{},
                                  derive_seed(7000 + static_cast<std::uint64_t>(rep),
                                              static_cast<std::uint64_t>(user))};
                traces.push_back(generate(src, horizon, kScale));
            }
            PolicyConfig acc{PolicyKind::AccumulateServe, 2, dur(T), {}, {}, {}};
            const SimulationResult sim =
                run(acc, traces, horizon, 7000 + static_cast<std::uint64_t>(rep), kScale);
            const DelaySample s = delay_sample(sim, warmup);
            delay_means[static_cast<std::size_t>(rep)] =
                s.aggregate_sum / static_cast<double>(s.aggregate_n);
            backlog_means[static_cast<std::size_t>(rep)] = acc_serve_backlog_mean(sim, warmup);
        });
        const double bound = delay_bound_acc_serve(load.lambda, T);
        const double conservative = delay_bound_acc_serve_conservative(load.lambda, T);
        const double queue_bound = queue_bound_acc_serve(load.lambda, T);
        double worst_delay = 0.0, backlog_sum = 0.0;
        int reps_over_bound = 0;
        for (int rep = 0; rep < reps; ++rep) {
            worst_delay = std::max(worst_delay, delay_means[static_cast<std::size_t>(rep)]);
            if (delay_means[static_cast<std::size_t>(rep)] > bound) ++reps_over_bound;
            backlog_sum += backlog_means[static_cast<std::size_t>(rep)];
        }
        const double backlog_mean = backlog_sum / reps;
        const bool delay_ok = reps_over_bound == 0;
        const bool backlog_ok = backlog_mean <= queue_bound;
        const bool conservative_ok = worst_delay <= conservative;
        // the two printed second-branch forms of the backlog bound, for
        // comparison (with and without the factor T on the quadratic term)
        const double branch_with_T =
            (load.lambda + T * (1 - load.lambda) * (1 - load.lambda)) / (2 * (1 - load.lambda));
        const double branch_without_T =
            (load.lambda + (1 - load.lambda) * (1 - load.lambda)) / (2 * (1 - load.lambda));
        os << "\n    lambda=" << load.lambda << " worst rep delay=" << worst_delay
           << " vs branch bound=" << bound << " -> " << (delay_ok ? "ok" : "VIOLATED")
           << " (" << reps_over_bound << "/" << reps << " reps over)"
           << "; component bound=" << conservative << " -> "
           << (conservative_ok ? "holds" : "VIOLATED") << "\n    backlog mean=" << backlog_mean
           << " vs optimized bound=" << queue_bound << " -> " << (backlog_ok ? "ok" : "VIOLATED")
           << " (branch forms: with-T=" << branch_with_T << ", without-T=" << branch_without_T
           << ")";
        pass = pass && delay_ok && backlog_ok;
    }
    return pass;
}

bool criterion_8(std::ostream& os) {
    ExperimentConfig cfg = delay_base(PolicyKind::ProportionalTdma, {0.2, 0.45}, 500000.0, 30, 8000);
    cfg.adaptation_period_units = 20.0;
    const DelayOutcome out = run_delay_experiment(cfg);
    const double ref = delay_ptdma(0.65, 2);
    os << " mean=" << out.report.aggregate_mean << " ref=" << ref;
    return std::abs(out.report.aggregate_mean - ref) <= 0.05 * ref;
}

bool criterion_9(std::ostream& os) {
    std::atomic<int> holds{0};
    const int reps = 30;
    for_each_replication(reps, [&](int rep) {
        const TickTime horizon = at(100000.0);
        PoissonSource u1{1, 0.2, TickDuration{}, derive_seed(9000 + static_cast<std::uint64_t>(rep), 1)};
        PoissonSource u2{2, 0.45, TickDuration{}, derive_seed(9000 + static_cast<std::uint64_t>(rep), 2)};
        std::vector<ArrivalTrace> traces{generate(u1, horizon, kScale)};
        if (rep % 5 == 0)  // every fifth run mixes sub-unit probe jobs in; the recursion is tick-exact
            traces.push_back(gen_probes_periodic(dur(2.0), dur(0.3), horizon, 2));
        else
            traces.push_back(generate(u2, horizon, kScale));
        PolicyConfig acc{PolicyKind::AccumulateServe, 2, dur(5.0), {}, {}, {}};
        const SimulationResult sim =
            run(acc, traces, horizon, 9000 + static_cast<std::uint64_t>(rep), kScale);
        if (acc_serve_recursion_holds(sim, dur(5.0))) holds.fetch_add(1);
    });
    os << " recursion exact in " << holds.load() << "/" << reps << " runs";
    return holds.load() == reps;
}

bool criterion_10(std::ostream& os) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Tradeoff;
    cfg.user_rates = {0.2, 0.45};
    cfg.clock_period_units = 2.0;
    cfg.horizon_units = 100000.0;
    cfg.replications = 30;
    cfg.base_seed = 10000;
    cfg.acc_serve_T = {4.0, 10.0, 20.0, 40.0};
    cfg.ptdma_L = {4.0, 10.0, 20.0, 40.0};
    const std::vector<TradeoffRow> rows = run_tradeoff(cfg);
    const TradeoffCheck check = check_tradeoff(rows);
    for (const TradeoffRow& row : rows)
        os << "\n    " << row.policy
           << (row.param_name.empty() ? "" : " " + row.param_name + "=" + csv_num(row.param_value))
           << ": privacy_ratio=" << csv_num(row.privacy_ratio)
           << " delay_ratio=" << csv_num(row.delay_ratio);
    for (const std::string& f : check.failures) os << "\n    FAILED: " << f;
    return check.pass;
}

struct Criterion {
    int id;
    const char* title;
    bool (*fn)(std::ostream&);
};

const Criterion kCriteria[] = {
    {1, "fcfs exact attack reconstructs every period exactly", criterion_1},
    {2, "statistical-mean error under tdma equals the Poisson variance", criterion_2},
    {3, "acc_serve genie error matches lambda2*c*(1-c/T)", criterion_3},
    {4, "batch totals are sufficient: probe patterns do not move the genie", criterion_4},
    {5, "fcfs delay matches the M/D/1 formula within 2%", criterion_5},
    {6, "tdma delay matches its formula within 3%", criterion_6},
    {7, "acc_serve delay/backlog against the stated bounds", criterion_7},
    {8, "ptdma delay matches its formula within 5%", criterion_8},
    {9, "acc_serve end-of-period backlog recursion is exact", criterion_9},
    {10, "tradeoff table has the expected structure", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);
    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        std::ostringstream detail;
        detail.setf(std::ios::fixed);
        detail.precision(6);
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception& e) {
            detail << " exception: " << e.what();
        }
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.title
                  << " |" << detail.str() << "\n";
        if (!pass) ++failures;
    }
    return failures;
}
