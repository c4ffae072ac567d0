#include "schedleak/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace schedleak {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSourceStream = 0x736f75726365ULL;

// ---------------------------------------------------------------------------
// Replication fan-out

void parallel_replications(int n, const std::function<void(int)>& body) {
    const int workers = std::max(1, std::min(worker_count(), n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Config resolution

struct Resolved {
    TickScale scale;
    TickTime horizon;
    TickTime warmup;
    TickDuration clock_period;
    PolicyConfig policy;
    std::int64_t periods{0};       // clock periods covered by the privacy pipeline
    TickDuration genie_period;     // T or L for genie estimators
};

PolicyConfig policy_config_of(const ExperimentConfig& cfg, const TickScale& scale) {
    PolicyConfig policy;
    policy.kind = cfg.policy;
    policy.num_users = cfg.num_users;
    policy.user_order = cfg.user_order;
    if (cfg.accumulate_period_units > 0.0)
        policy.accumulate_period = scale.duration_from_double(cfg.accumulate_period_units);
    if (cfg.adaptation_period_units > 0.0)
        policy.adaptation_period = scale.duration_from_double(cfg.adaptation_period_units);
    if (cfg.slot_length_units > 0.0)
        policy.slot_length = scale.duration_from_double(cfg.slot_length_units);
    return normalize(policy, scale);
}

Resolved resolve(const ExperimentConfig& cfg) {
    Resolved r;
    r.scale = TickScale{cfg.ticks_per_unit};
    r.horizon = TickTime{r.scale.duration_from_double(cfg.horizon_units).ticks()};
    if (r.horizon.ticks() <= 0) throw ConfigError("config: horizon must be positive");
    const double warmup_units = cfg.warmup_units.value_or(cfg.horizon_units * 0.1);
    r.warmup = TickTime{r.scale.duration_from_double(warmup_units).ticks()};
    if (r.warmup >= r.horizon) throw ConfigError("config: warmup must precede the horizon");
    r.clock_period = r.scale.duration_from_double(cfg.clock_period_units);
    r.policy = policy_config_of(cfg, r.scale);

    if (cfg.kind == ExperimentKind::Privacy || cfg.kind == ExperimentKind::AttackDemo) {
        if (cfg.clock_period_units <= 0.0) throw ConfigError("config: clock period must be positive");
        if (cfg.alice_user < 1 || cfg.alice_user > cfg.num_users)
            throw ConfigError("config: alice user outside 1..num_users");
        if (cfg.attacker.present) {
            if (cfg.attacker.user < 1 || cfg.attacker.user > cfg.num_users ||
                cfg.attacker.user == cfg.alice_user)
                throw ConfigError("config: attacker user must differ from alice");
            if (cfg.attacker.kind == ProbeKind::PeriodicGeneric) {
                if (cfg.attacker.period_units <= 0.0 || cfg.attacker.size_units <= 0.0)
                    throw ConfigError("config: generic probes need positive period and size");
                const double budget = cfg.attacker.size_units / cfg.attacker.period_units;
                if (cfg.alice_rate + budget >= 1.0)
                    throw ConfigError("config: probe budget would destabilize the queue");
            }
        }
        r.periods = r.horizon.ticks() / r.clock_period.ticks();
        switch (cfg.estimator) {
            case EstimatorKind::FcfsExact:
                if (cfg.policy != PolicyKind::Fcfs || !cfg.attacker.present ||
                    cfg.attacker.kind != ProbeKind::PeriodicThm2)
                    throw ConfigError("config: fcfs_exact needs the fcfs policy and thm2 probes");
                break;
            case EstimatorKind::AccServeGenie: {
                if (cfg.policy != PolicyKind::AccumulateServe)
                    throw ConfigError("config: acc_serve_genie needs the acc_serve policy");
                r.genie_period = r.policy.accumulate_period;
                break;
            }
            case EstimatorKind::PtdmaGenie: {
                if (cfg.policy != PolicyKind::ProportionalTdma)
                    throw ConfigError("config: ptdma_genie needs the ptdma policy");
                r.genie_period = r.policy.adaptation_period;
                break;
            }
            case EstimatorKind::StatisticalMean:
                break;
        }
        if (r.genie_period.ticks() > 0) {
            if (r.genie_period.ticks() % r.clock_period.ticks() != 0)
                throw AlignmentError("config: genie estimators need T (or L) to be an integer "
                                     "multiple of c (C1), aligned at time zero (C2)");
            // whole batches only, so every estimated period sits inside one
            const std::int64_t batches = r.horizon.ticks() / r.genie_period.ticks();
            r.periods = batches * (r.genie_period.ticks() / r.clock_period.ticks());
        }
        if (r.periods < 1) throw ConfigError("config: horizon shorter than one clock period");
    }

    if (cfg.kind == ExperimentKind::Delay || cfg.kind == ExperimentKind::Tradeoff) {
        const auto& rates = cfg.user_rates;
        if (cfg.kind == ExperimentKind::Delay &&
            static_cast<int>(rates.size()) != cfg.num_users)
            throw ConfigError("config: need one rate per user");
        double total = 0.0;
        for (double rate : rates) {
            if (rate <= 0.0) throw ConfigError("config: user rates must be positive");
            total += rate;
        }
        if (cfg.kind == ExperimentKind::Delay) {
            if (total >= 1.0) throw UnstableError("config: total rate must stay below 1");
            if (cfg.policy == PolicyKind::Tdma)
                for (double rate : rates)
                    if (rate * cfg.num_users >= 1.0)
                        throw UnstableError("config: tdma needs every rate below 1/M");
        }
    }
    return r;
}

ArrivalTrace alice_trace(const ExperimentConfig& cfg, const Resolved& r, int replication) {
    PoissonSource source;
    source.owner = cfg.alice_user;
    source.rate = cfg.alice_rate;
    source.seed = derive_seed(cfg.base_seed + static_cast<std::uint64_t>(replication),
                              kSourceStream + static_cast<std::uint64_t>(cfg.alice_user));
    return generate(source, r.horizon, r.scale);
}

ArrivalTrace probe_trace(const ExperimentConfig& cfg, const Resolved& r) {
    if (cfg.attacker.kind == ProbeKind::PeriodicThm2)
        return gen_probes_thm2(r.clock_period, cfg.attacker.rate, cfg.alice_rate, r.horizon,
                               r.scale, cfg.attacker.user);
    return gen_probes_periodic(r.scale.duration_from_double(cfg.attacker.period_units),
                               r.scale.duration_from_double(cfg.attacker.size_units), r.horizon,
                               cfg.attacker.user);
}

std::vector<double> estimates_for(const ExperimentConfig& cfg, const Resolved& r,
                                  const ArrivalTrace& alice, const SimulationResult& sim) {
    switch (cfg.estimator) {
        case EstimatorKind::FcfsExact: {
            const ProbeObservation obs = observations_from(sim, cfg.attacker.user);
            const FcfsReconstruction rec =
                estimate_fcfs_exact(obs, r.clock_period, r.periods, r.scale);
            return std::vector<double>(rec.period_counts.begin(), rec.period_counts.end());
        }
        case EstimatorKind::StatisticalMean:
            return estimate_statistical_mean(cfg.alice_rate, r.clock_period, r.periods, r.scale);
        case EstimatorKind::AccServeGenie: {
            const std::int64_t batches = r.horizon.ticks() / r.genie_period.ticks();
            const ClockBinning b = bin_counts(alice, r.genie_period, batches);
            return estimate_acc_serve_genie(b.counts, r.genie_period, r.clock_period, r.periods);
        }
        case EstimatorKind::PtdmaGenie: {
            const std::int64_t windows = r.horizon.ticks() / r.genie_period.ticks();
            const ClockBinning w = bin_counts(alice, r.genie_period, windows);
            return estimate_ptdma_genie(w.counts, r.genie_period, r.clock_period, r.periods);
        }
    }
    throw ConfigError("config: unknown estimator");
}

struct PrivacyReference {
    double value;
    BoundKind kind;
};

PrivacyReference privacy_reference(const ExperimentConfig& cfg, const Resolved& r) {
    const double c = r.scale.units(r.clock_period);
    switch (cfg.estimator) {
        case EstimatorKind::FcfsExact:
            return {0.0, BoundKind::Exact};
        case EstimatorKind::StatisticalMean:
            return {privacy_max(cfg.alice_rate, c), BoundKind::Upper};
        case EstimatorKind::AccServeGenie:
            return {privacy_bound_acc_serve(cfg.alice_rate, c, r.scale.units(r.genie_period)),
                    BoundKind::Lower};
        case EstimatorKind::PtdmaGenie:
            return {privacy_bound_ptdma(cfg.alice_rate, c, r.scale.units(r.genie_period)),
                    BoundKind::Lower};
    }
    throw ConfigError("config: unknown estimator");
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("SCHED_LEAK_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

PrivacyOutcome run_privacy_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::Privacy) throw ConfigError("run_privacy_experiment: wrong kind");
    if (cfg.replications < 2) throw ConfigError("config: need at least 2 replications");
    const Resolved r = resolve(cfg);

    std::vector<double> per_rep_mse(static_cast<std::size_t>(cfg.replications));
    PrivacyOutcome outcome;
    parallel_replications(cfg.replications, [&](int rep) {
        const ArrivalTrace alice = alice_trace(cfg, r, rep);
        std::vector<ArrivalTrace> traces{alice};
        if (cfg.attacker.present) traces.push_back(probe_trace(cfg, r));
        const SimulationResult sim = run(r.policy, traces, r.horizon,
                                         cfg.base_seed + static_cast<std::uint64_t>(rep), r.scale);
        const ClockBinning truth = bin_counts(alice, r.clock_period, r.periods);
        const std::vector<double> est = estimates_for(cfg, r, alice, sim);
        per_rep_mse[static_cast<std::size_t>(rep)] = mse_against(truth, est);
        if (rep == 0) {
            outcome.truth0 = truth.counts;
            outcome.estimates0 = est;
        }
    });

    const PrivacyReference ref = privacy_reference(cfg, r);
    outcome.report = empirical_privacy(policy_name(cfg.policy), estimator_name(cfg.estimator),
                                       per_rep_mse, ref.value, ref.kind);
    outcome.report.params["lambda2"] = cfg.alice_rate;
    outcome.report.params["c"] = cfg.clock_period_units;
    if (cfg.attacker.present && cfg.attacker.kind == ProbeKind::PeriodicThm2)
        outcome.report.params["lambda1"] = cfg.attacker.rate;
    if (cfg.estimator == EstimatorKind::AccServeGenie)
        outcome.report.params["T"] = cfg.accumulate_period_units;
    if (cfg.estimator == EstimatorKind::PtdmaGenie)
        outcome.report.params["L"] = cfg.adaptation_period_units;
    outcome.report.params["horizon"] = cfg.horizon_units;
    outcome.report.params["replications"] = cfg.replications;
    return outcome;
}

DelayOutcome run_delay_experiment(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::Delay) throw ConfigError("run_delay_experiment: wrong kind");
    if (cfg.replications < 2) throw ConfigError("config: need at least 2 replications");
    const Resolved r = resolve(cfg);

    std::vector<DelaySample> samples(static_cast<std::size_t>(cfg.replications));
    std::vector<double> backlogs(static_cast<std::size_t>(cfg.replications), 0.0);
    const bool acc = cfg.policy == PolicyKind::AccumulateServe;

    parallel_replications(cfg.replications, [&](int rep) {
        std::vector<ArrivalTrace> traces;
        traces.reserve(cfg.user_rates.size());
        for (int user = 1; user <= static_cast<int>(cfg.user_rates.size()); ++user) {
            PoissonSource source;
            source.owner = user;
            source.rate = cfg.user_rates[static_cast<std::size_t>(user - 1)];
            source.seed = derive_seed(cfg.base_seed + static_cast<std::uint64_t>(rep),
                                      kSourceStream + static_cast<std::uint64_t>(user));
            traces.push_back(generate(source, r.horizon, r.scale));
        }
        const SimulationResult sim = run(r.policy, traces, r.horizon,
                                         cfg.base_seed + static_cast<std::uint64_t>(rep), r.scale);
        samples[static_cast<std::size_t>(rep)] = delay_sample(sim, r.warmup);
        if (acc) backlogs[static_cast<std::size_t>(rep)] = acc_serve_backlog_mean(sim, r.warmup);
    });

    double total_rate = 0.0;
    for (double rate : cfg.user_rates) total_rate += rate;

    double closed = 0.0;
    BoundKind kind = BoundKind::Exact;
    switch (cfg.policy) {
        case PolicyKind::Fcfs:
            closed = delay_fcfs(total_rate);
            break;
        case PolicyKind::Tdma:
            closed = delay_tdma(cfg.user_rates);
            break;
        case PolicyKind::AccumulateServe:
            closed = delay_bound_acc_serve(total_rate, cfg.accumulate_period_units);
            kind = BoundKind::Upper;
            break;
        case PolicyKind::ProportionalTdma:
            closed = delay_ptdma(total_rate, cfg.num_users);
            break;
    }

    DelayOutcome outcome;
    outcome.report = empirical_delay(policy_name(cfg.policy), samples, closed, kind);
    outcome.report.params["lambda"] = total_rate;
    outcome.report.params["horizon"] = cfg.horizon_units;
    outcome.report.params["replications"] = cfg.replications;
    if (acc) {
        outcome.report.params["T"] = cfg.accumulate_period_units;
        double sum = 0.0;
        for (double b : backlogs) sum += b;
        outcome.backlog_mean = sum / static_cast<double>(cfg.replications);
        outcome.backlog_bound = queue_bound_acc_serve(total_rate, cfg.accumulate_period_units);
    }
    if (cfg.policy == PolicyKind::ProportionalTdma)
        outcome.report.params["L"] = cfg.adaptation_period_units;
    return outcome;
}

std::vector<TradeoffRow> run_tradeoff(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::Tradeoff) throw ConfigError("run_tradeoff: wrong kind");
    if (cfg.user_rates.size() != 2)
        throw ConfigError("tradeoff: needs exactly two rates (victim first, attacker budget second)");
    const double lambda2 = cfg.user_rates[0];
    const double budget = cfg.user_rates[1];
    const double lambda = lambda2 + budget;
    const double c = cfg.clock_period_units;
    if (lambda >= 1.0) throw UnstableError("tradeoff: total rate must stay below 1");
    const double e_max = privacy_max(lambda2, c);

    auto delay_cfg = [&](PolicyKind kind) {
        ExperimentConfig d = cfg;
        d.kind = ExperimentKind::Delay;
        d.policy = kind;
        d.check.reset();
        return d;
    };
    auto privacy_cfg = [&](PolicyKind kind, EstimatorKind estimator) {
        ExperimentConfig p = cfg;
        p.kind = ExperimentKind::Privacy;
        p.policy = kind;
        p.estimator = estimator;
        p.alice_user = 1;
        p.alice_rate = lambda2;
        p.attacker = {};
        p.check.reset();
        return p;
    };

    std::vector<TradeoffRow> rows;

    // FCFS: the exact reconstruction attack, and the delay baseline.
    ExperimentConfig fcfs_privacy = privacy_cfg(PolicyKind::Fcfs, EstimatorKind::FcfsExact);
    fcfs_privacy.attacker = {true, ProbeKind::PeriodicThm2, budget, 0.0, 0.0, 2};
    const PrivacyOutcome fcfs_priv = run_privacy_experiment(fcfs_privacy);
    const DelayOutcome fcfs_delay = run_delay_experiment(delay_cfg(PolicyKind::Fcfs));
    const double fcfs_mean = fcfs_delay.report.aggregate_mean;
    {
        TradeoffRow row;
        row.policy = "fcfs";
        row.privacy_mse = fcfs_priv.report.empirical_mse;
        row.privacy_se = fcfs_priv.report.std_error;
        row.privacy_ratio = row.privacy_mse / e_max;
        row.privacy_ratio_ref = 0.0;
        row.privacy_kind = BoundKind::Exact;
        row.delay_mean = fcfs_mean;
        row.delay_se = fcfs_delay.report.std_error;
        row.delay_ratio = 1.0;
        row.delay_ratio_ref = 1.0;
        row.delay_kind = BoundKind::Exact;
        rows.push_back(row);
    }

    // TDMA: nothing beats the statistical mean, at a heavy delay cost.
    {
        const PrivacyOutcome priv =
            run_privacy_experiment(privacy_cfg(PolicyKind::Tdma, EstimatorKind::StatisticalMean));
        const DelayOutcome del = run_delay_experiment(delay_cfg(PolicyKind::Tdma));
        TradeoffRow row;
        row.policy = "tdma";
        row.privacy_mse = priv.report.empirical_mse;
        row.privacy_se = priv.report.std_error;
        row.privacy_ratio = row.privacy_mse / e_max;
        row.privacy_ratio_ref = 1.0;
        row.privacy_kind = BoundKind::Exact;
        row.delay_mean = del.report.aggregate_mean;
        row.delay_se = del.report.std_error;
        row.delay_ratio = fcfs_mean / row.delay_mean;
        row.delay_ratio_ref = delay_fcfs(lambda) / delay_tdma(cfg.user_rates);
        row.delay_kind = BoundKind::Exact;
        rows.push_back(row);
    }

    for (double T : cfg.acc_serve_T) {
        ExperimentConfig priv_cfg =
            privacy_cfg(PolicyKind::AccumulateServe, EstimatorKind::AccServeGenie);
        priv_cfg.accumulate_period_units = T;
        const PrivacyOutcome priv = run_privacy_experiment(priv_cfg);
        ExperimentConfig del_cfg = delay_cfg(PolicyKind::AccumulateServe);
        del_cfg.accumulate_period_units = T;
        const DelayOutcome del = run_delay_experiment(del_cfg);
        TradeoffRow row;
        row.policy = "acc_serve";
        row.param_name = "T";
        row.param_value = T;
        row.privacy_mse = priv.report.empirical_mse;
        row.privacy_se = priv.report.std_error;
        row.privacy_ratio = row.privacy_mse / e_max;
        row.privacy_ratio_ref = std::max(0.0, 1.0 - c / T);
        row.privacy_kind = BoundKind::Lower;
        row.delay_mean = del.report.aggregate_mean;
        row.delay_se = del.report.std_error;
        row.delay_ratio = fcfs_mean / row.delay_mean;
        row.delay_ratio_ref = delay_fcfs(lambda) / delay_bound_acc_serve_conservative(lambda, T);
        row.delay_kind = BoundKind::Lower;
        rows.push_back(row);
    }

    for (double L : cfg.ptdma_L) {
        ExperimentConfig priv_cfg =
            privacy_cfg(PolicyKind::ProportionalTdma, EstimatorKind::PtdmaGenie);
        priv_cfg.adaptation_period_units = L;
        const PrivacyOutcome priv = run_privacy_experiment(priv_cfg);
        ExperimentConfig del_cfg = delay_cfg(PolicyKind::ProportionalTdma);
        del_cfg.adaptation_period_units = L;
        const DelayOutcome del = run_delay_experiment(del_cfg);
        TradeoffRow row;
        row.policy = "ptdma";
        row.param_name = "L";
        row.param_value = L;
        row.privacy_mse = priv.report.empirical_mse;
        row.privacy_se = priv.report.std_error;
        row.privacy_ratio = row.privacy_mse / e_max;
        row.privacy_ratio_ref = std::max(0.0, 1.0 - c / L);
        row.privacy_kind = BoundKind::Lower;
        row.delay_mean = del.report.aggregate_mean;
        row.delay_se = del.report.std_error;
        row.delay_ratio = fcfs_mean / row.delay_mean;
        row.delay_ratio_ref = delay_fcfs(lambda) / delay_ptdma(lambda, cfg.num_users);
        row.delay_kind = BoundKind::Exact;
        rows.push_back(row);
    }
    return rows;
}

std::string run_attack_demo(const ExperimentConfig& cfg) {
    if (cfg.kind != ExperimentKind::AttackDemo) throw ConfigError("run_attack_demo: wrong kind");
    ExperimentConfig demo = cfg;
    demo.policy = PolicyKind::Fcfs;
    demo.estimator = EstimatorKind::FcfsExact;
    if (!demo.attacker.present) demo.attacker = {true, ProbeKind::PeriodicThm2, 0.1, 0.0, 0.0, 2};
    const Resolved r = resolve(demo);

    ArrivalTrace alice;
    if (!demo.alice_times_units.empty()) {
        alice.owner = demo.alice_user;
        alice.job_size = TickDuration{r.scale.ticks_per_unit()};
        alice.horizon = r.horizon;
        Ticks prev = 0;
        for (double u : demo.alice_times_units) {
            const Ticks t = r.scale.duration_from_double(u).ticks();
            if (t <= prev) throw ConfigError("attack_demo: alice times must be strictly increasing");
            alice.arrivals.emplace_back(t);
            prev = t;
        }
    } else {
        alice = alice_trace(demo, r, 0);
    }

    const ArrivalTrace probes = probe_trace(demo, r);
    const SimulationResult sim =
        run(r.policy, {alice, probes}, r.horizon, demo.base_seed, r.scale);
    const ProbeObservation obs = observations_from(sim, demo.attacker.user);
    const FcfsReconstruction rec = estimate_fcfs_exact(obs, r.clock_period, r.periods, r.scale);
    const ClockBinning truth = bin_counts(alice, r.clock_period, r.periods);

    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    const double c_units = r.scale.units(r.clock_period);
    const std::int64_t ceil_c = r.scale.ceil_div_units(r.clock_period);
    os << "fcfs reconstruction demo: c=" << c_units << " units, probe period=" << c_units / ceil_c
       << " units, probe size=" << r.scale.units(probes.job_size) << " units\n";
    os << "alice arrivals (units):";
    for (const TickTime& a : alice.arrivals) os << ' ' << r.scale.units(a);
    os << "\n\n   k      t_k      s_k     t'_k  case  ~X_k\n";
    for (std::size_t k = 0; k < rec.sub_intervals.size(); ++k) {
        const auto& probe = obs.probes[k];
        os << std::setw(4) << (k + 1) << ' ' << std::setw(8) << r.scale.units(probe.issue) << ' '
           << std::setw(8) << r.scale.units(probe.size) << ' ' << std::setw(8)
           << r.scale.units(probe.departure) << std::setw(6) << rec.sub_intervals[k].which_case
           << std::setw(6) << rec.sub_intervals[k].count << '\n';
    }
    os << "\nperiod  true  reconstructed\n";
    bool all_ok = true;
    for (std::size_t k = 0; k < rec.period_counts.size(); ++k) {
        const bool ok = rec.period_counts[k] == truth.counts[k];
        all_ok = all_ok && ok;
        os << std::setw(6) << (k + 1) << std::setw(6) << truth.counts[k] << std::setw(15)
           << rec.period_counts[k] << (ok ? "" : "  MISMATCH") << '\n';
    }
    os << (all_ok ? "\nreconstruction exact on every period\n"
                  : "\nreconstruction mismatch detected\n");
    return os.str();
}

TradeoffCheck check_tradeoff(std::span<const TradeoffRow> rows) {
    TradeoffCheck check;
    auto fail = [&check](const std::string& msg) {
        check.pass = false;
        check.failures.push_back(msg);
    };
    std::vector<const TradeoffRow*> acc, ptdma;
    for (const TradeoffRow& row : rows) {
        if (row.policy == "fcfs" && row.privacy_ratio >= 0.05)
            fail("fcfs privacy_ratio " + csv_num(row.privacy_ratio) + " not < 0.05");
        if (row.policy == "tdma" && row.privacy_ratio <= 0.95)
            fail("tdma privacy_ratio " + csv_num(row.privacy_ratio) + " not > 0.95");
        if (row.policy == "acc_serve") acc.push_back(&row);
        if (row.policy == "ptdma") ptdma.push_back(&row);
    }
    for (std::size_t i = 0; i + 1 < acc.size(); ++i) {
        if (!(acc[i + 1]->privacy_ratio > acc[i]->privacy_ratio))
            fail("acc_serve privacy_ratio not strictly increasing at T=" +
                 csv_num(acc[i + 1]->param_value));
        if (!(acc[i + 1]->delay_ratio < acc[i]->delay_ratio))
            fail("acc_serve delay_ratio not strictly decreasing at T=" +
                 csv_num(acc[i + 1]->param_value));
    }
    for (std::size_t i = 0; i + 1 < ptdma.size(); ++i) {
        if (!(ptdma[i + 1]->privacy_ratio > ptdma[i]->privacy_ratio))
            fail("ptdma privacy_ratio not increasing at L=" + csv_num(ptdma[i + 1]->param_value));
    }
    for (std::size_t i = 0; i < ptdma.size(); ++i) {
        for (std::size_t k = i + 1; k < ptdma.size(); ++k) {
            const double diff = std::abs(ptdma[i]->delay_mean - ptdma[k]->delay_mean);
            const double se = std::sqrt(ptdma[i]->delay_se * ptdma[i]->delay_se +
                                        ptdma[k]->delay_se * ptdma[k]->delay_se);
            if (diff > 3.0 * se)
                fail("ptdma delay not constant across L=" + csv_num(ptdma[i]->param_value) +
                     " vs L=" + csv_num(ptdma[k]->param_value));
        }
    }
    return check;
}

CheckResult evaluate_check(const CheckBand& band, double empirical, double std_error,
                           double reference) {
    std::ostringstream os;
    os.precision(6);
    bool pass = false;
    switch (band.mode) {
        case CheckBand::Mode::BandSe:
            pass = std::abs(empirical - reference) <= band.value * std_error;
            os << "|" << empirical << " - " << reference << "| vs " << band.value
               << "*SE=" << band.value * std_error;
            break;
        case CheckBand::Mode::BandRel:
            pass = std::abs(empirical - reference) <= band.value * std::abs(reference);
            os << "|" << empirical << " - " << reference << "| vs rel " << band.value;
            break;
        case CheckBand::Mode::UpperBound:
            pass = empirical <= reference;
            os << empirical << " <= " << reference;
            break;
        case CheckBand::Mode::ExactZero:
            pass = empirical == 0.0;
            os << empirical << " == 0";
            break;
    }
    return {pass, os.str()};
}

// ---------------------------------------------------------------------------
// JSON config

namespace {

void reject_unknown(const json& object, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (key == k) known = true;
        if (!known) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

ExperimentKind parse_kind(const std::string& s) {
    if (s == "privacy") return ExperimentKind::Privacy;
    if (s == "delay") return ExperimentKind::Delay;
    if (s == "tradeoff") return ExperimentKind::Tradeoff;
    if (s == "attack_demo" || s == "attack-demo") return ExperimentKind::AttackDemo;
    throw ConfigError("config: unknown experiment kind '" + s + "'");
}

const char* kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Privacy: return "privacy";
        case ExperimentKind::Delay: return "delay";
        case ExperimentKind::Tradeoff: return "tradeoff";
        case ExperimentKind::AttackDemo: return "attack_demo";
    }
    return "?";
}

PolicyKind parse_policy_kind(const std::string& s) {
    if (s == "fcfs") return PolicyKind::Fcfs;
    if (s == "tdma") return PolicyKind::Tdma;
    if (s == "acc_serve") return PolicyKind::AccumulateServe;
    if (s == "ptdma") return PolicyKind::ProportionalTdma;
    throw ConfigError("config: unknown policy kind '" + s + "'");
}

EstimatorKind parse_estimator(const std::string& s) {
    if (s == "fcfs_exact") return EstimatorKind::FcfsExact;
    if (s == "statistical_mean") return EstimatorKind::StatisticalMean;
    if (s == "acc_serve_genie") return EstimatorKind::AccServeGenie;
    if (s == "ptdma_genie") return EstimatorKind::PtdmaGenie;
    throw ConfigError("config: unknown estimator '" + s + "'");
}

CheckBand::Mode parse_check_mode(const std::string& s) {
    if (s == "band_se") return CheckBand::Mode::BandSe;
    if (s == "band_rel") return CheckBand::Mode::BandRel;
    if (s == "upper") return CheckBand::Mode::UpperBound;
    if (s == "exact_zero") return CheckBand::Mode::ExactZero;
    throw ConfigError("config: unknown check mode '" + s + "'");
}

const char* check_mode_name(CheckBand::Mode mode) {
    switch (mode) {
        case CheckBand::Mode::BandSe: return "band_se";
        case CheckBand::Mode::BandRel: return "band_rel";
        case CheckBand::Mode::UpperBound: return "upper";
        case CheckBand::Mode::ExactZero: return "exact_zero";
    }
    return "?";
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j,
                   {"experiment", "name", "ticks_per_unit", "horizon", "warmup", "replications",
                    "base_seed", "clock_period", "policy", "estimator", "alice", "attacker",
                    "export_estimates", "export_jobs", "user_rates", "acc_serve_T", "ptdma_L",
                    "alice_times", "check", "out"},
                   "experiment");
    ExperimentConfig cfg;
    cfg.kind = parse_kind(j.at("experiment").get<std::string>());
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("ticks_per_unit")) cfg.ticks_per_unit = j.at("ticks_per_unit").get<std::int64_t>();
    if (j.contains("horizon")) cfg.horizon_units = j.at("horizon").get<double>();
    if (j.contains("warmup") && !j.at("warmup").is_null())
        cfg.warmup_units = j.at("warmup").get<double>();
    if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("clock_period")) cfg.clock_period_units = j.at("clock_period").get<double>();

    if (j.contains("policy")) {
        const json& p = j.at("policy");
        reject_unknown(p,
                       {"kind", "accumulate_period", "adaptation_period", "slot_length",
                        "num_users", "user_order"},
                       "policy");
        cfg.policy = parse_policy_kind(p.at("kind").get<std::string>());
        if (p.contains("accumulate_period"))
            cfg.accumulate_period_units = p.at("accumulate_period").get<double>();
        if (p.contains("adaptation_period"))
            cfg.adaptation_period_units = p.at("adaptation_period").get<double>();
        if (p.contains("slot_length")) cfg.slot_length_units = p.at("slot_length").get<double>();
        if (p.contains("num_users")) cfg.num_users = p.at("num_users").get<int>();
        if (p.contains("user_order")) cfg.user_order = p.at("user_order").get<std::vector<int>>();
    }
    if (j.contains("estimator")) cfg.estimator = parse_estimator(j.at("estimator").get<std::string>());
    if (j.contains("alice")) {
        const json& a = j.at("alice");
        reject_unknown(a, {"user", "rate"}, "alice");
        if (a.contains("user")) cfg.alice_user = a.at("user").get<int>();
        if (a.contains("rate")) cfg.alice_rate = a.at("rate").get<double>();
    }
    if (j.contains("attacker") && !j.at("attacker").is_null()) {
        const json& a = j.at("attacker");
        reject_unknown(a, {"kind", "rate", "period", "size", "user"}, "attacker");
        cfg.attacker.present = true;
        const std::string kind = a.at("kind").get<std::string>();
        if (kind == "thm2")
            cfg.attacker.kind = ProbeKind::PeriodicThm2;
        else if (kind == "periodic")
            cfg.attacker.kind = ProbeKind::PeriodicGeneric;
        else
            throw ConfigError("config: unknown attacker kind '" + kind + "'");
        if (a.contains("rate")) cfg.attacker.rate = a.at("rate").get<double>();
        if (a.contains("period")) cfg.attacker.period_units = a.at("period").get<double>();
        if (a.contains("size")) cfg.attacker.size_units = a.at("size").get<double>();
        if (a.contains("user")) cfg.attacker.user = a.at("user").get<int>();
    }
    if (j.contains("export_estimates")) cfg.export_estimates = j.at("export_estimates").get<bool>();
    if (j.contains("export_jobs")) cfg.export_jobs = j.at("export_jobs").get<bool>();
    if (j.contains("user_rates")) cfg.user_rates = j.at("user_rates").get<std::vector<double>>();
    if (j.contains("acc_serve_T")) cfg.acc_serve_T = j.at("acc_serve_T").get<std::vector<double>>();
    if (j.contains("ptdma_L")) cfg.ptdma_L = j.at("ptdma_L").get<std::vector<double>>();
    if (j.contains("alice_times"))
        cfg.alice_times_units = j.at("alice_times").get<std::vector<double>>();
    if (j.contains("check") && !j.at("check").is_null()) {
        const json& ch = j.at("check");
        reject_unknown(ch, {"mode", "value"}, "check");
        CheckBand band;
        band.mode = parse_check_mode(ch.at("mode").get<std::string>());
        if (ch.contains("value")) band.value = ch.at("value").get<double>();
        cfg.check = band;
    }
    if (j.contains("out")) cfg.out_path = j.at("out").get<std::string>();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = kind_name(cfg.kind);
    if (!cfg.name.empty()) j["name"] = cfg.name;
    j["ticks_per_unit"] = cfg.ticks_per_unit;
    j["horizon"] = cfg.horizon_units;
    if (cfg.warmup_units) j["warmup"] = *cfg.warmup_units;
    j["replications"] = cfg.replications;
    j["base_seed"] = cfg.base_seed;
    j["clock_period"] = cfg.clock_period_units;

    json p;
    p["kind"] = policy_name(cfg.policy);
    if (cfg.accumulate_period_units > 0.0) p["accumulate_period"] = cfg.accumulate_period_units;
    if (cfg.adaptation_period_units > 0.0) p["adaptation_period"] = cfg.adaptation_period_units;
    if (cfg.slot_length_units > 0.0) p["slot_length"] = cfg.slot_length_units;
    p["num_users"] = cfg.num_users;
    if (!cfg.user_order.empty()) p["user_order"] = cfg.user_order;
    j["policy"] = p;

    if (cfg.kind == ExperimentKind::Privacy || cfg.kind == ExperimentKind::AttackDemo) {
        j["estimator"] = estimator_name(cfg.estimator);
        j["alice"] = {{"user", cfg.alice_user}, {"rate", cfg.alice_rate}};
    }
    if (cfg.attacker.present) {
        json a;
        a["kind"] = cfg.attacker.kind == ProbeKind::PeriodicThm2 ? "thm2" : "periodic";
        a["rate"] = cfg.attacker.rate;
        if (cfg.attacker.kind == ProbeKind::PeriodicGeneric) {
            a["period"] = cfg.attacker.period_units;
            a["size"] = cfg.attacker.size_units;
        }
        a["user"] = cfg.attacker.user;
        j["attacker"] = a;
    }
    if (cfg.export_estimates) j["export_estimates"] = true;
    if (cfg.export_jobs) j["export_jobs"] = true;
    if (!cfg.user_rates.empty()) j["user_rates"] = cfg.user_rates;
    if (!cfg.acc_serve_T.empty()) j["acc_serve_T"] = cfg.acc_serve_T;
    if (!cfg.ptdma_L.empty()) j["ptdma_L"] = cfg.ptdma_L;
    if (!cfg.alice_times_units.empty()) j["alice_times"] = cfg.alice_times_units;
    if (cfg.check) j["check"] = {{"mode", check_mode_name(cfg.check->mode)}, {"value", cfg.check->value}};
    if (!cfg.out_path.empty()) j["out"] = cfg.out_path;
    return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg = config_from_json(j);
    (void)resolve(cfg);  // fail fast on invalid configs
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    return config_to_json(cfg).dump(2) + "\n";
}

std::vector<ExperimentConfig> parse_config_list(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    reject_unknown(j, {"experiments"}, "check suite");
    std::vector<ExperimentConfig> configs;
    for (const json& item : j.at("experiments")) {
        ExperimentConfig cfg = config_from_json(item);
        (void)resolve(cfg);
        configs.push_back(std::move(cfg));
    }
    return configs;
}

}  // namespace schedleak
