#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "schedleak/experiment.hpp"

using namespace schedleak;

namespace {

ExperimentConfig privacy_cfg_small() {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::Privacy;
    cfg.policy = PolicyKind::AccumulateServe;
    cfg.accumulate_period_units = 10.0;
    cfg.estimator = EstimatorKind::AccServeGenie;
    cfg.alice_rate = 0.2;
    cfg.horizon_units = 5000.0;
    cfg.replications = 8;
    cfg.base_seed = 7;
    return cfg;
}

}  // namespace

TEST_SUITE("config") {
    TEST_CASE("round trip: parse, serialize, parse") {
        const char* documents[] = {
            R"({"experiment":"privacy","policy":{"kind":"acc_serve","accumulate_period":10,"num_users":2},
                "estimator":"acc_serve_genie","alice":{"user":1,"rate":0.2},"clock_period":2,
                "horizon":5000,"replications":8,"base_seed":7,"check":{"mode":"band_se","value":3}})",
            R"({"experiment":"delay","policy":{"kind":"tdma","num_users":2},
                "user_rates":[0.2,0.2],"horizon":10000,"replications":4,"out":"d.csv"})",
            R"({"experiment":"tradeoff","policy":{"kind":"fcfs","num_users":2},
                "user_rates":[0.2,0.45],"clock_period":2,"horizon":4000,"replications":4,
                "acc_serve_T":[4,10],"ptdma_L":[4,10]})",
            R"({"experiment":"attack_demo","policy":{"kind":"fcfs","num_users":2},
                "alice":{"user":1,"rate":0.2},"clock_period":2,"horizon":8,"ticks_per_unit":100,
                "alice_times":[0.2,0.4,1.1,1.3],"attacker":{"kind":"thm2","rate":0.25,"user":2}})",
        };
        for (const char* doc : documents) {
            const ExperimentConfig once = parse_config(doc);
            const ExperimentConfig twice = parse_config(serialize_config(once));
            CHECK(once == twice);
        }
    }

    TEST_CASE("unknown keys fail loudly") {
        CHECK_THROWS_AS((void)parse_config(R"({"experiment":"privacy","hozizon":10})"),
                        ConfigError);
        CHECK_THROWS_AS(
            (void)parse_config(
                R"({"experiment":"delay","policy":{"kind":"tdma","slots":2},"user_rates":[0.1,0.1]})"),
            ConfigError);
    }

    TEST_CASE("invalid configs are rejected before running") {
        // genie alignment: T not a multiple of c
        ExperimentConfig cfg = privacy_cfg_small();
        cfg.accumulate_period_units = 7.0;
        CHECK_THROWS_AS((void)run_privacy_experiment(cfg), AlignmentError);

        // unstable delay load
        ExperimentConfig delay;
        delay.kind = ExperimentKind::Delay;
        delay.policy = PolicyKind::Fcfs;
        delay.user_rates = {0.6, 0.6};
        CHECK_THROWS_AS((void)run_delay_experiment(delay), UnstableError);

        // tdma per-user stability
        delay.policy = PolicyKind::Tdma;
        delay.user_rates = {0.55, 0.2};
        CHECK_THROWS_AS((void)run_delay_experiment(delay), UnstableError);

        // the exact estimator needs probes to read
        ExperimentConfig fcfs_cfg = privacy_cfg_small();
        fcfs_cfg.policy = PolicyKind::Fcfs;
        fcfs_cfg.accumulate_period_units = 0.0;
        fcfs_cfg.estimator = EstimatorKind::FcfsExact;
        CHECK_THROWS_AS((void)run_privacy_experiment(fcfs_cfg), ConfigError);
    }

    TEST_CASE("check bands") {
        CHECK(evaluate_check({CheckBand::Mode::BandSe, 3.0}, 0.41, 0.01, 0.4).pass);
        CHECK(!evaluate_check({CheckBand::Mode::BandSe, 3.0}, 0.45, 0.01, 0.4).pass);
        CHECK(evaluate_check({CheckBand::Mode::BandRel, 0.02}, 1.52, 0.0, 1.5).pass);
        CHECK(!evaluate_check({CheckBand::Mode::BandRel, 0.02}, 1.56, 0.0, 1.5).pass);
        CHECK(evaluate_check({CheckBand::Mode::UpperBound, 0.0}, 1.0, 0.0, 1.5).pass);
        CHECK(!evaluate_check({CheckBand::Mode::UpperBound, 0.0}, 1.6, 0.0, 1.5).pass);
        CHECK(evaluate_check({CheckBand::Mode::ExactZero, 0.0}, 0.0, 0.0, 0.0).pass);
        CHECK(!evaluate_check({CheckBand::Mode::ExactZero, 0.0}, 1e-12, 0.0, 0.0).pass);
    }

    TEST_CASE("config list for the check suite") {
        const auto configs = parse_config_list(
            R"({"experiments":[
                {"experiment":"privacy","name":"a","policy":{"kind":"tdma","num_users":2},
                 "estimator":"statistical_mean","alice":{"user":1,"rate":0.2},"clock_period":2,
                 "horizon":2000,"replications":4,"check":{"mode":"band_se","value":3}},
                {"experiment":"delay","name":"b","policy":{"kind":"fcfs","num_users":2},
                 "user_rates":[0.25,0.25],"horizon":2000,"replications":4,
                 "check":{"mode":"band_rel","value":0.1}}]})");
        REQUIRE(configs.size() == 2);
        CHECK(configs[0].name == "a");
        CHECK(configs[1].kind == ExperimentKind::Delay);
    }
}

TEST_SUITE("experiments") {
    TEST_CASE("replication fan-out is order independent") {
        const ExperimentConfig cfg = privacy_cfg_small();
        setenv("SCHED_LEAK_THREADS", "1", 1);
        const PrivacyOutcome serial = run_privacy_experiment(cfg);
        setenv("SCHED_LEAK_THREADS", "4", 1);
        const PrivacyOutcome parallel = run_privacy_experiment(cfg);
        unsetenv("SCHED_LEAK_THREADS");

        CHECK(serial.report.empirical_mse == parallel.report.empirical_mse);
        CHECK(serial.report.std_error == parallel.report.std_error);
        CHECK(serial.estimates0 == parallel.estimates0);

        std::ostringstream a, b;
        write_report_header(a);
        write_report_row(a, serial.report);
        write_report_header(b);
        write_report_row(b, parallel.report);
        CHECK(a.str() == b.str());
    }

    TEST_CASE("fcfs exact attack reports zero error") {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::Privacy;
        cfg.policy = PolicyKind::Fcfs;
        cfg.estimator = EstimatorKind::FcfsExact;
        cfg.alice_rate = 0.2;
        cfg.attacker = {true, ProbeKind::PeriodicThm2, 0.1, 0.0, 0.0, 2};
        cfg.horizon_units = 4000.0;
        cfg.replications = 6;
        const PrivacyOutcome out = run_privacy_experiment(cfg);
        CHECK(out.report.empirical_mse == 0.0);
        CHECK(out.report.closed_form == 0.0);
    }

    TEST_CASE("fcfs delay matches the M/D/1 value within 2 percent") {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::Delay;
        cfg.policy = PolicyKind::Fcfs;
        cfg.user_rates = {0.25, 0.25};
        cfg.horizon_units = 200000.0;
        cfg.replications = 4;
        cfg.base_seed = 11;
        const DelayOutcome out = run_delay_experiment(cfg);
        CHECK(out.report.closed_form == doctest::Approx(1.5));
        CHECK(std::abs(out.report.aggregate_mean - 1.5) < 0.02 * 1.5);
    }

    TEST_CASE("tdma delay matches the formula under a skewed load") {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::Delay;
        cfg.policy = PolicyKind::Tdma;
        cfg.user_rates = {0.2, 0.45};
        cfg.horizon_units = 200000.0;
        cfg.replications = 8;
        cfg.base_seed = 3;
        const DelayOutcome out = run_delay_experiment(cfg);
        CHECK(out.report.closed_form == doctest::Approx(8.4358974359));
        CHECK(std::abs(out.report.aggregate_mean - out.report.closed_form) <
              0.08 * out.report.closed_form);
    }

    TEST_CASE("acc_serve delay respects the component bound, not the branch formula") {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::Delay;
        cfg.policy = PolicyKind::AccumulateServe;
        cfg.accumulate_period_units = 5.0;
        cfg.user_rates = {0.2, 0.45};
        cfg.horizon_units = 100000.0;
        cfg.replications = 6;
        const DelayOutcome out = run_delay_experiment(cfg);
        CHECK(out.report.aggregate_mean <= delay_bound_acc_serve_conservative(0.65, 5.0));
        REQUIRE(out.backlog_mean.has_value());
        CHECK(*out.backlog_mean <= *out.backlog_bound);
    }

    TEST_CASE("warmup trimming removes the ptdma adaptation transient") {
        // A long adaptation window makes the transient visible: during the
        // static window 0 the heavy user runs at 0.9 of its slot share and
        // builds a real backlog, which the trim then discards. Compared per
        // replication (paired), the untrimmed mean carries a systematic
        // extra component.
        const TickScale scale{10000};
        const TickTime horizon{scale.duration_from_double(20000.0).ticks()};
        const TickTime warmup{scale.duration_from_double(4000.0).ticks()};  // two windows
        PolicyConfig pol{PolicyKind::ProportionalTdma, 2, {}, scale.duration_from_double(2000.0),
                         {}, {}};
        std::vector<double> trimmed, paired_diff;
        for (std::uint64_t rep = 0; rep < 24; ++rep) {
            PoissonSource u1{1, 0.2, TickDuration{}, derive_seed(100 + rep, 1)};
            PoissonSource u2{2, 0.45, TickDuration{}, derive_seed(100 + rep, 2)};
            const SimulationResult sim = run(pol,
                                             {generate(u1, horizon, scale),
                                              generate(u2, horizon, scale)},
                                             horizon, 100 + rep, scale);
            const DelaySample with = delay_sample(sim, warmup);
            const DelaySample without = delay_sample(sim, TickTime{0});
            const double t = with.aggregate_sum / static_cast<double>(with.aggregate_n);
            const double u = without.aggregate_sum / static_cast<double>(without.aggregate_n);
            trimmed.push_back(t);
            paired_diff.push_back(u - t);
        }
        double t_mean = 0.0, d_mean = 0.0;
        for (double t : trimmed) t_mean += t;
        for (double d : paired_diff) d_mean += d;
        t_mean /= static_cast<double>(trimmed.size());
        d_mean /= static_cast<double>(paired_diff.size());
        double d_ss = 0.0;
        for (double d : paired_diff) d_ss += (d - d_mean) * (d - d_mean);
        const double d_se =
            std::sqrt(d_ss / static_cast<double>(paired_diff.size() - 1) /
                      static_cast<double>(paired_diff.size()));

        CHECK(std::abs(t_mean - delay_ptdma(0.65, 2)) < 0.05 * delay_ptdma(0.65, 2));
        // the adaptation transient inflates the untrimmed estimate
        CHECK(d_mean > 3.0 * d_se);
    }

    TEST_CASE("attack demo annotates the cases and matches the truth") {
        ExperimentConfig cfg;
        cfg.kind = ExperimentKind::AttackDemo;
        cfg.ticks_per_unit = 100;
        cfg.horizon_units = 8.0;
        cfg.clock_period_units = 2.0;
        cfg.alice_times_units = {0.2, 0.4, 1.1, 1.3};
        cfg.attacker = {true, ProbeKind::PeriodicThm2, 0.25, 0.0, 0.0, 2};
        const std::string text = run_attack_demo(cfg);
        CHECK(text.find("reconstruction exact on every period") != std::string::npos);
        CHECK(text.find("case") != std::string::npos);
        // the burst drives the second sub-interval into the busy-gap case
        CHECK(text.find("   2     2") != std::string::npos);
    }

    TEST_CASE("csv schemas are stable") {
        std::ostringstream os;
        write_report_header(os);
        CHECK(os.str() == "policy,metric,empirical,stderr,closed_form,bound_kind,params\n");
        std::ostringstream tr;
        write_tradeoff_csv(tr, {});
        CHECK(tr.str() ==
              "policy,param_name,param_value,privacy_ratio,privacy_ratio_ref,privacy_bound_kind,"
              "delay_ratio,delay_ratio_ref,delay_bound_kind,privacy_mse,privacy_se,delay_mean,"
              "delay_se\n");
    }
}
