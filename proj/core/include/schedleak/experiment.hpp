#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schedleak/analysis.hpp"
#include "schedleak/attacker.hpp"
#include "schedleak/csv.hpp"
#include "schedleak/engine.hpp"

namespace schedleak {

enum class ExperimentKind { Privacy, Delay, Tradeoff, AttackDemo };

struct AttackerConfig {
    bool present{false};
    ProbeKind kind{ProbeKind::PeriodicThm2};
    double rate{0.0};          // thm2 budget lambda1
    double period_units{0.0};  // generic probes
    double size_units{0.0};    // generic probes
    int user{2};

    bool operator==(const AttackerConfig&) const = default;
};

/// Acceptance band for --check runs: how the empirical value may deviate
/// from the closed-form reference before the run exits non-zero.
struct CheckBand {
    enum class Mode { BandSe, BandRel, UpperBound, ExactZero };
    Mode mode{Mode::BandSe};
    double value{3.0};

    bool operator==(const CheckBand&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind{ExperimentKind::Privacy};
    std::string name;  // label in check output; optional

    std::int64_t ticks_per_unit{kDefaultTicksPerUnit};
    double horizon_units{100000.0};
    std::optional<double> warmup_units;  // default: 10% of the horizon
    int replications{30};
    std::uint64_t base_seed{1};
    double clock_period_units{2.0};

    PolicyKind policy{PolicyKind::Fcfs};
    double accumulate_period_units{0.0};  // T
    double adaptation_period_units{0.0};  // L
    double slot_length_units{0.0};        // 0 = one unit
    int num_users{2};
    std::vector<int> user_order;

    // privacy experiments
    EstimatorKind estimator{EstimatorKind::StatisticalMean};
    int alice_user{1};
    double alice_rate{0.2};
    AttackerConfig attacker;
    bool export_estimates{false};

    // delay experiments; index = user id - 1
    std::vector<double> user_rates;
    bool export_jobs{false};

    // tradeoff sweeps
    std::vector<double> acc_serve_T;
    std::vector<double> ptdma_L;

    // attack demo: explicit arrival instants (units); empty = Poisson at alice_rate
    std::vector<double> alice_times_units;

    std::optional<CheckBand> check;
    std::string out_path;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses one experiment config from a JSON document; unknown keys are
/// rejected so typos fail loudly. Validates representability, stability and
/// estimator/policy compatibility before any run starts.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& config);

/// Parses {"experiments": [...]} for the check subcommand.
std::vector<ExperimentConfig> parse_config_list(const std::string& json_text);

struct PrivacyOutcome {
    EstimationReport report;
    std::vector<std::int64_t> truth0;  // replication 0, for the estimates CSV
    std::vector<double> estimates0;
};

struct DelayOutcome {
    DelayReport report;
    std::optional<double> backlog_mean;   // accumulate-and-serve only (units)
    std::optional<double> backlog_bound;  // numeric steady-state bound
};

PrivacyOutcome run_privacy_experiment(const ExperimentConfig& config);
DelayOutcome run_delay_experiment(const ExperimentConfig& config);
std::vector<TradeoffRow> run_tradeoff(const ExperimentConfig& config);

/// Steps a tiny scenario through the FCFS attack and renders a per-probe
/// timeline: which reconstruction case fired and the reconstructed versus
/// true per-period counts.
std::string run_attack_demo(const ExperimentConfig& config);

struct CheckResult {
    bool pass{false};
    std::string detail;
};

CheckResult evaluate_check(const CheckBand& band, double empirical, double std_error,
                           double reference);

/// Structural checks on an emitted tradeoff table: FCFS leaks everything
/// (privacy ratio under 0.05), TDMA concedes nothing (over 0.95),
/// accumulate-and-serve trades strictly more privacy for strictly more delay
/// as T grows, and p-TDMA gains privacy in L while its delay stays flat
/// within the error bars.
struct TradeoffCheck {
    bool pass{true};
    std::vector<std::string> failures;
};

TradeoffCheck check_tradeoff(std::span<const TradeoffRow> rows);

/// Worker threads for replication fan-out: SCHED_LEAK_THREADS when set,
/// otherwise the hardware concurrency (clamped to the replication count).
int worker_count();

}  // namespace schedleak
