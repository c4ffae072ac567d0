#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "schedleak/experiment.hpp"

namespace {

using namespace schedleak;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    return out;
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<std::string> out;
    bool check = false;
};

void apply(const Overrides& ov, ExperimentConfig& cfg) {
    if (ov.seed) cfg.base_seed = *ov.seed;
    if (ov.replications) cfg.replications = *ov.replications;
    if (ov.out) cfg.out_path = *ov.out;
}

int finish_check(const ExperimentConfig& cfg, double empirical, double std_error,
                 double reference, bool check_requested) {
    if (!check_requested) return 0;
    if (!cfg.check) {
        std::cerr << "--check requested but the config has no check band\n";
        return 2;
    }
    const CheckResult res = evaluate_check(*cfg.check, empirical, std_error, reference);
    std::cout << (res.pass ? "[PASS] " : "[FAIL] ") << res.detail << "\n";
    return res.pass ? 0 : 1;
}

int cmd_privacy(ExperimentConfig cfg, const Overrides& ov) {
    apply(ov, cfg);
    const PrivacyOutcome outcome = run_privacy_experiment(cfg);
    const EstimationReport& rep = outcome.report;
    std::cout << "privacy " << rep.policy << "/" << rep.estimator
              << ": mse=" << csv_num(rep.empirical_mse) << " se=" << csv_num(rep.std_error)
              << " closed_form=" << csv_num(rep.closed_form) << " ("
              << bound_kind_name(rep.bound_kind) << ") reps=" << rep.replications << "\n";
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        write_report_header(out);
        write_report_row(out, rep);
        std::cout << "wrote " << cfg.out_path << "\n";
        if (cfg.export_estimates) {
            auto est = open_out(cfg.out_path + ".estimates.csv");
            write_estimates_csv(est, outcome.truth0, outcome.estimates0);
            std::cout << "wrote " << cfg.out_path << ".estimates.csv\n";
        }
    }
    return finish_check(cfg, rep.empirical_mse, rep.std_error, rep.closed_form, ov.check);
}

int cmd_delay(ExperimentConfig cfg, const Overrides& ov) {
    apply(ov, cfg);
    const DelayOutcome outcome = run_delay_experiment(cfg);
    const DelayReport& rep = outcome.report;
    std::cout << "delay " << rep.policy << ": mean=" << csv_num(rep.aggregate_mean)
              << " se=" << csv_num(rep.std_error) << " closed_form=" << csv_num(rep.closed_form)
              << " (" << bound_kind_name(rep.bound_kind) << ") reps=" << rep.replications << "\n";
    for (std::size_t u = 0; u < rep.per_user_mean.size(); ++u)
        std::cout << "  user " << (u + 1) << " mean=" << csv_num(rep.per_user_mean[u]) << "\n";
    if (outcome.backlog_mean)
        std::cout << "  end-of-period backlog mean=" << csv_num(*outcome.backlog_mean)
                  << " bound=" << csv_num(*outcome.backlog_bound) << "\n";
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        write_report_header(out);
        write_report_row(out, rep);
        if (outcome.backlog_mean)
            write_report_metric_row(out, rep.policy, "mean_backlog", *outcome.backlog_mean, 0.0,
                                    *outcome.backlog_bound, BoundKind::Upper, rep.params);
        std::cout << "wrote " << cfg.out_path << "\n";
    }
    return finish_check(cfg, rep.aggregate_mean, rep.std_error, rep.closed_form, ov.check);
}

int cmd_tradeoff(ExperimentConfig cfg, const Overrides& ov) {
    apply(ov, cfg);
    const std::vector<TradeoffRow> rows = run_tradeoff(cfg);
    for (const TradeoffRow& row : rows)
        std::cout << "tradeoff " << row.policy
                  << (row.param_name.empty() ? "" : (" " + row.param_name + "=" + csv_num(row.param_value)))
                  << ": privacy_ratio=" << csv_num(row.privacy_ratio)
                  << " delay_ratio=" << csv_num(row.delay_ratio) << "\n";
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        write_tradeoff_csv(out, rows);
        std::cout << "wrote " << cfg.out_path << "\n";
    }
    if (ov.check) {
        const TradeoffCheck check = check_tradeoff(rows);
        for (const std::string& f : check.failures) std::cout << "[FAIL] " << f << "\n";
        std::cout << (check.pass ? "[PASS] tradeoff structure\n" : "");
        return check.pass ? 0 : 1;
    }
    return 0;
}

int cmd_attack_demo(ExperimentConfig cfg, const Overrides& ov) {
    apply(ov, cfg);
    const std::string text = run_attack_demo(cfg);
    std::cout << text;
    if (!cfg.out_path.empty()) {
        auto out = open_out(cfg.out_path);
        out << text;
        std::cout << "wrote " << cfg.out_path << "\n";
    }
    return 0;
}

int cmd_check(const std::string& config_path, const Overrides& ov) {
    const std::vector<ExperimentConfig> configs = parse_config_list(read_file(config_path));
    int failures = 0;
    for (ExperimentConfig cfg : configs) {
        apply(ov, cfg);
        const std::string label = cfg.name.empty() ? policy_name(cfg.policy) : cfg.name;
        try {
            bool pass = true;
            std::string detail;
            if (cfg.kind == ExperimentKind::Privacy) {
                const PrivacyOutcome outcome = run_privacy_experiment(cfg);
                if (!cfg.check) throw ConfigError("check suite entries need a check band");
                const CheckResult res = evaluate_check(*cfg.check, outcome.report.empirical_mse,
                                                       outcome.report.std_error,
                                                       outcome.report.closed_form);
                pass = res.pass;
                detail = res.detail;
            } else if (cfg.kind == ExperimentKind::Delay) {
                const DelayOutcome outcome = run_delay_experiment(cfg);
                if (!cfg.check) throw ConfigError("check suite entries need a check band");
                const CheckResult res = evaluate_check(*cfg.check, outcome.report.aggregate_mean,
                                                       outcome.report.std_error,
                                                       outcome.report.closed_form);
                pass = res.pass;
                detail = res.detail;
            } else if (cfg.kind == ExperimentKind::Tradeoff) {
                const TradeoffCheck check = check_tradeoff(run_tradeoff(cfg));
                pass = check.pass;
                for (const std::string& f : check.failures) detail += f + "; ";
                if (pass) detail = "tradeoff structure holds";
            } else {
                throw ConfigError("check suite supports privacy, delay and tradeoff entries");
            }
            std::cout << (pass ? "[PASS] " : "[FAIL] ") << label << ": " << detail << "\n";
            if (!pass) ++failures;
        } catch (const Error& e) {
            std::cout << "[FAIL] " << label << ": " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"schedleak: timing side-channel simulator for shared single-server schedulers"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides ov;

    auto add_common = [&](CLI::App* cmd, bool with_check) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--seed", ov.seed, "override the base seed");
        cmd->add_option("--replications", ov.replications, "override the replication count");
        cmd->add_option("--out", ov.out, "override the output CSV path");
        if (with_check)
            cmd->add_flag("--check", ov.check,
                          "exit non-zero when the configured acceptance band is violated");
    };

    CLI::App* privacy = app.add_subcommand("privacy", "empirical estimation error vs closed form");
    add_common(privacy, true);
    CLI::App* delay = app.add_subcommand("delay", "empirical mean delay vs closed form");
    add_common(delay, true);
    CLI::App* tradeoff = app.add_subcommand("tradeoff", "privacy/delay ratio sweep table");
    add_common(tradeoff, true);
    CLI::App* demo = app.add_subcommand("attack-demo", "annotated FCFS reconstruction timeline");
    add_common(demo, false);
    CLI::App* check = app.add_subcommand("check", "run a suite of banded experiments");
    add_common(check, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(config_path, ov);
        ExperimentConfig cfg = parse_config(read_file(config_path));
        if (privacy->parsed()) return cmd_privacy(std::move(cfg), ov);
        if (delay->parsed()) return cmd_delay(std::move(cfg), ov);
        if (tradeoff->parsed()) return cmd_tradeoff(std::move(cfg), ov);
        if (demo->parsed()) return cmd_attack_demo(std::move(cfg), ov);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
