#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "schedleak/analysis.hpp"
#include "schedleak/arrivals.hpp"
#include "schedleak/engine.hpp"

namespace schedleak {

/// Column orders are fixed; all files are plain UTF-8 with a header row.

/// owner,arrival_ticks,size_ticks
void write_trace_csv(std::ostream& os, const ArrivalTrace& trace);

/// owner,seq,arrival_ticks,size_ticks,departure_ticks
void write_jobs_csv(std::ostream& os, const SimulationResult& result);

/// period_index,true_count,estimate,squared_error
void write_estimates_csv(std::ostream& os, std::span<const std::int64_t> truth,
                         std::span<const double> estimates);

/// policy,metric,empirical,stderr,closed_form,bound_kind,params
void write_report_header(std::ostream& os);
void write_report_row(std::ostream& os, const EstimationReport& report);
void write_report_row(std::ostream& os, const DelayReport& report,
                      const char* metric = "mean_delay");
void write_report_metric_row(std::ostream& os, const std::string& policy, const char* metric,
                             double empirical, double std_error, double closed_form,
                             BoundKind kind, const std::map<std::string, double>& params);

struct TradeoffRow {
    std::string policy;
    std::string param_name;  // "T", "L" or empty
    double param_value{0.0};
    double privacy_mse{0.0};
    double privacy_se{0.0};
    double privacy_ratio{0.0};
    double privacy_ratio_ref{0.0};
    BoundKind privacy_kind{BoundKind::Exact};
    double delay_mean{0.0};
    double delay_se{0.0};
    double delay_ratio{0.0};
    double delay_ratio_ref{0.0};
    BoundKind delay_kind{BoundKind::Exact};
};

/// policy,param_name,param_value,privacy_ratio,privacy_ratio_ref,privacy_bound_kind,
/// delay_ratio,delay_ratio_ref,delay_bound_kind,privacy_mse,privacy_se,delay_mean,delay_se
void write_tradeoff_csv(std::ostream& os, std::span<const TradeoffRow> rows);

/// Stable numeric formatting shared by every writer (%.12g).
std::string csv_num(double value);

}  // namespace schedleak
