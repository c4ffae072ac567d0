#include "schedleak/csv.hpp"

#include <cstdio>

namespace schedleak {

std::string csv_num(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

void write_trace_csv(std::ostream& os, const ArrivalTrace& trace) {
    os << "owner,arrival_ticks,size_ticks\n";
    for (const TickTime& a : trace.arrivals)
        os << trace.owner << ',' << a.ticks() << ',' << trace.job_size.ticks() << '\n';
}

void write_jobs_csv(std::ostream& os, const SimulationResult& result) {
    os << "owner,seq,arrival_ticks,size_ticks,departure_ticks\n";
    for (const auto& user : result.users)
        for (const Job& job : user)
            os << job.owner << ',' << job.seq << ',' << job.arrival.ticks() << ','
               << job.size.ticks() << ',' << job.departure.ticks() << '\n';
}

void write_estimates_csv(std::ostream& os, std::span<const std::int64_t> truth,
                         std::span<const double> estimates) {
    os << "period_index,true_count,estimate,squared_error\n";
    for (std::size_t k = 0; k < truth.size() && k < estimates.size(); ++k) {
        const double err = static_cast<double>(truth[k]) - estimates[k];
        os << (k + 1) << ',' << truth[k] << ',' << csv_num(estimates[k]) << ','
           << csv_num(err * err) << '\n';
    }
}

namespace {

std::string params_field(const std::map<std::string, double>& params) {
    std::string out;
    for (const auto& [key, value] : params) {
        if (!out.empty()) out += ';';
        out += key + "=" + csv_num(value);
    }
    return out;
}

}  // namespace

void write_report_header(std::ostream& os) {
    os << "policy,metric,empirical,stderr,closed_form,bound_kind,params\n";
}

void write_report_metric_row(std::ostream& os, const std::string& policy, const char* metric,
                             double empirical, double std_error, double closed_form,
                             BoundKind kind, const std::map<std::string, double>& params) {
    os << policy << ',' << metric << ',' << csv_num(empirical) << ',' << csv_num(std_error)
       << ',' << csv_num(closed_form) << ',' << bound_kind_name(kind) << ','
       << params_field(params) << '\n';
}

void write_report_row(std::ostream& os, const EstimationReport& report) {
    write_report_metric_row(os, report.policy, ("mse_" + report.estimator).c_str(),
                            report.empirical_mse, report.std_error, report.closed_form,
                            report.bound_kind, report.params);
}

void write_report_row(std::ostream& os, const DelayReport& report, const char* metric) {
    write_report_metric_row(os, report.policy, metric, report.aggregate_mean, report.std_error,
                            report.closed_form, report.bound_kind, report.params);
}

void write_tradeoff_csv(std::ostream& os, std::span<const TradeoffRow> rows) {
    os << "policy,param_name,param_value,privacy_ratio,privacy_ratio_ref,privacy_bound_kind,"
          "delay_ratio,delay_ratio_ref,delay_bound_kind,privacy_mse,privacy_se,delay_mean,"
          "delay_se\n";
    for (const TradeoffRow& r : rows) {
        os << r.policy << ',' << r.param_name << ',' << csv_num(r.param_value) << ','
           << csv_num(r.privacy_ratio) << ',' << csv_num(r.privacy_ratio_ref) << ','
           << bound_kind_name(r.privacy_kind) << ',' << csv_num(r.delay_ratio) << ','
           << csv_num(r.delay_ratio_ref) << ',' << bound_kind_name(r.delay_kind) << ','
           << csv_num(r.privacy_mse) << ',' << csv_num(r.privacy_se) << ','
           << csv_num(r.delay_mean) << ',' << csv_num(r.delay_se) << '\n';
    }
}

}  // namespace schedleak
