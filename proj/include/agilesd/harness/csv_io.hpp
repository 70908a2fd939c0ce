#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "agilesd/aacpt_tuner.hpp"
#include "agilesd/flow_simulator.hpp"
#include "agilesd/harness/sweep.hpp"

namespace agilesd::harness {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kSweepDigits = 9;
inline constexpr int kTraceDigits = std::numeric_limits<double>::max_digits10;

inline std::string format_real(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double read_real(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("malformed number '" + s + "'");
    return v;
}

// --- sweep table -----------------------------------------------------------

inline constexpr const char* kSweepHeader =
    "sweep_variable,sweep_value,cca,beta,lambda_max,buffer_packets,loss_rate,rtt_ms,ath_kbps,normalized,"
    "mean_epoch_s,source,seed_count";

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    const auto f = [](double v) { return format_real(v, kSweepDigits); };
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        out << r.sweep_variable << ',' << f(r.sweep_value) << ',' << r.cca << ',' << f(r.beta) << ','
            << f(r.lambda_max) << ',' << r.buffer_packets << ',' << f(r.loss_rate) << ',' << f(r.rtt_ms) << ','
            << f(r.ath_kbps) << ',' << f(r.normalized) << ',' << f(r.mean_epoch_s) << ',' << r.source << ','
            << r.seed_count << '\n';
    }
}

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kSweepHeader, 0) != 0) throw IoError("missing sweep CSV header");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 13) throw IoError("sweep CSV row has " + std::to_string(c.size()) + " fields");
        SweepRow r;
        r.sweep_variable = c[0];
        r.sweep_value = read_real(c[1]);
        r.cca = c[2];
        r.beta = read_real(c[3]);
        r.lambda_max = read_real(c[4]);
        r.buffer_packets = std::stoll(c[5]);
        r.loss_rate = read_real(c[6]);
        r.rtt_ms = read_real(c[7]);
        r.ath_kbps = read_real(c[8]);
        r.normalized = read_real(c[9]);
        r.mean_epoch_s = read_real(c[10]);
        r.source = c[11];
        r.seed_count = std::stoll(c[12]);
        rows.push_back(std::move(r));
    }
    return rows;
}

// --- per-cycle trace -------------------------------------------------------

inline constexpr const char* kTraceHeader = "epoch,cycle,end_cause,time_s,cwnd,lambda,duration_s,packets_sent";

inline std::string_view to_string(EpochEnd e) {
    switch (e) {
        case EpochEnd::random_loss: return "random_loss";
        case EpochEnd::congestion_loss: return "congestion_loss";
        case EpochEnd::simulation_end: return "simulation_end";
    }
    return "?";
}

inline EpochEnd parse_epoch_end(const std::string& s) {
    if (s == "random_loss") return EpochEnd::random_loss;
    if (s == "congestion_loss") return EpochEnd::congestion_loss;
    if (s == "simulation_end") return EpochEnd::simulation_end;
    throw IoError("unknown epoch end cause '" + s + "'");
}

/// One CSV row per cycle, in full double precision. `time_s` is the cycle
/// start time.
inline void write_trace_csv(std::ostream& out, const SimReport& report) {
    if (report.epochs.empty()) throw InvalidParameter("report has no epochs");
    const auto f = [](double v) { return format_real(v, kTraceDigits); };
    out << kTraceHeader << '\n';
    double t = 0.0;
    for (std::size_t e = 0; e < report.epochs.size(); ++e) {
        const auto& ep = report.epochs[e];
        for (std::size_t i = 0; i < ep.cycles.size(); ++i) {
            const auto& c = ep.cycles[i];
            out << e + 1 << ',' << i << ',' << to_string(ep.end_cause) << ',' << f(t) << ',' << f(c.w) << ','
                << f(c.lambda) << ',' << f(c.duration_s) << ',' << f(c.packets_sent) << '\n';
            t += c.duration_s;
        }
    }
}

inline void emit_trace(const SimReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_trace_csv(out, report);
    if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<EpochRecord> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(kTraceHeader, 0) != 0) throw IoError("missing trace CSV header");
    std::vector<EpochRecord> epochs;
    long long current = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split_csv_line(line);
        if (c.size() != 8) throw IoError("trace row has " + std::to_string(c.size()) + " fields");
        const long long e = std::stoll(c[0]);
        if (e != current) {
            epochs.emplace_back();
            epochs.back().end_cause = parse_epoch_end(c[2]);
            current = e;
        }
        epochs.back().cycles.push_back({read_real(c[4]), read_real(c[5]), read_real(c[6]), read_real(c[7])});
    }
    return epochs;
}

// --- tuning outputs --------------------------------------------------------

/// AT surface: header row of lambda' values, first column of beta values.
inline void write_at_matrix_csv(std::ostream& out, const TuningResult& r) {
    const auto f = [](double v) { return format_real(v, kSweepDigits); };
    out << "beta";
    for (double l : r.lambdas) out << ',' << f(l);
    out << '\n';
    for (std::size_t i = 0; i < r.betas.size(); ++i) {
        out << f(r.betas[i]);
        for (double v : r.at_matrix[i]) out << ',' << f(v);
        out << '\n';
    }
}

inline void write_lambda_opt_csv(std::ostream& out, const TuningResult& r) {
    const auto f = [](double v) { return format_real(v, kSweepDigits); };
    out << "beta,lambda_opt,formula_lambda,at_opt,at_formula,at_newreno\n";
    for (std::size_t i = 0; i < r.betas.size(); ++i) {
        const auto& row = r.at_matrix[i];
        auto at_of = [&](double lambda) {
            for (std::size_t j = 0; j < r.lambdas.size(); ++j)
                if (r.lambdas[j] == lambda) return row[j];
            return std::nan("");
        };
        out << f(r.betas[i]) << ',' << f(r.lambda_opt[i]) << ',' << r.formula_lambda[i] << ','
            << f(at_of(r.lambda_opt[i])) << ',' << f(at_of(r.formula_lambda[i])) << ',' << f(at_of(1.0)) << '\n';
    }
}

}  // namespace agilesd::harness
