#pragma once

// Parameter sweeps across the model and the simulator, and the
// model-vs-simulator validation report.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "agilesd/flow_simulator.hpp"
#include "agilesd/harness/config_file.hpp"
#include "agilesd/markov_model.hpp"
#include "agilesd/parallel.hpp"

namespace agilesd::harness {

enum class Cca { agile, newreno };
enum class Source { model, sim };

inline std::string_view to_string(Cca c) { return c == Cca::agile ? "agile" : "newreno"; }
inline std::string_view to_string(Source s) { return s == Source::model ? "model" : "sim"; }

struct SweepRow {
    std::string sweep_variable;
    double sweep_value = 0.0;
    std::string cca;
    double beta = 0.0;
    double lambda_max = 0.0;
    std::int64_t buffer_packets = 0;
    double loss_rate = 0.0;
    double rtt_ms = 0.0;
    double ath_kbps = 0.0;
    double normalized = 0.0;
    double mean_epoch_s = std::nan("");  // simulator rows only
    std::string source;
    std::int64_t seed_count = 0;
};

/// Throughput divided by link capacity, capped at 1: the link cannot deliver
/// more than C even when the buffer-extended window would.
inline double normalize(double rate_kbps, double capacity_kbps) {
    return std::clamp(rate_kbps / capacity_kbps, 0.0, 1.0);
}

/// Applies one sweep value to a (config, params) pair.
inline void apply_sweep_value(SweepVariable var, double value, NetworkConfig& config, CcaParams& params, Cca cca) {
    switch (var) {
        case SweepVariable::buffer: config.buffer_packets = static_cast<std::int64_t>(value); break;
        case SweepVariable::loss_rate: config.loss_rate = value; break;
        case SweepVariable::rtt: config.rtt_s = value / 1000.0; break;
        case SweepVariable::lambda_max:
            if (cca == Cca::agile) params.lambda_max = value;
            break;
        case SweepVariable::beta: params.beta = value; break;
    }
}

inline CcaParams params_for(Cca cca, const CcaParams& base) {
    return cca == Cca::agile ? base : CcaParams::newreno(base.beta);
}

struct SeedStats {
    double mean_normalized = 0.0;
    double stddev_normalized = 0.0;
    double mean_kbps = 0.0;
    double mean_epoch_s = 0.0;
};

/// Runs the simulator once per seed and averages. The per-seed runs are
/// independent and may be spread across threads.
inline SeedStats simulate_seeds(const NetworkConfig& config, const CcaParams& params, double duration_s,
                                const std::vector<std::uint64_t>& seeds, unsigned threads = 1) {
    if (seeds.empty()) throw InvalidParameter("at least one seed is required");
    std::vector<double> kbps(seeds.size()), epoch(seeds.size());
    parallel_for(
        seeds.size(),
        [&](std::size_t k) {
            const auto r = run_flow(config, params, duration_s, seeds[k]);
            kbps[k] = r.tatr_kbps;
            epoch[k] = r.mean_epoch_duration_s;
        },
        threads);
    const double n = static_cast<double>(seeds.size());
    SeedStats s;
    s.mean_kbps = std::accumulate(kbps.begin(), kbps.end(), 0.0) / n;
    s.mean_epoch_s = std::accumulate(epoch.begin(), epoch.end(), 0.0) / n;
    s.mean_normalized = s.mean_kbps / config.capacity_kbps;
    double var = 0.0;
    for (double k : kbps) var += std::pow(k / config.capacity_kbps - s.mean_normalized, 2);
    s.stddev_normalized = seeds.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    return s;
}

/// One row per (value, CCA, source); Agile-SD and NewReno are both run at
/// every point. Rows are ordered by sweep value, then CCA, then source.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, unsigned threads = 0) {
    if (!spec.variable) throw InvalidParameter("sweep has no variable");
    if (spec.values.empty()) throw InvalidParameter("sweep has no values");
    const bool want_model = spec.mode != SweepMode::simulate;
    const bool want_sim = spec.mode != SweepMode::model;
    if (want_sim && spec.seeds.empty()) throw InvalidParameter("simulation needs at least one seed");

    struct Task {
        double value;
        Cca cca;
        Source source;
    };
    std::vector<double> values = spec.values;
    std::sort(values.begin(), values.end());
    std::vector<Task> tasks;
    for (double v : values)
        for (Cca c : {Cca::agile, Cca::newreno}) {
            if (want_model) tasks.push_back({v, c, Source::model});
            if (want_sim) tasks.push_back({v, c, Source::sim});
        }

    std::vector<SweepRow> rows(tasks.size());
    parallel_for(
        tasks.size(),
        [&](std::size_t k) {
            const Task& t = tasks[k];
            NetworkConfig config = spec.base_config;
            CcaParams params = params_for(t.cca, spec.base_params);
            apply_sweep_value(*spec.variable, t.value, config, params, t.cca);

            SweepRow& row = rows[k];
            row.sweep_variable = std::string(to_string(*spec.variable));
            row.sweep_value = t.value;
            row.cca = std::string(to_string(t.cca));
            row.beta = params.beta;
            row.lambda_max = params.lambda_max;
            row.buffer_packets = config.buffer_packets;
            row.loss_rate = config.loss_rate;
            row.rtt_ms = config.rtt_s * 1000.0;
            row.source = std::string(to_string(t.source));
            try {
                if (t.source == Source::model) {
                    const auto r = average_throughput(config, params, spec.model);
                    row.ath_kbps = r.ath_kbps;
                    row.seed_count = 0;
                } else {
                    const auto s = simulate_seeds(config, params, spec.duration_s, spec.seeds);
                    row.ath_kbps = s.mean_kbps;
                    row.mean_epoch_s = s.mean_epoch_s;
                    row.seed_count = static_cast<std::int64_t>(spec.seeds.size());
                }
            } catch (const std::exception& e) {
                throw std::runtime_error("sweep point " + row.sweep_variable + "=" + std::to_string(t.value) + " (" +
                                         row.cca + ", " + row.source + "): " + e.what());
            }
            row.normalized = normalize(row.ath_kbps, config.capacity_kbps);
        },
        threads);
    return rows;
}

struct ValidationPoint {
    double sweep_value = 0.0;
    double model_normalized = 0.0;
    double sim_mean = 0.0;
    double sim_stddev = 0.0;
    double relative_error = 0.0;  // |sim - model| / model
};

struct ValidationReport {
    std::string sweep_variable;
    std::string cca;
    std::vector<ValidationPoint> points;
    double median_relative_error = 0.0;
    double max_relative_error = 0.0;
};

inline double median(std::vector<double> v) {
    if (v.empty()) throw InvalidParameter("median of empty set");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Model against seed-averaged simulator at every sweep value, for the CCA
/// described by the spec's base parameters.
inline ValidationReport compare_model_vs_sim(const SweepSpec& spec, unsigned threads = 0) {
    if (!spec.variable) throw InvalidParameter("validation sweep has no variable");
    if (spec.values.empty()) throw InvalidParameter("validation sweep has no values");
    if (spec.seeds.empty()) throw InvalidParameter("validation needs at least one seed");

    ValidationReport rep;
    rep.sweep_variable = std::string(to_string(*spec.variable));
    const Cca cca = spec.base_params.is_newreno() ? Cca::newreno : Cca::agile;
    rep.cca = std::string(to_string(cca));

    std::vector<double> values = spec.values;
    std::sort(values.begin(), values.end());
    rep.points.resize(values.size());
    parallel_for(
        values.size(),
        [&](std::size_t k) {
            NetworkConfig config = spec.base_config;
            CcaParams params = spec.base_params;
            apply_sweep_value(*spec.variable, values[k], config, params, cca);
            const auto m = average_throughput(config, params, spec.model);
            const auto s = simulate_seeds(config, params, spec.duration_s, spec.seeds);
            auto& p = rep.points[k];
            p.sweep_value = values[k];
            p.model_normalized = m.normalized_ath;
            p.sim_mean = s.mean_normalized;
            p.sim_stddev = s.stddev_normalized;
            p.relative_error = std::abs(s.mean_normalized - m.normalized_ath) / m.normalized_ath;
        },
        threads);

    std::vector<double> errs;
    for (const auto& p : rep.points) errs.push_back(p.relative_error);
    rep.median_relative_error = median(errs);
    rep.max_relative_error = *std::max_element(errs.begin(), errs.end());
    return rep;
}

}  // namespace agilesd::harness
