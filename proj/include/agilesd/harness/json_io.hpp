#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "agilesd/aacpt_tuner.hpp"
#include "agilesd/flow_simulator.hpp"
#include "agilesd/harness/sweep.hpp"
#include "agilesd/markov_model.hpp"

namespace agilesd::harness {

using nlohmann::json;

inline constexpr const char* kNormalization = "throughput / capacity_kbps";

inline json to_json(const NetworkConfig& c) {
    return {{"capacity_kbps", c.capacity_kbps}, {"rtt_ms", c.rtt_s * 1000.0},
            {"packet_size_kbits", c.packet_size_kbits}, {"buffer_packets", c.buffer_packets},
            {"loss_rate", c.loss_rate}, {"min_window", c.min_window}, {"max_window", max_window(c)}};
}

inline json to_json(const CcaParams& p) {
    return {{"beta", p.beta}, {"lambda_min", p.lambda_min}, {"lambda_max", p.lambda_max}};
}

inline json to_json(const ThroughputReport& r) {
    return {{"ath_kbps", r.ath_kbps},       {"normalized_ath", r.normalized_ath}, {"iterations", r.iterations},
            {"mean_window", r.mean_window}, {"mean_lambda", r.mean_lambda},       {"max_window", r.max_window},
            {"n_states", r.n_states}};
}

// NaN is not representable in JSON; it becomes null.
inline json real_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline json to_json(const SweepRow& r) {
    return {{"sweep_variable", r.sweep_variable},
            {"sweep_value", r.sweep_value},
            {"cca", r.cca},
            {"beta", r.beta},
            {"lambda_max", r.lambda_max},
            {"buffer_packets", r.buffer_packets},
            {"loss_rate", r.loss_rate},
            {"rtt_ms", r.rtt_ms},
            {"ath_kbps", r.ath_kbps},
            {"normalized", r.normalized},
            {"mean_epoch_s", real_or_null(r.mean_epoch_s)},
            {"source", r.source},
            {"seed_count", r.seed_count}};
}

inline json sweep_to_json(const std::vector<SweepRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    return {{"metadata", {{"normalization", kNormalization}}}, {"rows", arr}};
}

inline json to_json(const SimReport& r) {
    json epochs = json::array();
    for (const auto& e : r.epochs) epochs.push_back({{"cycles", e.cycles.size()}, {"duration_s", e.duration_s()}});
    return {{"seed", r.seed},
            {"tatr_kbps", r.tatr_kbps},
            {"normalized", r.normalized},
            {"duration_s", r.duration_s},
            {"mean_epoch_duration_s", r.mean_epoch_duration_s},
            {"epoch_count", r.epochs.size()},
            {"loss_counts", {{"random", r.loss_counts.random}, {"congestion", r.loss_counts.congestion}}}};
}

inline json to_json(const ValidationReport& rep) {
    json pts = json::array();
    for (const auto& p : rep.points)
        pts.push_back({{"sweep_value", p.sweep_value},
                       {"model_normalized", p.model_normalized},
                       {"sim_mean", p.sim_mean},
                       {"sim_stddev", p.sim_stddev},
                       {"relative_error", p.relative_error}});
    return {{"metadata", {{"normalization", kNormalization}}},
            {"sweep_variable", rep.sweep_variable},
            {"cca", rep.cca},
            {"points", pts},
            {"median_relative_error", rep.median_relative_error},
            {"max_relative_error", rep.max_relative_error}};
}

inline json fit_to_json(const TuningResult& r, const LineFit& fit, const TuningGrid& grid) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"betas", r.betas},
            {"lambda_opt", r.lambda_opt},
            {"formula_lambda", r.formula_lambda},
            {"metadata",
             {{"normalization", kNormalization},
              {"evaluator_config", to_json(grid.base_config)},
              {"iterations", grid.options.iterations},
              {"optimum_tolerance", kOptimumTolerance}}}};
}

}  // namespace agilesd::harness
