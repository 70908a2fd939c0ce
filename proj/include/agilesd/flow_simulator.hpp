#pragma once

// Cycle-granularity simulator of one Agile-SD / NewReno flow in congestion
// avoidance over a drop-tail bottleneck with random per-packet loss.
//
// A cycle lasts RTT/lambda, carries floor(cwnd)/lambda packets and ends with
// cwnd grown by one. An epoch is the run of cycles between two losses. The
// window is floored whenever a reduction assigns it, so cwnd stays integral.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "agilesd/errors.hpp"
#include "agilesd/network_config.hpp"

namespace agilesd {

/// Per-ACK NewReno increment: w + 1/w.
inline double next_window_newreno(double w) {
    if (!(w >= 1.0)) throw InvalidParameter("window must be >= 1");
    return w + 1.0 / w;
}

/// Per-ACK Agile-SD increment: w + lambda/w.
inline double next_window_agile(double w, double lambda) {
    if (!(w >= 1.0)) throw InvalidParameter("window must be >= 1");
    if (!(lambda >= 1.0)) throw InvalidParameter("lambda must be >= 1");
    return w + lambda / w;
}

/// Agility factor mechanism: lambda decays linearly from lambda_max at the
/// epoch start towards lambda_min as cwnd climbs back to the previous peak.
inline double agility_factor_afm(double prev_peak, double epoch_start_w, double current_w, const CcaParams& params) {
    validate(params);
    if (!(prev_peak > epoch_start_w))
        throw InvalidState("previous peak must exceed the epoch start window");
    const double ratio = (prev_peak - current_w) / (prev_peak - epoch_start_w);
    return std::clamp(params.lambda_max * ratio, params.lambda_min, params.lambda_max);
}

struct FlowState {
    double cwnd = 0.0;
    std::int64_t epoch_index = 1;
    std::int64_t cycle_index = 0;
    double prev_peak = 0.0;
    double epoch_start_w = 0.0;
    double current_lambda = 1.0;
    double clock_s = 0.0;
};

struct CycleRecord {
    double w;             // cwnd during the cycle
    double lambda;
    double duration_s;    // RTT / lambda
    double packets_sent;  // floor(w) / lambda
};

enum class EpochEnd { random_loss, congestion_loss, simulation_end };

struct EpochRecord {
    std::vector<CycleRecord> cycles;
    EpochEnd end_cause = EpochEnd::simulation_end;

    double duration_s() const {
        double d = 0.0;
        for (const auto& c : cycles) d += c.duration_s;
        return d;
    }
};

struct LossCounts {
    std::int64_t random = 0;
    std::int64_t congestion = 0;
};

struct SimReport {
    double tatr_kbps = 0.0;
    double normalized = 0.0;
    std::vector<EpochRecord> epochs;
    double mean_epoch_duration_s = 0.0;
    LossCounts loss_counts;
    double duration_s = 0.0;  // simulated time actually covered by cycles
    std::uint64_t seed = 0;
};

/// EATr = theta * sum floor(w_i)/lambda_i / sum RTT/lambda_i
inline double epoch_average_rate(const EpochRecord& epoch, double theta) {
    if (epoch.cycles.empty()) throw InvalidParameter("epoch has no cycles");
    double packets = 0.0, time = 0.0;
    for (const auto& c : epoch.cycles) {
        packets += c.packets_sent;
        time += c.duration_s;
    }
    return theta * packets / time;
}

/// TATr: time-weighted over every cycle of every epoch, not a mean of EATr.
inline double total_average_rate(std::span<const EpochRecord> epochs, double theta) {
    if (epochs.empty()) throw InvalidParameter("no epochs");
    double packets = 0.0, time = 0.0;
    for (const auto& e : epochs)
        for (const auto& c : e.cycles) {
            packets += c.packets_sent;
            time += c.duration_s;
        }
    if (!(time > 0.0)) throw InvalidParameter("epochs cover no time");
    return theta * packets / time;
}

namespace detail {

// Loss arrivals as a packet counter: the distance to the next lost packet is
// geometric, which is equivalent to an independent Bernoulli(R) per packet.
class PacketLossProcess {
public:
    PacketLossProcess(double rate, std::uint64_t seed) : rng_(seed), rate_(rate) {
        if (rate_ > 0.0) dist_ = std::geometric_distribution<std::int64_t>(rate_);
        draw();
    }

    // Consumes `packets` from the stream; true if one of them was lost.
    bool consume(double packets) {
        if (packets_to_loss_ <= packets) {
            draw();
            return true;
        }
        packets_to_loss_ -= packets;
        return false;
    }

private:
    void draw() {
        packets_to_loss_ = rate_ > 0.0 ? static_cast<double>(dist_(rng_)) + 1.0
                                       : std::numeric_limits<double>::infinity();
    }

    std::mt19937_64 rng_;
    std::geometric_distribution<std::int64_t> dist_;
    double rate_;
    double packets_to_loss_ = 0.0;
};

inline double cycle_lambda(const FlowState& s, const CcaParams& p) {
    // A loss at the minimum window leaves no room between the peak and the
    // restart point; lambda_max applies at the restart, lambda_min beyond it.
    if (!(s.prev_peak > s.epoch_start_w)) return s.cwnd <= s.epoch_start_w ? p.lambda_max : p.lambda_min;
    return agility_factor_afm(s.prev_peak, s.epoch_start_w, s.cwnd, p);
}

}  // namespace detail

/// Window after a multiplicative decrease: max(floor(beta * w), w_min).
inline double reduced_window(double w, double beta, double w_min) {
    return std::max(std::floor(beta * w), w_min);
}

/// Runs one flow for `duration_s` seconds of simulated time. Only whole
/// cycles are simulated; the uncovered tail is shorter than one cycle.
/// PRNG: std::mt19937_64 seeded with `seed`.
inline SimReport run_flow(const NetworkConfig& config, const CcaParams& params, double duration_s,
                          std::uint64_t seed) {
    validate(config);
    validate(params);
    if (!(duration_s > 0.0)) throw InvalidParameter("duration_s must be > 0");
    if (config.loss_rate > 1.0) throw InvalidParameter("loss_rate must be a per-packet probability <= 1");

    const double w_max = static_cast<double>(max_window(config));
    const double w_min = static_cast<double>(config.min_window);
    detail::PacketLossProcess losses(config.loss_rate, seed);

    SimReport report;
    report.seed = seed;

    FlowState s;
    s.prev_peak = w_max;  // bootstrap: the flow starts just after a reduction from W
    s.cwnd = reduced_window(w_max, params.beta, w_min);
    s.epoch_start_w = s.cwnd;

    EpochRecord epoch;
    auto close_epoch = [&](EpochEnd cause) {
        epoch.end_cause = cause;
        report.epochs.push_back(std::move(epoch));
        epoch = EpochRecord{};
        s.prev_peak = s.cwnd;
        s.cwnd = reduced_window(s.cwnd, params.beta, w_min);
        s.epoch_start_w = s.cwnd;
        s.cycle_index = 0;
        ++s.epoch_index;
    };

    for (;;) {
        s.current_lambda = detail::cycle_lambda(s, params);
        const double dt = config.rtt_s / s.current_lambda;
        if (s.clock_s + dt > duration_s) break;

        const double packets = std::floor(s.cwnd) / s.current_lambda;
        epoch.cycles.push_back({s.cwnd, s.current_lambda, dt, packets});
        s.clock_s += dt;
        ++s.cycle_index;

        if (losses.consume(packets)) {
            ++report.loss_counts.random;
            close_epoch(EpochEnd::random_loss);
        } else if (s.cwnd + 1.0 > w_max) {
            ++report.loss_counts.congestion;
            close_epoch(EpochEnd::congestion_loss);
        } else {
            s.cwnd += 1.0;
        }
    }

    if (report.epochs.empty() && epoch.cycles.empty())
        throw InvalidParameter("duration_s is shorter than one cycle");
    if (!epoch.cycles.empty()) report.epochs.push_back(std::move(epoch));

    report.duration_s = s.clock_s;
    report.tatr_kbps = total_average_rate(report.epochs, config.packet_size_kbits);
    report.normalized = report.tatr_kbps / config.capacity_kbps;

    double closed_time = 0.0;
    std::int64_t closed = 0;
    for (const auto& e : report.epochs) {
        if (e.end_cause == EpochEnd::simulation_end) continue;
        closed_time += e.duration_s();
        ++closed;
    }
    report.mean_epoch_duration_s = closed > 0 ? closed_time / static_cast<double>(closed) : report.duration_s;
    return report;
}

}  // namespace agilesd
