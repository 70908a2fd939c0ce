#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "agilesd/errors.hpp"

namespace agilesd {

/// Single bottleneck link seen by one long-lived flow.
///
/// Units: capacity in Kbps, RTT in seconds, packet size in Kbits. The
/// buffer extends the in-flight limit beyond the bandwidth-delay product.
struct NetworkConfig {
    double capacity_kbps = 1e6;       // 1 Gbps
    double rtt_s = 0.010;
    double packet_size_kbits = 8.0;   // 1000 bytes
    std::int64_t buffer_packets = 4;
    double loss_rate = 1e-8;          // per-packet random loss rate
    std::int64_t min_window = 2;

    double bdp_packets() const { return capacity_kbps * rtt_s / packet_size_kbits; }
};

/// Congestion-control parameters. `lambda_max == 1` is NewReno.
struct CcaParams {
    double beta = 0.5;
    double lambda_min = 1.0;
    double lambda_max = 5.0;

    static CcaParams newreno(double beta) { return {beta, 1.0, 1.0}; }
    static CcaParams agile(double beta, double lambda_max) { return {beta, 1.0, lambda_max}; }

    bool is_newreno() const { return lambda_min == 1.0 && lambda_max == 1.0; }
};

inline void validate(const CcaParams& p) {
    if (!(p.beta > 0.0 && p.beta < 1.0))
        throw InvalidParameter("beta must lie in (0, 1)");
    if (!(p.lambda_min >= 1.0))
        throw InvalidParameter("lambda_min must be >= 1");
    if (!(p.lambda_max >= p.lambda_min))
        throw InvalidParameter("lambda_max must be >= lambda_min");
}

/// Maximum window W = round(C*RTT/theta) + b, rounding half up.
inline std::int64_t max_window(const NetworkConfig& c) {
    if (!(c.capacity_kbps > 0.0)) throw InvalidParameter("capacity_kbps must be > 0");
    if (!(c.rtt_s > 0.0)) throw InvalidParameter("rtt_s must be > 0");
    if (!(c.packet_size_kbits > 0.0)) throw InvalidParameter("packet_size_kbits must be > 0");
    if (c.buffer_packets < 0) throw InvalidParameter("buffer_packets must be >= 0");
    return static_cast<std::int64_t>(std::floor(c.bdp_packets() + 0.5)) + c.buffer_packets;
}

/// Number of chain states N = W - min_window + 1.
inline std::int64_t state_count(std::int64_t max_w, std::int64_t min_window) {
    if (min_window < 1) throw InvalidParameter("min_window must be >= 1");
    if (max_w <= min_window)
        throw InvalidParameter("max window " + std::to_string(max_w) +
                               " must exceed min_window " + std::to_string(min_window));
    return max_w - min_window + 1;
}

inline void validate(const NetworkConfig& c) {
    if (!(c.loss_rate >= 0.0) || !std::isfinite(c.loss_rate))
        throw InvalidParameter("loss_rate must be >= 0");
    state_count(max_window(c), c.min_window);
}

}  // namespace agilesd
