#pragma once

// Markov-chain throughput model for NewReno and Agile-SD congestion
// avoidance under combined congestion loss (window hits W) and random
// Poisson packet loss.
//
// States are window sizes S = [w_min, w_min + 1, ..., W]. State indices in
// the public API are 1-based (state i holds window w_min + i - 1) because
// the transition targets are defined by index arithmetic (floor(beta * i)).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "agilesd/errors.hpp"
#include "agilesd/network_config.hpp"

namespace agilesd {

/// Probability of at least one random loss among `window` packets when
/// losses arrive as a Poisson process with per-packet rate `rate`.
inline double loss_probability(double window, double rate) {
    if (!(window >= 1.0)) throw InvalidParameter("window must be >= 1");
    if (!(rate >= 0.0)) throw InvalidParameter("loss rate must be >= 0");
    return -std::expm1(-rate * window);
}

struct Transition {
    std::int64_t target;  // 1-based
    double probability;
};

/// Row-stochastic N x N matrix with at most two nonzeros per row.
class TransitionMatrix {
public:
    TransitionMatrix() = default;
    explicit TransitionMatrix(std::int64_t n_states)
        : entries_(static_cast<std::size_t>(n_states)), counts_(static_cast<std::size_t>(n_states), 0) {}

    std::int64_t n_states() const { return static_cast<std::int64_t>(counts_.size()); }

    /// Nonzero entries of row `i` (1-based).
    std::span<const Transition> row(std::int64_t i) const {
        const auto k = static_cast<std::size_t>(i - 1);
        return {entries_.at(k).data(), counts_[k]};
    }

    /// Dense lookup v[i, j]; zero where no entry is stored.
    double at(std::int64_t i, std::int64_t j) const {
        double p = 0.0;
        for (const auto& t : row(i))
            if (t.target == j) p += t.probability;
        return p;
    }

    double row_sum(std::int64_t i) const {
        double s = 0.0;
        for (const auto& t : row(i)) s += t.probability;
        return s;
    }

    void add(std::int64_t i, std::int64_t target, double probability) {
        if (i < 1 || i > n_states() || target < 1 || target > n_states())
            throw InvalidParameter("transition index out of range");
        if (probability == 0.0) return;
        const auto k = static_cast<std::size_t>(i - 1);
        for (std::size_t e = 0; e < counts_[k]; ++e) {
            if (entries_[k][e].target == target) {
                entries_[k][e].probability += probability;
                return;
            }
        }
        if (counts_[k] == 2) throw InvalidState("row already holds two transitions");
        entries_[k][counts_[k]++] = {target, probability};
    }

private:
    std::vector<std::array<Transition, 2>> entries_;
    std::vector<std::size_t> counts_;
};

/// Probability vector over the window sample space.
struct StateDistribution {
    std::vector<double> probs;
    std::int64_t min_window = 1;

    std::int64_t n_states() const { return static_cast<std::int64_t>(probs.size()); }
    double window_at(std::int64_t index) const { return static_cast<double>(min_window + index - 1); }

    std::vector<double> sample_space() const {
        std::vector<double> s(probs.size());
        std::iota(s.begin(), s.end(), static_cast<double>(min_window));
        return s;
    }

    double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }
};

namespace detail {

inline std::int64_t clamp_index(double x, std::int64_t n) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(x), 1, n);
}

inline void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameter("beta must lie in (0, 1)");
}

}  // namespace detail

/// Loss target of row i: clamp(floor(beta * i), 1, N).
inline std::int64_t loss_target(std::int64_t i, double beta, std::int64_t n_states) {
    return detail::clamp_index(std::floor(beta * static_cast<double>(i)), n_states);
}

/// Rows 1..N-1 grow to i+1 with probability 1 - P(w_i) and back off to
/// floor(beta*i) with probability P(w_i). Row N always backs off: a random
/// loss and the congestion loss at W land on the same state.
inline TransitionMatrix build_transition_matrix(std::int64_t n_states, double beta, double loss_rate,
                                                std::int64_t min_window) {
    if (n_states < 2) throw InvalidParameter("chain needs at least 2 states");
    if (min_window < 1) throw InvalidParameter("min_window must be >= 1");
    if (!(loss_rate >= 0.0)) throw InvalidParameter("loss rate must be >= 0");
    detail::check_beta(beta);

    TransitionMatrix t(n_states);
    for (std::int64_t i = 1; i < n_states; ++i) {
        const double p = loss_probability(static_cast<double>(min_window + i - 1), loss_rate);
        t.add(i, i + 1, 1.0 - p);
        t.add(i, loss_target(i, beta, n_states), p);
    }
    t.add(n_states, loss_target(n_states, beta, n_states), 1.0);
    return t;
}

/// Unit mass at index ceil(beta * N), clamped to [1, N].
inline StateDistribution initial_distribution(std::int64_t n_states, double beta, std::int64_t min_window = 1) {
    if (n_states < 2) throw InvalidParameter("chain needs at least 2 states");
    detail::check_beta(beta);
    StateDistribution v{std::vector<double>(static_cast<std::size_t>(n_states), 0.0), min_window};
    const auto j = detail::clamp_index(std::ceil(beta * static_cast<double>(n_states)), n_states);
    v.probs[static_cast<std::size_t>(j - 1)] = 1.0;
    return v;
}

/// out = v x T, O(N) scatter. Returns the mass before renormalization;
/// `out` is renormalized to sum to one.
inline double step_into(std::span<const double> v, const TransitionMatrix& t, std::vector<double>& out) {
    if (static_cast<std::int64_t>(v.size()) != t.n_states())
        throw InvalidParameter("distribution length " + std::to_string(v.size()) +
                               " does not match matrix size " + std::to_string(t.n_states()));
    out.assign(v.size(), 0.0);
    for (std::int64_t i = 1; i <= t.n_states(); ++i) {
        const double mass = v[static_cast<std::size_t>(i - 1)];
        if (mass == 0.0) continue;
        for (const auto& tr : t.row(i)) out[static_cast<std::size_t>(tr.target - 1)] += mass * tr.probability;
    }
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (!(total > 0.0)) throw InvalidState("distribution lost all mass");
    for (auto& p : out) p /= total;
    return total;
}

inline StateDistribution step_distribution(const StateDistribution& v, const TransitionMatrix& t) {
    StateDistribution next{{}, v.min_window};
    step_into(v.probs, t, next.probs);
    return next;
}

/// E[w] = v . S'
inline double expected_window(const StateDistribution& v) {
    double e = 0.0;
    for (std::size_t k = 0; k < v.probs.size(); ++k)
        e += v.probs[k] * static_cast<double>(v.min_window + static_cast<std::int64_t>(k));
    return e;
}

/// Agility factor from the expected window: lambda_max scaled by the
/// distance to W relative to the post-reduction gap W - beta*W, clamped
/// to [lambda_min, lambda_max].
inline double agility_factor_model(double expected_w, std::int64_t max_w, const CcaParams& params) {
    if (max_w <= 0) throw InvalidParameter("max window must be > 0");
    validate(params);
    const double w = static_cast<double>(max_w);
    const double ratio = (w - expected_w) / (w - params.beta * w);
    return std::clamp(params.lambda_max * ratio, params.lambda_min, params.lambda_max);
}

struct ModelOptions {
    std::int64_t iterations = 10000;
    // Stop once the sup-norm change between consecutive distributions drops
    // below `early_stop_tolerance`, but never before `early_stop_min_iterations`.
    bool early_stop = false;
    double early_stop_tolerance = 1e-12;
    std::int64_t early_stop_min_iterations = 4000;
};

struct ThroughputReport {
    double ath_kbps = 0.0;
    double normalized_ath = 0.0;  // ath_kbps / capacity_kbps
    std::int64_t iterations = 0;
    double mean_window = 0.0;     // E[w] after the last iteration
    double mean_lambda = 0.0;     // arithmetic mean of lambda(t)
    std::int64_t max_window = 0;
    std::int64_t n_states = 0;
};

/// Per-iteration observation handed to an optional observer.
struct IterationSample {
    std::int64_t t;
    double expected_window;
    double lambda;
    double mass_before_renorm;
    double mass;
};

struct NoObserver {
    void operator()(const IterationSample&) const {}
};

/// Average throughput over I transitions:
///   ATh = theta * sum_t E_t / lambda_t  /  sum_t RTT / lambda_t
/// with E_t the expected window after transition t and lambda_t the
/// agility factor computed from it. lambda_min = lambda_max = 1 gives NewReno.
template <class Observer = NoObserver>
ThroughputReport average_throughput(const NetworkConfig& config, const CcaParams& params,
                                    const ModelOptions& options = {}, Observer&& observe = {}) {
    validate(config);
    validate(params);
    if (options.iterations < 1) throw InvalidParameter("iterations must be >= 1");

    const std::int64_t w_max = max_window(config);
    const std::int64_t n = state_count(w_max, config.min_window);
    const TransitionMatrix t = build_transition_matrix(n, params.beta, config.loss_rate, config.min_window);

    StateDistribution v = initial_distribution(n, params.beta, config.min_window);
    std::vector<double> next;
    next.reserve(v.probs.size());

    double sent = 0.0;      // sum E_t / lambda_t
    double elapsed = 0.0;   // sum RTT / lambda_t
    double lambda_sum = 0.0;
    double e_w = 0.0;
    std::int64_t steps = 0;
    for (std::int64_t step = 1; step <= options.iterations; ++step) {
        const double raw_mass = step_into(v.probs, t, next);
        double change = 0.0;
        if (options.early_stop) {
            for (std::size_t k = 0; k < next.size(); ++k) change = std::max(change, std::abs(next[k] - v.probs[k]));
        }
        v.probs.swap(next);

        e_w = expected_window(v);
        const double lambda = agility_factor_model(e_w, w_max, params);
        sent += e_w / lambda;
        elapsed += config.rtt_s / lambda;
        lambda_sum += lambda;
        steps = step;
        observe(IterationSample{step, e_w, lambda, raw_mass, v.total()});

        if (options.early_stop && step >= options.early_stop_min_iterations &&
            change < options.early_stop_tolerance)
            break;
    }

    ThroughputReport r;
    r.ath_kbps = config.packet_size_kbits * sent / elapsed;
    r.normalized_ath = r.ath_kbps / config.capacity_kbps;
    r.iterations = steps;
    r.mean_window = e_w;
    r.mean_lambda = lambda_sum / static_cast<double>(steps);
    r.max_window = w_max;
    r.n_states = n;

    const double bound = config.packet_size_kbits * static_cast<double>(w_max) / config.rtt_s;
    if (r.ath_kbps > bound * (1.0 + 1e-12))
        throw InvalidState("average throughput " + std::to_string(r.ath_kbps) + " exceeds window bound " +
                           std::to_string(bound));
    return r;
}

}  // namespace agilesd
