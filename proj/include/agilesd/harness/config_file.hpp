#pragma once

// Flat `key = value` run configuration. Lists are comma separated, `#`
// starts a comment. Every key is optional; omitted keys take the reference
// model settings (1 Gbps, 10 ms, 1000-byte packets, b = 4, R = 1e-8,
// w_min = 2, I = 10000, beta = 0.5, lambda in [1, 5]).

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "agilesd/aacpt_tuner.hpp"
#include "agilesd/markov_model.hpp"
#include "agilesd/network_config.hpp"

namespace agilesd::harness {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class SweepVariable { buffer, loss_rate, rtt, lambda_max, beta };
enum class SweepMode { model, simulate, both };

inline std::string_view to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::buffer: return "buffer";
        case SweepVariable::loss_rate: return "loss_rate";
        case SweepVariable::rtt: return "rtt";
        case SweepVariable::lambda_max: return "lambda_max";
        case SweepVariable::beta: return "beta";
    }
    return "?";
}

inline std::string_view to_string(SweepMode m) {
    switch (m) {
        case SweepMode::model: return "model";
        case SweepMode::simulate: return "simulate";
        case SweepMode::both: return "both";
    }
    return "?";
}

inline std::vector<std::uint64_t> default_seeds() {
    std::vector<std::uint64_t> s(10);
    std::iota(s.begin(), s.end(), std::uint64_t{1});
    return s;
}

struct SweepSpec {
    std::optional<SweepVariable> variable;
    std::vector<double> values;  // rtt values are in milliseconds
    NetworkConfig base_config{};
    CcaParams base_params{};
    SweepMode mode = SweepMode::model;
    std::vector<std::uint64_t> seeds = default_seeds();
    double duration_s = 100.0;
    ModelOptions model{};
};

struct RunConfig {
    NetworkConfig network{};
    CcaParams params{};
    ModelOptions model{};
    SweepSpec sweep{};
    TuningGrid tuning{};
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
    return v;
}

inline std::int64_t parse_integer(const std::string& key, std::string_view text) {
    text = trim(text);
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
    return v;
}

template <class Parse>
auto parse_list(const std::string& key, std::string_view text, Parse&& parse) {
    std::vector<decltype(parse(key, text))> out;
    if (trim(text).empty()) throw ConfigError(key, "empty list");
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.push_back(parse(key, item));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key, what);
}

}  // namespace detail

/// Parses configuration text. Throws ConfigError naming the offending key.
inline RunConfig parse_config(std::string_view text) {
    using namespace detail;

    std::map<std::string, std::string, std::less<>> kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        if (!kv.emplace(key, std::string(trim(line.substr(eq + 1)))).second)
            throw ConfigError(key, "duplicate key");
    }

    RunConfig rc;
    auto& net = rc.network;
    auto& cca = rc.params;
    auto& sw = rc.sweep;
    std::optional<std::vector<double>> sweep_values;

    for (const auto& [key, value] : kv) {
        if (key == "capacity_kbps") {
            net.capacity_kbps = parse_real(key, value);
            require(net.capacity_kbps > 0, key, "must be > 0");
        } else if (key == "rtt_ms") {
            const double ms = parse_real(key, value);
            require(ms > 0, key, "must be > 0");
            net.rtt_s = ms / 1000.0;
        } else if (key == "packet_size_bytes") {
            const double bytes = parse_real(key, value);
            require(bytes > 0, key, "must be > 0");
            net.packet_size_kbits = bytes * 8.0 / 1000.0;
        } else if (key == "buffer_packets") {
            net.buffer_packets = parse_integer(key, value);
            require(net.buffer_packets >= 0, key, "must be >= 0");
        } else if (key == "loss_rate") {
            net.loss_rate = parse_real(key, value);
            require(net.loss_rate >= 0 && net.loss_rate <= 1, key, "must lie in [0, 1]");
        } else if (key == "min_window") {
            net.min_window = parse_integer(key, value);
            require(net.min_window >= 1, key, "must be >= 1");
        } else if (key == "beta") {
            cca.beta = parse_real(key, value);
            require(cca.beta > 0 && cca.beta < 1, key, "must lie in (0, 1)");
        } else if (key == "lambda_min") {
            cca.lambda_min = parse_real(key, value);
            require(cca.lambda_min >= 1, key, "must be >= 1");
        } else if (key == "lambda_max") {
            cca.lambda_max = parse_real(key, value);
            require(cca.lambda_max >= 1, key, "must be >= 1");
        } else if (key == "iterations") {
            rc.model.iterations = parse_integer(key, value);
            require(rc.model.iterations >= 1, key, "must be >= 1");
        } else if (key == "sweep_variable") {
            if (value == "buffer") sw.variable = SweepVariable::buffer;
            else if (value == "loss_rate") sw.variable = SweepVariable::loss_rate;
            else if (value == "rtt") sw.variable = SweepVariable::rtt;
            else if (value == "lambda_max") sw.variable = SweepVariable::lambda_max;
            else if (value == "beta") sw.variable = SweepVariable::beta;
            else throw ConfigError(key, "unknown sweep variable '" + value + "'");
        } else if (key == "sweep_values") {
            sweep_values = parse_list(key, value, parse_real);
        } else if (key == "mode") {
            if (value == "model") sw.mode = SweepMode::model;
            else if (value == "simulate") sw.mode = SweepMode::simulate;
            else if (value == "both") sw.mode = SweepMode::both;
            else throw ConfigError(key, "expected model, simulate or both");
        } else if (key == "seeds") {
            sw.seeds.clear();
            for (auto s : parse_list(key, value, parse_integer)) {
                require(s >= 0, key, "seeds must be non-negative");
                sw.seeds.push_back(static_cast<std::uint64_t>(s));
            }
        } else if (key == "duration_s") {
            sw.duration_s = parse_real(key, value);
            require(sw.duration_s > 0, key, "must be > 0");
        } else if (key == "betas") {
            rc.tuning.betas = parse_list(key, value, parse_real);
        } else if (key == "lambdas") {
            rc.tuning.lambdas = parse_list(key, value, parse_real);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }

    require(cca.lambda_max >= cca.lambda_min, "lambda_max", "must be >= lambda_min");
    const auto w = max_window(net);
    require(w > net.min_window, "min_window",
            "must be below the maximum window " + std::to_string(w));

    if (sw.variable) {
        require(sweep_values.has_value(), "sweep_values", "required when sweep_variable is set");
        sw.values = *sweep_values;
        for (double v : sw.values) {
            switch (*sw.variable) {
                case SweepVariable::buffer:
                    require(v >= 0 && v == std::floor(v), "sweep_values", "buffer sizes must be non-negative integers");
                    break;
                case SweepVariable::loss_rate:
                    require(v >= 0 && v <= 1, "sweep_values", "loss rates must lie in [0, 1]");
                    break;
                case SweepVariable::rtt: require(v > 0, "sweep_values", "RTTs must be > 0 ms"); break;
                case SweepVariable::lambda_max:
                    require(v >= cca.lambda_min, "sweep_values", "lambda_max values must be >= lambda_min");
                    break;
                case SweepVariable::beta: require(v > 0 && v < 1, "sweep_values", "betas must lie in (0, 1)"); break;
            }
        }
    } else if (sweep_values) {
        throw ConfigError("sweep_variable", "required when sweep_values is set");
    }

    try {
        TuningGrid probe = rc.tuning;
        probe.base_config = net;
        validate(probe);
    } catch (const InvalidParameter& e) {
        throw ConfigError("betas/lambdas", e.what());
    }

    sw.base_config = net;
    sw.base_params = cca;
    sw.model = rc.model;
    rc.tuning.base_config = net;
    rc.tuning.options = rc.model;
    return rc;
}

}  // namespace agilesd::harness
