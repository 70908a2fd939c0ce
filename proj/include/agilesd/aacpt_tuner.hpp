#pragma once

// Automated configuration of lambda_max (lambda') for a given beta:
// exhaustive grid search over (beta, lambda') with the Markov model as the
// evaluator, plus the closed-form rule and a least-squares trend line.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agilesd/errors.hpp"
#include "agilesd/markov_model.hpp"
#include "agilesd/network_config.hpp"
#include "agilesd/parallel.hpp"

namespace agilesd {

struct TuningGrid {
    std::vector<double> betas{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    std::vector<double> lambdas{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    NetworkConfig base_config{};  // b = 4, R = 1e-8 on the 1 Gbps / 10 ms link
    ModelOptions options{};
};

struct TuningResult {
    std::vector<double> betas;
    std::vector<double> lambdas;
    std::vector<std::vector<double>> at_matrix;  // [beta][lambda] normalized ATh
    std::vector<double> lambda_opt;
    std::vector<int> formula_lambda;
};

struct LineFit {
    double slope;
    double intercept;
};

/// Relative tolerance under which two throughputs count as the same maximum.
inline constexpr double kOptimumTolerance = 1e-3;

inline void validate(const TuningGrid& g) {
    if (g.betas.empty()) throw InvalidParameter("tuning grid has no beta values");
    if (g.lambdas.empty()) throw InvalidParameter("tuning grid has no lambda values");
    for (std::size_t i = 0; i < g.betas.size(); ++i) {
        if (!(g.betas[i] > 0.0 && g.betas[i] < 1.0)) throw InvalidParameter("grid beta outside (0, 1)");
        if (i > 0 && !(g.betas[i] > g.betas[i - 1])) throw InvalidParameter("grid betas must be strictly increasing");
    }
    for (std::size_t j = 0; j < g.lambdas.size(); ++j) {
        if (!(g.lambdas[j] >= 1.0)) throw InvalidParameter("grid lambda below 1");
        if (j > 0 && !(g.lambdas[j] > g.lambdas[j - 1]))
            throw InvalidParameter("grid lambdas must be strictly increasing");
    }
    validate(g.base_config);
}

/// lambda'_opt = ceil(8.91 - 7 beta). The 1e-9 guard keeps exact integers
/// from rounding up through representation error.
inline int optimal_lambda_formula(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw InvalidParameter("beta must lie in (0, 1)");
    return static_cast<int>(std::ceil(8.91 - 7.0 * beta - 1e-9));
}

/// Smallest lambda whose throughput is within `tolerance` (relative) of the
/// row maximum: the least aggressive setting that still reaches the peak.
inline double optimal_lambda_for_row(std::span<const double> row, std::span<const double> lambdas,
                                     double tolerance = kOptimumTolerance) {
    if (row.empty() || row.size() != lambdas.size()) throw InvalidParameter("row and lambda grid disagree in size");
    const double best = *std::max_element(row.begin(), row.end());
    for (std::size_t j = 0; j < row.size(); ++j)
        if (best - row[j] <= tolerance * std::abs(best)) return lambdas[j];
    return lambdas.back();
}

inline TuningResult run_aacpt(const TuningGrid& grid, unsigned threads = 0) {
    validate(grid);
    const std::size_t m = grid.betas.size();
    const std::size_t n = grid.lambdas.size();

    TuningResult r;
    r.betas = grid.betas;
    r.lambdas = grid.lambdas;
    r.at_matrix.assign(m, std::vector<double>(n, 0.0));

    parallel_for(
        m * n,
        [&](std::size_t cell) {
            const std::size_t i = cell / n, j = cell % n;
            const auto params = CcaParams::agile(grid.betas[i], grid.lambdas[j]);
            r.at_matrix[i][j] = average_throughput(grid.base_config, params, grid.options).normalized_ath;
        },
        threads);

    // Each beta row is judged against its own maximum.
    r.lambda_opt.reserve(m);
    r.formula_lambda.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        r.lambda_opt.push_back(optimal_lambda_for_row(r.at_matrix[i], r.lambdas));
        r.formula_lambda.push_back(optimal_lambda_formula(r.betas[i]));
    }
    return r;
}

/// Ordinary least-squares line through (beta_i, lambda_opt_i).
inline LineFit fit_optimal_line(std::span<const double> betas, std::span<const double> lambda_opts) {
    if (betas.size() != lambda_opts.size()) throw InvalidParameter("fit inputs differ in length");
    if (betas.size() < 2) throw InvalidParameter("line fit needs at least two points");
    const double k = static_cast<double>(betas.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        mx += betas[i];
        my += lambda_opts[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        sxx += (betas[i] - mx) * (betas[i] - mx);
        sxy += (betas[i] - mx) * (lambda_opts[i] - my);
    }
    if (!(sxx > 0.0)) throw InvalidParameter("line fit needs at least two distinct betas");
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

}  // namespace agilesd
