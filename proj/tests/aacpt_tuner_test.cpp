#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "agilesd/aacpt_tuner.hpp"

using namespace agilesd;

TEST(OptimalLambdaFormula, Examples) {
    EXPECT_EQ(optimal_lambda_formula(0.5), 6);
    EXPECT_EQ(optimal_lambda_formula(0.9), 3);
    EXPECT_EQ(optimal_lambda_formula(0.95), 3);
    EXPECT_EQ(optimal_lambda_formula(0.13), 8);  // 8.91 - 0.91 is exactly 8
    EXPECT_THROW(optimal_lambda_formula(1.0), InvalidParameter);
}

TEST(FitOptimalLine, RecoversExactLine) {
    std::vector<double> b, l;
    for (double beta = 0.5; beta < 0.96; beta += 0.05) {
        b.push_back(beta);
        l.push_back(8.91 - 7 * beta);
    }
    const auto fit = fit_optimal_line(b, l);
    EXPECT_NEAR(fit.slope, -7.0, 1e-9);
    EXPECT_NEAR(fit.intercept, 8.91, 1e-9);
}

TEST(FitOptimalLine, TwoPointsAndConstant) {
    const std::vector<double> b{0.5, 0.9}, l{6, 3};
    const auto fit = fit_optimal_line(b, l);
    EXPECT_NEAR(fit.slope, -7.5, 1e-12);
    EXPECT_NEAR(fit.intercept, 9.75, 1e-12);

    const std::vector<double> b3{0.5, 0.6, 0.7}, c3{4, 4, 4};
    EXPECT_NEAR(fit_optimal_line(b3, c3).slope, 0.0, 1e-12);
}

TEST(FitOptimalLine, Errors) {
    const std::vector<double> one{0.5}, two_same{0.5, 0.5}, vals{1, 2};
    EXPECT_THROW(fit_optimal_line(one, one), InvalidParameter);
    EXPECT_THROW(fit_optimal_line(two_same, vals), InvalidParameter);
    EXPECT_THROW(fit_optimal_line(vals, one), InvalidParameter);
}

TEST(OptimalLambdaForRow, SmallestWithinTolerance) {
    const std::vector<double> lambdas{1, 2, 3, 4};
    EXPECT_EQ(optimal_lambda_for_row(std::vector<double>{0.5, 0.7, 0.8, 0.9}, lambdas), 4);
    EXPECT_EQ(optimal_lambda_for_row(std::vector<double>{0.5, 0.8995, 0.8999, 0.9}, lambdas), 2);
    EXPECT_EQ(optimal_lambda_for_row(std::vector<double>{0.5, 0.9, 0.9, 0.9}, lambdas), 2);
    EXPECT_EQ(optimal_lambda_for_row(std::vector<double>{0.9, 0.5, 0.9, 0.9}, lambdas), 1);
}

TEST(RunAacpt, SingleCandidateGridIsNewReno) {
    TuningGrid g;
    g.betas = {0.5, 0.7, 0.9};
    g.lambdas = {1};
    g.options.iterations = 2000;
    const auto r = run_aacpt(g);
    for (std::size_t i = 0; i < g.betas.size(); ++i) {
        EXPECT_EQ(r.lambda_opt[i], 1.0);
        EXPECT_EQ(r.at_matrix[i][0],
                  average_throughput(g.base_config, CcaParams::newreno(g.betas[i]), g.options).normalized_ath);
    }
}

TEST(RunAacpt, RowsAreIndependent) {
    TuningGrid g;
    g.betas = {0.5, 0.65, 0.8, 0.95};
    g.lambdas = {1, 2, 4, 8};
    g.options.iterations = 3000;
    const auto full = run_aacpt(g);

    // Evaluate each beta alone, last row first: same AT rows and same optimum.
    for (std::size_t k = g.betas.size(); k-- > 0;) {
        TuningGrid single = g;
        single.betas = {g.betas[k]};
        const auto r = run_aacpt(single, 1);
        EXPECT_EQ(r.at_matrix[0], full.at_matrix[k]);
        EXPECT_EQ(r.lambda_opt[0], full.lambda_opt[k]);
        EXPECT_EQ(full.lambda_opt[k], optimal_lambda_for_row(full.at_matrix[k], full.lambdas));
    }
    for (std::size_t i = 0; i < g.betas.size(); ++i)
        EXPECT_EQ(full.formula_lambda[i], optimal_lambda_formula(g.betas[i]));
}

TEST(RunAacpt, DefaultGridShapeAndTrends) {
    const TuningGrid g;
    const auto r = run_aacpt(g);
    ASSERT_EQ(r.at_matrix.size(), 10u);
    ASSERT_EQ(r.lambda_opt.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
        ASSERT_EQ(r.at_matrix[i].size(), 10u);
        for (std::size_t j = 1; j < 10; ++j) EXPECT_GE(r.at_matrix[i][j], r.at_matrix[i][j - 1] - 1e-6);
        EXPECT_NE(std::find(g.lambdas.begin(), g.lambdas.end(), r.lambda_opt[i]), g.lambdas.end());
        const double best = *std::max_element(r.at_matrix[i].begin(), r.at_matrix[i].end());
        const auto j_opt = static_cast<std::size_t>(r.lambda_opt[i]) - 1;
        EXPECT_LE(best - r.at_matrix[i][j_opt], 1e-3 * best);
        EXPECT_GT(r.at_matrix[i][j_opt], r.at_matrix[i][0]);
    }
}

TEST(RunAacpt, FittedLineReproducesOptimaUnderCeiling) {
    const TuningGrid g;
    const auto r = run_aacpt(g);
    const auto fit = fit_optimal_line(r.betas, r.lambda_opt);
    int hits = 0;
    for (std::size_t i = 0; i < r.betas.size(); ++i)
        hits += std::ceil(fit.intercept + fit.slope * r.betas[i]) == r.lambda_opt[i];
    EXPECT_GE(hits, 8) << "slope " << fit.slope << " intercept " << fit.intercept;
}

TEST(RunAacpt, RejectsInvalidGrids) {
    TuningGrid g;
    g.lambdas.clear();
    EXPECT_THROW(run_aacpt(g), InvalidParameter);
    g = TuningGrid{};
    g.betas.clear();
    EXPECT_THROW(run_aacpt(g), InvalidParameter);
    g = TuningGrid{};
    g.betas = {0.7, 0.5};
    EXPECT_THROW(run_aacpt(g), InvalidParameter);
    g = TuningGrid{};
    g.lambdas = {0.5, 2};
    EXPECT_THROW(run_aacpt(g), InvalidParameter);
}
