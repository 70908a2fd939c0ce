#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "agilesd/flow_simulator.hpp"
#include "agilesd/markov_model.hpp"

using namespace agilesd;

namespace {

EpochRecord epoch_of(std::vector<CycleRecord> cycles, EpochEnd end = EpochEnd::congestion_loss) {
    EpochRecord e;
    e.cycles = std::move(cycles);
    e.end_cause = end;
    return e;
}

CycleRecord cycle(double w, double lambda, double rtt = 0.01) {
    return {w, lambda, rtt / lambda, std::floor(w) / lambda};
}

bool same_report(const SimReport& a, const SimReport& b) {
    if (a.tatr_kbps != b.tatr_kbps || a.duration_s != b.duration_s || a.epochs.size() != b.epochs.size() ||
        a.loss_counts.random != b.loss_counts.random || a.loss_counts.congestion != b.loss_counts.congestion)
        return false;
    for (std::size_t e = 0; e < a.epochs.size(); ++e) {
        const auto &x = a.epochs[e], &y = b.epochs[e];
        if (x.end_cause != y.end_cause || x.cycles.size() != y.cycles.size()) return false;
        for (std::size_t i = 0; i < x.cycles.size(); ++i)
            if (x.cycles[i].w != y.cycles[i].w || x.cycles[i].lambda != y.cycles[i].lambda ||
                x.cycles[i].duration_s != y.cycles[i].duration_s ||
                x.cycles[i].packets_sent != y.cycles[i].packets_sent)
                return false;
    }
    return true;
}

}  // namespace

TEST(WindowGrowth, NewReno) {
    EXPECT_DOUBLE_EQ(next_window_newreno(1), 2.0);
    EXPECT_DOUBLE_EQ(next_window_newreno(10), 10.1);
    // w ACKs at a fixed window make one RTT: +1.
    const double w = 37;
    double acc = w;
    for (int k = 0; k < 37; ++k) acc += next_window_newreno(w) - w;
    EXPECT_NEAR(acc, w + 1, 1e-12);
    EXPECT_THROW(next_window_newreno(0.5), InvalidParameter);
}

TEST(WindowGrowth, Agile) {
    EXPECT_EQ(next_window_agile(10, 1), next_window_newreno(10));
    EXPECT_DOUBLE_EQ(next_window_agile(10, 5), 10.5);
    for (double w : {1.0, 2.5, 77.0, 1254.0}) EXPECT_EQ(next_window_agile(w, 1), next_window_newreno(w));
    EXPECT_THROW(next_window_agile(10, 0.5), InvalidParameter);
}

TEST(AgilityFactorAfm, Examples) {
    const auto p = CcaParams::agile(0.5, 5);
    EXPECT_DOUBLE_EQ(agility_factor_afm(1000, 500, 500, p), 5.0);
    EXPECT_DOUBLE_EQ(agility_factor_afm(1000, 500, 1000, p), 1.0);
    EXPECT_DOUBLE_EQ(agility_factor_afm(1000, 500, 1200, p), 1.0);
    EXPECT_DOUBLE_EQ(agility_factor_afm(1000, 500, 750, p), 2.5);
    EXPECT_THROW(agility_factor_afm(500, 500, 500, p), InvalidState);
}

TEST(EpochRates, EpochAverageRate) {
    EXPECT_DOUBLE_EQ(epoch_average_rate(epoch_of({cycle(10, 2)}), 8), 8000.0);
    EXPECT_NEAR(epoch_average_rate(epoch_of({cycle(4, 2), cycle(5, 1)}), 8), 8.0 * 7 / 0.015, 1e-9);
    EXPECT_NEAR(epoch_average_rate(epoch_of({cycle(4, 2), cycle(5, 1)}), 8), 3733.3333333333, 1e-6);
    // All lambda = 1: theta * mean(floor w) / RTT.
    EXPECT_NEAR(epoch_average_rate(epoch_of({cycle(3.5, 1), cycle(4.5, 1), cycle(5.5, 1)}), 8), 8 * 4 / 0.01, 1e-9);
    EXPECT_THROW(epoch_average_rate(EpochRecord{}, 8), InvalidParameter);
}

TEST(EpochRates, TotalAverageRate) {
    const auto a = epoch_of({cycle(10, 2), cycle(11, 1.5), cycle(12, 1)});
    const auto b = epoch_of({cycle(4, 1), cycle(5, 1)});
    std::vector<EpochRecord> one{a};
    EXPECT_DOUBLE_EQ(total_average_rate(one, 8), epoch_average_rate(a, 8));
    std::vector<EpochRecord> twice{a, a};
    EXPECT_NEAR(total_average_rate(twice, 8), epoch_average_rate(a, 8), 1e-9);

    std::vector<EpochRecord> mixed{a, b};
    const double ra = epoch_average_rate(a, 8), rb = epoch_average_rate(b, 8);
    const double total = total_average_rate(mixed, 8);
    EXPECT_GT(total, std::min(ra, rb));
    EXPECT_LT(total, std::max(ra, rb));
    const double longer = a.duration_s() > b.duration_s() ? ra : rb;
    const double shorter = longer == ra ? rb : ra;
    EXPECT_LT(std::abs(total - longer), std::abs(total - shorter));
    EXPECT_THROW(total_average_rate(std::vector<EpochRecord>{}, 8), InvalidParameter);
}

TEST(RunFlow, NewRenoSawtoothEvenWindow) {
    NetworkConfig c;  // W = 1254
    c.loss_rate = 0;
    const auto r = run_flow(c, CcaParams::newreno(0.5), 100, 1);
    ASSERT_GT(r.epochs.size(), 3u);
    EXPECT_EQ(r.loss_counts.random, 0);
    // cwnd runs 627, 628, ..., 1254: W(1 - beta) increments, W(1 - beta) + 1 cycles.
    for (std::size_t e = 0; e + 1 < r.epochs.size(); ++e) {
        EXPECT_EQ(r.epochs[e].end_cause, EpochEnd::congestion_loss);
        EXPECT_EQ(r.epochs[e].cycles.size(), 628u);
        EXPECT_EQ(r.epochs[e].cycles.front().w, 627.0);
        EXPECT_EQ(r.epochs[e].cycles.back().w, 1254.0);
    }
    EXPECT_EQ(r.epochs.back().end_cause, EpochEnd::simulation_end);
}

TEST(RunFlow, NewRenoSawtoothOddWindow) {
    NetworkConfig c;
    c.buffer_packets = 5;  // W = 1255
    c.loss_rate = 0;
    const auto r = run_flow(c, CcaParams::newreno(0.5), 100, 1);
    // Start at floor(627.5) = 627 and climb to 1255.
    const std::size_t k = 1255 - 627 + 1;
    for (std::size_t e = 1; e + 1 < r.epochs.size(); ++e) EXPECT_EQ(r.epochs[e].cycles.size(), k);
}

TEST(RunFlow, NewRenoEquivalence) {
    NetworkConfig c;
    c.loss_rate = 1e-6;
    const auto a = run_flow(c, CcaParams{0.5, 1, 1}, 30, 7);
    const auto b = run_flow(c, CcaParams::newreno(0.5), 30, 7);
    EXPECT_TRUE(same_report(a, b));
    for (const auto& e : a.epochs)
        for (const auto& cy : e.cycles) {
            EXPECT_EQ(cy.lambda, 1.0);
            EXPECT_EQ(cy.duration_s, c.rtt_s);
        }
}

TEST(RunFlow, AgileShortensEpochs) {
    NetworkConfig c;
    c.loss_rate = 0;
    const auto agile = run_flow(c, CcaParams::agile(0.5, 5), 100, 1);
    const auto reno = run_flow(c, CcaParams::newreno(0.5), 100, 1);
    EXPECT_LT(agile.mean_epoch_duration_s, reno.mean_epoch_duration_s);
    EXPECT_GT(agile.tatr_kbps, reno.tatr_kbps);
}

TEST(RunFlow, Deterministic) {
    NetworkConfig c;
    c.loss_rate = 1e-5;
    const auto p = CcaParams::agile(0.5, 5);
    EXPECT_TRUE(same_report(run_flow(c, p, 20, 42), run_flow(c, p, 20, 42)));
    EXPECT_FALSE(same_report(run_flow(c, p, 20, 42), run_flow(c, p, 20, 43)));
}

TEST(RunFlow, TraceInvariants) {
    NetworkConfig c;
    c.loss_rate = 2e-5;
    const auto p = CcaParams::agile(0.5, 5);
    const auto r = run_flow(c, p, 50, 3);
    const double W = static_cast<double>(max_window(c));

    double time = 0.0, packets = 0.0, longest = 0.0;
    for (const auto& e : r.epochs) {
        for (std::size_t i = 0; i < e.cycles.size(); ++i) {
            const auto& cy = e.cycles[i];
            EXPECT_GE(cy.w, static_cast<double>(c.min_window));
            EXPECT_LE(cy.w, W);
            EXPECT_GE(cy.lambda, p.lambda_min);
            EXPECT_LE(cy.lambda, p.lambda_max);
            EXPECT_DOUBLE_EQ(cy.duration_s, c.rtt_s / cy.lambda);
            EXPECT_DOUBLE_EQ(cy.packets_sent, std::floor(cy.w) / cy.lambda);
            if (i > 0) {
                EXPECT_EQ(cy.w, e.cycles[i - 1].w + 1.0);
                EXPECT_LE(cy.lambda, e.cycles[i - 1].lambda);  // decays within an epoch
            }
            time += cy.duration_s;
            packets += cy.packets_sent;
            longest = std::max(longest, cy.duration_s);
        }
    }
    EXPECT_NEAR(time, r.duration_s, 1e-9);
    EXPECT_LE(50 - r.duration_s, longest);
    EXPECT_GE(50 - r.duration_s, 0.0);
    const double recomputed = c.packet_size_kbits * packets / time;
    EXPECT_NEAR(recomputed, r.tatr_kbps, 1e-9 * r.tatr_kbps);
    EXPECT_EQ(static_cast<std::int64_t>(r.epochs.size()) - 1, r.loss_counts.random + r.loss_counts.congestion);
}

TEST(RunFlow, EpochStartFollowsReduction) {
    NetworkConfig c;
    c.loss_rate = 5e-5;
    const auto p = CcaParams::agile(0.7, 4);
    const auto r = run_flow(c, p, 30, 11);
    ASSERT_GT(r.epochs.size(), 2u);
    for (std::size_t e = 1; e < r.epochs.size(); ++e) {
        const double peak = r.epochs[e - 1].cycles.back().w;
        EXPECT_EQ(r.epochs[e].cycles.front().w, std::max(std::floor(p.beta * peak), static_cast<double>(c.min_window)));
        EXPECT_EQ(r.epochs[e].cycles.front().lambda, p.lambda_max);
    }
}

TEST(RunFlow, LossRateMatchesBernoulli) {
    // Random losses per packet sent should estimate R.
    NetworkConfig c;
    c.loss_rate = 1e-4;
    const auto r = run_flow(c, CcaParams::newreno(0.5), 100, 5);
    double packets = 0;
    for (const auto& e : r.epochs)
        for (const auto& cy : e.cycles) packets += cy.packets_sent;
    const double expected = packets * c.loss_rate;
    EXPECT_NEAR(static_cast<double>(r.loss_counts.random), expected, 5 * std::sqrt(expected));
}

TEST(RunFlow, SurvivesLossAtMinimumWindow) {
    NetworkConfig c;
    c.capacity_kbps = 800;  // W = 1 + b
    c.buffer_packets = 4;
    c.loss_rate = 0.3;
    const auto r = run_flow(c, CcaParams::agile(0.5, 5), 5, 9);
    EXPECT_GT(r.loss_counts.random, 0);
    for (const auto& e : r.epochs)
        for (const auto& cy : e.cycles) EXPECT_GE(cy.w, 2.0);
}

TEST(RunFlow, RejectsBadInput) {
    NetworkConfig c;
    EXPECT_THROW(run_flow(c, CcaParams{}, 0.0, 1), InvalidParameter);
    EXPECT_THROW(run_flow(c, CcaParams::agile(0.5, 5), 0.001, 1), InvalidParameter);  // first cycle is 2 ms
    c.loss_rate = 1.5;
    EXPECT_THROW(run_flow(c, CcaParams{}, 10, 1), InvalidParameter);
}

TEST(RunFlow, AgreesWithModelOnReferencePoint) {
    NetworkConfig c;  // b = 4, PER = 1e-8
    const auto p = CcaParams::agile(0.5, 5);
    double sum = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) sum += run_flow(c, p, 100, seed).normalized;
    const double sim = sum / 10;
    const double model = average_throughput(c, p).normalized_ath;
    EXPECT_LE(std::abs(sim - model) / model, 0.15);
}
