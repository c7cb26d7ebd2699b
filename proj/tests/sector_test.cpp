#include "leedecay/sector.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "leedecay/errors.hpp"
#include "leedecay/spectral.hpp"

namespace leedecay {
namespace {

ModelParams benchmark() {
    ModelParams p;
    p.mu = 1.0;
    p.m_N = 10.0;
    p.m_V0 = 12.0;
    p.lambda0 = 0.2;
    p.cutoff = 5.0;
    return p;
}

MomentumGrid grid_for(const ModelParams& p, std::size_t n) { return make_grid(p, n, default_k_max(p)); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
    return t;
}

double fitted_width_error(std::size_t n) {
    const ModelParams p = benchmark();
    const MomentumGrid g = grid_for(p, n);
    const PoleResult pole = find_pole(p, g);
    const auto t = linspace(0.0, 2.0 / pole.Gamma, 801);
    const SurvivalRecord rec = evolve_survival(build_sector(p, g), t);
    const DecayFit fit = fit_exponential_decay(rec.times, rec.probability, 0.2 / pole.Gamma, 2.0 / pole.Gamma);
    return std::abs(fit.rate - pole.Gamma) / pole.Gamma;
}

TEST(BuildSector, ArrowheadLayout) {
    const ModelParams p = benchmark();
    const MomentumGrid g = grid_for(p, 16);
    const SectorHamiltonian H = build_sector(p, g);
    ASSERT_EQ(H.dim(), 17u);
    const Eigen::MatrixXd M = H.dense();
    EXPECT_EQ(M(0, 0), p.m_V0);
    EXPECT_EQ(H.band_edge, p.threshold());
    for (std::size_t i = 0; i < 16; ++i) {
        const double w = omega(g.k_values[i], p);
        EXPECT_EQ(M(i + 1, i + 1), p.m_N + w);
        EXPECT_DOUBLE_EQ(M(0, i + 1), p.lambda0 * form_factor(w, p) * std::sqrt(g.weights[i] / (2 * w)));
        EXPECT_EQ(M(i + 1, 0), M(0, i + 1));
        for (std::size_t j = 0; j < 16; ++j) {
            if (j != i) EXPECT_EQ(M(i + 1, j + 1), 0.0);
        }
    }
}

TEST(BuildSector, FreeTheoryIsDiagonal) {
    ModelParams p = benchmark();
    p.lambda0 = 0.0;
    const SectorHamiltonian H = build_sector(p, grid_for(p, 32));
    EXPECT_EQ(H.coupling_norm_sq(), 0.0);
    const Eigen::MatrixXd M = H.dense();
    EXPECT_EQ((M - Eigen::MatrixXd(M.diagonal().asDiagonal())).norm(), 0.0);
}

TEST(BuildSector, CouplingsLinearInLambda) {
    ModelParams p = benchmark(), q = benchmark();
    q.lambda0 = 2 * p.lambda0;
    const MomentumGrid g = grid_for(p, 64);
    const Eigen::MatrixXd a = build_sector(p, g).dense(), b = build_sector(q, g).dense();
    const auto off = [](const Eigen::MatrixXd& m) {
        return (m - Eigen::MatrixXd(m.diagonal().asDiagonal())).norm();
    };
    EXPECT_NEAR(off(b), 2 * off(a), 1e-15 * off(b));
}

TEST(DiagonalizeStable, TwoLevelClosedForm) {
    SectorHamiltonian H;
    H.hub_energy = 10.4;
    H.continuum = {11.3};
    H.couplings = {0.2};
    H.weights = {0.5};
    H.band_edge = 11.0;
    const StableState s = diagonalize_stable(H);
    const double mean = 0.5 * (10.4 + 11.3), half = 0.5 * (11.3 - 10.4);
    const double lower = mean - std::sqrt(half * half + 0.04);
    EXPECT_NEAR(s.m_V, lower, 1e-14);
    const double v1_over_v0 = 0.2 / (lower - 11.3);
    EXPECT_NEAR(s.Z_V_discrete, 1.0 / (1.0 + v1_over_v0 * v1_over_v0), 1e-14);
    EXPECT_GT(s.eigenvector(0), 0.0);
    EXPECT_NEAR(s.g[0], v1_over_v0 / std::sqrt(0.5), 1e-13);
}

TEST(DiagonalizeStable, FreeTheory) {
    ModelParams p = benchmark();
    p.m_V0 = 10.4;
    p.lambda0 = 0.0;
    const StableState s = diagonalize_stable(build_sector(p, grid_for(p, 64)));
    EXPECT_EQ(s.m_V, 10.4);
    EXPECT_EQ(s.Z_V_discrete, 1.0);
    for (double gi : s.g) EXPECT_EQ(gi, 0.0);
}

TEST(DiagonalizeStable, UnstableRegimeRejected) {
    const ModelParams p = benchmark();
    EXPECT_THROW(diagonalize_stable(build_sector(p, grid_for(p, 64))), RegimeError);
}

TEST(DiagonalizeStable, AgreesWithDispersiveRoot) {
    ModelParams p = benchmark();
    p.m_V0 = 10.4;
    p.lambda0 = 0.1;
    const MomentumGrid g = grid_for(p, 512);
    const StableState s = diagonalize_stable(build_sector(p, g));
    const PoleResult pole = find_pole(p, g);
    EXPECT_LT(std::abs(s.m_V - pole.m_V), 1e-4);
    // Same secular equation on the same grid: agreement is far tighter in practice.
    EXPECT_LT(std::abs(s.m_V - pole.m_V), 1e-9);
    EXPECT_NEAR(s.Z_V_discrete, pole.Z_V, 1e-8);
}

TEST(DiagonalizeStable, WeightsFollowBoundStateFormula) {
    ModelParams p = benchmark();
    p.m_V0 = 10.4;
    const MomentumGrid g = grid_for(p, 512);
    const StableState s = diagonalize_stable(build_sector(p, g));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.n_modes(); ++i) {
        const double w = omega(g.k_values[i], p);
        const double expected = p.lambda0 * form_factor(w, p) / std::sqrt(2 * w) / (s.m_V - p.m_N - w);
        worst = std::max(worst, std::abs(s.g[i] - expected) / std::abs(expected));
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Decompose, CompletenessOfOverlaps) {
    const ModelParams p = benchmark();
    const SectorSpectrum sp = decompose(build_sector(p, grid_for(p, 512)));
    EXPECT_NEAR(sp.v_weights.sum(), 1.0, 1e-12);
    EXPECT_GE(sp.v_weights.minCoeff(), 0.0);
}

TEST(EvolveSurvival, StartsAtOneAndStaysBounded) {
    const ModelParams p = benchmark();
    const auto t = linspace(0.0, 500.0, 1001);
    const SurvivalRecord rec = evolve_survival(build_sector(p, grid_for(p, 256)), t, 2);
    EXPECT_NEAR(std::abs(rec.amplitude[0] - std::complex<double>(1.0, 0.0)), 0.0, 1e-12);
    for (double prob : rec.probability) {
        EXPECT_GE(prob, 0.0);
        EXPECT_LE(prob, 1.0 + 1e-12);
    }
}

TEST(EvolveSurvival, FreeEvolutionIsAPhase) {
    ModelParams p = benchmark();
    p.lambda0 = 0.0;
    const auto t = linspace(0.0, 10.0, 11);
    const SurvivalRecord rec = evolve_survival(build_sector(p, grid_for(p, 32)), t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NEAR(rec.probability[i], 1.0, 1e-14);
        EXPECT_NEAR(std::abs(rec.amplitude[i] - std::polar(1.0, -p.m_V0 * t[i])), 0.0, 1e-12);
    }
}

TEST(EvolveSurvival, ThreadCountDoesNotChangeResult) {
    const ModelParams p = benchmark();
    const SectorHamiltonian H = build_sector(p, grid_for(p, 128));
    const auto t = linspace(0.0, 200.0, 333);
    const SurvivalRecord a = evolve_survival(H, t, 1), b = evolve_survival(H, t, 3);
    EXPECT_EQ(a.amplitude, b.amplitude);
}

TEST(EvolveSurvival, ZenoOnsetIsQuadratic) {
    const ModelParams p = benchmark();
    const MomentumGrid g = grid_for(p, 1024);
    const SectorHamiltonian H = build_sector(p, g);
    const double Gamma = find_pole(p, g).Gamma;
    const auto t = linspace(0.0, 0.01 / Gamma, 201);
    const SurvivalRecord rec = evolve_survival(H, t);
    // Ratio (1 - |c|^2) / t^2 tends to sum h^2 as t -> 0.
    const double small = (1.0 - rec.probability[2]) / (t[2] * t[2]);
    EXPECT_LT(std::abs(small / H.coupling_norm_sq() - 1.0), 1e-3);
    // Log-log slope across the window is 2, not the 1 of an exponential onset.
    const double slope = std::log((1.0 - rec.probability[20]) / (1.0 - rec.probability[2])) /
                         std::log(t[20] / t[2]);
    EXPECT_NEAR(slope, 2.0, 0.05);
}

TEST(EvolveSurvival, FittedWidthMatchesPole) {
    EXPECT_LT(fitted_width_error(1024), 0.05);
}

TEST(EvolveSurvival, FitErrorImprovesWithModes) {
    const double e128 = fitted_width_error(128), e256 = fitted_width_error(256);
    const double e512 = fitted_width_error(512), e1024 = fitted_width_error(1024);
    // Once the discretization error reaches the fit's own bias the sequence
    // flattens, so later steps are allowed a small absolute slack.
    const double slack = 5e-5;
    EXPECT_LE(e256, e128 + slack);
    EXPECT_LE(e512, e256 + slack);
    EXPECT_LE(e1024, e512 + slack);
    EXPECT_LT(e1024, e128);
}

TEST(FitExponentialDecay, RecoversSyntheticRate) {
    const auto t = linspace(0.0, 10.0, 101);
    std::vector<double> prob;
    for (double ti : t) prob.push_back(0.9 * std::exp(-0.37 * ti));
    const DecayFit fit = fit_exponential_decay(t, prob, 1.0, 8.0);
    EXPECT_NEAR(fit.rate, 0.37, 1e-12);
    EXPECT_NEAR(std::exp(fit.intercept), 0.9, 1e-12);
    EXPECT_EQ(fit.points, 71u);
}

TEST(Recurrence, TimeRoughlyDoublesWithModes) {
    const ModelParams p = benchmark();
    std::vector<double> times;
    for (std::size_t n : {128u, 256u, 512u}) {
        const MomentumGrid g = grid_for(p, n);
        const PoleResult pole = find_pole(p, g);
        RecurrenceOptions opt;
        opt.threshold = 0.5 * pole.Z_V * pole.Z_V;
        const auto r = recurrence_estimate(build_sector(p, g), pole.Gamma, opt);
        ASSERT_TRUE(r.has_value()) << n;
        EXPECT_GT(*r, 2.0 / pole.Gamma);
        times.push_back(*r);
    }
    EXPECT_NEAR(times[1] / times[0], 2.0, 0.3);
    EXPECT_NEAR(times[2] / times[1], 2.0, 0.3);
}

TEST(Recurrence, UnreachableThresholdGivesNothing) {
    const ModelParams p = benchmark();
    const MomentumGrid g = grid_for(p, 128);
    RecurrenceOptions opt;
    opt.threshold = 1.5;
    EXPECT_FALSE(recurrence_estimate(build_sector(p, g), find_pole(p, g).Gamma, opt).has_value());
}

TEST(Recurrence, RequiresDecayingRegime) {
    ModelParams p = benchmark();
    p.lambda0 = 0.0;
    EXPECT_THROW(recurrence_estimate(build_sector(p, grid_for(p, 64)), 0.0), RegimeError);
    ModelParams s = benchmark();
    s.m_V0 = 10.4;
    EXPECT_THROW(recurrence_estimate(build_sector(s, grid_for(s, 64)), 0.01), RegimeError);
}

}  // namespace
}  // namespace leedecay
