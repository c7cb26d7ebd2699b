#include "leedecay/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "leedecay/errors.hpp"
#include "quadrature_oracle.hpp"

namespace leedecay {
namespace {

ModelParams with_mu(double mu) {
    ModelParams p;
    p.mu = mu;
    return p;
}

TEST(Omega, Examples) {
    EXPECT_DOUBLE_EQ(omega(0.0, with_mu(1.0)), 1.0);
    EXPECT_DOUBLE_EQ(omega(3.0, with_mu(4.0)), 5.0);
    EXPECT_NEAR(omega(1.0, with_mu(1.0)), 1.41421356, 1e-8);
}

TEST(Omega, MonotoneAndBoundedBelowByMass) {
    const ModelParams p = with_mu(0.7);
    double prev = omega(0.0, p);
    EXPECT_EQ(prev, p.mu);
    for (int i = 1; i <= 1000; ++i) {
        const double w = omega(0.01 * i, p);
        EXPECT_GT(w, prev);
        EXPECT_GT(w, p.mu);
        prev = w;
    }
}

TEST(FormFactor, Examples) {
    ModelParams p;
    p.cutoff = 5.0;
    p.form_factor = FormFactorKind::SharpCutoff;
    EXPECT_EQ(form_factor(2.0, p), 1.0);
    EXPECT_EQ(form_factor(6.0, p), 0.0);
    p.form_factor = FormFactorKind::Lorentzian;
    EXPECT_DOUBLE_EQ(form_factor(5.0, p), 0.5);
}

TEST(FormFactor, RangeIsUnitInterval) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> w_dist(1.0, 100.0), c_dist(1.01, 50.0);
    for (int i = 0; i < 2000; ++i) {
        ModelParams p;
        p.cutoff = c_dist(rng);
        p.form_factor = (i % 2) ? FormFactorKind::Lorentzian : FormFactorKind::SharpCutoff;
        const double f = form_factor(w_dist(rng), p);
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
    }
}

TEST(ModelParams, Validation) {
    ModelParams p;
    EXPECT_NO_THROW(p.validate());
    p.mu = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ModelParams{};
    p.lambda0 = -0.1;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ModelParams{};
    p.cutoff = 0.5;
    EXPECT_THROW(p.validate(), ConfigError);
    p = ModelParams{};
    p.m_N = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(MakeGrid, TwoModeMidpointConstruction) {
    const ModelParams p = with_mu(1.0);
    ModelParams loose = p;
    loose.cutoff = 2.0;  // sqrt(3) < k_max = 2
    const MomentumGrid g = make_grid(loose, 2, 2.0);
    ASSERT_EQ(g.n_modes(), 2u);
    EXPECT_DOUBLE_EQ(g.k_values[0], 0.5);
    EXPECT_DOUBLE_EQ(g.k_values[1], 1.5);
    EXPECT_DOUBLE_EQ(g.spacing, 1.0);
    const double norm = 2.0 * std::numbers::pi * std::numbers::pi;
    EXPECT_DOUBLE_EQ(g.weights[0], 0.25 / norm);
    EXPECT_DOUBLE_EQ(g.weights[1], 2.25 / norm);
}

TEST(MakeGrid, RejectsBadSizes) {
    const ModelParams p;
    EXPECT_THROW(make_grid(p, 1, 8.0), ConfigError);
    EXPECT_THROW(make_grid(p, 16, 0.0), ConfigError);
    EXPECT_THROW(make_grid(p, 16, -1.0), ConfigError);
}

TEST(MakeGrid, SharpCutoffMustBeCovered) {
    ModelParams p;  // Lambda = 5, mu = 1 -> needs k_max >= sqrt(24)
    EXPECT_THROW(make_grid(p, 16, 4.0), ConfigError);
    EXPECT_NO_THROW(make_grid(p, 16, default_k_max(p)));
    EXPECT_NEAR(default_k_max(p), std::sqrt(24.0), 1e-15);
}

TEST(MakeGrid, StrictlyIncreasingPositive) {
    const MomentumGrid g = make_grid(ModelParams{}, 300, 7.5);
    for (std::size_t i = 0; i < g.n_modes(); ++i) {
        EXPECT_GT(g.k_values[i], 0.0);
        EXPECT_GT(g.weights[i], 0.0);
        if (i > 0) EXPECT_GT(g.k_values[i], g.k_values[i - 1]);
    }
    EXPECT_EQ(make_grid(ModelParams{}, 300, 7.5).k_values, g.k_values);
}

TEST(MakeGrid, GaussianMeasureMatchesClosedForm) {
    const MomentumGrid g = make_grid(ModelParams{}, 512, 8.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.n_modes(); ++i) sum += g.weights[i] * std::exp(-g.k_values[i] * g.k_values[i]);
    const double exact = std::sqrt(std::numbers::pi) / 4.0 / (2.0 * std::numbers::pi * std::numbers::pi);
    EXPECT_LT(std::abs(sum - exact) / exact, 1e-6);
}

double poly_gauss(double k, void*) { return (1.0 + k + 0.5 * k * k * k) * std::exp(-k * k); }

TEST(MakeGrid, ConvergesAtLeastSecondOrder) {
    const double k_max = 6.0;
    const double exact = oracle::radial_integral(&poly_gauss, nullptr, k_max);
    auto error = [&](std::size_t n) {
        const MomentumGrid g = make_grid(ModelParams{}, n, k_max);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += g.weights[i] * poly_gauss(g.k_values[i], nullptr);
        return std::abs(s - exact);
    };
    const double e1 = error(16), e2 = error(32), e3 = error(64);
    EXPECT_GE(std::log2(e1 / e2), 1.9);
    EXPECT_GE(std::log2(e2 / e3), 1.9);
}

}  // namespace
}  // namespace leedecay
