#pragma once

#include <cstddef>
#include <vector>

namespace leedecay {

enum class FormFactorKind { SharpCutoff, Lorentzian };

// Bare Lee-model parameters. Natural units, mu = 1 sets the energy scale by
// default. lambda0 is dimensionless.
struct ModelParams {
    double m_V0 = 12.0;
    double m_N = 10.0;
    double mu = 1.0;
    double lambda0 = 0.2;
    FormFactorKind form_factor = FormFactorKind::SharpCutoff;
    double cutoff = 5.0;  // Lambda

    // Throws ConfigError unless mu > 0, m_N > 0, lambda0 >= 0, cutoff > mu.
    void validate() const;

    // Two-particle threshold m_N + mu.
    double threshold() const noexcept { return m_N + mu; }
};

// Boson dispersion sqrt(k^2 + mu^2).
double omega(double k, const ModelParams& params) noexcept;

// Momentum of a boson with energy w (inverse of omega); 0 for w <= mu.
double momentum_of(double w, const ModelParams& params) noexcept;

double form_factor(double w, const ModelParams& params) noexcept;

// d f / d omega. Zero for the sharp cutoff away from the edge.
double form_factor_derivative(double w, const ModelParams& params) noexcept;

// Uniform midpoint grid in |k| on [0, k_max]. weights[i] folds the radial
// measure: integral d^3k/(2 pi)^3 F(k) ~= sum_i weights[i] F(k_i).
struct MomentumGrid {
    std::vector<double> k_values;
    std::vector<double> weights;
    double spacing = 0.0;
    double k_max = 0.0;

    std::size_t n_modes() const noexcept { return k_values.size(); }
};

MomentumGrid make_grid(const ModelParams& params, std::size_t n_modes, double k_max);

// Smallest k_max that covers the form factor's support: sqrt(Lambda^2 - mu^2)
// for the sharp cutoff; 10 Lambda for the Lorentzian tail.
double default_k_max(const ModelParams& params);

}  // namespace leedecay
