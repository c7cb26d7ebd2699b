#include "leedecay/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "leedecay/errors.hpp"

namespace leedecay {

void ModelParams::validate() const {
    if (!(mu > 0.0)) throw ConfigError("mu must be positive");
    if (!(m_N > 0.0)) throw ConfigError("m_N must be positive");
    if (!(lambda0 >= 0.0)) throw ConfigError("lambda0 must be non-negative");
    if (!(cutoff > mu)) throw ConfigError("cutoff must exceed mu");
    if (!std::isfinite(m_V0)) throw ConfigError("m_V0 must be finite");
}

double omega(double k, const ModelParams& params) noexcept {
    return std::sqrt(k * k + params.mu * params.mu);
}

double momentum_of(double w, const ModelParams& params) noexcept {
    if (w <= params.mu) return 0.0;
    return std::sqrt((w - params.mu) * (w + params.mu));
}

double form_factor(double w, const ModelParams& params) noexcept {
    switch (params.form_factor) {
        case FormFactorKind::SharpCutoff:
            return w <= params.cutoff ? 1.0 : 0.0;
        case FormFactorKind::Lorentzian: {
            const double c2 = params.cutoff * params.cutoff;
            return c2 / (w * w + c2);
        }
    }
    return 0.0;
}

double form_factor_derivative(double w, const ModelParams& params) noexcept {
    if (params.form_factor == FormFactorKind::SharpCutoff) return 0.0;
    const double c2 = params.cutoff * params.cutoff;
    const double den = w * w + c2;
    return -2.0 * c2 * w / (den * den);
}

MomentumGrid make_grid(const ModelParams& params, std::size_t n_modes, double k_max) {
    if (n_modes < 2) throw ConfigError("n_modes must be at least 2");
    if (!(k_max > 0.0) || !std::isfinite(k_max)) throw ConfigError("k_max must be positive");
    if (params.form_factor == FormFactorKind::SharpCutoff) {
        const double needed = momentum_of(params.cutoff, params);
        // Relative slack so that k_max = default_k_max() round-trips.
        if (k_max < needed * (1.0 - 1e-12)) {
            throw ConfigError("k_max = " + std::to_string(k_max) +
                              " does not cover the sharp cutoff (needs >= " +
                              std::to_string(needed) + ")");
        }
    }

    MomentumGrid grid;
    grid.spacing = k_max / static_cast<double>(n_modes);
    grid.k_max = k_max;
    grid.k_values.resize(n_modes);
    grid.weights.resize(n_modes);
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
    for (std::size_t i = 0; i < n_modes; ++i) {
        const double k = (static_cast<double>(i) + 0.5) * grid.spacing;
        grid.k_values[i] = k;
        grid.weights[i] = grid.spacing * k * k * norm;
    }
    return grid;
}

double default_k_max(const ModelParams& params) {
    if (params.form_factor == FormFactorKind::SharpCutoff) {
        return momentum_of(params.cutoff, params);
    }
    return 10.0 * params.cutoff;
}

}  // namespace leedecay
