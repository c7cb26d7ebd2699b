#include "leedecay/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "leedecay/errors.hpp"
#include "leedecay/parallel.hpp"

namespace leedecay {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxNewtonIterations = 200;

// Spectral function per unit boson energy without the lambda0^2 factor:
// g(w) = k(w) f(w)^2 / (4 pi^2), so that Im Sigma = pi lambda0^2 g(E - m_N).
double reduced_density(double w, const ModelParams& params) noexcept {
    if (w <= params.mu) return 0.0;
    const double f = form_factor(w, params);
    return momentum_of(w, params) * f * f / (4.0 * kPi * kPi);
}

double reduced_density_derivative(double w, const ModelParams& params) noexcept {
    if (w <= params.mu) return 0.0;
    const double k = momentum_of(w, params);
    const double f = form_factor(w, params);
    const double df = form_factor_derivative(w, params);
    return (2.0 * f * df * k + f * f * w / k) / (4.0 * kPi * kPi);
}

// lambda0-free real part of Sigma at boson energy x = E - m_N. On the grid the
// measure d^3k/(2pi)^3 becomes sum_i c_i dw with c_i = dk k_i / w_i, and the
// integrand c_i g(w_i) / (w_i - x).
double reduced_real_part(double x, const ModelParams& params, const MomentumGrid& grid) {
    const double w_max = omega(grid.k_max, params);
    const double gx = reduced_density(x, params);
    const double edge_tol = 1e-9 * w_max;

    const bool singular_inside = gx != 0.0 && x > params.mu;
    if (singular_inside && x > w_max + edge_tol) {
        throw CoverageError("principal-value point E - m_N = " + std::to_string(x) +
                            " lies beyond the grid edge " + std::to_string(w_max));
    }
    if (singular_inside && std::abs(x - w_max) <= edge_tol) {
        throw CoverageError("principal-value point coincides with the grid edge; the "
                            "sharp-cutoff logarithm diverges there");
    }

    double sum = 0.0;
    if (!singular_inside || x > w_max) {
        for (std::size_t i = 0; i < grid.n_modes(); ++i) {
            const double k = grid.k_values[i];
            const double w = omega(k, params);
            const double gi = reduced_density(w, params);
            if (gi == 0.0) continue;
            sum += grid.spacing * k / w * gi / (w - x);
        }
        return sum;
    }

    // P int g(w)/(w - x) dw = int [g(w) - g(x)]/(w - x) dw + g(x) ln|(w_max - x)/(x - mu)|
    const double gpx = reduced_density_derivative(x, params);
    for (std::size_t i = 0; i < grid.n_modes(); ++i) {
        const double k = grid.k_values[i];
        const double w = omega(k, params);
        const double c = grid.spacing * k / w;
        const double dw = w - x;
        if (std::abs(dw) <= 1e-10 * std::max(1.0, x)) {
            sum += c * gpx;
        } else {
            sum += c * (reduced_density(w, params) - gx) / dw;
        }
    }
    return sum + gx * std::log((w_max - x) / (x - params.mu));
}

struct MassSolution {
    double m_V;
    int iterations;
};

MassSolution solve_mass(const ModelParams& params, const MomentumGrid& grid) {
    auto residual = [&](double m) {
        return m - params.m_V0 + renorm_constants(params, grid, m).C0;
    };
    double m = params.m_V0;
    double d = residual(m);
    for (int it = 0; it < kMaxNewtonIterations; ++it) {
        if (std::abs(d) < 1e-10 * std::max(1.0, std::abs(m))) return {m, it};
        double slope = 1.0 + renorm_constants(params, grid, m).C1;
        if (!(slope > 0.0) || !std::isfinite(slope)) slope = 1.0;
        double step = -d / slope;
        double m_next = m + step;
        double d_next = residual(m_next);
        // Damp by 0.5 while the step overshoots.
        for (int halvings = 0; halvings < 30 && std::abs(d_next) > std::abs(d); ++halvings) {
            step *= 0.5;
            m_next = m + step;
            d_next = residual(m_next);
        }
        m = m_next;
        d = d_next;
    }
    if (std::abs(d) < 1e-10 * std::max(1.0, std::abs(m))) return {m, kMaxNewtonIterations};
    throw RootFindingError("physical mass did not converge after " +
                               std::to_string(kMaxNewtonIterations) +
                               " Newton iterations (residual " + std::to_string(d) + ")",
                           d);
}

}  // namespace

std::complex<double> self_energy(double E, const ModelParams& params, const MomentumGrid& grid) {
    const double lam2 = params.lambda0 * params.lambda0;
    const double x = E - params.m_N;
    const double re = lam2 * reduced_real_part(x, params, grid);
    const double im = lam2 * kPi * reduced_density(x, params);
    return {re, im};
}

double noise_kernel(double E, const ModelParams& params) noexcept {
    const double x = E - params.m_N;
    if (x <= params.mu) return 0.0;
    const double f = form_factor(x, params);
    // Z_V^{-1} lambda^2 = lambda0^2.
    return params.lambda0 * params.lambda0 * momentum_of(x, params) * f * f / (4.0 * kPi);
}

KernelTable kernel_table(const ModelParams& params, const MomentumGrid& grid,
                         std::span<const double> energies, unsigned threads) {
    if (!std::is_sorted(energies.begin(), energies.end())) {
        throw ConfigError("kernel energy grid must be ascending");
    }
    KernelTable table;
    table.energies.assign(energies.begin(), energies.end());
    const std::size_t n = energies.size();
    table.D.resize(n);
    table.B.resize(n);
    table.A.resize(n);
    table.epsilon_scheme =
        "principal value by singularity subtraction on the uniform midpoint k-grid; "
        "imaginary part from the delta-function term";
    parallel_for(n, threads, [&](std::size_t i) {
        const double E = energies[i];
        table.D[i] = E - params.m_V0 + self_energy(E, params, grid).real();
        const double b = noise_kernel(E, params);
        table.B[i] = b;
        table.A[i] = E > 0.0 ? b : (E < 0.0 ? -b : 0.0);
    });
    return table;
}

RenormConstants renorm_constants(const ModelParams& params, const MomentumGrid& grid,
                                 double m_V_trial) {
    const double lam2 = params.lambda0 * params.lambda0;
    const double x = m_V_trial - params.m_N;
    RenormConstants rc;
    rc.C0 = lam2 * reduced_real_part(x, params, grid);
    if (x <= params.mu) {
        double sum = 0.0;
        for (std::size_t i = 0; i < grid.n_modes(); ++i) {
            const double k = grid.k_values[i];
            const double w = omega(k, params);
            const double dw = w - x;
            sum += grid.spacing * k / w * reduced_density(w, params) / (dw * dw);
        }
        rc.C1 = lam2 * sum;
    } else {
        const double h = 1e-5 * std::abs(m_V_trial);
        const double up = reduced_real_part(x + h, params, grid);
        const double down = reduced_real_part(x - h, params, grid);
        rc.C1 = lam2 * ((up - down) / (2.0 * h));
    }
    return rc;
}

double physical_mass(const ModelParams& params, const MomentumGrid& grid) {
    return solve_mass(params, grid).m_V;
}

PoleResult find_pole(const ModelParams& params, const MomentumGrid& grid) {
    const MassSolution mass = solve_mass(params, grid);
    PoleResult pole;
    pole.m_V = mass.m_V;
    pole.newton_iterations = mass.iterations;
    const RenormConstants rc = renorm_constants(params, grid, pole.m_V);
    pole.C0 = rc.C0;
    pole.C1 = rc.C1;
    pole.Z_V = 1.0 / (1.0 + rc.C1);
    pole.lambda_ren = std::sqrt(pole.Z_V) * params.lambda0;
    pole.unstable = pole.m_V > params.threshold();
    if (pole.unstable) {
        pole.sigma_imag = self_energy(pole.m_V, params, grid).imag();
        pole.Gamma = 2.0 * pole.Z_V * pole.sigma_imag;
        // Form factor taken at the on-shell boson energy of the decay V -> N theta.
        const double f = form_factor(pole.m_V - params.m_N, params);
        pole.gamma_friction = params.lambda0 * params.lambda0 * f / (4.0 * kPi);
    }
    return pole;
}

LocalKernels local_kernels(const PoleResult& pole, const ModelParams& /*params*/) noexcept {
    LocalKernels lk;
    lk.gamma_friction = pole.gamma_friction;
    lk.A_slope = pole.gamma_friction;
    lk.B_loc = pole.gamma_friction * pole.m_V;
    return lk;
}

}  // namespace leedecay
