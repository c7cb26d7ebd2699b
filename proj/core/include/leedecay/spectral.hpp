#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "leedecay/model.hpp"

namespace leedecay {

// In-in kernels of the V propagator tabulated on an energy grid.
//   D(E) = E - m_V0 + Re Sigma(E)       (dispersive)
//   B(E) = theta(E - m_N - mu) k lambda0^2 f^2 / (4 pi)   (noise)
//   A(E) = sign(E) B(E)                 (dissipative, time-reversal odd)
struct KernelTable {
    std::vector<double> energies;
    std::vector<double> D;
    std::vector<double> B;
    std::vector<double> A;
    std::string epsilon_scheme;
};

struct RenormConstants {
    double C0 = 0.0;
    double C1 = 0.0;
};

struct PoleResult {
    double m_V = 0.0;             // physical mass, root of D(E) = 0
    double Gamma = 0.0;           // width, -2 Im(pole)
    double gamma_friction = 0.0;  // dimensionless friction of the local kernels
    double Z_V = 1.0;
    double lambda_ren = 0.0;
    double C0 = 0.0;
    double C1 = 0.0;
    double sigma_imag = 0.0;  // Im Sigma(m_V)
    bool unstable = false;    // m_V above the m_N + mu threshold
    int newton_iterations = 0;
};

// Local approximation A(E) ~ A_slope E, B(E) ~ B_loc.
struct LocalKernels {
    double A_slope = 0.0;
    double B_loc = 0.0;
    double gamma_friction = 0.0;
};

// One-loop self-energy Sigma(E) = int d^3k/(2pi)^3 [lambda0^2 f^2/(2 w)] / (m_N + w - E - i0).
// The real part is a principal value evaluated by singularity subtraction on
// the grid; the imaginary part is the delta-function term. Throws
// CoverageError when the singular point lies beyond the grid while the form
// factor is still nonzero there.
std::complex<double> self_energy(double E, const ModelParams& params, const MomentumGrid& grid);

// Noise kernel B(E); grid independent.
double noise_kernel(double E, const ModelParams& params) noexcept;

KernelTable kernel_table(const ModelParams& params, const MomentumGrid& grid,
                         std::span<const double> energies, unsigned threads = 1);

// C0 = Re Sigma(m), C1 = dC0/dm. Below threshold C1 is the plain squared-
// denominator sum; above threshold it is the finite-part value obtained by a
// central difference of C0 with step 1e-5 |m|.
RenormConstants renorm_constants(const ModelParams& params, const MomentumGrid& grid,
                                 double m_V_trial);

// Root of D(m) = m - m_V0 + C0(m) by damped Newton iteration from m_V0.
double physical_mass(const ModelParams& params, const MomentumGrid& grid);

PoleResult find_pole(const ModelParams& params, const MomentumGrid& grid);

LocalKernels local_kernels(const PoleResult& pole, const ModelParams& params) noexcept;

}  // namespace leedecay
