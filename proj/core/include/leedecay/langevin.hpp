#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "leedecay/spectral.hpp"

namespace leedecay {

using ComplexPath = std::vector<std::complex<double>>;

// White-noise discretization of the local noise kernel: xi_j complex Gaussian
// with <xi_j* xi_k> = (B_loc / dt) delta_jk and <xi_j xi_k> = 0.
struct NoiseSpec {
    double B_loc = 0.0;
    double dt = 1e-3;
    std::uint64_t seed = 42;
    std::size_t n_steps = 1000;
    std::size_t n_trajectories = 1;
    std::size_t record_stride = 1;  // keep every record_stride-th step of a path

    void validate() const;
};

// n_steps samples sqrt(B_loc/(2 dt)) (g1 + i g2) from a stream seeded by spec.seed.
ComplexPath sample_noise(const NoiseSpec& spec);

// phi_dot = -a phi + b xi with a = (gamma + i) m_eff / (1 + gamma^2),
// b = (gamma + i) / (1 + gamma^2), m_eff = m_V + p^2 / (2 m_V).
struct LangevinCoefficients {
    std::complex<double> drift;
    std::complex<double> noise_gain;
    double m_eff = 0.0;

    double mean_decay_rate() const noexcept { return drift.real(); }
};

LangevinCoefficients langevin_coefficients(const PoleResult& pole, double momentum);

// One trajectory driven by the noise stream of spec.seed. The linear drift is
// propagated exactly over each step (exp(-a dt)) and the noise enters as the
// Euler-Maruyama increment b xi dt. Returns phi at steps 0, stride, 2 stride, ...
// Throws ConfigError unless dt |a| < 0.1.
ComplexPath integrate_trajectory(std::complex<double> phi0, const PoleResult& pole,
                                 const NoiseSpec& spec, double momentum);

// Recorded time points of integrate_trajectory.
std::vector<double> recorded_times(const NoiseSpec& spec);

// Seed of trajectory `index` derived from the ensemble seed (splitmix64 mix).
std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t index) noexcept;

// spec.n_trajectories independent paths; identical for any thread count.
std::vector<ComplexPath> simulate_ensemble(std::complex<double> phi0, const PoleResult& pole,
                                           const NoiseSpec& spec, double momentum,
                                           unsigned threads = 1);

struct ExponentialFit {
    double rate = 0.0;
    double rate_stderr = 0.0;  // grouped jackknife over trajectories
    double intercept = 0.0;
    std::size_t points = 0;
    bool degenerate = false;
};

struct TrajectoryEnsemble {
    std::vector<double> times;
    std::vector<std::complex<double>> mean_field;
    std::vector<double> mean_sq;  // <|phi|^2>
    std::vector<double> stderr_re;
    std::vector<double> stderr_im;
    std::vector<double> stderr_sq;
    std::uint64_t seed = 0;
    std::size_t n_trajectories = 0;
    ExponentialFit mean_decay;  // fit of |<phi>|(t)
};

// Pointwise statistics and an exponential fit of |<phi>|. The fit window runs
// from t = 0 until |<phi>| first falls below e^-2 of its initial value.
TrajectoryEnsemble ensemble_stats(std::span<const ComplexPath> paths, std::span<const double> times,
                                  std::uint64_t seed = 0);

}  // namespace leedecay
