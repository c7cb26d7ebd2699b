#include "leedecay/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "leedecay/errors.hpp"
#include "leedecay/parallel.hpp"

namespace leedecay {
namespace {

using cd = std::complex<double>;

class NoiseStream {
public:
    NoiseStream(std::uint64_t seed, double B_loc, double dt)
        : engine_(seed), scale_(std::sqrt(B_loc / (2.0 * dt))) {}

    cd next() {
        const double g1 = normal_(engine_);
        const double g2 = normal_(engine_);
        return {scale_ * g1, scale_ * g2};
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    double scale_;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::size_t points = 0;
};

LineFit fit_log_line(std::span<const double> t, std::span<const double> y, std::size_t count) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(y[i] > 0.0)) continue;
        const double ly = std::log(y[i]);
        st += t[i];
        sy += ly;
        stt += t[i] * t[i];
        sty += t[i] * ly;
        ++n;
    }
    LineFit f;
    f.points = n;
    if (n < 2) return f;
    const double dn = static_cast<double>(n);
    f.slope = (dn * sty - st * sy) / (dn * stt - st * st);
    f.intercept = (sy - f.slope * st) / dn;
    return f;
}

}  // namespace

void NoiseSpec::validate() const {
    if (!(dt > 0.0)) throw ConfigError("langevin dt must be positive");
    if (!(B_loc >= 0.0)) throw ConfigError("noise strength B_loc must be non-negative");
    if (record_stride == 0) throw ConfigError("record_stride must be positive");
}

ComplexPath sample_noise(const NoiseSpec& spec) {
    spec.validate();
    ComplexPath xi(spec.n_steps);
    if (spec.B_loc == 0.0) return xi;
    NoiseStream stream(spec.seed, spec.B_loc, spec.dt);
    for (auto& x : xi) x = stream.next();
    return xi;
}

LangevinCoefficients langevin_coefficients(const PoleResult& pole, double momentum) {
    if (!(pole.m_V > 0.0)) throw ConfigError("Langevin dynamics needs m_V > 0");
    const double g = pole.gamma_friction;
    LangevinCoefficients c;
    c.m_eff = pole.m_V + momentum * momentum / (2.0 * pole.m_V);
    const cd gi(g, 1.0);
    c.drift = gi * c.m_eff / (1.0 + g * g);
    c.noise_gain = gi / (1.0 + g * g);
    return c;
}

ComplexPath integrate_trajectory(cd phi0, const PoleResult& pole, const NoiseSpec& spec,
                                 double momentum) {
    spec.validate();
    const LangevinCoefficients c = langevin_coefficients(pole, momentum);
    if (!(spec.dt * std::abs(c.drift) < 0.1)) {
        throw ConfigError("langevin step too large: dt |a| = " +
                          std::to_string(spec.dt * std::abs(c.drift)) + " (needs < 0.1)");
    }
    const cd propagator = std::exp(-c.drift * spec.dt);
    const cd kick = c.noise_gain * spec.dt;
    const bool noisy = spec.B_loc > 0.0;
    NoiseStream stream(spec.seed, spec.B_loc, spec.dt);

    ComplexPath path;
    path.reserve(spec.n_steps / spec.record_stride + 1);
    cd phi = phi0;
    path.push_back(phi);
    std::size_t until_record = spec.record_stride;
    for (std::size_t step = 1; step <= spec.n_steps; ++step) {
        phi *= propagator;
        if (noisy) phi += kick * stream.next();
        if (--until_record == 0) {
            path.push_back(phi);
            until_record = spec.record_stride;
        }
    }
    return path;
}

std::vector<double> recorded_times(const NoiseSpec& spec) {
    std::vector<double> t;
    for (std::size_t step = 0; step <= spec.n_steps; step += spec.record_stride) {
        t.push_back(static_cast<double>(step) * spec.dt);
    }
    return t;
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t index) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<ComplexPath> simulate_ensemble(cd phi0, const PoleResult& pole, const NoiseSpec& spec,
                                           double momentum, unsigned threads) {
    spec.validate();
    std::vector<ComplexPath> paths(spec.n_trajectories);
    parallel_for(spec.n_trajectories, threads, [&](std::size_t i) {
        NoiseSpec one = spec;
        one.seed = trajectory_seed(spec.seed, i);
        paths[i] = integrate_trajectory(phi0, pole, one, momentum);
    });
    return paths;
}

TrajectoryEnsemble ensemble_stats(std::span<const ComplexPath> paths, std::span<const double> times,
                                  std::uint64_t seed) {
    const std::size_t n = paths.size();
    if (n < 2) throw ConfigError("ensemble statistics need at least two trajectories");
    const std::size_t nt = times.size();
    for (const auto& p : paths) {
        if (p.size() != nt) throw ConfigError("trajectory length does not match the time grid");
    }

    TrajectoryEnsemble ens;
    ens.times.assign(times.begin(), times.end());
    ens.seed = seed;
    ens.n_trajectories = n;
    ens.mean_field.assign(nt, cd{});
    ens.mean_sq.assign(nt, 0.0);
    ens.stderr_re.assign(nt, 0.0);
    ens.stderr_im.assign(nt, 0.0);
    ens.stderr_sq.assign(nt, 0.0);

    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < nt; ++j) {
        cd sum{};
        double sum_sq = 0.0;
        for (const auto& p : paths) {
            sum += p[j];
            sum_sq += std::norm(p[j]);
        }
        const cd mean = sum / dn;
        const double mean_sq = sum_sq / dn;
        double var_re = 0.0, var_im = 0.0, var_sq = 0.0;
        for (const auto& p : paths) {
            const cd d = p[j] - mean;
            const double dsq = std::norm(p[j]) - mean_sq;
            var_re += d.real() * d.real();
            var_im += d.imag() * d.imag();
            var_sq += dsq * dsq;
        }
        ens.mean_field[j] = mean;
        ens.mean_sq[j] = mean_sq;
        ens.stderr_re[j] = std::sqrt(var_re / (dn - 1.0) / dn);
        ens.stderr_im[j] = std::sqrt(var_im / (dn - 1.0) / dn);
        ens.stderr_sq[j] = std::sqrt(var_sq / (dn - 1.0) / dn);
    }

    // Fit window: until |<phi>| falls below e^-2 of its start value.
    ExponentialFit& fit = ens.mean_decay;
    const double start = nt > 0 ? std::abs(ens.mean_field[0]) : 0.0;
    if (!(start > 0.0)) {
        fit.degenerate = true;
        return ens;
    }
    std::size_t window = nt;
    for (std::size_t j = 0; j < nt; ++j) {
        if (std::abs(ens.mean_field[j]) < std::exp(-2.0) * start) {
            window = j;
            break;
        }
    }
    std::vector<double> mag(nt);
    for (std::size_t j = 0; j < nt; ++j) mag[j] = std::abs(ens.mean_field[j]);
    const LineFit full = fit_log_line(times, mag, window);
    fit.rate = -full.slope;
    fit.intercept = full.intercept;
    fit.points = full.points;
    if (full.points < 3 || !(fit.rate > 0.0)) {
        fit.degenerate = true;
        return ens;
    }

    // Grouped jackknife over contiguous trajectory blocks.
    const std::size_t groups = std::min<std::size_t>(20, n);
    std::vector<cd> total(window);
    for (std::size_t j = 0; j < window; ++j) total[j] = ens.mean_field[j] * dn;
    std::vector<double> rates(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t lo = g * n / groups;
        const std::size_t hi = (g + 1) * n / groups;
        const double kept = dn - static_cast<double>(hi - lo);
        std::vector<double> m(window);
        for (std::size_t j = 0; j < window; ++j) {
            cd s = total[j];
            for (std::size_t i = lo; i < hi; ++i) s -= paths[i][j];
            m[j] = std::abs(s / kept);
        }
        rates[g] = -fit_log_line(times, m, window).slope;
    }
    double mean_rate = 0.0;
    for (double r : rates) mean_rate += r;
    mean_rate /= static_cast<double>(groups);
    double ss = 0.0;
    for (double r : rates) ss += (r - mean_rate) * (r - mean_rate);
    const double dg = static_cast<double>(groups);
    fit.rate_stderr = std::sqrt((dg - 1.0) / dg * ss);
    return ens;
}

}  // namespace leedecay
