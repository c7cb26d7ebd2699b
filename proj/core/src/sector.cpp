#include "leedecay/sector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "leedecay/errors.hpp"
#include "leedecay/parallel.hpp"

namespace leedecay {

Eigen::MatrixXd SectorHamiltonian::dense() const {
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    h(0, 0) = hub_energy;
    for (Eigen::Index i = 1; i < n; ++i) {
        h(i, i) = continuum[i - 1];
        h(0, i) = couplings[i - 1];
        h(i, 0) = couplings[i - 1];
    }
    return h;
}

double SectorHamiltonian::coupling_norm_sq() const noexcept {
    double s = 0.0;
    for (double h : couplings) s += h * h;
    return s;
}

SectorHamiltonian build_sector(const ModelParams& params, const MomentumGrid& grid) {
    SectorHamiltonian H;
    H.hub_energy = params.m_V0;
    H.band_edge = params.threshold();
    const std::size_t n = grid.n_modes();
    H.continuum.resize(n);
    H.couplings.resize(n);
    H.weights = grid.weights;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = omega(grid.k_values[i], params);
        H.continuum[i] = params.m_N + w;
        // Grid weight folded in as sqrt(w_i) keeps the discrete problem Hermitian.
        H.couplings[i] =
            params.lambda0 * form_factor(w, params) * std::sqrt(grid.weights[i] / (2.0 * w));
    }
    return H;
}

StableState diagonalize_stable(const SectorHamiltonian& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H.dense());
    if (solver.info() != Eigen::Success) throw RegimeError("sector eigensolver failed");
    const double e0 = solver.eigenvalues()(0);
    if (!(e0 < H.band_edge)) {
        throw RegimeError("no isolated eigenvalue below the continuum threshold");
    }
    StableState st;
    st.m_V = e0;
    st.eigenvector = solver.eigenvectors().col(0);
    if (st.eigenvector(0) < 0.0) st.eigenvector = -st.eigenvector;
    st.Z_V_discrete = st.eigenvector(0) * st.eigenvector(0);
    st.g.resize(H.continuum.size());
    const double v0 = st.eigenvector(0);
    for (std::size_t i = 0; i < H.continuum.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i + 1);
        st.g[i] = st.eigenvector(row) / (v0 * std::sqrt(H.weights[i]));
    }
    return st;
}

SectorSpectrum decompose(const SectorHamiltonian& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H.dense());
    if (solver.info() != Eigen::Success) throw RegimeError("sector eigensolver failed");
    SectorSpectrum sp;
    sp.energies = solver.eigenvalues();
    sp.v_weights = solver.eigenvectors().row(0).transpose().cwiseAbs2();
    return sp;
}

SurvivalRecord evolve_survival(const SectorSpectrum& spectrum, std::span<const double> times,
                               unsigned threads) {
    SurvivalRecord rec;
    rec.times.assign(times.begin(), times.end());
    rec.amplitude.resize(times.size());
    rec.probability.resize(times.size());
    const Eigen::Index n = spectrum.energies.size();
    // Phases are taken relative to the weighted mean energy for accuracy at large t.
    const double e_ref = spectrum.v_weights.dot(spectrum.energies) / spectrum.v_weights.sum();
    parallel_for(times.size(), threads, [&](std::size_t j) {
        const double t = times[j];
        double re = 0.0;
        double im = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            const double phase = (spectrum.energies(a) - e_ref) * t;
            re += spectrum.v_weights(a) * std::cos(phase);
            im -= spectrum.v_weights(a) * std::sin(phase);
        }
        const std::complex<double> c = std::complex<double>(re, im) * std::polar(1.0, -e_ref * t);
        rec.amplitude[j] = c;
        rec.probability[j] = re * re + im * im;
    });
    return rec;
}

SurvivalRecord evolve_survival(const SectorHamiltonian& H, std::span<const double> times,
                               unsigned threads) {
    return evolve_survival(decompose(H), times, threads);
}

DecayFit fit_exponential_decay(std::span<const double> times, std::span<const double> probability,
                               double t_lo, double t_hi) {
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi || !(probability[i] > 0.0)) continue;
        const double y = std::log(probability[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++n;
    }
    DecayFit fit;
    fit.points = n;
    if (n < 2) return fit;
    const double dn = static_cast<double>(n);
    const double den = dn * stt - st * st;
    const double slope = (dn * sty - st * sy) / den;
    fit.rate = -slope;
    fit.intercept = (sy - slope * st) / dn;
    return fit;
}

double resonant_spacing(const SectorHamiltonian& H) {
    const auto& c = H.continuum;
    if (c.size() < 2) return 0.0;
    auto it = std::lower_bound(c.begin(), c.end(), H.hub_energy);
    std::size_t i = static_cast<std::size_t>(it - c.begin());
    if (i == 0) i = 1;
    if (i >= c.size()) i = c.size() - 1;
    return c[i] - c[i - 1];
}

std::optional<double> recurrence_estimate(const SectorHamiltonian& H, double width,
                                          const RecurrenceOptions& options) {
    if (!(width > 0.0) || H.coupling_norm_sq() == 0.0 || !(H.hub_energy > H.band_edge)) {
        throw RegimeError("recurrence_estimate requires the unstable regime");
    }
    if (options.threshold > 1.0) return std::nullopt;

    const SectorSpectrum sp = decompose(H);
    const double spacing = resonant_spacing(H);
    const double bandwidth = sp.energies.maxCoeff() - sp.energies.minCoeff();
    const double two_pi = 2.0 * std::numbers::pi;
    const double horizon = options.horizon > 0.0 ? options.horizon : 3.0 * two_pi / spacing;
    const double step = options.scan_step > 0.0 ? options.scan_step : two_pi / (20.0 * bandwidth);
    const double start = 2.0 / width;

    constexpr std::size_t kBlock = 4096;
    std::vector<double> ts;
    ts.reserve(kBlock);
    for (std::size_t j0 = 1;; j0 += kBlock) {
        ts.clear();
        for (std::size_t j = j0; j < j0 + kBlock; ++j) {
            const double t = start + static_cast<double>(j) * step;
            if (t > horizon) break;
            ts.push_back(t);
        }
        if (ts.empty()) return std::nullopt;
        const SurvivalRecord rec = evolve_survival(sp, ts);
        for (std::size_t j = 0; j < ts.size(); ++j) {
            if (rec.probability[j] > options.threshold) return ts[j];
        }
    }
}

}  // namespace leedecay
