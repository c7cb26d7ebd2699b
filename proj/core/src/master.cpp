#include "leedecay/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "leedecay/errors.hpp"

namespace leedecay {
namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// Tr(rho^2) without forming the product.
cd trace_square(const Eigen::MatrixXcd& rho) {
    cd s = 0.0;
    const Eigen::Index d = rho.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) s += rho(i, j) * rho(j, i);
    }
    return s;
}

double hermiticity_defect_of(const Eigen::MatrixXcd& rho) {
    double m = 0.0;
    const Eigen::Index d = rho.rows();
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = j; i < d; ++i) {
            m = std::max(m, std::abs(rho(i, j) - std::conj(rho(j, i))));
        }
    }
    return m;
}

// ||[Phi, rho]||_F^2 with Phi = |0><V|.
double lowering_commutator_norm_sq(const Eigen::MatrixXcd& rho) {
    const Eigen::Index d = rho.rows();
    double s = std::norm(rho(kExcited, kExcited) - rho(kVacuum, kVacuum));
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j != kExcited) s += std::norm(rho(kExcited, j));
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (i != kVacuum) s += std::norm(rho(i, kVacuum));
    }
    return s;
}

// ||[Phi^dag, rho]||_F^2.
double raising_commutator_norm_sq(const Eigen::MatrixXcd& rho) {
    const Eigen::Index d = rho.rows();
    double s = std::norm(rho(kVacuum, kVacuum) - rho(kExcited, kExcited));
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j != kVacuum) s += std::norm(rho(kVacuum, j));
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (i != kExcited) s += std::norm(rho(i, kExcited));
    }
    return s;
}

}  // namespace

DensityMatrix::DensityMatrix(Eigen::MatrixXcd elements) : rho_(std::move(elements)) {
    if (rho_.rows() != rho_.cols()) throw ConfigError("density matrix must be square");
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
    return DensityMatrix(psi * psi.adjoint());
}

double DensityMatrix::purity() const { return trace_square(rho_).real(); }

double DensityMatrix::hermiticity_defect() const { return hermiticity_defect_of(rho_); }

double DensityMatrix::min_eigenvalue() const {
    const Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

double linear_entropy(const DensityMatrix& rho) { return -rho.purity(); }

Eigen::MatrixXd GeneratorSpec::dense_hamiltonian() const {
    Eigen::MatrixXd h = diagonal.asDiagonal();
    for (Eigen::Index j = 0; j < couplings.size(); ++j) {
        if (j == kExcited) continue;
        h(kExcited, j) += couplings(j);
        h(j, kExcited) += couplings(j);
    }
    return h;
}

Eigen::MatrixXd GeneratorSpec::lowering_operator() const {
    const auto d = static_cast<Eigen::Index>(basis_dim());
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(d, d);
    phi(kVacuum, kExcited) = 1.0;
    return phi;
}

double GeneratorSpec::hamiltonian_norm() const {
    if (diagonal.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_hamiltonian(),
                                                          Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void GeneratorSpec::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
    const Eigen::Index d = rho.rows();
    out.resize(d, d);

    // -i [H, rho] with H = diag + e_V u^T + u e_V^T, in one column-major pass.
    Eigen::VectorXcd rho_u = Eigen::VectorXcd::Zero(d);  // rho u
    Eigen::VectorXcd u_rho(d);                            // (u^T rho)^T
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto col = rho.col(j);
        u_rho(j) = couplings.dot(col.real()) + kI * couplings.dot(col.imag());
        const double uj = couplings(j);
        if (uj != 0.0) rho_u += uj * col;
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        const double dj = diagonal(j);
        const double uj = couplings(j);
        const cd rho_vj = rho(kExcited, j);
        for (Eigen::Index i = 0; i < d; ++i) {
            const cd c = (diagonal(i) - dj) * rho(i, j) + couplings(i) * rho_vj - rho(i, kExcited) * uj;
            out(i, j) = cd(c.imag(), -c.real());  // -i c
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) out(kExcited, j) += -kI * u_rho(j);
    for (Eigen::Index i = 0; i < d; ++i) out(i, kExcited) += kI * rho_u(i);

    if (kappa == 0.0) return;

    // [Phi^dag, [Phi, rho]] = P_V rho + rho P_0 - Phi^dag rho Phi - Phi rho Phi^dag
    // [Phi, [Phi^dag, rho]] = P_0 rho + rho P_V - Phi^dag rho Phi - Phi rho Phi^dag
    const cd r00 = rho(kVacuum, kVacuum);
    const cd rvv = rho(kExcited, kExcited);
    if (variant == DissipatorVariant::Literal) {
        out.row(kExcited) -= kappa * rho.row(kExcited);
        out.col(kVacuum) -= kappa * rho.col(kVacuum);
        out(kExcited, kExcited) += kappa * r00;
        out(kVacuum, kVacuum) += kappa * rvv;
    } else {
        const double half = 0.5 * kappa;
        out.row(kExcited) -= half * rho.row(kExcited);
        out.row(kVacuum) -= half * rho.row(kVacuum);
        out.col(kExcited) -= half * rho.col(kExcited);
        out.col(kVacuum) -= half * rho.col(kVacuum);
        out(kExcited, kExcited) += kappa * r00;
        out(kVacuum, kVacuum) += kappa * rvv;
    }
}

GeneratorSpec build_generator(const ModelParams& params, const MomentumGrid& grid,
                              const PoleResult& pole, DissipatorVariant variant) {
    const std::size_t n = grid.n_modes();
    const auto d = static_cast<Eigen::Index>(n + 2);
    GeneratorSpec gen;
    gen.variant = variant;
    gen.diagonal = Eigen::VectorXd::Zero(d);
    gen.couplings = Eigen::VectorXd::Zero(d);
    gen.diagonal(kExcited) = pole.m_V;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = omega(grid.k_values[i], params);
        const auto idx = static_cast<Eigen::Index>(i + 2);
        gen.diagonal(idx) = params.m_N + w;
        gen.couplings(idx) =
            pole.lambda_ren * form_factor(w, params) * std::sqrt(grid.weights[i] / (2.0 * w));
    }
    gen.kappa = pole.gamma_friction * pole.m_V;
    return gen;
}

DensityMatrix make_initial_state(InitialState kind, std::size_t basis_dim) {
    if (basis_dim < 2) throw ConfigError("basis must contain |0> and |V>");
    const auto d = static_cast<Eigen::Index>(basis_dim);
    switch (kind) {
        case InitialState::ExcitedV: {
            Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
            psi(kExcited) = 1.0;
            return DensityMatrix::pure(psi);
        }
        case InitialState::VacuumVSuperposition: {
            Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
            rho(kVacuum, kVacuum) = rho(kVacuum, kExcited) = 0.5;
            rho(kExcited, kVacuum) = rho(kExcited, kExcited) = 0.5;
            return DensityMatrix(std::move(rho));
        }
        case InitialState::MaximallyMixed: {
            Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d);
            return DensityMatrix(std::move(rho));
        }
    }
    throw ConfigError("unknown initial state");
}

double entropy_production(const GeneratorSpec& gen, const DensityMatrix& rho) {
    if (gen.kappa == 0.0) return 0.0;
    const Eigen::MatrixXcd& r = rho.elements();
    if (gen.variant == DissipatorVariant::Literal) {
        return 2.0 * gen.kappa * lowering_commutator_norm_sq(r);
    }
    return gen.kappa * (lowering_commutator_norm_sq(r) + raising_commutator_norm_sq(r));
}

double max_stable_step(const GeneratorSpec& gen) {
    const double scale = std::max(gen.hamiltonian_norm(), gen.kappa);
    return scale > 0.0 ? 0.05 / scale : std::numeric_limits<double>::infinity();
}

EvolutionResult evolve_density(const GeneratorSpec& gen, const DensityMatrix& rho0,
                               std::span<const double> t_grid, double dt,
                               const EvolutionOptions& options) {
    const auto d = static_cast<Eigen::Index>(gen.basis_dim());
    if (static_cast<Eigen::Index>(rho0.basis_dim()) != d) {
        throw ConfigError("initial state dimension does not match the generator");
    }
    if (t_grid.empty()) throw ConfigError("time grid is empty");
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw ConfigError("time grid must ascend");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const double dt_max = max_stable_step(gen);
    if (dt > dt_max) {
        throw ConfigError("step size dt = " + std::to_string(dt) + " exceeds 0.05/max(||H_R||, kappa) = " +
                          std::to_string(dt_max));
    }
    if (std::abs(rho0.trace() - 1.0) > options.trace_tol ||
        rho0.hermiticity_defect() > options.hermiticity_tol ||
        rho0.min_eigenvalue() < -options.positivity_tol) {
        throw ConfigError("initial density matrix violates trace/Hermiticity/positivity");
    }

    const bool hermitized = gen.variant == DissipatorVariant::Hermitized;
    EvolutionResult result;
    result.times.assign(t_grid.begin(), t_grid.end());
    result.snapshots.reserve(t_grid.size());
    result.snapshots.push_back(rho0);

    Eigen::MatrixXcd rho = rho0.elements();
    Eigen::MatrixXcd k1(d, d), k2(d, d), k3(d, d), k4(d, d), tmp(d, d);
    double entropy = -trace_square(rho).real();
    double t = t_grid.front();

    for (std::size_t seg = 1; seg < t_grid.size(); ++seg) {
        const double span = t_grid[seg] - t_grid[seg - 1];
        const auto n_sub = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
        const double h = n_sub > 0 ? span / static_cast<double>(n_sub) : 0.0;
        for (std::size_t s = 0; s < n_sub; ++s) {
            gen.apply(rho, k1);
            tmp = rho + (0.5 * h) * k1;
            gen.apply(tmp, k2);
            tmp = rho + (0.5 * h) * k2;
            gen.apply(tmp, k3);
            tmp = rho + h * k3;
            gen.apply(tmp, k4);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = (s + 1 == n_sub) ? t_grid[seg] : t + h;
            ++result.steps;

            const double trace_defect = std::abs(rho.trace() - 1.0);
            result.max_trace_defect = std::max(result.max_trace_defect, trace_defect);
            if (trace_defect > options.trace_tol) {
                throw IntegrationError("trace drifted by " + std::to_string(trace_defect), t);
            }
            const double herm = hermiticity_defect_of(rho);
            result.max_hermiticity_defect = std::max(result.max_hermiticity_defect, herm);
            if (hermitized && herm > options.hermiticity_tol) {
                throw IntegrationError("Hermiticity defect " + std::to_string(herm), t);
            }
            const double next_entropy = -trace_square(rho).real();
            result.max_entropy_decrease =
                std::max(result.max_entropy_decrease, entropy - next_entropy);
            entropy = next_entropy;
            if (options.on_step) options.on_step(result.steps, t, rho);
        }
        DensityMatrix snap(rho);
        if (hermitized && snap.min_eigenvalue() < -options.positivity_tol) {
            throw IntegrationError("density matrix lost positivity", t_grid[seg]);
        }
        result.snapshots.push_back(std::move(snap));
    }
    return result;
}

}  // namespace leedecay
