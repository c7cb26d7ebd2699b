#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "leedecay/model.hpp"
#include "leedecay/spectral.hpp"

namespace leedecay {

// Basis layout shared by every master-equation object:
// |0> (no V, no N theta), |V>, then |N theta_k> for each grid mode.
inline constexpr Eigen::Index kVacuum = 0;
inline constexpr Eigen::Index kExcited = 1;

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(Eigen::MatrixXcd elements);

    static DensityMatrix pure(const Eigen::VectorXcd& psi);

    const Eigen::MatrixXcd& elements() const noexcept { return rho_; }
    std::size_t basis_dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
    std::complex<double> operator()(Eigen::Index i, Eigen::Index j) const { return rho_(i, j); }

    std::complex<double> trace() const { return rho_.trace(); }
    double purity() const;                // Re Tr rho^2
    double hermiticity_defect() const;    // max |rho - rho^dagger|
    double min_eigenvalue() const;        // of the Hermitian part

private:
    Eigen::MatrixXcd rho_;
};

// S = -Tr rho^2, in [-1, 0] for a physical state.
double linear_entropy(const DensityMatrix& rho);

enum class DissipatorVariant {
    Literal,     // -kappa [Phi^dag, [Phi, rho]]
    Hermitized,  // -(kappa/2) ([Phi^dag, [Phi, rho]] + [Phi, [Phi^dag, rho]])
};

enum class InitialState { ExcitedV, VacuumVSuperposition, MaximallyMixed };

// rho_dot = -i [H_R, rho] + dissipator(rho) with lowering operator Phi = |0><V|.
// H_R is stored in arrowhead form around |V>: diagonal plus couplings between
// |V> and the continuum (couplings[kVacuum] and couplings[kExcited] are zero).
struct GeneratorSpec {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd couplings;
    double kappa = 0.0;  // gamma_friction * m_V
    DissipatorVariant variant = DissipatorVariant::Hermitized;

    std::size_t basis_dim() const noexcept { return static_cast<std::size_t>(diagonal.size()); }
    Eigen::MatrixXd dense_hamiltonian() const;
    Eigen::MatrixXd lowering_operator() const;
    double hamiltonian_norm() const;  // spectral norm ||H_R||_2

    // out = rho_dot; out must not alias rho.
    void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
};

// Renormalized Hamiltonian (m_V, lambda) bordered by the vacuum, plus the
// decoherence rate kappa = gamma_friction m_V.
GeneratorSpec build_generator(const ModelParams& params, const MomentumGrid& grid,
                              const PoleResult& pole, DissipatorVariant variant);

DensityMatrix make_initial_state(InitialState kind, std::size_t basis_dim);

// dS/dt carried by the dissipator; the Hamiltonian part drops out of Tr rho^2.
double entropy_production(const GeneratorSpec& gen, const DensityMatrix& rho);

struct EvolutionOptions {
    double trace_tol = 1e-10;
    double hermiticity_tol = 1e-10;
    double positivity_tol = 1e-8;
    // Called after every RK4 step with (step index, time, rho).
    std::function<void(std::size_t, double, const Eigen::MatrixXcd&)> on_step;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<DensityMatrix> snapshots;
    std::size_t steps = 0;
    double max_trace_defect = 0.0;
    double max_hermiticity_defect = 0.0;
    double max_entropy_decrease = 0.0;  // max over steps of S_j - S_{j+1}, 0 if monotone
};

// Largest step accepted by evolve_density: 0.05 / max(||H_R||_2, kappa).
double max_stable_step(const GeneratorSpec& gen);

// Fixed-step classical RK4 between consecutive t_grid points (t_grid[0] is the
// time of rho0). Throws ConfigError on dt violations or invalid rho0, and
// IntegrationError when trace, Hermiticity (Hermitized variant) or positivity
// at a snapshot drifts beyond tolerance.
EvolutionResult evolve_density(const GeneratorSpec& gen, const DensityMatrix& rho0,
                               std::span<const double> t_grid, double dt,
                               const EvolutionOptions& options = {});

}  // namespace leedecay
