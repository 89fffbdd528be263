#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flatspec/harmonic.hpp"
#include "flatspec/mesh.hpp"

namespace flatspec {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

/// Discretization of the foliated Laplacian H = -(X^2 + Y^2) restricted to the
/// n-th fiber-Fourier mode: cotangent-weight connection Laplacian with unitary
/// edge phases, lumped (barycentric) mass.
struct ModeOperator {
    std::shared_ptr<const SurfaceMesh> mesh;
    int n = 0;
    ModeSpace space;
    SparseC stiffness;     // dofs x dofs, Hermitian PSD
    Eigen::VectorXd mass;  // lumped areas on dofs

    int size() const { return space.size(); }
    /// Restrict a full-vertex section to the dof vector / prolong back.
    Eigen::VectorXcd restrict_section(const Eigen::VectorXcd& full) const;
    Eigen::VectorXcd prolong(const Eigen::VectorXcd& dofs) const;
};

ModeOperator build_mode_operator(std::shared_ptr<const SurfaceMesh> mesh, int n);

struct EigenResult {
    std::vector<double> values;
    std::vector<Eigen::VectorXcd> vectors;  // mass-orthonormal dof vectors
    bool converged = true;
    double max_residual = 0.0;
};

/// k smallest generalized eigenpairs of (stiffness, mass). Shift-invert
/// subspace iteration; dense solve below `dense_threshold` unknowns or when
/// forced. Residual criterion ||(L - lambda M) u|| / ||M u|| <= tol.
EigenResult smallest_eigenvalues(const ModeOperator& op, int k, double tol = 1e-9,
                                 bool force_dense = false, int dense_threshold = 2000);

struct LambdaEntry {
    int n = 0;
    std::vector<double> per_level;  // least eigenvalue per refinement level
    std::vector<int> unknowns;      // dofs per level
    double extrapolated = 0.0;      // Richardson in h^2 from the last two levels
    bool unstable = false;          // last two levels disagree by > 10%
    bool solver_failed = false;
};

struct LambdaProfile {
    std::vector<int> levels;
    std::vector<LambdaEntry> entries;  // one per mode in scan order

    const LambdaEntry* find(int n) const;
};

/// Least eigenvalue per mode (least nonzero for n = 0, where the constant
/// section is deflated) over the given refinement levels.
LambdaProfile lambda_profile(std::shared_ptr<const TriangulatedFlatSurface> surface,
                             const std::vector<int>& modes,
                             const std::vector<int>& levels, double tol = 1e-9);

struct CheegerRow {
    int n = 0;
    double lambda = 0.0;
    double q_n = 0.0;
    double ratio = 0.0;        // lambda / q_n^2, infinity flagged via q_zero
    bool q_zero = false;       // q_n = 0 (ratio not meaningful)
    bool kernel_mismatch = false;  // q_n = 0 but lambda not ~ 0
};

struct CheegerReport {
    std::vector<CheegerRow> rows;
    double c_eff = 0.0;  // min over rows with q_n > 0 of lambda / q_n^2
    int argmin_n = 0;
};

CheegerReport cheeger_report(const LambdaProfile& profile,
                             const std::vector<double>& holonomy_angles);

struct HSolveResult {
    ThetaFourierField u;
    double residual = 0.0;  // max over modes of ||H u - f|| / ||f||
    bool ok = true;
    // set when a mode carries data along a near-kernel direction
    std::optional<std::pair<int, int>> offending_mode_pair;  // (n, k)
    std::string message;
};

/// Spectral inverse of H mode by mode: the K lowest eigenpairs are inverted
/// directly, the remainder solved iteratively on their orthogonal complement.
/// The mode-0 component of f must be zero-mean (mass-weighted) to tol.
HSolveResult solve_H(const ThetaFourierField& f, int K = 8, double tol = 1e-9);

/// Eigenvalues of the epsilon-deformed operator on mode n are the plain ones
/// shifted by epsilon^2 n^2 (Theta^2 = -n^2 on the mode).
std::vector<double> epsilon_shifted(const std::vector<double>& lambdas, int n,
                                    double epsilon);

}  // namespace flatspec
