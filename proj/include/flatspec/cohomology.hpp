#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <random>
#include <vector>

#include "flatspec/harmonic.hpp"
#include "flatspec/mesh.hpp"

namespace flatspec {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

/// Discrete Cauchy-Riemann operators per fiber mode. D+ (mode n -> n-1) is a
/// piecewise-linear face-gradient realization of d/dx + i*d/dy twisted by the
/// connection phases; D- (mode n -> n+1) is defined as minus the mass-weighted
/// adjoint of D+, which makes the adjoint relation exact by construction.
/// X = (D+ + D-)/2 and Y = (D+ - D-)/(2i).
class CROperators {
public:
    CROperators(std::shared_ptr<const SurfaceMesh> mesh, int n_min, int n_max);

    const SurfaceMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const SurfaceMesh> mesh_ptr() const { return mesh_; }
    int n_min() const { return n_min_; }
    int n_max() const { return n_max_; }

    const ModeSpace& space(int n) const { return spaces_.at(n - n_min_); }
    Eigen::VectorXd mass(int n) const;  // lumped areas on the mode's dofs

    /// D+_n : E_n -> E_{n-1}; defined for n in [n_min+1, n_max].
    const SparseC& dplus(int n) const { return dplus_.at(n - n_min_ - 1); }
    /// D-_n : E_n -> E_{n+1}; defined for n in [n_min, n_max-1].
    const SparseC& dminus(int n) const { return dminus_.at(n - n_min_); }

    /// X and Y applied to a truncated field (output truncation grows by one,
    /// clamped to the operator range).
    ThetaFourierField apply_X(const ThetaFourierField& u) const;
    ThetaFourierField apply_Y(const ThetaFourierField& u) const;

private:
    std::shared_ptr<const SurfaceMesh> mesh_;
    int n_min_, n_max_;
    std::vector<ModeSpace> spaces_;
    std::vector<SparseC> dplus_;
    std::vector<SparseC> dminus_;
};

struct NormIdentityRow {
    int level = 0;
    double h = 0.0;
    double deviation = 0.0;  // | ||D+v||^2 - ||D-v||^2 | / |v|_{1,0}^2
};

/// Refinement study of the norm identity ||D+ v|| = ||D- v||, exact only in
/// the continuum; reports the deviation per level on a fixed smooth sample.
std::vector<NormIdentityRow> norm_identity_check(
    std::shared_ptr<const TriangulatedFlatSurface> surface, int n,
    const std::vector<int>& levels, unsigned seed = 1);

/// Relative defect of H = -(X^2+Y^2) against the mode-n stiffness operator,
/// probed on the (which+1)-th lowest mode-Laplacian eigenvector.  The two
/// discretizations are independent; the defect shrinks under refinement on
/// such fixed smooth sections.
double h_consistency_defect(const CROperators& cr, int n, unsigned which = 1);

struct XSolveResult {
    ThetaFourierField u;
    double residual = 0.0;  // ||X u - f|| / ||f||
    int iterations = 0;
    bool converged = false;
};

/// Minimum-norm least-squares solution of the truncated system
/// (D+ u_{n+1} + D- u_{n-1})/2 = f_n for |n| <= N, closure u_{+-(N+1)} = 0,
/// via CGLS in the mass inner product. f must vanish on constants (zero
/// mass-weighted mean of the mode-0 component).
XSolveResult solve_X(const CROperators& cr, const ThetaFourierField& f, int N,
                     double tol = 1e-10, int max_iter = 20000);

struct AprioriReport {
    std::vector<double> ratios;  // |v|_{r',s'} / |Xv|_{r,s} per sample
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    bool index_gap_ok = true;    // r > r'+1 and s > s' + 2*gamma + 3/2
    bool divergence_flag = false;  // a sample with Xv ~ 0 but v not ~ 0
};

/// Samples random smooth zero-mean fields and reports |v|_{r',s'} / |Xv|_{r,s}.
AprioriReport apriori_report(const CROperators& cr, int samples, int r, int s,
                             int r_prime, int s_prime, double gamma, unsigned seed);

struct InvariantResult {
    ThetaFourierField D;     // Riesz representative of the invariant functional
    double solve_residual = 0.0;
    double defect = 0.0;     // max over test fields of |<D, Xv>| / (||D|| |v|_{1,0})
    bool ok = true;
    std::string message;
};

/// Invariant functional from a discretely meromorphic mode section m
/// (D^sign m ~ 0): solves X U = m minimum-norm and returns D = D^sign U with
/// its invariance defect over random smooth test fields. ||D|| = 0 yields
/// defect 0 by convention.
InvariantResult invariant_from_meromorphic(const CROperators& cr,
                                           const Eigen::VectorXcd& m_section, int n,
                                           int sign, double tol = 1e-8,
                                           unsigned seed = 1);

}  // namespace flatspec
