#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "flatspec/mesh.hpp"

namespace flatspec {

class CROperators;  // defined in cohomology.hpp

/// Function on the unit tangent bundle truncated to fiber-Fourier modes
/// |n| <= N. Each mode is a complex section stored over the full mesh vertex
/// set in the per-vertex home chart frame; entries at vertices that do not
/// support the mode (nontrivial phase monodromy) are kept at zero.
class ThetaFourierField {
public:
    ThetaFourierField() = default;
    ThetaFourierField(std::shared_ptr<const SurfaceMesh> mesh, int N);

    const SurfaceMesh& mesh() const { return *mesh_; }
    std::shared_ptr<const SurfaceMesh> mesh_ptr() const { return mesh_; }
    int truncation() const { return N_; }

    Eigen::VectorXcd& mode(int n) { return modes_.at(n + N_); }
    const Eigen::VectorXcd& mode(int n) const { return modes_.at(n + N_); }
    bool has_mode(int n) const { return n >= -N_ && n <= N_; }

    /// Zero entries at vertices excluded from the mode space.
    void enforce_mode_support();
    /// Copy with the truncation widened to N' >= N (new modes zero).
    ThetaFourierField widened(int Nprime) const;

private:
    std::shared_ptr<const SurfaceMesh> mesh_;
    int N_ = 0;
    std::vector<Eigen::VectorXcd> modes_;
};

/// Mass-weighted inner product on one mode: 2*pi * sum_v A_v conj(u_v) v_v.
std::complex<double> mode_inner(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                                const Eigen::VectorXcd& v);
double mode_norm(const SurfaceMesh& mesh, const Eigen::VectorXcd& u);

/// L^2 inner product / norm on the tangent bundle (sum over modes).
std::complex<double> field_inner(const ThetaFourierField& u, const ThetaFourierField& v);
double field_norm(const ThetaFourierField& u);

/// Pointwise sample of a function on the unit tangent bundle: arguments are
/// (chart id, position in chart, direction angle in chart).
using TangentFunction = std::function<std::complex<double>(int, Vec2, double)>;

/// Fiber-Fourier projection by trapezoid quadrature with Q uniform angles
/// (exact for trigonometric polynomials of degree < Q - N).
ThetaFourierField project_field(std::shared_ptr<const SurfaceMesh> mesh,
                                const TangentFunction& f, int N, int Q = 0);

/// Single projection pi_n.
Eigen::VectorXcd project_pi_n(const SurfaceMesh& mesh, const TangentFunction& f, int n,
                              int Q);

/// Sobolev norm |f|_{r,s} = (sum_{i+j<=r} sum_{l<=s} ||X^i Y^j Theta^l f||^2)^{1/2}.
/// Requires discrete X, Y realizations covering modes [-N-r, N+r]; r <= 2.
double sobolev_norm(const ThetaFourierField& f, int r, int s, const CROperators& cr);

struct ModeEquivalenceReport {
    double lhs = 0.0;  // |f|_{r,s}^2
    double rhs = 0.0;  // sum_n (1 + n^{2s}) |pi_n f|_{r,0}^2
    double ratio = 1.0;
};

/// Both sides of the mode-wise norm-equivalence sandwich and their ratio.
ModeEquivalenceReport mode_equivalence_check(const ThetaFourierField& f, int r, int s,
                                             const CROperators& cr);

/// Content hash of the surface combinatorics and geometry (hex string);
/// embedded in field manifests and CLI reports.
std::string surface_hash(const TriangulatedFlatSurface& surface);

/// Serialization: writes <prefix>_mode<n>.csv per mode (vertex, re, im) and a
/// <prefix>.manifest.json listing N, refinement level and the surface hash.
void save_field(const ThetaFourierField& f, const std::string& prefix);
ThetaFourierField load_field(std::shared_ptr<const SurfaceMesh> mesh,
                             const std::string& prefix);

}  // namespace flatspec
