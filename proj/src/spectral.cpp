#include "flatspec/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>

#include "flatspec/diophantine.hpp"

namespace flatspec {

namespace {

using Cplx = std::complex<double>;
using Triplet = Eigen::Triplet<Cplx>;

Cplx phase(double angle) { return std::exp(Cplx(0, angle)); }

}  // namespace

Eigen::VectorXcd ModeOperator::restrict_section(const Eigen::VectorXcd& full) const {
    Eigen::VectorXcd out(space.size());
    for (int d = 0; d < space.size(); ++d) out[d] = full[space.vertex_of_dof[d]];
    return out;
}

Eigen::VectorXcd ModeOperator::prolong(const Eigen::VectorXcd& dofs) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(mesh->num_vertices());
    for (int d = 0; d < space.size(); ++d) out[space.vertex_of_dof[d]] = dofs[d];
    return out;
}

ModeOperator build_mode_operator(std::shared_ptr<const SurfaceMesh> mesh, int n) {
    ModeOperator op;
    op.mesh = std::move(mesh);
    op.n = n;
    op.space = ModeSpace::build(*op.mesh, n);
    const int dofs = op.space.size();

    std::vector<Triplet> trips;
    trips.reserve(op.mesh->faces().size() * 12);
    for (const MeshFace& f : op.mesh->faces()) {
        // Section value in the face chart is exp(i n R_c) * (home-frame value).
        std::array<Cplx, 3> ph;
        std::array<int, 3> dof;
        for (int c = 0; c < 3; ++c) {
            ph[c] = phase(n * f.rot_to_home[c]);
            dof[c] = op.space.dof_of_vertex[f.v[c]];
        }
        for (int c = 0; c < 3; ++c) {
            const int a = (c + 1) % 3, b = (c + 2) % 3;
            const Vec2 u = f.pos[a] - f.pos[c], v = f.pos[b] - f.pos[c];
            const double w = dot(u, v) / (4.0 * f.area);  // cot(angle at c) / 2
            const int i = dof[a], j = dof[b];
            if (i >= 0) trips.emplace_back(i, i, Cplx(w, 0));
            if (j >= 0) trips.emplace_back(j, j, Cplx(w, 0));
            if (i >= 0 && j >= 0) {
                trips.emplace_back(i, j, -w * std::conj(ph[a]) * ph[b]);
                trips.emplace_back(j, i, -w * std::conj(ph[b]) * ph[a]);
            }
        }
    }
    op.stiffness.resize(dofs, dofs);
    op.stiffness.setFromTriplets(trips.begin(), trips.end());
    op.mass.resize(dofs);
    for (int d = 0; d < dofs; ++d)
        op.mass[d] = op.mesh->lumped_area(op.space.vertex_of_dof[d]);
    return op;
}

namespace {

double eigen_residual(const ModeOperator& op, double lambda, const Eigen::VectorXcd& x) {
    const Eigen::VectorXcd mx = op.mass.asDiagonal() * x;
    return (op.stiffness * x - lambda * mx).norm() / std::max(mx.norm(), 1e-300);
}

EigenResult dense_eigenpairs(const ModeOperator& op, int k) {
    const int dofs = op.size();
    Eigen::MatrixXcd L(op.stiffness);
    Eigen::VectorXd dinv = op.mass.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXcd B = dinv.asDiagonal() * L * dinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(B);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    EigenResult res;
    for (int i = 0; i < std::min(k, dofs); ++i) {
        res.values.push_back(es.eigenvalues()[i]);
        Eigen::VectorXcd x = dinv.asDiagonal() * es.eigenvectors().col(i);
        res.vectors.push_back(x);
        res.max_residual = std::max(res.max_residual,
                                    eigen_residual(op, res.values.back(), x));
    }
    return res;
}

EigenResult sparse_eigenpairs(const ModeOperator& op, int k, double tol) {
    const int dofs = op.size();
    const double scale =
        op.stiffness.diagonal().real().sum() / std::max(op.mass.sum(), 1e-300);
    const double sigma = std::max(1e-10 * scale, 1e-14);
    SparseC A = op.stiffness;
    for (int d = 0; d < dofs; ++d) A.coeffRef(d, d) += sigma * op.mass[d];
    Eigen::SimplicialLDLT<SparseC> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("shift-invert factorization failed");

    const int q = std::min(dofs, std::max(2 * k + 4, k + 8));
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd X(dofs, q);
    for (int j = 0; j < q; ++j)
        for (int i = 0; i < dofs; ++i) X(i, j) = Cplx(gauss(rng), gauss(rng));

    EigenResult res;
    Eigen::VectorXd vals;
    for (int iter = 0; iter < 400; ++iter) {
        Eigen::MatrixXcd Z = ldlt.solve(op.mass.asDiagonal() * X);
        // Rayleigh-Ritz on the iterated subspace.
        Eigen::MatrixXcd G = Z.adjoint() * (op.stiffness * Z);
        Eigen::MatrixXcd S = Z.adjoint() * (op.mass.asDiagonal() * Z);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, S);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("subspace Rayleigh-Ritz failed");
        X = Z * es.eigenvectors();
        vals = es.eigenvalues();
        // M-normalize columns.
        for (int j = 0; j < q; ++j) {
            const double nrm = std::sqrt(
                std::abs((X.col(j).adjoint() * (op.mass.asDiagonal() * X.col(j)))(0)));
            if (nrm > 0) X.col(j) /= nrm;
        }
        double worst = 0.0;
        for (int j = 0; j < std::min(k, q); ++j)
            worst = std::max(worst, eigen_residual(op, vals[j], X.col(j)));
        if (worst <= tol) {
            res.max_residual = worst;
            for (int j = 0; j < std::min(k, q); ++j) {
                res.values.push_back(vals[j]);
                res.vectors.push_back(X.col(j));
            }
            return res;
        }
    }
    res.converged = false;
    for (int j = 0; j < std::min(k, q); ++j) {
        res.values.push_back(vals[j]);
        res.vectors.push_back(X.col(j));
        res.max_residual = std::max(res.max_residual, eigen_residual(op, vals[j], X.col(j)));
    }
    return res;
}

}  // namespace

EigenResult smallest_eigenvalues(const ModeOperator& op, int k, double tol,
                                 bool force_dense, int dense_threshold) {
    if (op.size() == 0) throw std::runtime_error("empty mode space");
    k = std::min(k, op.size());
    if (force_dense || op.size() < dense_threshold) return dense_eigenpairs(op, k);
    return sparse_eigenpairs(op, k, tol);
}

const LambdaEntry* LambdaProfile::find(int n) const {
    for (const auto& e : entries)
        if (e.n == n) return &e;
    return nullptr;
}

LambdaProfile lambda_profile(std::shared_ptr<const TriangulatedFlatSurface> surface,
                             const std::vector<int>& modes,
                             const std::vector<int>& levels, double tol) {
    LambdaProfile profile;
    profile.levels = levels;
    std::vector<std::shared_ptr<const SurfaceMesh>> meshes;
    for (int lvl : levels) meshes.push_back(std::make_shared<SurfaceMesh>(surface, lvl));
    for (int n : modes) {
        LambdaEntry entry;
        entry.n = n;
        for (const auto& mesh : meshes) {
            try {
                ModeOperator op = build_mode_operator(mesh, n);
                const int k = n == 0 ? 2 : 1;
                EigenResult er = smallest_eigenvalues(op, k, tol);
                if (!er.converged) entry.solver_failed = true;
                entry.per_level.push_back(n == 0 && er.values.size() > 1 ? er.values[1]
                                                                         : er.values[0]);
                entry.unknowns.push_back(op.size());
            } catch (const std::exception&) {
                entry.solver_failed = true;
                entry.per_level.push_back(std::numeric_limits<double>::quiet_NaN());
                entry.unknowns.push_back(0);
            }
        }
        const int L = static_cast<int>(entry.per_level.size());
        if (L >= 2 && !entry.solver_failed) {
            const double coarse = entry.per_level[L - 2], fine = entry.per_level[L - 1];
            entry.extrapolated = fine + (fine - coarse) / 3.0;  // O(h^2) scheme
            entry.unstable =
                std::fabs(fine - coarse) > 0.1 * std::max(std::fabs(entry.extrapolated), 1e-9);
        } else if (L >= 1) {
            entry.extrapolated = entry.per_level.back();
        }
        profile.entries.push_back(std::move(entry));
    }
    return profile;
}

CheegerReport cheeger_report(const LambdaProfile& profile,
                             const std::vector<double>& holonomy_angles) {
    CheegerReport rep;
    rep.c_eff = std::numeric_limits<double>::infinity();
    for (const auto& e : profile.entries) {
        if (e.n == 0 || e.solver_failed) continue;
        CheegerRow row;
        row.n = e.n;
        row.lambda = e.extrapolated;
        row.q_n = simultaneous_distance(holonomy_angles, std::abs(e.n));
        if (row.q_n <= 1e-12) {
            row.q_zero = true;
            row.kernel_mismatch = row.lambda > 1e-6;
        } else {
            row.ratio = row.lambda / (row.q_n * row.q_n);
            if (row.ratio < rep.c_eff) {
                rep.c_eff = row.ratio;
                rep.argmin_n = row.n;
            }
        }
        rep.rows.push_back(row);
    }
    if (!std::isfinite(rep.c_eff)) rep.c_eff = 0.0;
    return rep;
}

namespace {

// Conjugate gradients for L u = b restricted to the M-orthogonal complement of
// the given eigenvectors (which span near-kernel / already-inverted directions).
Eigen::VectorXcd deflated_cg(const ModeOperator& op, const Eigen::VectorXcd& b,
                             const std::vector<Eigen::VectorXcd>& deflate, double tol,
                             int max_iter) {
    auto project = [&](Eigen::VectorXcd& x) {
        for (const auto& v : deflate) {
            const Cplx c = (v.adjoint() * (op.mass.asDiagonal() * x))(0);
            x -= c * v;
        }
    };
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(b.size());
    Eigen::VectorXcd r = b;
    // Remove components of b along the deflated directions in the dual pairing.
    for (const auto& v : deflate) {
        const Cplx c = (v.adjoint() * r)(0);
        r -= c * (op.mass.asDiagonal() * v);
    }
    Eigen::VectorXcd p = r;
    double rs = r.squaredNorm();
    const double target = tol * std::max(b.norm(), 1e-300);
    for (int it = 0; it < max_iter && std::sqrt(rs) > target; ++it) {
        Eigen::VectorXcd Lp = op.stiffness * p;
        const double pLp = std::real((p.adjoint() * Lp)(0));
        if (pLp <= 0) break;
        const double alpha = rs / pLp;
        x += alpha * p;
        r -= alpha * Lp;
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    project(x);
    return x;
}

}  // namespace

HSolveResult solve_H(const ThetaFourierField& f, int K, double tol) {
    HSolveResult res;
    res.u = ThetaFourierField(f.mesh_ptr(), f.truncation());
    const auto mesh = f.mesh_ptr();
    for (int n = -f.truncation(); n <= f.truncation(); ++n) {
        if (f.mode(n).norm() == 0.0) continue;
        ModeOperator op = build_mode_operator(mesh, n);
        Eigen::VectorXcd g = op.restrict_section(f.mode(n));
        const double gnorm = std::sqrt(std::abs(
            (g.adjoint() * (op.mass.asDiagonal() * g))(0)));
        if (gnorm == 0.0) continue;
        if (n == 0) {
            const Cplx mean = (op.mass.cast<Cplx>().dot(g)) / op.mass.sum();
            if (std::abs(mean) * std::sqrt(op.mass.sum()) > 1e3 * tol * gnorm) {
                res.ok = false;
                res.message = "mode-0 right-hand side is not zero-mean";
                return res;
            }
            g.array() -= mean;
        }
        const int k = std::min(K, op.size());
        EigenResult er = smallest_eigenvalues(op, k, tol);
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(op.size());
        std::vector<Eigen::VectorXcd> deflate;
        Eigen::VectorXcd g_rem = g;
        for (int j = 0; j < k; ++j) {
            const Cplx c = (er.vectors[j].adjoint() * (op.mass.asDiagonal() * g))(0);
            if (er.values[j] <= tol) {
                if (std::abs(c) > 1e3 * tol * gnorm) {
                    res.ok = false;
                    res.offending_mode_pair = {n, j};
                    res.message = "right-hand side has a component along a near-kernel "
                                  "eigenvector";
                    return res;
                }
            } else {
                u += (c / er.values[j]) * er.vectors[j];
            }
            deflate.push_back(er.vectors[j]);
            g_rem -= c * er.vectors[j];
        }
        u += deflated_cg(op, op.mass.asDiagonal() * g_rem, deflate, tol, 20000);
        if (n == 0) {
            const Cplx mean = (op.mass.cast<Cplx>().dot(u)) / op.mass.sum();
            u.array() -= mean;
        }
        const double rnorm =
            (op.stiffness * u - Eigen::VectorXcd(op.mass.asDiagonal() * g)).norm() /
            Eigen::VectorXcd(op.mass.asDiagonal() * g).norm();
        res.residual = std::max(res.residual, rnorm);
        res.u.mode(n) = op.prolong(u);
    }
    return res;
}

std::vector<double> epsilon_shifted(const std::vector<double>& lambdas, int n,
                                    double epsilon) {
    std::vector<double> out = lambdas;
    for (double& v : out) v += epsilon * epsilon * n * n;
    return out;
}

}  // namespace flatspec
