#include "flatspec/cohomology.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "flatspec/spectral.hpp"

namespace flatspec {

namespace {

using Cplx = std::complex<double>;
using Triplet = Eigen::Triplet<Cplx>;

Cplx phase(double angle) { return std::exp(Cplx(0, angle)); }

// Complex gradient coefficient of the barycentric coordinate of corner c:
// grad(lambda_c) = rot90(p_{c+2} - p_{c+1}) / (2 A), packed as x + i y.
Cplx grad_coeff(const MeshFace& f, int c) {
    const Vec2 e = f.pos[(c + 2) % 3] - f.pos[(c + 1) % 3];
    return Cplx(-e.y, e.x) / (2.0 * f.area);
}

}  // namespace

CROperators::CROperators(std::shared_ptr<const SurfaceMesh> mesh, int n_min, int n_max)
    : mesh_(std::move(mesh)), n_min_(n_min), n_max_(n_max) {
    if (n_min >= n_max) throw std::invalid_argument("empty mode range");
    for (int n = n_min; n <= n_max; ++n) spaces_.push_back(ModeSpace::build(*mesh_, n));

    // D+_n: face-gradient of d/dx + i d/dy in the face chart, transported into
    // the home frames, mass-averaged to vertices.
    for (int n = n_min + 1; n <= n_max; ++n) {
        const ModeSpace& dom = space(n);
        const ModeSpace& ran = space(n - 1);
        std::vector<Triplet> trips;
        for (const MeshFace& f : mesh_->faces()) {
            for (int j = 0; j < 3; ++j) {
                const int row = ran.dof_of_vertex[f.v[j]];
                if (row < 0) continue;
                const double wj =
                    (f.area / 3.0) / mesh_->lumped_area(f.v[j]);
                const Cplx out_ph = phase(-(n - 1) * f.rot_to_home[j]);
                for (int c = 0; c < 3; ++c) {
                    const int col = dom.dof_of_vertex[f.v[c]];
                    if (col < 0) continue;
                    trips.emplace_back(row, col,
                                       wj * out_ph * grad_coeff(f, c) *
                                           phase(n * f.rot_to_home[c]));
                }
            }
        }
        SparseC D(ran.size(), dom.size());
        D.setFromTriplets(trips.begin(), trips.end());
        dplus_.push_back(std::move(D));
    }

    // D-_n := -M_{n+1}^{-1} (D+_{n+1})^H M_n, the exact negative adjoint.
    for (int n = n_min; n < n_max; ++n) {
        const ModeSpace& dom = space(n);
        const ModeSpace& ran = space(n + 1);
        Eigen::VectorXd m_dom(dom.size()), m_ran_inv(ran.size());
        for (int d = 0; d < dom.size(); ++d)
            m_dom[d] = mesh_->lumped_area(dom.vertex_of_dof[d]);
        for (int d = 0; d < ran.size(); ++d)
            m_ran_inv[d] = 1.0 / mesh_->lumped_area(ran.vertex_of_dof[d]);
        SparseC D(dplus(n + 1).adjoint());
        for (int k = 0; k < D.outerSize(); ++k)
            for (SparseC::InnerIterator it(D, k); it; ++it)
                it.valueRef() *= -m_ran_inv[it.row()] * m_dom[it.col()];
        dminus_.push_back(std::move(D));
    }
}

Eigen::VectorXd CROperators::mass(int n) const {
    const ModeSpace& sp = space(n);
    Eigen::VectorXd m(sp.size());
    for (int d = 0; d < sp.size(); ++d) m[d] = mesh_->lumped_area(sp.vertex_of_dof[d]);
    return m;
}

namespace {

Eigen::VectorXcd restrict_to(const ModeSpace& sp, const Eigen::VectorXcd& full) {
    Eigen::VectorXcd out(sp.size());
    for (int d = 0; d < sp.size(); ++d) out[d] = full[sp.vertex_of_dof[d]];
    return out;
}

Eigen::VectorXcd prolong_from(const ModeSpace& sp, const Eigen::VectorXcd& dofs,
                              int num_vertices) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(num_vertices);
    for (int d = 0; d < sp.size(); ++d) out[sp.vertex_of_dof[d]] = dofs[d];
    return out;
}

}  // namespace

ThetaFourierField CROperators::apply_X(const ThetaFourierField& u) const {
    const int N = u.truncation();
    const int Nout = N + 1;
    if (n_min_ > -Nout - 1 || n_max_ < Nout + 1)
        throw std::invalid_argument("operator mode range too narrow for apply_X");
    ThetaFourierField out(mesh_, Nout);
    const int V = mesh_->num_vertices();
    for (int m = -Nout; m <= Nout; ++m) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(space(m).size());
        if (u.has_mode(m + 1))
            acc += dplus(m + 1) * restrict_to(space(m + 1), u.mode(m + 1));
        if (u.has_mode(m - 1))
            acc += dminus(m - 1) * restrict_to(space(m - 1), u.mode(m - 1));
        out.mode(m) = prolong_from(space(m), Eigen::VectorXcd(0.5 * acc), V);
    }
    return out;
}

ThetaFourierField CROperators::apply_Y(const ThetaFourierField& u) const {
    const int N = u.truncation();
    const int Nout = N + 1;
    if (n_min_ > -Nout - 1 || n_max_ < Nout + 1)
        throw std::invalid_argument("operator mode range too narrow for apply_Y");
    ThetaFourierField out(mesh_, Nout);
    const int V = mesh_->num_vertices();
    const Cplx inv2i(0, -0.5);  // 1/(2i)
    for (int m = -Nout; m <= Nout; ++m) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(space(m).size());
        if (u.has_mode(m + 1))
            acc += dplus(m + 1) * restrict_to(space(m + 1), u.mode(m + 1));
        if (u.has_mode(m - 1))
            acc -= dminus(m - 1) * restrict_to(space(m - 1), u.mode(m - 1));
        out.mode(m) = prolong_from(space(m), Eigen::VectorXcd(inv2i * acc), V);
    }
    return out;
}

namespace {

// Deterministic smooth mode-n section: a low eigenvector of the mode
// Laplacian, the discrete proxy for a smooth section.
Eigen::VectorXcd smooth_section(std::shared_ptr<const SurfaceMesh> mesh, int n,
                                int which) {
    ModeOperator op = build_mode_operator(std::move(mesh), n);
    const int k = std::min(which + 1, op.size());
    EigenResult er = smallest_eigenvalues(op, k, 1e-10);
    return op.prolong(er.vectors.at(k - 1));
}

}  // namespace

std::vector<NormIdentityRow> norm_identity_check(
    std::shared_ptr<const TriangulatedFlatSurface> surface, int n,
    const std::vector<int>& levels, unsigned /*seed*/) {
    std::vector<NormIdentityRow> rows;
    for (int lvl : levels) {
        auto mesh = std::make_shared<SurfaceMesh>(surface, lvl);
        // The Sobolev norm below applies X and Y to a truncation-|n| field,
        // which touches modes out to |n| + 2.
        CROperators cr(mesh, -std::abs(n) - 2, std::abs(n) + 2);
        ThetaFourierField v(mesh, std::abs(n));
        v.mode(n) = smooth_section(mesh, n, 2);
        const double dp = mode_norm(*mesh, prolong_from(cr.space(n - 1),
            Eigen::VectorXcd(cr.dplus(n) * restrict_to(cr.space(n), v.mode(n))),
            mesh->num_vertices()));
        const double dm = mode_norm(*mesh, prolong_from(cr.space(n + 1),
            Eigen::VectorXcd(cr.dminus(n) * restrict_to(cr.space(n), v.mode(n))),
            mesh->num_vertices()));
        const double v10 = sobolev_norm(v, 1, 0, cr);
        NormIdentityRow row;
        row.level = lvl;
        row.h = mesh->mesh_size();
        row.deviation = std::fabs(dp * dp - dm * dm) / std::max(v10 * v10, 1e-300);
        rows.push_back(row);
    }
    return rows;
}

double h_consistency_defect(const CROperators& cr, int n, unsigned which) {
    auto mesh = cr.mesh_ptr();
    ModeOperator op = build_mode_operator(mesh, n);
    // Probe with a low eigenvector of the mode Laplacian: every level then
    // targets the same continuum eigenfunction, so the defect measures the
    // discretization gap between the composed first-order operators and the
    // stiffness form on a fixed smooth section.  (A random probe retains
    // mesh-scale frequencies, where the two discretizations differ at O(1).)
    const int k = std::min<int>(static_cast<int>(which) + 1, op.size());
    EigenResult er = smallest_eigenvalues(op, k, 1e-12);
    Eigen::VectorXcd v = er.vectors.at(k - 1);
    v /= v.norm();

    const Eigen::VectorXcd h_stiff =
        op.mass.cwiseInverse().asDiagonal() * (op.stiffness * v);
    const Eigen::VectorXcd vp = cr.dplus(n) * restrict_to(cr.space(n), op.prolong(v));
    const Eigen::VectorXcd vm = cr.dminus(n) * restrict_to(cr.space(n), op.prolong(v));
    const Eigen::VectorXcd h_cr = -0.5 * (cr.dminus(n - 1) * vp + cr.dplus(n + 1) * vm);
    return (h_cr - h_stiff).norm() / std::max(h_stiff.norm(), 1e-300);
}

namespace {

// Stacked block vector over modes [-N, N] in the dof spaces of `cr`.
struct BlockVec {
    const CROperators* cr;
    int N;
    std::vector<Eigen::VectorXcd> blocks;

    BlockVec(const CROperators& ops, int trunc) : cr(&ops), N(trunc) {
        for (int n = -N; n <= N; ++n)
            blocks.emplace_back(Eigen::VectorXcd::Zero(ops.space(n).size()));
    }
    Eigen::VectorXcd& at(int n) { return blocks[n + N]; }
    const Eigen::VectorXcd& at(int n) const { return blocks[n + N]; }
};

double block_inner(const BlockVec& a, const BlockVec& b) {
    // Real part of the mass inner product (used for CG scalars).
    double acc = 0.0;
    for (int n = -a.N; n <= a.N; ++n) {
        const Eigen::VectorXd m = a.cr->mass(n);
        acc += std::real((a.at(n).adjoint() * (m.asDiagonal() * b.at(n)))(0));
    }
    return kTwoPi * acc;
}

double block_norm(const BlockVec& a) { return std::sqrt(block_inner(a, a)); }

// Truncated X from modes [-u.N, u.N] to modes [-outN, outN]:
// out_n = (D+ u_{n+1} + D- u_{n-1}) / 2, with modes of u beyond u.N zero.
// Used rectangularly (outN = u.N + 1): the extra rows pin the top modes,
// which would otherwise be free and seed spurious kernel elements that
// cascade into the interior modes.
BlockVec apply_block_X(const CROperators& cr, const BlockVec& u, int outN) {
    BlockVec out(cr, outN);
    for (int n = -outN; n <= outN; ++n) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(cr.space(n).size());
        if (n + 1 <= u.N) acc += cr.dplus(n + 1) * u.at(n + 1);
        if (n - 1 >= -u.N) acc += cr.dminus(n - 1) * u.at(n - 1);
        out.at(n) = 0.5 * acc;
    }
    return out;
}

// Adjoint of the rectangular X above w.r.t. the mass inner products:
// (D+_n)* = -D-_{n-1} and (D-_n)* = -D+_{n+1}, so X* = -X restricted back
// to the domain modes [-outN, outN].
BlockVec apply_block_Xt(const CROperators& cr, const BlockVec& z, int outN) {
    BlockVec out = apply_block_X(cr, z, outN);
    for (auto& blk : out.blocks) blk = -blk;
    return out;
}

void axpy(BlockVec& y, double alpha, const BlockVec& x) {
    for (size_t i = 0; i < y.blocks.size(); ++i) y.blocks[i] += alpha * x.blocks[i];
}

void scale_add(BlockVec& p, const BlockVec& s, double beta) {
    for (size_t i = 0; i < p.blocks.size(); ++i)
        p.blocks[i] = s.blocks[i] + beta * p.blocks[i];
}

}  // namespace

XSolveResult solve_X(const CROperators& cr, const ThetaFourierField& f, int N,
                     double tol, int max_iter) {
    if (cr.n_min() > -N - 1 || cr.n_max() < N + 1)
        throw std::invalid_argument("operator mode range too narrow for solve_X");
    if (f.truncation() > N + 1)
        throw std::invalid_argument("truncation below the mode support of f");
    auto mesh = cr.mesh_ptr();

    // Least squares for the rectangular truncation X: modes [-N, N] ->
    // modes [-(N+1), N+1].  The extra boundary rows leave only per-mode
    // constants in the kernel, so the minimum-norm solution is the
    // zero-mean one.
    const int Nr = N + 1;
    BlockVec b(cr, Nr);
    for (int n = -std::min(Nr, f.truncation()); n <= std::min(Nr, f.truncation()); ++n)
        b.at(n) = restrict_to(cr.space(n), f.mode(n));

    // The system annihilates constants: f must be mass-orthogonal to them.
    {
        const Eigen::VectorXd m = cr.mass(0);
        const Cplx mean = m.cast<Cplx>().dot(b.at(0)) / m.sum();
        const double bn = block_norm(b);
        if (std::abs(mean) * std::sqrt(kTwoPi * m.sum()) > 1e-8 * std::max(bn, 1e-300))
            throw std::invalid_argument(
                "right-hand side must vanish on constant functions");
    }

    // CGLS: iterates stay in range(X*) = ker(X)^perp, so the limit is the
    // minimum-norm least-squares solution.
    XSolveResult res;
    BlockVec x(cr, N), r = b;
    BlockVec s = apply_block_Xt(cr, r, N);
    BlockVec p = s;
    double gamma = block_inner(s, s);
    const double bnorm = std::max(block_norm(b), 1e-300);
    const double s_target = tol * std::sqrt(gamma);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (block_norm(r) / bnorm <= tol) break;
        if (std::sqrt(gamma) <= std::max(s_target, 1e-14 * bnorm)) break;
        BlockVec q = apply_block_X(cr, p, Nr);
        const double qq = block_inner(q, q);
        if (qq <= 0) break;
        const double alpha = gamma / qq;
        axpy(x, alpha, p);
        axpy(r, -alpha, q);
        s = apply_block_Xt(cr, r, N);
        const double gamma_new = block_inner(s, s);
        scale_add(p, s, gamma_new / gamma);
        gamma = gamma_new;
    }
    res.iterations = it;

    // Deterministic zero-mean output.
    {
        const Eigen::VectorXd m = cr.mass(0);
        const Cplx mean = m.cast<Cplx>().dot(x.at(0)) / m.sum();
        x.at(0).array() -= mean;
    }

    BlockVec q = apply_block_X(cr, x, Nr);
    axpy(q, -1.0, b);
    res.residual = block_norm(q) / bnorm;
    res.converged = res.residual <= 10 * tol;

    res.u = ThetaFourierField(mesh, N);
    for (int n = -N; n <= N; ++n)
        res.u.mode(n) = prolong_from(cr.space(n), x.at(n), mesh->num_vertices());
    return res;
}

namespace {

// Random smooth zero-mean field with the given mode content.
ThetaFourierField random_smooth_field(const CROperators& cr, int N, std::mt19937_64& rng) {
    auto mesh = cr.mesh_ptr();
    ThetaFourierField v(mesh, N);
    std::normal_distribution<double> gauss;
    for (int n = -N; n <= N; ++n) {
        ModeOperator op = build_mode_operator(mesh, n);
        Eigen::VectorXcd r(op.size());
        for (int i = 0; i < op.size(); ++i) r[i] = Cplx(gauss(rng), gauss(rng));
        SparseC A = op.stiffness;
        for (int d = 0; d < op.size(); ++d) A.coeffRef(d, d) += op.mass[d];
        Eigen::SimplicialLDLT<SparseC> ldlt(A);
        Eigen::VectorXcd sm = ldlt.solve(op.mass.asDiagonal() * r);
        v.mode(n) = op.prolong(sm);
    }
    const Eigen::VectorXd m = cr.mass(0);
    Eigen::VectorXcd u0 = restrict_to(cr.space(0), v.mode(0));
    u0.array() -= m.cast<Cplx>().dot(u0) / m.sum();
    v.mode(0) = prolong_from(cr.space(0), u0, mesh->num_vertices());
    const double nrm = field_norm(v);
    if (nrm > 0)
        for (int n = -N; n <= N; ++n) v.mode(n) /= nrm;
    return v;
}

}  // namespace

AprioriReport apriori_report(const CROperators& cr, int samples, int r, int s,
                             int r_prime, int s_prime, double gamma, unsigned seed) {
    AprioriReport rep;
    rep.index_gap_ok = (r > r_prime + 1) && (s > s_prime + 2 * gamma + 1.5);
    std::mt19937_64 rng(seed);
    const int N = std::min(4, std::min(-cr.n_min(), cr.n_max()) - std::max(r, 2) - 1);
    for (int i = 0; i < samples; ++i) {
        ThetaFourierField v = random_smooth_field(cr, std::max(N, 0), rng);
        ThetaFourierField xv = cr.apply_X(v);
        const double num = sobolev_norm(v, r_prime, s_prime, cr);
        const double den = sobolev_norm(xv, r, s, cr);
        if (den < 1e-10 * num) {
            rep.divergence_flag = true;
            rep.ratios.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        rep.ratios.push_back(num / den);
    }
    double sum = 0.0;
    int finite = 0;
    for (double x : rep.ratios) {
        if (!std::isfinite(x)) continue;
        rep.max_ratio = std::max(rep.max_ratio, x);
        sum += x;
        ++finite;
    }
    if (rep.divergence_flag) rep.max_ratio = std::numeric_limits<double>::infinity();
    rep.mean_ratio = finite ? sum / finite : 0.0;
    return rep;
}

InvariantResult invariant_from_meromorphic(const CROperators& cr,
                                           const Eigen::VectorXcd& m_section, int n,
                                           int sign, double tol, unsigned seed) {
    InvariantResult res;
    auto mesh = cr.mesh_ptr();
    const double mnorm = mode_norm(*mesh, m_section);
    const int N = std::min(std::abs(n) + 2, std::min(-cr.n_min(), cr.n_max()) - 1);
    if (mnorm == 0.0) {
        res.D = ThetaFourierField(mesh, N);
        return res;
    }
    // Discrete meromorphicity: the chosen CR derivative nearly annihilates m.
    const Eigen::VectorXcd dm =
        sign > 0 ? Eigen::VectorXcd(cr.dplus(n) * restrict_to(cr.space(n), m_section))
                 : Eigen::VectorXcd(cr.dminus(n) * restrict_to(cr.space(n), m_section));
    const double dnorm = mode_norm(
        *mesh, prolong_from(cr.space(n + (sign > 0 ? -1 : 1)), dm, mesh->num_vertices()));
    if (dnorm > 100 * tol * mnorm) {
        res.ok = false;
        res.message = "input section is not discretely meromorphic";
        return res;
    }

    ThetaFourierField m_field(mesh, std::abs(n));
    m_field.mode(n) = m_section;
    XSolveResult xs = solve_X(cr, m_field, N, tol / 10);
    res.solve_residual = xs.residual;

    // D = D^sign U, applied per mode of U.
    res.D = ThetaFourierField(mesh, N + 1);
    for (int k = -N; k <= N; ++k) {
        Eigen::VectorXcd uk = restrict_to(cr.space(k), xs.u.mode(k));
        if (sign > 0)
            res.D.mode(k - 1) += prolong_from(cr.space(k - 1),
                                              Eigen::VectorXcd(cr.dplus(k) * uk),
                                              mesh->num_vertices());
        else
            res.D.mode(k + 1) += prolong_from(cr.space(k + 1),
                                              Eigen::VectorXcd(cr.dminus(k) * uk),
                                              mesh->num_vertices());
    }

    const double dnorm_field = field_norm(res.D);
    if (dnorm_field <= 1e-12 * mnorm) {
        // The right-hand side was orthogonal to the range of X: the minimum
        // norm solve returns U = 0 and the functional is the zero functional,
        // trivially invariant.
        res.defect = 0.0;
        return res;
    }
    if (!xs.converged && xs.residual > 1e-6) {
        res.ok = false;
        res.message = "X-solve residual too large";
        return res;
    }
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 8; ++t) {
        ThetaFourierField v = random_smooth_field(cr, std::max(N - 1, 0), rng);
        ThetaFourierField xv = cr.apply_X(v);
        const double pairing = std::abs(field_inner(res.D, xv));
        const double v10 = sobolev_norm(v, 1, 0, cr);
        res.defect = std::max(res.defect, pairing / (dnorm_field * std::max(v10, 1e-300)));
    }
    return res;
}

}  // namespace flatspec
