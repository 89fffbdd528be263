#include "flatspec/harmonic.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "flatspec/cohomology.hpp"

namespace flatspec {

ThetaFourierField::ThetaFourierField(std::shared_ptr<const SurfaceMesh> mesh, int N)
    : mesh_(std::move(mesh)), N_(N) {
    if (N < 0) throw std::invalid_argument("negative truncation");
    modes_.assign(2 * N + 1, Eigen::VectorXcd::Zero(mesh_->num_vertices()));
}

void ThetaFourierField::enforce_mode_support() {
    for (int n = -N_; n <= N_; ++n) {
        auto& u = mode(n);
        for (int v = 0; v < mesh_->num_vertices(); ++v)
            if (!mesh_->mode_supported(v, n)) u[v] = 0.0;
    }
}

ThetaFourierField ThetaFourierField::widened(int Nprime) const {
    if (Nprime < N_) throw std::invalid_argument("widened: smaller truncation");
    ThetaFourierField out(mesh_, Nprime);
    for (int n = -N_; n <= N_; ++n) out.mode(n) = mode(n);
    return out;
}

std::complex<double> mode_inner(const SurfaceMesh& mesh, const Eigen::VectorXcd& u,
                                const Eigen::VectorXcd& v) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < u.size(); ++i) acc += mesh.lumped_area(i) * std::conj(u[i]) * v[i];
    return kTwoPi * acc;
}

double mode_norm(const SurfaceMesh& mesh, const Eigen::VectorXcd& u) {
    return std::sqrt(std::abs(mode_inner(mesh, u, u)));
}

std::complex<double> field_inner(const ThetaFourierField& u, const ThetaFourierField& v) {
    std::complex<double> acc = 0.0;
    const int N = std::min(u.truncation(), v.truncation());
    for (int n = -N; n <= N; ++n) acc += mode_inner(u.mesh(), u.mode(n), v.mode(n));
    return acc;
}

double field_norm(const ThetaFourierField& u) {
    return std::sqrt(std::abs(field_inner(u, u)));
}

Eigen::VectorXcd project_pi_n(const SurfaceMesh& mesh, const TangentFunction& f, int n,
                              int Q) {
    if (Q < 2 * std::abs(n) + 1) throw std::invalid_argument("quadrature order too low");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.mode_supported(v, n)) continue;
        std::complex<double> acc = 0.0;
        for (int q = 0; q < Q; ++q) {
            const double theta = kTwoPi * q / Q;
            acc += std::exp(std::complex<double>(0, -n * theta)) *
                   f(mesh.vertex_chart(v), mesh.vertex_pos(v), theta);
        }
        out[v] = acc / static_cast<double>(Q);
    }
    return out;
}

ThetaFourierField project_field(std::shared_ptr<const SurfaceMesh> mesh,
                                const TangentFunction& f, int N, int Q) {
    if (Q <= 0) Q = std::max(4 * N, 8);
    const SurfaceMesh& M = *mesh;
    ThetaFourierField out(std::move(mesh), N);
    // One pass of samples per vertex, reused for every mode.
    std::vector<std::complex<double>> samples(Q);
    for (int v = 0; v < M.num_vertices(); ++v) {
        for (int q = 0; q < Q; ++q)
            samples[q] = f(M.vertex_chart(v), M.vertex_pos(v), kTwoPi * q / Q);
        for (int n = -N; n <= N; ++n) {
            if (!M.mode_supported(v, n)) continue;
            std::complex<double> acc = 0.0;
            for (int q = 0; q < Q; ++q)
                acc += std::exp(std::complex<double>(0, -n * kTwoPi * q / Q)) * samples[q];
            out.mode(n)[v] = acc / static_cast<double>(Q);
        }
    }
    return out;
}

double sobolev_norm(const ThetaFourierField& f, int r, int s, const CROperators& cr) {
    if (r < 0 || s < 0) throw std::invalid_argument("negative Sobolev index");
    if (r > 2) throw std::invalid_argument("horizontal order r > 2 unsupported");
    double total = 0.0;
    // Theta^l f: mode n scaled by (i n)^l; norms pick up n^{2l}.
    for (int l = 0; l <= s; ++l) {
        ThetaFourierField g = f;
        if (l > 0) {
            for (int n = -f.truncation(); n <= f.truncation(); ++n)
                g.mode(n) *= std::pow(std::complex<double>(0, n), l);
        }
        for (int i = 0; i <= r; ++i) {
            for (int j = 0; i + j <= r; ++j) {
                ThetaFourierField h = g;
                for (int a = 0; a < j; ++a) h = cr.apply_Y(h);
                for (int a = 0; a < i; ++a) h = cr.apply_X(h);
                const double nh = field_norm(h);
                total += nh * nh;
            }
        }
    }
    return std::sqrt(total);
}

ModeEquivalenceReport mode_equivalence_check(const ThetaFourierField& f, int r, int s,
                                             const CROperators& cr) {
    ModeEquivalenceReport rep;
    const double lhs = sobolev_norm(f, r, s, cr);
    rep.lhs = lhs * lhs;
    for (int n = -f.truncation(); n <= f.truncation(); ++n) {
        ThetaFourierField single(f.mesh_ptr(), std::abs(n));
        single.mode(n) = f.mode(n);
        const double part = sobolev_norm(single, r, 0, cr);
        rep.rhs += (1.0 + std::pow(static_cast<double>(n), 2 * s)) * part * part;
    }
    rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs : 1.0;
    return rep;
}

std::string surface_hash(const TriangulatedFlatSurface& surface) {
    // FNV-1a over a canonical text rendering of triangles and gluings.
    std::ostringstream os;
    os << std::setprecision(17);
    for (int t = 0; t < surface.num_triangles(); ++t)
        for (const Vec2& p : surface.triangle(t)) os << p.x << ',' << p.y << ';';
    for (int t = 0; t < surface.num_triangles(); ++t)
        for (int e = 0; e < 3; ++e) {
            const Gluing& g = surface.gluing(t, e);
            os << g.partner.tri << ':' << g.partner.edge << ';';
        }
    const std::string data = os.str();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

void save_field(const ThetaFourierField& f, const std::string& prefix) {
    const int N = f.truncation();
    nlohmann::json manifest;
    manifest["truncation"] = N;
    manifest["level"] = f.mesh().level();
    manifest["num_vertices"] = f.mesh().num_vertices();
    manifest["surface_hash"] = surface_hash(f.mesh().surface());
    std::vector<std::string> files;
    for (int n = -N; n <= N; ++n) {
        std::ostringstream name;
        name << prefix << "_mode" << (n < 0 ? "m" : "p") << std::abs(n) << ".csv";
        std::ofstream out(name.str());
        if (!out) throw std::runtime_error("cannot write " + name.str());
        out << "vertex,re,im\n" << std::setprecision(17);
        const auto& u = f.mode(n);
        for (int v = 0; v < u.size(); ++v)
            out << v << ',' << u[v].real() << ',' << u[v].imag() << '\n';
        files.push_back(name.str());
    }
    manifest["files"] = files;
    std::ofstream out(prefix + ".manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest");
    out << manifest.dump(2) << '\n';
}

ThetaFourierField load_field(std::shared_ptr<const SurfaceMesh> mesh,
                             const std::string& prefix) {
    std::ifstream in(prefix + ".manifest.json");
    if (!in) throw std::runtime_error("cannot read manifest " + prefix);
    nlohmann::json manifest = nlohmann::json::parse(in);
    if (manifest.at("surface_hash") != surface_hash(mesh->surface()))
        throw std::runtime_error("field manifest does not match the surface");
    if (manifest.at("num_vertices") != mesh->num_vertices())
        throw std::runtime_error("field manifest does not match the mesh level");
    const int N = manifest.at("truncation");
    ThetaFourierField f(std::move(mesh), N);
    const auto files = manifest.at("files").get<std::vector<std::string>>();
    for (int n = -N; n <= N; ++n) {
        std::ifstream csv(files.at(n + N));
        if (!csv) throw std::runtime_error("cannot read " + files.at(n + N));
        std::string line;
        std::getline(csv, line);  // header
        while (std::getline(csv, line)) {
            std::istringstream ls(line);
            int v;
            double re, im;
            char comma;
            ls >> v >> comma >> re >> comma >> im;
            f.mode(n)[v] = {re, im};
        }
    }
    return f;
}

}  // namespace flatspec
