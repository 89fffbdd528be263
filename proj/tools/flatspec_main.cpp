#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "flatspec/cohomology.hpp"
#include "flatspec/differentials.hpp"
#include "flatspec/diophantine.hpp"
#include "flatspec/geodesic.hpp"
#include "flatspec/harmonic.hpp"
#include "flatspec/mesh.hpp"
#include "flatspec/spectral.hpp"
#include "flatspec/surface.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flatspec;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 success, 2 validation failure, 3 solver non-convergence, 4 I/O.
struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

std::shared_ptr<const TriangulatedFlatSurface> load_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError(4, "cannot open surface spec: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return std::make_shared<TriangulatedFlatSurface>(build_from_spec(buf.str()));
    } catch (const std::exception& e) {
        throw CliError(2, std::string("invalid surface spec: ") + e.what());
    }
}

std::ofstream open_out(const fs::path& out_dir, const std::string& name) {
    fs::path p = name;
    if (p.is_relative() && !out_dir.empty()) p = out_dir / p;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw CliError(4, "cannot write " + p.string());
    out << std::setprecision(17);
    return out;
}

void write_summary(const fs::path& out_dir, const std::string& path, const json& j) {
    if (path.empty()) return;
    auto out = open_out(out_dir, path);
    out << j.dump(2) << '\n';
}

std::string header_line(const std::string& hash) {
    return "# flatspec " + std::string(kVersion) + " surface_hash=" + hash;
}

std::vector<double> parse_angle_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw CliError(2, "empty angle list");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flat surfaces with cone points: spectra, flows, cohomological solvers"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string out_dir, json_summary;
    unsigned long long seed = 1;
    int threads = 0;
    app.add_option("--out-dir", out_dir, "directory for output files");
    app.add_option("--seed", seed, "random seed for stochastic subcommands");
    app.add_option("--threads", threads, "worker threads (0 = library default)");
    app.add_option("--json-summary", json_summary, "write a JSON summary to this path");

    // --- surface ---
    auto* c_surface = app.add_subcommand("surface", "validate a surface and report "
                                                    "cone points and holonomy");
    std::string surface_path;
    c_surface->add_option("--surface", surface_path, "surface spec (JSON)")->required();

    // --- ergodicity ---
    auto* c_erg = app.add_subcommand("ergodicity", "leaf-walk equidistribution stats");
    std::string erg_surface, erg_out = "hist.csv";
    double erg_steps = 1e5, erg_radius = 0.0;
    long long erg_returns = 0;
    int erg_bins = 16, erg_theta_bins = 64;
    c_erg->add_option("--surface", erg_surface)->required();
    c_erg->add_option("--steps", erg_steps, "number of leaf-walk segments");
    c_erg->add_option("--bins", erg_bins, "xy bins per chart");
    c_erg->add_option("--theta-bins", erg_theta_bins);
    c_erg->add_option("--returns", erg_returns, "also run return-angle statistics");
    c_erg->add_option("--radius", erg_radius, "return-disk radius");
    c_erg->add_option("--out", erg_out, "histogram CSV");

    // --- diophantine ---
    auto* c_dioph = app.add_subcommand("diophantine", "simultaneous Diophantine scan");
    std::string dioph_angles, dioph_surface, dioph_out = "dioph.csv";
    double dioph_gamma = 1.0;
    long long dioph_N = 100000;
    c_dioph->add_option("--angles", dioph_angles, "holonomy angles, comma separated");
    c_dioph->add_option("--surface", dioph_surface, "take angles from this surface");
    c_dioph->add_option("--gamma", dioph_gamma);
    c_dioph->add_option("--N", dioph_N, "scan bound");
    c_dioph->add_option("--out", dioph_out);

    // --- spectrum ---
    auto* c_spec = app.add_subcommand("spectrum", "per-mode Laplacian eigenvalues and "
                                                  "Cheeger-bound table");
    std::string spec_surface, spec_out = "lambda.csv";
    int spec_nmax = 8, spec_refine = 3;
    double spec_tol = 1e-9;
    c_spec->add_option("--surface", spec_surface)->required();
    c_spec->add_option("--nmax", spec_nmax);
    c_spec->add_option("--refine", spec_refine, "finest refinement level");
    c_spec->add_option("--tol", spec_tol);
    c_spec->add_option("--out", spec_out);

    // --- solve-h ---
    auto* c_sh = app.add_subcommand("solve-h", "spectral solve of H u = f");
    std::string sh_surface, sh_rhs, sh_out = "u_h";
    int sh_level = 3, sh_K = 8;
    double sh_tol = 1e-9;
    c_sh->add_option("--surface", sh_surface)->required();
    c_sh->add_option("--rhs", sh_rhs, "field manifest prefix for f")->required();
    c_sh->add_option("--level", sh_level);
    c_sh->add_option("--K", sh_K, "directly inverted eigenpairs per mode");
    c_sh->add_option("--tol", sh_tol);
    c_sh->add_option("--out", sh_out, "output field manifest prefix");

    // --- solve-x ---
    auto* c_sx = app.add_subcommand("solve-x", "minimum-norm solve of X u = f");
    std::string sx_surface, sx_rhs, sx_out = "u_x", sx_report;
    int sx_level = 3, sx_nmax = 8;
    double sx_tol = 1e-8;
    c_sx->add_option("--surface", sx_surface)->required();
    c_sx->add_option("--rhs", sx_rhs, "field manifest prefix for f")->required();
    c_sx->add_option("--level", sx_level);
    c_sx->add_option("--nmax", sx_nmax, "mode truncation N");
    c_sx->add_option("--tol", sx_tol);
    c_sx->add_option("--out", sx_out, "output field manifest prefix");
    c_sx->add_option("--report", sx_report, "residual report JSON");

    // --- apriori ---
    auto* c_ap = app.add_subcommand("apriori", "a-priori estimate ratio sampling");
    std::string ap_surface, ap_out = "apriori.csv";
    int ap_samples = 20, ap_level = 2, ap_r = 1, ap_s = 3, ap_rp = 0, ap_sp = 0;
    double ap_gamma = 1.0;
    c_ap->add_option("--surface", ap_surface)->required();
    c_ap->add_option("--samples", ap_samples);
    c_ap->add_option("--level", ap_level);
    c_ap->add_option("--r", ap_r);
    c_ap->add_option("--s", ap_s);
    c_ap->add_option("--rp", ap_rp, "r' of the left-hand norm");
    c_ap->add_option("--sp", ap_sp, "s' of the left-hand norm");
    c_ap->add_option("--gamma", ap_gamma);
    c_ap->add_option("--out", ap_out);

    // --- distributions ---
    auto* c_dist = app.add_subcommand("distributions", "meromorphic-space dimensions");
    std::string dist_alphas, dist_out = "dims.csv";
    int dist_genus = 0, dist_r = 0, dist_nmax = 50, dist_sign = +1;
    c_dist->add_option("--genus", dist_genus)->required();
    c_dist->add_option("--alphas", dist_alphas, "cone parameters, e.g. -2/3,-2/3,-2/3");
    c_dist->add_option("--r", dist_r);
    c_dist->add_option("--nmax", dist_nmax);
    c_dist->add_option("--sign", dist_sign, "+1 meromorphic, -1 anti-meromorphic");
    c_dist->add_option("--out", dist_out);

    CLI11_PARSE(app, argc, argv);

    try {
        json summary;
        summary["version"] = kVersion;
        summary["seed"] = seed;

        if (*c_surface) {
            auto S = load_surface(surface_path);
            summary["surface_hash"] = surface_hash(*S);
            summary["genus"] = S->genus();
            summary["area"] = S->total_area();
            json cones = json::array();
            for (const auto& c : S->cone_data())
                cones.push_back({{"vertex_class", c.vertex_class},
                                 {"total_angle", c.total_angle},
                                 {"alpha", c.alpha},
                                 {"singular", c.is_singular}});
            summary["cone_points"] = cones;
            HolonomyData hol = S->holonomy_generators();
            summary["holonomy_angles"] = hol.angles;
            std::cout << summary.dump(2) << '\n';
        } else if (*c_erg) {
            auto S = load_surface(erg_surface);
            UnitTangentState start{0,
                                   {(S->triangle(0)[0].x + S->triangle(0)[1].x +
                                     S->triangle(0)[2].x) / 3.0,
                                    (S->triangle(0)[0].y + S->triangle(0)[1].y +
                                     S->triangle(0)[2].y) / 3.0},
                                   0.7};
            auto walk = leaf_walk(*S, start, static_cast<std::int64_t>(erg_steps), seed,
                                  erg_bins, erg_theta_bins);
            const std::string hash = surface_hash(*S);
            auto out = open_out(out_dir, erg_out);
            out << header_line(hash) << " seed=" << seed << '\n';
            out << "triangle,xbin,ybin,thetabin,count\n";
            for (const auto& [key, count] : walk.histogram)
                out << key[0] << ',' << key[1] << ',' << key[2] << ',' << key[3] << ','
                    << count << '\n';
            summary["surface_hash"] = hash;
            summary["steps"] = walk.steps_taken;
            summary["cone_redraws"] = walk.cone_redraws;
            if (erg_returns > 0) {
                if (erg_radius <= 0) throw CliError(2, "--returns requires --radius");
                auto ret = return_angle_discrepancy(*S, start, erg_radius, erg_returns,
                                                    seed);
                summary["return_discrepancy"] = ret.discrepancy;
                summary["returns"] = ret.angles.size();
                summary["partial"] = ret.partial;
            }
        } else if (*c_dioph) {
            std::vector<double> angles;
            std::string hash;
            if (!dioph_surface.empty()) {
                auto S = load_surface(dioph_surface);
                angles = S->holonomy_generators().angles;
                hash = surface_hash(*S);
            } else if (!dioph_angles.empty()) {
                angles = parse_angle_list(dioph_angles);
            } else {
                throw CliError(2, "diophantine needs --angles or --surface");
            }
            if (dioph_gamma <= 0 || dioph_N < 2)
                throw CliError(2, "need gamma > 0 and N >= 2");
            auto rep = verify_condition(angles, dioph_gamma, dioph_N);
            auto out = open_out(out_dir, dioph_out);
            out << header_line(hash) << '\n';
            out << "n,q_n,weighted,record\n";
            std::size_t rec = 0;
            for (long long n = 1; n <= dioph_N; ++n) {
                const double q = simultaneous_distance(angles, n);
                const bool is_record = rec < rep.records.size() &&
                                       rep.records[rec].n == n;
                if (is_record) ++rec;
                out << n << ',' << q << ',' << std::pow(double(n), dioph_gamma) * q << ','
                    << (is_record ? 1 : 0) << '\n';
            }
            summary["holds_on_scan"] = rep.holds_on_scan;
            summary["C_effective"] = rep.C_effective;
            summary["argmin_n"] = rep.argmin_n;
            summary["fitted_gamma"] = rep.fitted_gamma;
            summary["gamma_below_1_over_d"] = rep.gamma_below_1_over_d;
        } else if (*c_spec) {
            auto S = load_surface(spec_surface);
            std::vector<int> modes;
            for (int n = 0; n <= spec_nmax; ++n) modes.push_back(n);
            std::vector<int> levels;
            for (int l = std::max(0, spec_refine - 1); l <= spec_refine; ++l)
                levels.push_back(l);
            auto profile = lambda_profile(S, modes, levels, spec_tol);
            const auto angles = S->holonomy_generators().angles;
            auto cheeger = cheeger_report(profile, angles);
            const std::string hash = surface_hash(*S);
            auto out = open_out(out_dir, spec_out);
            out << header_line(hash) << '\n';
            out << "n,level,unknowns,lambda,q_n,ratio\n";
            for (const auto& e : profile.entries) {
                const double q = e.n == 0 ? 0.0
                                          : simultaneous_distance(angles, std::abs(e.n));
                for (std::size_t li = 0; li < e.per_level.size(); ++li)
                    out << e.n << ',' << profile.levels[li] << ',' << e.unknowns[li]
                        << ',' << e.per_level[li] << ',' << q << ','
                        << (q > 0 ? e.per_level[li] / (q * q) : 0.0) << '\n';
            }
            summary["surface_hash"] = hash;
            summary["c_eff"] = cheeger.c_eff;
            summary["argmin_n"] = cheeger.argmin_n;
            bool failed = false;
            for (const auto& e : profile.entries) failed = failed || e.solver_failed;
            if (failed) throw CliError(3, "eigensolver failed on at least one mode");
        } else if (*c_sh) {
            auto S = load_surface(sh_surface);
            auto mesh = std::make_shared<SurfaceMesh>(S, sh_level);
            ThetaFourierField f = load_field(mesh, sh_rhs);
            auto res = solve_H(f, sh_K, sh_tol);
            if (!res.ok) throw CliError(3, "solve-h: " + res.message);
            fs::path prefix = sh_out;
            if (prefix.is_relative() && !out_dir.empty()) {
                fs::create_directories(out_dir);
                prefix = fs::path(out_dir) / prefix;
            }
            save_field(res.u, prefix.string());
            summary["residual"] = res.residual;
        } else if (*c_sx) {
            auto S = load_surface(sx_surface);
            auto mesh = std::make_shared<SurfaceMesh>(S, sx_level);
            ThetaFourierField f = load_field(mesh, sx_rhs);
            CROperators cr(mesh, -sx_nmax - 1, sx_nmax + 1);
            auto res = solve_X(cr, f, sx_nmax, sx_tol);
            fs::path prefix = sx_out;
            if (prefix.is_relative() && !out_dir.empty()) {
                fs::create_directories(out_dir);
                prefix = fs::path(out_dir) / prefix;
            }
            save_field(res.u, prefix.string());
            json report{{"residual", res.residual},
                        {"iterations", res.iterations},
                        {"converged", res.converged}};
            if (!sx_report.empty()) write_summary(out_dir, sx_report, report);
            summary["residual"] = res.residual;
            summary["converged"] = res.converged;
            if (!res.converged) throw CliError(3, "solve-x did not reach tolerance");
        } else if (*c_ap) {
            auto S = load_surface(ap_surface);
            auto mesh = std::make_shared<SurfaceMesh>(S, ap_level);
            const int range = 6 + std::max(ap_r, 2);
            CROperators cr(mesh, -range, range);
            auto rep = apriori_report(cr, ap_samples, ap_r, ap_s, ap_rp, ap_sp, ap_gamma,
                                      static_cast<unsigned>(seed));
            auto out = open_out(out_dir, ap_out);
            out << header_line(surface_hash(*S)) << " seed=" << seed << '\n';
            out << "sample,ratio\n";
            for (std::size_t i = 0; i < rep.ratios.size(); ++i)
                out << i << ',' << rep.ratios[i] << '\n';
            summary["max_ratio"] = rep.max_ratio;
            summary["mean_ratio"] = rep.mean_ratio;
            summary["index_gap_ok"] = rep.index_gap_ok;
            summary["divergence_flag"] = rep.divergence_flag;
        } else if (*c_dist) {
            std::vector<ConeParameter> alphas;
            if (!dist_alphas.empty()) {
                std::stringstream ss(dist_alphas);
                std::string item;
                while (std::getline(ss, item, ','))
                    alphas.push_back(ConeParameter::parse(item));
            }
            DifferentialSpaceQuery probe{dist_genus, alphas, 1, dist_r, dist_sign};
            if (!gauss_bonnet_ok(probe))
                throw CliError(2, "cone parameters violate sum(alpha) = 2g - 2");
            auto out = open_out(out_dir, dist_out);
            out << header_line("") << '\n';
            out << "n,dim,tag,boundary\n";
            for (int n = -dist_nmax; n <= dist_nmax; ++n) {
                DifferentialSpaceQuery q{dist_genus, alphas, n, dist_r, dist_sign};
                auto d = dimension(q);
                out << n << ',' << d.dim << ','
                    << (d.tag == DimensionTag::Exact ? "exact" : "lower_bound") << ','
                    << (d.boundary_flag ? 1 : 0) << '\n';
            }
            auto nz = find_nonzero_modes(dist_genus, alphas, dist_r, dist_sign, dist_nmax);
            summary["nonzero_modes"] = nz.modes;
            summary["density"] = nz.density;
        }

        write_summary(out_dir, json_summary, summary);
        return 0;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
