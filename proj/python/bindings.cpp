#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "flatspec/cohomology.hpp"
#include "flatspec/differentials.hpp"
#include "flatspec/diophantine.hpp"
#include "flatspec/geodesic.hpp"
#include "flatspec/harmonic.hpp"
#include "flatspec/mesh.hpp"
#include "flatspec/spectral.hpp"
#include "flatspec/surface.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace flatspec;

namespace {

using SurfacePtr = std::shared_ptr<TriangulatedFlatSurface>;

std::vector<ConeParameter> parse_alphas(const std::vector<std::string>& texts) {
    std::vector<ConeParameter> out;
    for (const auto& t : texts) out.push_back(ConeParameter::parse(t));
    return out;
}

UnitTangentState centroid_state(const TriangulatedFlatSurface& s, double theta) {
    const auto& tri = s.triangle(0);
    return {0,
            {(tri[0].x + tri[1].x + tri[2].x) / 3, (tri[0].y + tri[1].y + tri[2].y) / 3},
            theta};
}

}  // namespace

PYBIND11_MODULE(_flatspec, m) {
    m.doc() = "flat surfaces with cone points: spectra, flows, cohomological solvers";

    py::register_exception<ValidationError>(m, "ValidationError");

    py::class_<TriangulatedFlatSurface, SurfacePtr>(m, "Surface")
        .def_property_readonly("genus", &TriangulatedFlatSurface::genus)
        .def_property_readonly("area", &TriangulatedFlatSurface::total_area)
        .def_property_readonly("num_triangles", &TriangulatedFlatSurface::num_triangles)
        .def_property_readonly("hash",
                               [](const TriangulatedFlatSurface& s) {
                                   return surface_hash(s);
                               })
        .def_property_readonly("holonomy_angles",
                               [](const TriangulatedFlatSurface& s) {
                                   return s.holonomy_generators().angles;
                               })
        .def("cone_points", [](const TriangulatedFlatSurface& s) {
            py::list out;
            for (const auto& c : s.cone_data())
                out.append(py::dict("vertex_class"_a = c.vertex_class,
                                    "total_angle"_a = c.total_angle,
                                    "alpha"_a = c.alpha, "singular"_a = c.is_singular));
            return out;
        });

    m.def("torus",
          [](double ux, double uy, double vx, double vy) -> SurfacePtr {
              return std::make_shared<TriangulatedFlatSurface>(torus({ux, uy}, {vx, vy}));
          },
          py::arg("ux") = 1.0, py::arg("uy") = 0.0, py::arg("vx") = 0.0,
          py::arg("vy") = 1.0);
    m.def("double_of_triangle",
          [](double a, double b, double c, double scale) -> SurfacePtr {
              return std::make_shared<TriangulatedFlatSurface>(
                  double_of_triangle(a, b, c, scale));
          },
          py::arg("a"), py::arg("b"), py::arg("c"), py::arg("scale") = 1.0);
    m.def("from_spec", [](const std::string& text) -> SurfacePtr {
        return std::make_shared<TriangulatedFlatSurface>(build_from_spec(text));
    });

    // --- Diophantine ---------------------------------------------------------
    m.def("simultaneous_distance", &simultaneous_distance, py::arg("angles"),
          py::arg("n"));
    m.def("verify_diophantine",
          [](const std::vector<double>& angles, double gamma, std::int64_t N) {
              auto r = verify_condition(angles, gamma, N, false);
              return py::dict("holds_on_scan"_a = r.holds_on_scan,
                              "C_effective"_a = r.C_effective,
                              "argmin_n"_a = r.argmin_n,
                              "fitted_gamma"_a = r.fitted_gamma,
                              "gamma_below_1_over_d"_a = r.gamma_below_1_over_d);
          },
          py::arg("angles"), py::arg("gamma"), py::arg("N"));

    // --- spectra -------------------------------------------------------------
    m.def("lambda_profile",
          [](SurfacePtr s, const std::vector<int>& modes, const std::vector<int>& levels,
             double tol) {
              auto prof = lambda_profile(std::move(s), modes, levels, tol);
              py::list out;
              for (const auto& e : prof.entries)
                  out.append(py::dict("n"_a = e.n, "per_level"_a = e.per_level,
                                      "unknowns"_a = e.unknowns,
                                      "extrapolated"_a = e.extrapolated,
                                      "unstable"_a = e.unstable,
                                      "solver_failed"_a = e.solver_failed));
              return out;
          },
          py::arg("surface"), py::arg("modes"), py::arg("levels"),
          py::arg("tol") = 1e-9);
    m.def("mode_eigenvalues",
          [](SurfacePtr s, int level, int n, int k, double tol) {
              auto mesh = std::make_shared<SurfaceMesh>(std::move(s), level);
              ModeOperator op = build_mode_operator(mesh, n);
              EigenResult er = smallest_eigenvalues(op, k, tol);
              return py::dict("values"_a = er.values, "converged"_a = er.converged,
                              "max_residual"_a = er.max_residual);
          },
          py::arg("surface"), py::arg("level"), py::arg("n"), py::arg("k") = 4,
          py::arg("tol") = 1e-9);

    // --- solvers --------------------------------------------------------------
    m.def("solve_h_mode0",
          [](SurfacePtr s, int level, const std::vector<std::complex<double>>& rhs,
             int K, double tol) {
              auto mesh = std::make_shared<SurfaceMesh>(std::move(s), level);
              if (static_cast<int>(rhs.size()) != mesh->num_vertices())
                  throw std::invalid_argument("rhs length must match the vertex count");
              ThetaFourierField f(mesh, 0);
              for (int v = 0; v < mesh->num_vertices(); ++v) f.mode(0)[v] = rhs[v];
              HSolveResult hs = solve_H(f, K, tol);
              std::vector<std::complex<double>> u(hs.u.mode(0).data(),
                                                  hs.u.mode(0).data() +
                                                      hs.u.mode(0).size());
              return py::dict("u"_a = u, "residual"_a = hs.residual, "ok"_a = hs.ok,
                              "message"_a = hs.message);
          },
          py::arg("surface"), py::arg("level"), py::arg("rhs"), py::arg("K") = 8,
          py::arg("tol") = 1e-9);
    m.def("num_vertices",
          [](SurfacePtr s, int level) {
              return SurfaceMesh(std::move(s), level).num_vertices();
          },
          py::arg("surface"), py::arg("level"));

    // --- ergodicity ------------------------------------------------------------
    m.def("return_angle_discrepancy",
          [](SurfacePtr s, double radius, std::int64_t returns, std::uint64_t seed,
             double theta) {
              auto r = return_angle_discrepancy(*s, centroid_state(*s, theta), radius,
                                                returns, seed);
              return py::dict("discrepancy"_a = r.discrepancy, "partial"_a = r.partial,
                              "returns"_a = r.angles.size());
          },
          py::arg("surface"), py::arg("radius"), py::arg("returns"), py::arg("seed") = 1,
          py::arg("theta") = 0.3);
    m.def("star_discrepancy", &star_discrepancy, py::arg("points"));

    // --- differential-space dimensions ------------------------------------------
    m.def("dimension",
          [](int genus, const std::vector<std::string>& alphas, int n, int r, int sign) {
              DifferentialSpaceQuery q{genus, parse_alphas(alphas), n, r, sign};
              auto d = dimension(q);
              return py::dict("dim"_a = d.dim,
                              "exact"_a = (d.tag == DimensionTag::Exact),
                              "boundary"_a = d.boundary_flag);
          },
          py::arg("genus"), py::arg("alphas"), py::arg("n"), py::arg("r") = 0,
          py::arg("sign") = 1);
    m.def("nonzero_modes",
          [](int genus, const std::vector<std::string>& alphas, int r, int sign,
             int N_scan) {
              auto rep = find_nonzero_modes(genus, parse_alphas(alphas), r, sign, N_scan);
              return py::dict("modes"_a = rep.modes, "density"_a = rep.density);
          },
          py::arg("genus"), py::arg("alphas"), py::arg("r") = 0, py::arg("sign") = 1,
          py::arg("N_scan") = 50);
}
