#pragma once

#include <array>
#include <memory>
#include <vector>

#include "flatspec/surface.hpp"

namespace flatspec {

/// Sub-triangle of the refined mesh. Lives entirely in one surface chart;
/// `rot_to_home[i]` is the rotation of the chart change from this chart to the
/// home chart of global vertex v[i] (zero when the vertex is homed here).
struct MeshFace {
    int chart = 0;
    std::array<int, 3> v{};
    std::array<Vec2, 3> pos{};
    std::array<double, 3> rot_to_home{};
    double area = 0.0;
};

/// Uniform refinement of the surface triangulation: every chart triangle is
/// split into 4^level congruent sub-triangles, vertices identified across the
/// gluings. Each global vertex is stored in a single home chart together with
/// the monodromy rotation of a small loop around it (2*pi at regular points).
class SurfaceMesh {
public:
    SurfaceMesh(std::shared_ptr<const TriangulatedFlatSurface> surface, int level);

    const TriangulatedFlatSurface& surface() const { return *surface_; }
    std::shared_ptr<const TriangulatedFlatSurface> surface_ptr() const { return surface_; }
    int level() const { return level_; }
    int num_vertices() const { return static_cast<int>(vertex_pos_.size()); }
    const std::vector<MeshFace>& faces() const { return faces_; }

    Vec2 vertex_pos(int v) const { return vertex_pos_[v]; }
    int vertex_chart(int v) const { return vertex_chart_[v]; }
    /// Rotation angle of the holonomy around the vertex (2*pi when regular).
    double vertex_monodromy(int v) const { return vertex_monodromy_[v]; }
    double lumped_area(int v) const { return lumped_area_[v]; }
    double total_area() const { return total_area_; }
    /// Longest sub-triangle edge, the nominal mesh size h.
    double mesh_size() const { return mesh_size_; }

    /// A vertex supports mode-n sections iff e^{i n monodromy} = 1; sections
    /// of nontrivial monodromy vanish at the vertex and it is excluded there.
    bool mode_supported(int v, int n) const;

private:
    std::shared_ptr<const TriangulatedFlatSurface> surface_;
    int level_ = 0;
    std::vector<MeshFace> faces_;
    std::vector<Vec2> vertex_pos_;
    std::vector<int> vertex_chart_;
    std::vector<double> vertex_monodromy_;
    std::vector<double> lumped_area_;
    double total_area_ = 0.0;
    double mesh_size_ = 0.0;
};

/// Index set of the mode-n unknowns (vertices with trivial phase monodromy).
struct ModeSpace {
    int n = 0;
    std::vector<int> dof_of_vertex;  // -1 when excluded
    std::vector<int> vertex_of_dof;

    int size() const { return static_cast<int>(vertex_of_dof.size()); }
    static ModeSpace build(const SurfaceMesh& mesh, int n);
};

}  // namespace flatspec
