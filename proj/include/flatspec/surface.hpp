#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flatspec/geometry.hpp"

namespace flatspec {

/// Thrown when a surface description fails geometric or combinatorial validation.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Oriented edge of a triangle; edge e is opposite corner e and runs from
/// corner (e+1)%3 to corner (e+2)%3 in the triangle's chart.
struct EdgeRef {
    int tri = -1;
    int edge = -1;
    bool operator==(const EdgeRef&) const = default;
};

struct Gluing {
    EdgeRef partner;        // glued edge
    Isometry to_partner;    // chart map: this triangle's chart -> partner's chart
};

struct ConePointData {
    int vertex_class = -1;
    double total_angle = 0.0;  // radians
    double alpha = 0.0;        // total_angle / (2 pi) - 1
    bool is_singular = false;
};

/// Combinatorial loop through the gluing graph: a sequence of edge crossings.
using Loop = std::vector<EdgeRef>;

struct HolonomyData {
    std::vector<Loop> generators;
    std::vector<double> angles;  // fractions of a full turn, in [0,1)
};

/// Flat surface with cone points, stored extrinsically: each triangle is its
/// own planar chart, glued edges carry explicit rigid motions between charts.
class TriangulatedFlatSurface {
public:
    static constexpr double kLengthTol = 1e-12;  // relative
    static constexpr double kAngleTol = 1e-10;   // absolute

    /// Builds and validates. `gluing_pairs` lists unordered pairs of edges.
    TriangulatedFlatSurface(std::vector<std::array<Vec2, 3>> triangles,
                            std::vector<std::pair<EdgeRef, EdgeRef>> gluing_pairs);

    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    const std::array<Vec2, 3>& triangle(int t) const { return triangles_[t]; }
    const Gluing& gluing(int t, int e) const { return gluings_[t][e]; }

    int num_vertex_classes() const { return num_classes_; }
    int vertex_class(int t, int corner) const { return corner_class_[3 * t + corner]; }

    int genus() const { return genus_; }
    double total_area() const { return total_area_; }
    double corner_angle(int t, int corner) const;

    std::vector<ConePointData> cone_data() const;
    HolonomyData holonomy_generators() const;

    /// Loop of edge crossings circling the given vertex class once.
    Loop vertex_loop(int vertex_class) const;

    /// Sum of crossing rotations along a closing loop, wrapped into [0,2pi).
    double transport_loop(const Loop& loop) const;

private:
    void build_gluings(const std::vector<std::pair<EdgeRef, EdgeRef>>& pairs);
    void build_vertex_classes();
    void validate_angles() const;

    std::vector<std::array<Vec2, 3>> triangles_;
    std::vector<std::array<Gluing, 3>> gluings_;
    std::vector<int> corner_class_;      // 3*t + corner -> class id
    std::vector<double> class_angle_;    // total angle per class
    int num_classes_ = 0;
    int genus_ = 0;
    double total_area_ = 0.0;
};

/// Surface of the double of a Euclidean triangle with the given corner angles
/// (radians, summing to pi). Genus 0 with cone angles (2a, 2b, 2c).
TriangulatedFlatSurface double_of_triangle(double a, double b, double c, double scale = 1.0);

/// Flat torus R^2 / (Z u + Z v), two triangles, trivial holonomy.
TriangulatedFlatSurface torus(Vec2 u, Vec2 v);

/// Parses the surface spec document (JSON text; see README for the schema).
TriangulatedFlatSurface build_from_spec(const std::string& json_text);

}  // namespace flatspec
