#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "flatspec/surface.hpp"

namespace flatspec {

/// Point of M = T1(S \ Sigma): chart id, planar position, direction angle.
struct UnitTangentState {
    int tri = 0;
    Vec2 pos;
    double theta = 0.0;  // normalized to [0, 2*pi)
};

enum class FlowMode { X, Y };  // straight motion along theta, or theta + pi/2

struct Crossing {
    EdgeRef edge;
    double rotation = 0.0;  // chart-change rotation applied to theta
};

struct TraceResult {
    UnitTangentState state;
    double arc_length = 0.0;
    std::vector<Crossing> crossings;
    std::optional<int> hit_cone;  // vertex class, when the ray runs into a cone point
};

/// Callback invoked once per straight piece of trajectory, in the chart where
/// the piece lives. Used by the equidistribution statistics.
using SegmentVisitor = std::function<void(int tri, Vec2 from, Vec2 to, double theta)>;

/// Geodesic (X) or orthogonal (Y) flow for the given arc length. Terminates
/// early with hit_cone set when the ray passes within snap tolerance of a
/// singular vertex.
TraceResult flow(const TriangulatedFlatSurface& surface, UnitTangentState state, double length,
                 FlowMode mode, const SegmentVisitor& visit = nullptr);

constexpr double kConeSnapTol = 1e-12;

struct LeafWalkResult {
    UnitTangentState final_state;
    // Visit counts on the (triangle, x-bin, y-bin, theta-bin) grid; x and y are
    // binned over each triangle chart's bounding box.
    std::map<std::array<int, 4>, std::int64_t> histogram;
    std::int64_t steps_taken = 0;
    std::int64_t cone_redraws = 0;
    int theta_bins = 0;
};

/// Random walk along one leaf of the horizontal foliation: alternating X and Y
/// segments with exponential lengths of mean 1, seeded and deterministic.
LeafWalkResult leaf_walk(const TriangulatedFlatSurface& surface, UnitTangentState start,
                         std::int64_t steps, std::uint64_t seed, int xy_bins = 16,
                         int theta_bins = 64, double mean_step = 1.0);

/// Theta-marginal of a leaf-walk histogram, as bin counts.
std::vector<std::int64_t> theta_marginal(const LeafWalkResult& walk);

/// Star discrepancy of a point set mod 1.
double star_discrepancy(std::vector<double> points_mod_1);

struct ReturnAngleResult {
    std::vector<double> angles;  // fiber angles at disk entries, as turns in [0,1)
    double discrepancy = 1.0;    // star discrepancy of the angle sequence
    bool partial = false;        // fewer returns than requested within budget
    std::int64_t steps_used = 0;
};

/// Runs a leaf walk, records the direction angle at every re-entry of the
/// trajectory into the disk about the base state, and returns the star
/// discrepancy of those angles mod a full turn.
ReturnAngleResult return_angle_discrepancy(const TriangulatedFlatSurface& surface,
                                           UnitTangentState base, double radius,
                                           std::int64_t num_returns, std::uint64_t seed,
                                           std::int64_t max_steps = 2'000'000);

}  // namespace flatspec
