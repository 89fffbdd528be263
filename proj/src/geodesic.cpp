#include "flatspec/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <stdexcept>

namespace flatspec {

namespace {

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0) return dist(p, a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return dist(p, a + ab * t);
}

}  // namespace

TraceResult flow(const TriangulatedFlatSurface& surface, UnitTangentState state, double length,
                 FlowMode mode, const SegmentVisitor& visit) {
    if (length < 0) throw std::invalid_argument("flow length must be non-negative");
    TraceResult res;
    const auto cones = surface.cone_data();

    double theta = state.theta;  // accumulated, wrapped only on return
    int tri = state.tri;
    Vec2 pos = state.pos;
    double remaining = length;
    int entry_edge = -1;

    const double dir_offset = (mode == FlowMode::Y) ? M_PI / 2.0 : 0.0;
    constexpr int kMaxCrossings = 20'000'000;

    auto singular_hit = [&](int t, const Vec2& a, const Vec2& b) -> std::optional<int> {
        for (int c = 0; c < 3; ++c) {
            const int vc = surface.vertex_class(t, c);
            if (!cones[vc].is_singular) continue;
            if (point_segment_dist(surface.triangle(t)[c], a, b) <= kConeSnapTol) return vc;
        }
        return std::nullopt;
    };

    while (remaining > 0) {
        const double phi = theta + dir_offset;
        const Vec2 d{std::cos(phi), std::sin(phi)};
        const auto& tv = surface.triangle(tri);

        int best_edge = -1;
        double best_t = std::numeric_limits<double>::infinity();
        for (int e = 0; e < 3; ++e) {
            if (e == entry_edge) continue;
            const Vec2 a = tv[(e + 1) % 3], b = tv[(e + 2) % 3];
            const Vec2 ab = b - a;
            const double den = cross(d, ab);
            if (std::fabs(den) < 1e-15) continue;  // parallel
            const double t = cross(a - pos, ab) / den;
            const double s = cross(a - pos, d) / den;
            if (t > -1e-13 && s > -1e-9 && s < 1.0 + 1e-9 && t < best_t) {
                best_t = t;
                best_edge = e;
            }
        }
        if (best_edge < 0)
            throw std::runtime_error("flow: ray found no exit edge (degenerate position)");
        best_t = std::max(best_t, 0.0);

        if (best_t >= remaining) {
            const Vec2 end = pos + d * remaining;
            if (auto vc = singular_hit(tri, pos, end)) {
                res.hit_cone = *vc;
                res.state = {tri, pos, wrap_angle(theta)};
                if (visit) visit(tri, pos, pos, theta);
                return res;
            }
            if (visit) visit(tri, pos, end, theta);
            res.arc_length += remaining;
            pos = end;
            remaining = 0;
            break;
        }

        const Vec2 q = pos + d * best_t;
        if (auto vc = singular_hit(tri, pos, q)) {
            res.hit_cone = *vc;
            res.arc_length += 0;  // length up to the hit is not meaningful past the cone
            res.state = {tri, pos, wrap_angle(theta)};
            if (visit) visit(tri, pos, q, theta);
            return res;
        }
        if (visit) visit(tri, pos, q, theta);

        const Gluing& g = surface.gluing(tri, best_edge);
        res.crossings.push_back({{tri, best_edge}, g.to_partner.rotation});
        pos = g.to_partner.apply(q);
        theta += g.to_partner.rotation;
        tri = g.partner.tri;
        entry_edge = g.partner.edge;
        res.arc_length += best_t;
        remaining -= best_t;

        if (static_cast<int>(res.crossings.size()) > kMaxCrossings)
            throw std::runtime_error("flow: crossing budget exceeded");
    }

    res.state = {tri, pos, wrap_angle(theta)};
    return res;
}

LeafWalkResult leaf_walk(const TriangulatedFlatSurface& surface, UnitTangentState start,
                         std::int64_t steps, std::uint64_t seed, int xy_bins, int theta_bins,
                         double mean_step) {
    if (steps < 1) throw std::invalid_argument("leaf_walk needs at least one step");
    LeafWalkResult out;
    out.theta_bins = theta_bins;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> step_len(1.0 / mean_step);

    // Bounding boxes per chart for position binning.
    std::vector<std::array<double, 4>> boxes;  // xmin, ymin, xmax, ymax
    for (int t = 0; t < surface.num_triangles(); ++t) {
        const auto& tv = surface.triangle(t);
        std::array<double, 4> b{tv[0].x, tv[0].y, tv[0].x, tv[0].y};
        for (int i = 1; i < 3; ++i) {
            b[0] = std::min(b[0], tv[i].x);
            b[1] = std::min(b[1], tv[i].y);
            b[2] = std::max(b[2], tv[i].x);
            b[3] = std::max(b[3], tv[i].y);
        }
        boxes.push_back(b);
    }
    auto bin_of = [&](const UnitTangentState& s) {
        const auto& b = boxes[s.tri];
        auto clampbin = [&](double v, double lo, double hi) {
            const int i = static_cast<int>((v - lo) / std::max(hi - lo, 1e-300) * xy_bins);
            return std::clamp(i, 0, xy_bins - 1);
        };
        const int it = std::clamp(
            static_cast<int>(wrap_angle(s.theta) / kTwoPi * theta_bins), 0, theta_bins - 1);
        return std::array<int, 4>{s.tri, clampbin(s.pos.x, b[0], b[2]),
                                  clampbin(s.pos.y, b[1], b[3]), it};
    };

    UnitTangentState cur = start;
    for (std::int64_t i = 0; i < steps; ++i) {
        const FlowMode mode = (i % 2 == 0) ? FlowMode::X : FlowMode::Y;
        for (;;) {
            const double len = step_len(rng);
            TraceResult tr = flow(surface, cur, len, mode);
            if (tr.hit_cone) {
                ++out.cone_redraws;
                continue;  // discard and redraw the segment
            }
            cur = tr.state;
            break;
        }
        ++out.histogram[bin_of(cur)];
        ++out.steps_taken;
    }
    out.final_state = cur;
    return out;
}

std::vector<std::int64_t> theta_marginal(const LeafWalkResult& walk) {
    std::vector<std::int64_t> out(walk.theta_bins, 0);
    for (const auto& [key, count] : walk.histogram) out[key[3]] += count;
    return out;
}

double star_discrepancy(std::vector<double> pts) {
    if (pts.empty()) return 1.0;
    for (double& p : pts) p = wrap_unit(p);
    std::sort(pts.begin(), pts.end());
    const double n = static_cast<double>(pts.size());
    double d = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        d = std::max(d, (i + 1) / n - pts[i]);
        d = std::max(d, pts[i] - i / n);
    }
    return d;
}

ReturnAngleResult return_angle_discrepancy(const TriangulatedFlatSurface& surface,
                                           UnitTangentState base, double radius,
                                           std::int64_t num_returns, std::uint64_t seed,
                                           std::int64_t max_steps) {
    if (num_returns < 1) throw std::invalid_argument("need at least one return");
    // The disk must sit inside the base chart and away from the cone points.
    const auto& tv = surface.triangle(base.tri);
    for (int e = 0; e < 3; ++e) {
        const double d = point_segment_dist(base.pos, tv[(e + 1) % 3], tv[(e + 2) % 3]);
        if (d <= radius)
            throw std::invalid_argument("return disk must lie strictly inside the base chart");
    }

    ReturnAngleResult out;
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> step_len(1.0);

    bool inside = (dist(base.pos, base.pos) < radius);  // start counts as inside
    UnitTangentState cur = base;
    std::int64_t step = 0;
    for (; step < max_steps && static_cast<std::int64_t>(out.angles.size()) < num_returns;
         ++step) {
        const FlowMode mode = (step % 2 == 0) ? FlowMode::X : FlowMode::Y;
        const double len = step_len(rng);
        auto visitor = [&](int tri, Vec2 from, Vec2 to, double theta) {
            if (tri != base.tri) {
                inside = false;
                return;
            }
            const Vec2 c = base.pos;
            const bool from_in = dist(from, c) < radius;
            if (!inside || !from_in) {
                // Does the piece enter the disk?
                const Vec2 d = to - from;
                const double len2 = dot(d, d);
                if (len2 > 0) {
                    const Vec2 fc = from - c;
                    const double b = dot(fc, d) / len2;
                    const double cterm = (dot(fc, fc) - radius * radius) / len2;
                    const double disc = b * b - cterm;
                    if (disc > 0 && !from_in) {
                        const double t = -b - std::sqrt(disc);
                        if (t >= 0 && t <= 1) out.angles.push_back(wrap_unit(theta / kTwoPi));
                    }
                }
            }
            inside = dist(to, c) < radius;
        };
        TraceResult tr = flow(surface, cur, len, mode, visitor);
        if (tr.hit_cone) continue;  // redraw
        cur = tr.state;
    }
    out.steps_used = step;
    out.partial = static_cast<std::int64_t>(out.angles.size()) < num_returns;
    out.discrepancy = star_discrepancy(out.angles);
    return out;
}

}  // namespace flatspec
