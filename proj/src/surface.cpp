#include "flatspec/surface.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace flatspec {

namespace {

int corner_of_edge_start(int e) { return (e + 1) % 3; }
int corner_of_edge_end(int e) { return (e + 2) % 3; }

double triangle_area(const std::array<Vec2, 3>& tri) {
    return 0.5 * cross(tri[1] - tri[0], tri[2] - tri[0]);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TriangulatedFlatSurface::TriangulatedFlatSurface(
    std::vector<std::array<Vec2, 3>> triangles,
    std::vector<std::pair<EdgeRef, EdgeRef>> gluing_pairs)
    : triangles_(std::move(triangles)) {
    if (triangles_.empty()) throw ValidationError("surface has no triangles");
    for (size_t t = 0; t < triangles_.size(); ++t) {
        const double area = triangle_area(triangles_[t]);
        if (!(area > 0))
            throw ValidationError("triangle " + std::to_string(t) +
                                  " is degenerate or negatively oriented");
        total_area_ += area;
    }
    build_gluings(gluing_pairs);
    build_vertex_classes();

    // Genus from the Euler characteristic V - E + F = 2 - 2g.
    const int F = num_triangles();
    const int E = 3 * F / 2;
    const int chi = num_classes_ - E + F;
    if ((2 - chi) % 2 != 0) throw ValidationError("odd Euler characteristic defect");
    genus_ = (2 - chi) / 2;

    validate_angles();
}

void TriangulatedFlatSurface::build_gluings(
    const std::vector<std::pair<EdgeRef, EdgeRef>>& pairs) {
    const int F = num_triangles();
    if (static_cast<int>(pairs.size()) * 2 != 3 * F)
        throw ValidationError("gluing list must pair every edge exactly once");
    gluings_.assign(F, {});
    std::vector<bool> used(3 * F, false);

    auto check_ref = [&](const EdgeRef& r) {
        if (r.tri < 0 || r.tri >= F || r.edge < 0 || r.edge > 2)
            throw ValidationError("edge reference out of range");
        if (used[3 * r.tri + r.edge])
            throw ValidationError("edge (" + std::to_string(r.tri) + "," +
                                  std::to_string(r.edge) + ") glued more than once");
        used[3 * r.tri + r.edge] = true;
    };

    for (const auto& [a, b] : pairs) {
        check_ref(a);
        check_ref(b);
        if (a == b) throw ValidationError("edge glued to itself");

        const auto& ta = triangles_[a.tri];
        const auto& tb = triangles_[b.tri];
        const Vec2 a0 = ta[corner_of_edge_start(a.edge)];
        const Vec2 a1 = ta[corner_of_edge_end(a.edge)];
        const Vec2 b0 = tb[corner_of_edge_start(b.edge)];
        const Vec2 b1 = tb[corner_of_edge_end(b.edge)];

        const double la = dist(a0, a1), lb = dist(b0, b1);
        if (std::fabs(la - lb) > kLengthTol * std::max(la, lb) * 8)
            throw ValidationError("paired edges have mismatched lengths: " +
                                  std::to_string(la) + " vs " + std::to_string(lb));

        // Orientation-preserving map sending a0 -> b1, a1 -> b0 (boundary
        // orientations of glued edges are opposite on an oriented surface).
        const std::complex<double> da(a1.x - a0.x, a1.y - a0.y);
        const std::complex<double> db(b0.x - b1.x, b0.y - b1.y);
        Isometry fwd;
        fwd.rotation = std::arg(db / da);
        const double c = std::cos(fwd.rotation), s = std::sin(fwd.rotation);
        fwd.translation = {b1.x - (c * a0.x - s * a0.y), b1.y - (s * a0.x + c * a0.y)};

        // Exactness of the isometry on both endpoints.
        if (dist(fwd.apply(a0), b1) > kLengthTol * std::max(1.0, la) * 8 ||
            dist(fwd.apply(a1), b0) > kLengthTol * std::max(1.0, la) * 8)
            throw ValidationError("gluing isometry does not carry edge onto partner");

        gluings_[a.tri][a.edge] = Gluing{b, fwd};
        gluings_[b.tri][b.edge] = Gluing{a, fwd.inverse()};
    }
    for (int i = 0; i < 3 * F; ++i)
        if (!used[i]) throw ValidationError("unglued edge present");
}

double TriangulatedFlatSurface::corner_angle(int t, int corner) const {
    const auto& tri = triangles_[t];
    const Vec2 u = tri[(corner + 1) % 3] - tri[corner];
    const Vec2 v = tri[(corner + 2) % 3] - tri[corner];
    return std::atan2(std::fabs(cross(u, v)), dot(u, v));
}

void TriangulatedFlatSurface::build_vertex_classes() {
    const int F = num_triangles();
    UnionFind uf(3 * F);
    for (int t = 0; t < F; ++t) {
        for (int e = 0; e < 3; ++e) {
            const Gluing& g = gluings_[t][e];
            // Edge start maps to partner edge end and vice versa.
            uf.unite(3 * t + corner_of_edge_start(e),
                     3 * g.partner.tri + corner_of_edge_end(g.partner.edge));
            uf.unite(3 * t + corner_of_edge_end(e),
                     3 * g.partner.tri + corner_of_edge_start(g.partner.edge));
        }
    }
    corner_class_.assign(3 * F, -1);
    std::vector<int> root_to_class(3 * F, -1);
    num_classes_ = 0;
    for (int i = 0; i < 3 * F; ++i) {
        const int r = uf.find(i);
        if (root_to_class[r] < 0) root_to_class[r] = num_classes_++;
        corner_class_[i] = root_to_class[r];
    }
    class_angle_.assign(num_classes_, 0.0);
    for (int t = 0; t < F; ++t)
        for (int c = 0; c < 3; ++c) class_angle_[corner_class_[3 * t + c]] += corner_angle(t, c);
}

void TriangulatedFlatSurface::validate_angles() const {
    // Gauss-Bonnet: sum of alpha over all vertex classes equals 2g - 2.
    double alpha_sum = 0.0;
    for (double a : class_angle_) alpha_sum += a / kTwoPi - 1.0;
    if (std::fabs(alpha_sum - (2.0 * genus_ - 2.0)) > 1e-9)
        throw ValidationError("Gauss-Bonnet defect: sum alpha = " + std::to_string(alpha_sum) +
                              ", expected " + std::to_string(2.0 * genus_ - 2.0));
    for (double a : class_angle_)
        if (!(a > 0)) throw ValidationError("non-positive total angle at a vertex");
}

std::vector<ConePointData> TriangulatedFlatSurface::cone_data() const {
    std::vector<ConePointData> out;
    out.reserve(num_classes_);
    for (int v = 0; v < num_classes_; ++v) {
        ConePointData d;
        d.vertex_class = v;
        d.total_angle = class_angle_[v];
        d.alpha = d.total_angle / kTwoPi - 1.0;
        d.is_singular = std::fabs(d.total_angle - kTwoPi) > kAngleTol;
        out.push_back(d);
    }
    return out;
}

Loop TriangulatedFlatSurface::vertex_loop(int vertex_class) const {
    // Walk the corner fan around the vertex: from corner c of triangle t cross
    // the incident edge (c+1)%3 and continue at the matching corner.
    int t0 = -1, c0 = -1;
    for (int t = 0; t < num_triangles() && t0 < 0; ++t)
        for (int c = 0; c < 3; ++c)
            if (corner_class_[3 * t + c] == vertex_class) {
                t0 = t;
                c0 = c;
                break;
            }
    if (t0 < 0) throw std::out_of_range("no such vertex class");

    Loop loop;
    int t = t0, c = c0;
    do {
        const int e = (c + 1) % 3;
        loop.push_back({t, e});
        const Gluing& g = gluings_[t][e];
        t = g.partner.tri;
        c = (g.partner.edge + 1) % 3;  // image of the corner across the gluing
    } while (!(t == t0 && c == c0));
    return loop;
}

double TriangulatedFlatSurface::transport_loop(const Loop& loop) const {
    if (loop.empty()) return 0.0;
    int expect = loop.front().tri;
    double rot = 0.0;
    for (const EdgeRef& cr : loop) {
        if (cr.tri != expect) throw ValidationError("loop does not close: chart mismatch");
        const Gluing& g = gluings_[cr.tri][cr.edge];
        rot += g.to_partner.rotation;
        expect = g.partner.tri;
    }
    if (expect != loop.front().tri) throw ValidationError("loop does not close");
    return wrap_angle(rot);
}

HolonomyData TriangulatedFlatSurface::holonomy_generators() const {
    HolonomyData out;
    const auto cones = cone_data();
    for (const auto& c : cones) {
        if (!c.is_singular) continue;
        out.generators.push_back(vertex_loop(c.vertex_class));
    }
    if (genus_ >= 1) {
        // Handle loops from a spanning tree of the gluing graph: each cotree
        // gluing contributes the loop tree-path + crossing + reverse tree-path.
        const int F = num_triangles();
        std::vector<int> parent(F, -1), parent_edge(F, -1);
        std::vector<bool> seen(F, false);
        std::vector<int> stack{0};
        seen[0] = true;
        std::vector<std::pair<int, int>> order;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int e = 0; e < 3; ++e) {
                const int t2 = gluings_[t][e].partner.tri;
                if (!seen[t2]) {
                    seen[t2] = true;
                    parent[t2] = t;
                    parent_edge[t2] = e;
                    stack.push_back(t2);
                }
            }
        }
        auto path_to_root = [&](int t) {
            Loop path;  // crossings from root chart down to t, reversed below
            std::vector<EdgeRef> down;
            int cur = t;
            while (parent[cur] >= 0) {
                down.push_back({parent[cur], parent_edge[cur]});
                cur = parent[cur];
            }
            std::reverse(down.begin(), down.end());
            return down;  // crossings leading root -> t
        };
        std::vector<std::vector<bool>> in_tree(F, std::vector<bool>(3, false));
        for (int t = 0; t < F; ++t)
            if (parent[t] >= 0) {
                in_tree[parent[t]][parent_edge[t]] = true;
                const Gluing& g = gluings_[parent[t]][parent_edge[t]];
                in_tree[g.partner.tri][g.partner.edge] = true;
            }
        std::vector<std::vector<bool>> done(F, std::vector<bool>(3, false));
        for (int t = 0; t < F; ++t) {
            for (int e = 0; e < 3; ++e) {
                if (in_tree[t][e] || done[t][e]) continue;
                const Gluing& g = gluings_[t][e];
                done[t][e] = true;
                done[g.partner.tri][g.partner.edge] = true;
                Loop loop = path_to_root(t);
                loop.push_back({t, e});
                Loop back = path_to_root(g.partner.tri);
                std::reverse(back.begin(), back.end());
                for (const EdgeRef& cr : back) {
                    const Gluing& h = gluings_[cr.tri][cr.edge];
                    loop.push_back({h.partner.tri, h.partner.edge});
                }
                out.generators.push_back(std::move(loop));
            }
        }
    }
    for (const Loop& loop : out.generators)
        out.angles.push_back(wrap_unit(transport_loop(loop) / kTwoPi));
    return out;
}

TriangulatedFlatSurface double_of_triangle(double a, double b, double c, double scale) {
    if (!(a > 0) || !(b > 0) || !(c > 0) || std::fabs(a + b + c - M_PI) > 1e-12)
        throw ValidationError("triangle angles must be positive and sum to pi");
    if (!(scale > 0)) throw ValidationError("scale must be positive");
    // Side opposite corner 2 along the x-axis, length by the law of sines.
    const Vec2 p0{0.0, 0.0};
    const Vec2 p1{scale, 0.0};
    const double l02 = scale * std::sin(b) / std::sin(c);  // |p2 - p0|
    const Vec2 p2{l02 * std::cos(a), l02 * std::sin(a)};
    // Mirror copy re-ordered to stay positively oriented: corners of the
    // second chart carry angles (a, c, b).
    auto m = [](Vec2 p) { return Vec2{p.x, -p.y}; };
    std::vector<std::array<Vec2, 3>> tris = {{p0, p1, p2}, {m(p0), m(p2), m(p1)}};
    std::vector<std::pair<EdgeRef, EdgeRef>> pairs = {
        {{0, 0}, {1, 0}}, {{0, 1}, {1, 2}}, {{0, 2}, {1, 1}}};
    return TriangulatedFlatSurface(std::move(tris), std::move(pairs));
}

TriangulatedFlatSurface torus(Vec2 u, Vec2 v) {
    if (cross(u, v) <= 0) throw ValidationError("torus periods must be positively oriented");
    const Vec2 o{0, 0};
    std::vector<std::array<Vec2, 3>> tris = {{o, u, u + v}, {o, u + v, v}};
    std::vector<std::pair<EdgeRef, EdgeRef>> pairs = {
        {{0, 1}, {1, 2}},  // diagonal
        {{0, 2}, {1, 0}},  // u-side with opposite side
        {{0, 0}, {1, 1}}   // v-side with opposite side
    };
    return TriangulatedFlatSurface(std::move(tris), std::move(pairs));
}

TriangulatedFlatSurface build_from_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("surface spec is not valid JSON: ") + e.what());
    }
    try {
        if (j.contains("double_triangle")) {
            const auto& d = j["double_triangle"];
            const auto ang = d.at("angles_over_pi");
            if (ang.size() != 3) throw ValidationError("angles_over_pi needs 3 entries");
            const double s = d.value("scale", 1.0);
            return double_of_triangle(ang[0].get<double>() * M_PI, ang[1].get<double>() * M_PI,
                                      ang[2].get<double>() * M_PI, s);
        }
        if (j.contains("torus")) {
            const auto& t = j["torus"];
            const auto u = t.at("u"), v = t.at("v");
            return torus({u[0].get<double>(), u[1].get<double>()},
                         {v[0].get<double>(), v[1].get<double>()});
        }
        std::vector<std::array<Vec2, 3>> tris;
        for (const auto& tri : j.at("triangles")) {
            if (tri.size() != 3) throw ValidationError("triangle needs 3 vertices");
            std::array<Vec2, 3> a;
            for (int i = 0; i < 3; ++i) a[i] = {tri[i][0].get<double>(), tri[i][1].get<double>()};
            tris.push_back(a);
        }
        std::vector<std::pair<EdgeRef, EdgeRef>> pairs;
        for (const auto& g : j.at("gluings")) {
            if (g.size() != 2) throw ValidationError("gluing needs 2 edge refs");
            pairs.push_back({EdgeRef{g[0][0].get<int>(), g[0][1].get<int>()},
                             EdgeRef{g[1][0].get<int>(), g[1][1].get<int>()}});
        }
        return TriangulatedFlatSurface(std::move(tris), std::move(pairs));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed surface spec: ") + e.what());
    }
}

}  // namespace flatspec
