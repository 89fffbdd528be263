#include "flatspec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace flatspec {

namespace {

struct OccKey {
    int tri;
    int local;
};

// Local grid on one chart triangle: nodes (i, j) with i + j <= m, node index
// row-major; corner 0 at (0,0), corner 1 at (m,0), corner 2 at (0,m).
struct LocalGrid {
    int m;
    int index(int i, int j) const {
        // nodes with fixed j form a row of (m - j + 1) entries
        return j * (m + 1) - j * (j - 1) / 2 + i;
    }
    int count() const { return (m + 1) * (m + 2) / 2; }
};

}  // namespace

SurfaceMesh::SurfaceMesh(std::shared_ptr<const TriangulatedFlatSurface> surface, int level)
    : surface_(std::move(surface)), level_(level) {
    if (level < 0 || level > 12) throw std::invalid_argument("mesh level out of range");
    const auto& S = *surface_;
    const int F = S.num_triangles();
    const int m = 1 << level;
    LocalGrid grid{m};
    const int per_tri = grid.count();

    // Union-find over local occurrences with chart-change rotations recorded
    // on the identification graph.
    const int total = F * per_tri;
    std::vector<int> parent(total);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        return parent[a] == a ? a : parent[a] = find(parent[a]);
    };
    struct Link {
        int to;
        double rot;  // rotation of chart change from this node's chart to `to`'s chart
    };
    std::vector<std::vector<Link>> links(total);

    auto lattice_of_corner = [&](int c) -> std::pair<int, int> {
        switch (c) {
            case 0: return {0, 0};
            case 1: return {m, 0};
            default: return {0, m};
        }
    };
    auto edge_node = [&](int e, int k) {
        // k-th lattice node along edge e, from corner (e+1)%3 to (e+2)%3
        auto [i0, j0] = lattice_of_corner((e + 1) % 3);
        auto [i1, j1] = lattice_of_corner((e + 2) % 3);
        return grid.index(i0 + (i1 - i0) * k / m, j0 + (j1 - j0) * k / m);
    };

    for (int t = 0; t < F; ++t) {
        for (int e = 0; e < 3; ++e) {
            const Gluing& g = S.gluing(t, e);
            const int t2 = g.partner.tri, e2 = g.partner.edge;
            if (std::make_pair(t2, e2) < std::make_pair(t, e)) continue;  // handle once
            for (int k = 0; k <= m; ++k) {
                const int a = t * per_tri + edge_node(e, k);
                const int b = t2 * per_tri + edge_node(e2, m - k);
                links[a].push_back({b, g.to_partner.rotation});
                links[b].push_back({a, -g.to_partner.rotation});
                parent[find(a)] = find(b);
            }
        }
    }

    // Representatives -> global ids; BFS per class for rotations to home.
    std::vector<int> global_of(total, -1);
    std::vector<double> rot_to_home(total, 0.0);
    std::vector<char> visited(total, 0);
    int n_global = 0;
    for (int o = 0; o < total; ++o)
        if (find(o) == o) global_of[o] = n_global++;

    vertex_pos_.assign(n_global, {});
    vertex_chart_.assign(n_global, -1);
    vertex_monodromy_.assign(n_global, kTwoPi);

    auto local_pos = [&](int t, int local) {
        // invert row-major index
        int j = 0, rem = local;
        while (rem >= m - j + 1) {
            rem -= m - j + 1;
            ++j;
        }
        const int i = rem;
        const auto& tv = S.triangle(t);
        const double fi = static_cast<double>(i) / m, fj = static_cast<double>(j) / m;
        return Vec2{tv[0].x + fi * (tv[1].x - tv[0].x) + fj * (tv[2].x - tv[0].x),
                    tv[0].y + fi * (tv[1].y - tv[0].y) + fj * (tv[2].y - tv[0].y)};
    };

    for (int o = 0; o < total; ++o) {
        const int root = find(o);
        if (visited[root]) continue;
        // BFS from the root occurrence.
        std::queue<int> q;
        q.push(root);
        visited[root] = 1;
        rot_to_home[root] = 0.0;
        const int gid = global_of[root];
        vertex_chart_[gid] = root / per_tri;
        vertex_pos_[gid] = local_pos(root / per_tri, root % per_tri);
        double monodromy_defect = 0.0;
        while (!q.empty()) {
            const int cur = q.front();
            q.pop();
            global_of[cur] = gid;
            for (const Link& l : links[cur]) {
                // rot_to_home(cur) composed after the crossing cur -> l.to:
                // R(l.to) = R(cur) - l.rot  (crossing rotates chart(cur) to chart(to))
                const double cand = rot_to_home[cur] - l.rot;
                if (!visited[l.to]) {
                    visited[l.to] = 1;
                    rot_to_home[l.to] = cand;
                    q.push(l.to);
                } else {
                    // Cycle closure measures the monodromy around the vertex.
                    const double defect = cand - rot_to_home[l.to];
                    if (std::fabs(defect) > std::fabs(monodromy_defect))
                        monodromy_defect = defect;
                }
            }
        }
        if (std::fabs(monodromy_defect) > 1e-12)
            vertex_monodromy_[gid] = std::fabs(monodromy_defect);
    }

    // Faces of the refined mesh.
    lumped_area_.assign(n_global, 0.0);
    for (int t = 0; t < F; ++t) {
        auto emit = [&](std::array<std::pair<int, int>, 3> ij) {
            MeshFace f;
            f.chart = t;
            for (int c = 0; c < 3; ++c) {
                const int local = grid.index(ij[c].first, ij[c].second);
                const int occ = t * per_tri + local;
                f.v[c] = global_of[occ];
                f.pos[c] = local_pos(t, local);
                f.rot_to_home[c] = rot_to_home[occ];
            }
            f.area = 0.5 * cross(f.pos[1] - f.pos[0], f.pos[2] - f.pos[0]);
            if (!(f.area > 0)) throw std::runtime_error("degenerate mesh face");
            for (int c = 0; c < 3; ++c) {
                lumped_area_[f.v[c]] += f.area / 3.0;
                mesh_size_ = std::max(mesh_size_, dist(f.pos[c], f.pos[(c + 1) % 3]));
            }
            total_area_ += f.area;
            faces_.push_back(f);
        };
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i + j < m; ++i) {
                emit({{{i, j}, {i + 1, j}, {i, j + 1}}});
                if (i + j < m - 1) emit({{{i + 1, j}, {i + 1, j + 1}, {i, j + 1}}});
            }
        }
    }
}

bool SurfaceMesh::mode_supported(int v, int n) const {
    return dist_to_int(n * vertex_monodromy_[v] / kTwoPi) <= 1e-9;
}

ModeSpace ModeSpace::build(const SurfaceMesh& mesh, int n) {
    ModeSpace ms;
    ms.n = n;
    ms.dof_of_vertex.assign(mesh.num_vertices(), -1);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.mode_supported(v, n)) {
            ms.dof_of_vertex[v] = static_cast<int>(ms.vertex_of_dof.size());
            ms.vertex_of_dof.push_back(v);
        }
    }
    return ms;
}

}  // namespace flatspec
