#include "pftrail/meshgen.hpp"

#include <cmath>
#include <stdexcept>

namespace pftrail {

namespace {

// Corner k of a flat-top hexagon sits at angle k*60 degrees. Corners are
// computed from exact dyadic lattice offsets, never from the cell center,
// so cells sharing a corner produce bitwise-identical coordinates and the
// weld is guaranteed to merge them.
Vec2 hex_corner(const HexGrid& grid, const Axial& cell, int k) {
    static const double kCx[6] = {1.0, 0.5, -0.5, -1.0, -0.5, 0.5};
    static const double kCy[6] = {0.0, 0.5, 0.5, 0.0, -0.5, -0.5};
    double ux = 1.5 * cell.q + kCx[k];
    double uy = cell.r + 0.5 * cell.q + kCy[k];
    return {grid.origin.x + grid.edge * ux,
            grid.origin.y + grid.edge * (std::sqrt(3.0) * uy)};
}

// kHexDirections[d] faces the edge between these two corners, in the
// hexagon's counterclockwise corner order.
constexpr int kEdgeCorner[6][2] = {{0, 1}, {5, 0}, {4, 5}, {3, 4}, {2, 3}, {1, 2}};

struct TerrainBuilder {
    MeshBuilder mesh;

    void cap(const Vec2 corners[6], const Vec2& center, double z, const Vec3& col,
             bool up) {
        uint32_t c = mesh.vertex({center.x, center.y, z}, col);
        for (int k = 0; k < 6; ++k) {
            uint32_t a = mesh.vertex({corners[k].x, corners[k].y, z}, col);
            uint32_t b = mesh.vertex({corners[(k + 1) % 6].x, corners[(k + 1) % 6].y, z},
                                     col);
            if (up)
                mesh.triangle(c, a, b);
            else
                mesh.triangle(c, b, a);
        }
    }

    // Vertical quad along a->b, from z_hi down to z_lo, facing the side
    // that lies to the right of a->b.
    void wall(const Vec2& a, const Vec2& b, double z_hi, double z_lo,
              const Vec3& col) {
        uint32_t A = mesh.vertex({a.x, a.y, z_hi}, col);
        uint32_t B = mesh.vertex({b.x, b.y, z_hi}, col);
        uint32_t C = mesh.vertex({b.x, b.y, z_lo}, col);
        uint32_t D = mesh.vertex({a.x, a.y, z_lo}, col);
        mesh.triangle(A, D, C);
        mesh.triangle(A, C, B);
    }

    void quad_horizontal(const Vec2& p0, const Vec2& p1, const Vec2& p2,
                         const Vec2& p3, double z, const Vec3& col, bool up) {
        uint32_t a = mesh.vertex({p0.x, p0.y, z}, col);
        uint32_t b = mesh.vertex({p1.x, p1.y, z}, col);
        uint32_t c = mesh.vertex({p2.x, p2.y, z}, col);
        uint32_t d = mesh.vertex({p3.x, p3.y, z}, col);
        if (up) {
            mesh.triangle(a, b, c);
            mesh.triangle(a, c, d);
        } else {
            mesh.triangle(a, c, b);
            mesh.triangle(a, d, c);
        }
    }
};

}  // namespace

Vec3 face_normal(const Mesh& mesh, size_t tri) {
    const auto& t = mesh.triangles[tri];
    Vec3 a = mesh.vertices[t[0]];
    Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    double len = n.norm();
    if (len == 0.0) return {0.0, 0.0, 1.0};
    return n * (1.0 / len);
}

uint32_t MeshBuilder::vertex(const Vec3& p, const Vec3& color) {
    Key key{{llround(p.x * 1e9), llround(p.y * 1e9), llround(p.z * 1e9),
             llround(color.x * 1e6), llround(color.y * 1e6), llround(color.z * 1e6)}};
    auto [it, inserted] = index_.try_emplace(key, uint32_t(mesh_.vertices.size()));
    if (inserted) {
        mesh_.vertices.push_back(p);
        mesh_.colors.push_back(color);
    }
    return it->second;
}

void MeshBuilder::triangle(uint32_t a, uint32_t b, uint32_t c) {
    if (a == b || b == c || a == c) return;
    Vec3 va = mesh_.vertices[a];
    Vec3 n = (mesh_.vertices[b] - va).cross(mesh_.vertices[c] - va);
    if (n.dot(n) == 0.0) return;
    mesh_.triangles.push_back({a, b, c});
}

Mesh MeshBuilder::take() && {
    index_.clear();
    return std::move(mesh_);
}

Mesh build_terrain(const std::vector<CellColumn>& columns, const HexGrid& grid,
                   const SceneConfig& config, const LayerColor& color) {
    if (columns.empty())
        throw std::invalid_argument("cannot build terrain from zero columns");

    double slab = config.bridge_thickness > 0.0 ? config.bridge_thickness
                                                : 3.0 * grid.edge;
    double rim_h = config.parapet_height > 0.0 ? config.parapet_height
                                               : 1.5 * grid.edge;
    double rim_t = config.parapet_thickness > 0.0 ? config.parapet_thickness
                                                  : 0.25 * grid.edge;
    if (config.parapets && (!(rim_h > 0.0) || !(rim_t > 0.0)))
        throw std::invalid_argument("parapet size must be positive");

    std::unordered_map<Axial, double, AxialHash> ground_tops;
    for (const CellColumn& col : columns)
        if (!col.layers.empty() && col.layers.front().kind == LayerKind::ground)
            ground_tops.emplace(col.cell, col.layers.front().top);

    TerrainBuilder tb;
    for (const CellColumn& col : columns) {
        Vec2 center = grid.center(col.cell);
        Vec2 corners[6];
        for (int k = 0; k < 6; ++k) corners[k] = hex_corner(grid, col.cell, k);

        for (const Layer& layer : col.layers) {
            Vec3 rgb = color(layer);
            if (layer.kind == LayerKind::bridge) {
                double z1 = layer.top, z0 = layer.top - slab;
                tb.cap(corners, center, z1, rgb, true);
                tb.cap(corners, center, z0, rgb, false);
                for (int d = 0; d < 6; ++d)
                    tb.wall(corners[kEdgeCorner[d][0]], corners[kEdgeCorner[d][1]],
                            z1, z0, rgb);
                continue;
            }

            double top = layer.top;
            tb.cap(corners, center, top, rgb, true);
            tb.cap(corners, center, 0.0, rgb, false);
            for (int d = 0; d < 6; ++d) {
                Axial nb{col.cell.q + kHexDirections[d].q,
                         col.cell.r + kHexDirections[d].r};
                auto it = ground_tops.find(nb);
                double floor = it == ground_tops.end() ? 0.0 : it->second;
                if (it == ground_tops.end() || it->second < top)
                    tb.wall(corners[kEdgeCorner[d][0]], corners[kEdgeCorner[d][1]],
                            top, floor, rgb);

                if (config.parapets && layer.cliff_flags[d]) {
                    const Vec2& a = corners[kEdgeCorner[d][0]];
                    const Vec2& b = corners[kEdgeCorner[d][1]];
                    Vec2 mid = (a + b) * 0.5;
                    Vec2 in = (center - mid) / (center - mid).norm() * rim_t;
                    Vec2 a2 = a + in, b2 = b + in;
                    double z1 = top + rim_h;
                    tb.wall(a, b, z1, top, rgb);    // outer face
                    tb.wall(b, b2, z1, top, rgb);   // end toward b
                    tb.wall(b2, a2, z1, top, rgb);  // inner face
                    tb.wall(a2, a, z1, top, rgb);   // end toward a
                    tb.quad_horizontal(a, b, b2, a2, z1, rgb, true);
                    tb.quad_horizontal(a, b, b2, a2, top, rgb, false);
                }
            }
        }
    }
    return std::move(tb.mesh).take();
}

Mesh build_background(const SceneConfig& config, const BBox2& model_bbox) {
    if (!config.background || model_bbox.empty()) return {};

    // Triple the footprint around its center.
    Vec2 c = model_bbox.center();
    double hw = 1.5 * model_bbox.width(), hh = 1.5 * model_bbox.height();
    double x0 = c.x - hw, x1 = c.x + hw;
    double y0 = c.y - hh, y1 = c.y + hh;
    double yc = config.bg_cliff_y;

    Vec3 col{0.5, 0.5, 0.5};
    TerrainBuilder tb;
    // Low plane in front of the cliff line, high half-plane behind it.
    tb.quad_horizontal({x0, y0}, {x1, y0}, {x1, yc}, {x0, yc}, config.bg_front_z,
                       col, true);
    tb.quad_horizontal({x0, yc}, {x1, yc}, {x1, y1}, {x0, y1}, config.bg_back_z,
                       col, true);
    // Cliff wall faces the front (negative y).
    tb.wall({x0, yc}, {x1, yc}, config.bg_back_z, config.bg_front_z, col);
    return std::move(tb.mesh).take();
}

}  // namespace pftrail
