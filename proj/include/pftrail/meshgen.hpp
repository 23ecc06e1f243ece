#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "pftrail/geometry.hpp"
#include "pftrail/hexraster.hpp"

namespace pftrail {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> colors;  // rgb in [0,1], parallel to vertices
    std::vector<std::array<uint32_t, 3>> triangles;

    bool empty() const { return triangles.empty(); }
};

// Unit normal of one face; faces are flat shaded, so this is also the
// normal serialized for each of its corners.
Vec3 face_normal(const Mesh& mesh, size_t tri);

// Deduplicates vertices as they are added (positions welded at 1e-9,
// colours at 1e-6) and drops degenerate triangles.
class MeshBuilder {
public:
    uint32_t vertex(const Vec3& p, const Vec3& color);
    void triangle(uint32_t a, uint32_t b, uint32_t c);
    Mesh take() &&;

private:
    struct Key {
        std::array<int64_t, 6> v;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            uint64_t h = 1469598103934665603ull;
            for (int64_t x : k.v) {
                h ^= uint64_t(x);
                h *= 1099511628211ull;
            }
            return size_t(h);
        }
    };

    Mesh mesh_;
    std::unordered_map<Key, uint32_t, KeyHash> index_;
};

struct SceneConfig {
    Vec3 camera{};
    Vec3 look_at{};
    double fov_deg = 50.0;  // vertical, must stay inside (10, 120)

    bool background = true;
    double bg_front_z = 0.0;
    double bg_back_z = 0.0;
    double bg_cliff_y = 0.0;

    bool parapets = false;
    double parapet_height = 0.0;     // 0 resolves to 1.5 * edge
    double parapet_thickness = 0.0;  // 0 resolves to 0.25 * edge

    double bridge_thickness = 0.0;  // 0 resolves to 3 * edge
};

using LayerColor = std::function<Vec3(const Layer&)>;

// Caps, walls down to the lower neighbour (or the base plane), bridge
// slabs, and optional parapets on flagged cliff edges.
Mesh build_terrain(const std::vector<CellColumn>& columns, const HexGrid& grid,
                   const SceneConfig& config, const LayerColor& color);

// Front plane, cliff wall, back half-plane; empty when disabled.
Mesh build_background(const SceneConfig& config, const BBox2& model_bbox);

// Deterministic COLLADA 1.4.1: fixed asset block, one geometry per
// non-empty mesh, a camera at config.camera aimed at config.look_at.
void write_collada(const std::vector<Mesh>& meshes, const SceneConfig& scene,
                   std::ostream& out);
std::string collada_string(const std::vector<Mesh>& meshes, const SceneConfig& scene);

}  // namespace pftrail
