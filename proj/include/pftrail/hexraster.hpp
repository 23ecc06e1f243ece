#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pftrail/geometry.hpp"
#include "pftrail/traversal.hpp"

namespace pftrail {

struct Axial {
    int q = 0;
    int r = 0;

    bool operator==(const Axial&) const = default;
};

// q major, r minor; used for output ordering and nearest-cell tie breaks.
inline bool operator<(const Axial& a, const Axial& b) {
    return a.q != b.q ? a.q < b.q : a.r < b.r;
}

struct AxialHash {
    size_t operator()(const Axial& a) const {
        return size_t(uint32_t(a.q)) * 0x9e3779b9u ^ uint32_t(a.r);
    }
};

// Flat-top hexagons. Neighbour order here is also the cliff flag order.
extern const std::array<Axial, 6> kHexDirections;

struct HexGrid {
    double edge = 1.0;
    Vec2 origin{};

    Vec2 center(const Axial& a) const {
        static const double kRow = std::sqrt(3.0);
        return {origin.x + 1.5 * edge * a.q,
                origin.y + kRow * edge * (a.r + 0.5 * a.q)};
    }
};

// Nearest cell center; equidistant points go to the smallest (q, r).
Axial world_to_cell(const HexGrid& grid, const Vec2& p);

enum class MergePolicy { max, min, first, last };
enum class LayerKind { ground, bridge };

MergePolicy parse_merge_policy(const std::string& name);

struct Layer {
    double t_lo = 0.0;
    double t_hi = 0.0;
    double top = 0.0;
    LayerKind kind = LayerKind::ground;
    std::array<bool, 6> cliff_flags{};
};

struct CellColumn {
    Axial cell;
    std::vector<Layer> layers;  // ascending in t, disjoint
};

struct RasterOptions {
    double gap_threshold = 0.0;  // required, > 0; larger t-gaps split layers
    MergePolicy policy = MergePolicy::max;
    double z_scale = 1.0;  // layer top = policy(cluster t values) * z_scale
};

// Accumulates samples into per-cell layer clusters. Feed each builder an
// ascending-t stream; builders for disjoint t windows merge in any order
// and finalize to the same columns as one sequential pass.
class ColumnBuilder {
public:
    ColumnBuilder(const HexGrid& grid, const RasterOptions& opt);

    void add(const SamplePoint& s);
    void merge(ColumnBuilder&& other);
    std::vector<CellColumn> finalize() &&;

    size_t sample_count() const { return count_; }

private:
    struct Cluster {
        double t_lo, t_hi;
        bool all_jump;
    };

    HexGrid grid_;
    RasterOptions opt_;
    std::unordered_map<Axial, std::vector<Cluster>, AxialHash> cells_;
    size_t count_ = 0;
};

// One-shot wrapper over ColumnBuilder; columns sorted by (q, r).
std::vector<CellColumn> rasterize(const std::vector<SamplePoint>& samples,
                                  const HexGrid& grid,
                                  const RasterOptions& opt);

// Sets ground-layer cliff flags: a direction is flagged when the
// neighbour has no ground or its ground top is lower by more than
// cliff_threshold.
void mark_cliffs(std::vector<CellColumn>& columns, double cliff_threshold);

// Limits ground slopes to slope_limit * 1.5 * grid_edge per neighbour
// step. iterations = 0 runs to the fixpoint. Bridges are untouched.
void erode(std::vector<CellColumn>& columns, double grid_edge,
           double slope_limit, int iterations);

// Debug/golden format: one line per layer, "q r layer_index t_lo t_hi top
// kind", sorted by (q, r, layer_index).
std::string dump_columns(const std::vector<CellColumn>& columns);

}  // namespace pftrail
