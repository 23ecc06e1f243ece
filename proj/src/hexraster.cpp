#include "pftrail/hexraster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pftrail {

const std::array<Axial, 6> kHexDirections = {
    Axial{1, 0}, Axial{1, -1}, Axial{0, -1},
    Axial{-1, 0}, Axial{-1, 1}, Axial{0, 1}};

namespace {

double dist2(const Vec2& a, const Vec2& b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

}  // namespace

Axial world_to_cell(const HexGrid& grid, const Vec2& p) {
    double px = (p.x - grid.origin.x) / grid.edge;
    double py = (p.y - grid.origin.y) / grid.edge;
    double qf = px / 1.5;
    double rf = py / std::sqrt(3.0) - 0.5 * qf;

    // Cube rounding gets within one cell; the exact scan below settles
    // boundary points deterministically.
    double xf = qf, zf = rf, yf = -xf - zf;
    double rx = std::round(xf), ry = std::round(yf), rz = std::round(zf);
    double dx = std::abs(rx - xf), dy = std::abs(ry - yf), dz = std::abs(rz - zf);
    if (dx > dy && dx > dz)
        rx = -ry - rz;
    else if (dy <= dz)
        rz = -rx - ry;
    Axial best{int(rx), int(rz)};

    double best_d = dist2(p, grid.center(best));
    for (const Axial& d : kHexDirections) {
        Axial cand{best.q + d.q, best.r + d.r};
        double dd = dist2(p, grid.center(cand));
        if (dd < best_d || (dd == best_d && cand < best)) {
            best = cand;
            best_d = dd;
        }
    }
    return best;
}

MergePolicy parse_merge_policy(const std::string& name) {
    if (name == "max") return MergePolicy::max;
    if (name == "min") return MergePolicy::min;
    if (name == "first") return MergePolicy::first;
    if (name == "last") return MergePolicy::last;
    throw std::invalid_argument("unknown merge policy: " + name);
}

ColumnBuilder::ColumnBuilder(const HexGrid& grid, const RasterOptions& opt)
    : grid_(grid), opt_(opt) {
    if (!(grid.edge > 0.0))
        throw std::invalid_argument("grid edge must be positive");
    if (!(opt.gap_threshold > 0.0))
        throw std::invalid_argument("gap threshold must be positive");
}

void ColumnBuilder::add(const SamplePoint& s) {
    auto& clusters = cells_[world_to_cell(grid_, s.position)];
    if (!clusters.empty() && s.t - clusters.back().t_hi <= opt_.gap_threshold) {
        clusters.back().t_hi = s.t;
        clusters.back().all_jump = clusters.back().all_jump && s.on_jump;
    } else {
        clusters.push_back({s.t, s.t, s.on_jump});
    }
    ++count_;
}

void ColumnBuilder::merge(ColumnBuilder&& other) {
    for (auto& [cell, incoming] : other.cells_) {
        auto& mine = cells_[cell];
        if (mine.empty()) {
            mine = std::move(incoming);
            continue;
        }
        mine.insert(mine.end(), incoming.begin(), incoming.end());
        std::sort(mine.begin(), mine.end(),
                  [](const Cluster& a, const Cluster& b) { return a.t_lo < b.t_lo; });
        // Rejoin across the seam with the same gap rule as add().
        std::vector<Cluster> joined;
        for (const Cluster& c : mine) {
            if (!joined.empty() && c.t_lo - joined.back().t_hi <= opt_.gap_threshold) {
                joined.back().t_hi = std::max(joined.back().t_hi, c.t_hi);
                joined.back().all_jump = joined.back().all_jump && c.all_jump;
            } else {
                joined.push_back(c);
            }
        }
        mine = std::move(joined);
    }
    count_ += other.count_;
    other.cells_.clear();
    other.count_ = 0;
}

std::vector<CellColumn> ColumnBuilder::finalize() && {
    std::vector<CellColumn> columns;
    columns.reserve(cells_.size());
    bool top_from_hi =
        opt_.policy == MergePolicy::max || opt_.policy == MergePolicy::last;
    for (auto& [cell, clusters] : cells_) {
        CellColumn col{cell, {}};
        col.layers.reserve(clusters.size());
        for (size_t i = 0; i < clusters.size(); ++i) {
            Layer layer;
            layer.t_lo = clusters[i].t_lo;
            layer.t_hi = clusters[i].t_hi;
            layer.top = (top_from_hi ? clusters[i].t_hi : clusters[i].t_lo) *
                        opt_.z_scale;
            layer.kind = (i > 0 || clusters[i].all_jump) ? LayerKind::bridge
                                                         : LayerKind::ground;
            col.layers.push_back(layer);
        }
        columns.push_back(std::move(col));
    }
    std::sort(columns.begin(), columns.end(),
              [](const CellColumn& a, const CellColumn& b) { return a.cell < b.cell; });
    cells_.clear();
    count_ = 0;
    return columns;
}

std::vector<CellColumn> rasterize(const std::vector<SamplePoint>& samples,
                                  const HexGrid& grid,
                                  const RasterOptions& opt) {
    if (samples.empty())
        throw std::invalid_argument("cannot rasterize an empty sample stream");
    ColumnBuilder builder(grid, opt);
    for (const SamplePoint& s : samples) builder.add(s);
    return std::move(builder).finalize();
}

namespace {

const Layer* ground_layer(const CellColumn& col) {
    if (!col.layers.empty() && col.layers.front().kind == LayerKind::ground)
        return &col.layers.front();
    return nullptr;
}

}  // namespace

void mark_cliffs(std::vector<CellColumn>& columns, double cliff_threshold) {
    if (!(cliff_threshold > 0.0))
        throw std::invalid_argument("cliff threshold must be positive");
    std::unordered_map<Axial, double, AxialHash> ground_tops;
    for (const CellColumn& col : columns)
        if (const Layer* g = ground_layer(col)) ground_tops.emplace(col.cell, g->top);

    for (CellColumn& col : columns) {
        if (!ground_layer(col)) continue;
        Layer& g = col.layers.front();
        for (size_t d = 0; d < kHexDirections.size(); ++d) {
            Axial nb{col.cell.q + kHexDirections[d].q,
                     col.cell.r + kHexDirections[d].r};
            auto it = ground_tops.find(nb);
            g.cliff_flags[d] =
                it == ground_tops.end() || it->second < g.top - cliff_threshold;
        }
    }
}

void erode(std::vector<CellColumn>& columns, double grid_edge,
           double slope_limit, int iterations) {
    if (!(grid_edge > 0.0) || !(slope_limit > 0.0))
        throw std::invalid_argument("erosion needs positive edge and slope limit");
    if (iterations < 0)
        throw std::invalid_argument("erosion iterations must be >= 0");
    double step = slope_limit * 1.5 * grid_edge;

    std::unordered_map<Axial, CellColumn*, AxialHash> index;
    for (CellColumn& col : columns)
        if (ground_layer(col)) index.emplace(col.cell, &col);

    // Jacobi relaxation; tops only ever decrease, so the fixpoint is the
    // per-cell minimum of neighbour tops plus graph-distance slack.
    for (int iter = 0; iterations == 0 || iter < iterations; ++iter) {
        std::unordered_map<Axial, double, AxialHash> snapshot;
        snapshot.reserve(index.size());
        for (auto& [cell, col] : index) snapshot.emplace(cell, col->layers.front().top);

        bool changed = false;
        for (auto& [cell, col] : index) {
            double limit = col->layers.front().top;
            for (const Axial& d : kHexDirections) {
                auto it = snapshot.find({cell.q + d.q, cell.r + d.r});
                if (it != snapshot.end())
                    limit = std::min(limit, it->second + step);
            }
            if (limit < col->layers.front().top) {
                col->layers.front().top = limit;
                changed = true;
            }
        }
        if (!changed) break;
    }
}

std::string dump_columns(const std::vector<CellColumn>& columns) {
    std::vector<const CellColumn*> sorted;
    sorted.reserve(columns.size());
    for (const CellColumn& col : columns) sorted.push_back(&col);
    std::sort(sorted.begin(), sorted.end(),
              [](const CellColumn* a, const CellColumn* b) { return a->cell < b->cell; });

    std::ostringstream out;
    out.precision(17);
    for (const CellColumn* col : sorted) {
        for (size_t i = 0; i < col->layers.size(); ++i) {
            const Layer& l = col->layers[i];
            out << col->cell.q << ' ' << col->cell.r << ' ' << i << ' ' << l.t_lo
                << ' ' << l.t_hi << ' ' << l.top << ' '
                << (l.kind == LayerKind::ground ? "ground" : "bridge") << '\n';
        }
    }
    return out.str();
}

}  // namespace pftrail
