#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pftrail/curvedef.hpp"
#include "pftrail/geometry.hpp"

namespace pftrail {

struct SamplePoint {
    double t = 0.0;
    Vec2 position{};
    bool on_jump = false;
};

struct ExpansionBound {
    double radius = 0.0;
    int depth_used = 0;
};

// Polynomial close-up about a focus. Radii about the focus map to
// r^(1/zeta) with the angle kept exactly; the t offset from t_focus maps
// by its own exponent 1/(1.5 zeta - 0.5). Outputs stay focus-relative.
struct CloseupMap {
    Vec2 focus{};
    double t_focus = 0.0;
    double zeta = 1.0;

    double t_exponent() const { return 1.0 / (1.5 * zeta - 0.5); }
    Vec2 map_xy(const Vec2& p) const;
    double map_t(double t) const;
};

struct SampleOptions {
    double max_gap = 0.0;  // required, > 0; sections are emitted strictly below this
    int oversample = 1;    // divides the effective gap
    // Optional output-metric transform: subdivision measures chord lengths
    // after this map, so sampling stays dense where the map magnifies.
    std::function<Vec2(const Vec2&)> metric;
};

// Compiled evaluator for one definition. Immutable after construction;
// safe to share across threads.
class Traversal {
public:
    // Throws std::invalid_argument when the definition does not contract
    // or has degenerate segments.
    explicit Traversal(CurveDefinition def);

    const CurveDefinition& definition() const { return def_; }

    // Position of the traversal at parameter t. `depth` is the binary
    // resolution: descent stops once the accumulated scale drops below
    // max(2^-depth, 1e-15). Throws std::out_of_range outside [0,1].
    Vec2 point_at(double t, int depth = 48) const;

    // Upper bound R: every canonical section with endpoint distance d keeps
    // all its points within d*R of the nearer endpoint. Deeper is tighter
    // but never larger; the depth actually used is capped so the vertex
    // walk stays near two million nodes.
    ExpansionBound expansion_radius(int depth = 6) const;

    // Polyline approximation: consecutive non-jump points are closer than
    // max_gap/oversample (in the metric if one is set), t strictly
    // increasing, jump connectors flagged on_jump.
    std::vector<SamplePoint> sample(const SampleOptions& opt) const;

    // Chunk `index` of `count` equal parameter windows. Concatenating all
    // chunks reproduces sample(opt) byte for byte.
    std::vector<SamplePoint> sample_chunk(const SampleOptions& opt, int index,
                                          int count) const;

    // Smallest t whose image lies within eps of q, or nullopt when the
    // whole tree is pruned. eps_t is the parameter resolution of the
    // answer (branch and bound leaf width).
    std::optional<double> inverse_at(const Vec2& q, double eps,
                                     double eps_t = 1e-12) const;

private:
    // z -> a * (m ? conj(z) : z) + b over (x, y) read as x + iy.
    struct Cxf {
        double ax = 1.0, ay = 0.0;
        double bx = 0.0, by = 0.0;
        bool m = false;

        Vec2 apply(const Vec2& p) const;
        Cxf compose(const Cxf& child) const;
        double scale() const { return std::hypot(ax, ay); }
    };

    struct Piece {
        bool is_jump = false;
        Cxf map;
        double w_lo = 0.0, w_hi = 0.0;  // cumulative weight interval
        double contraction = 0.0;
        bool reversed = false;
        int target = -1;
    };

    struct Gen {
        std::vector<Piece> pieces;
        int last_segment = -1;
    };

    struct WalkCtx;

    Vec2 eval_raw(double t, int depth) const;
    const Piece* pick(const Gen& g, double u, double* local) const;
    std::vector<SamplePoint> sample_window(const SampleOptions& opt,
                                           double win_lo, double win_hi,
                                           bool emit_start, bool emit_end) const;
    void walk(int gen, const Cxf& acc, double raw_lo, double raw_hi,
              bool flipped, WalkCtx& ctx) const;
    void connector(WalkCtx& ctx, const Vec2& from, const Vec2& to, double t_jump,
                   int depth) const;
    double out_t(double raw) const;
    bool inverse_rec(int gen, const Cxf& acc, double raw_lo, double raw_hi,
                     bool flipped, int level, const Vec2& q, double eps,
                     double eps_t, double bound, double* out) const;
    void expansion_vertices(int gen, const Cxf& acc, int level, int max_level,
                            double* worst) const;

    CurveDefinition def_;
    std::vector<Gen> gens_;
    int start_ = 0;
    double c_max_ = 0.0;

    bool restricted_ = false;
    double r0_ = 0.0, r1_ = 1.0;
    Vec2 f0_{}, f1_{};  // raw images of the restriction bounds
    Cxf renorm_;        // maps f0 -> (0,0), f1 -> (1,0); identity if unrestricted

    ExpansionBound bound_;  // computed once at the default depth
};

Vec2 point_at(const CurveDefinition& def, double t, int depth = 48);
ExpansionBound expansion_radius(const CurveDefinition& def, int depth = 6);
std::vector<SamplePoint> sample(const CurveDefinition& def, double max_gap,
                                int oversample = 1);
std::optional<double> inverse_at(const CurveDefinition& def, const Vec2& q,
                                 double eps, double eps_t = 1e-12);

// Applies the close-up to every point; order and flags are preserved.
std::vector<SamplePoint> closeup(const std::vector<SamplePoint>& points,
                                 const CloseupMap& map);

}  // namespace pftrail
