#include "pftrail/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pftrail {

namespace {

constexpr int kMaxLevels = 4096;        // descent safety valve
constexpr double kScaleFloor = 1e-15;   // finest meaningful accumulated scale
constexpr double kSliverChord = 1e-13;  // restriction boundary bottom-out
constexpr long kMaxBoundNodes = 2000000;

Vec2 cmul(const Vec2& a, const Vec2& b) {
    return {a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x};
}

}  // namespace

Vec2 Traversal::Cxf::apply(const Vec2& p) const {
    double py = m ? -p.y : p.y;
    return {ax * p.x - ay * py + bx, ax * py + ay * p.x + by};
}

Traversal::Cxf Traversal::Cxf::compose(const Cxf& c) const {
    double cay = m ? -c.ay : c.ay;
    double cby = m ? -c.by : c.by;
    Cxf r;
    r.ax = ax * c.ax - ay * cay;
    r.ay = ax * cay + ay * c.ax;
    r.bx = ax * c.bx - ay * cby + bx;
    r.by = ax * cby + ay * c.bx + by;
    r.m = m != c.m;
    return r;
}

Traversal::Traversal(CurveDefinition def) : def_(std::move(def)) {
    if (def_.generators.empty())
        throw std::invalid_argument("definition has no generators");
    start_ = def_.generator_index(def_.start);
    if (start_ < 0)
        throw std::invalid_argument("start generator '" + def_.start +
                                    "' not defined");

    gens_.resize(def_.generators.size());
    for (size_t gi = 0; gi < def_.generators.size(); ++gi) {
        auto transforms = segment_transforms(def_.generators[gi], def_);
        Gen& g = gens_[gi];
        g.pieces.reserve(transforms.size());
        double running = 0.0;
        for (const SegmentTransform& st : transforms) {
            Piece p;
            p.is_jump = st.is_jump;
            double c = std::cos(st.map.rotation), s = std::sin(st.map.rotation);
            p.map.ax = st.map.scale * c;
            p.map.ay = st.map.scale * s;
            p.map.bx = st.map.translation.x;
            p.map.by = st.map.translation.y;
            p.map.m = st.map.mirrored;
            p.w_lo = running;
            if (!st.is_jump) {
                running += st.weight;
                p.contraction = st.contraction;
                p.reversed = st.reversed;
                p.target = st.target;
                if (!(p.contraction < 1.0))
                    throw std::invalid_argument(
                        "generator '" + def_.generators[gi].id +
                        "' does not contract");
                c_max_ = std::max(c_max_, p.contraction);
                g.last_segment = int(g.pieces.size());
            }
            p.w_hi = running;
            g.pieces.push_back(p);
        }
        if (g.last_segment < 0)
            throw std::invalid_argument("generator '" +
                                        def_.generators[gi].id +
                                        "' has no segments");
        // Rounding never leaves a gap at the top: the last segment owns
        // everything up to exactly 1.
        g.pieces[g.last_segment].w_hi = 1.0;
        for (size_t i = g.last_segment + 1; i < g.pieces.size(); ++i)
            g.pieces[i].w_lo = g.pieces[i].w_hi = 1.0;
    }

    if (def_.restriction) {
        restricted_ = true;
        r0_ = def_.restriction->first;
        r1_ = def_.restriction->second;
        f0_ = eval_raw(r0_, 60);
        f1_ = eval_raw(r1_, 60);
        Vec2 d = f1_ - f0_;
        double n = d.norm2();
        if (n == 0.0)
            throw std::invalid_argument("restriction endpoints coincide");
        Vec2 a{d.x / n, -d.y / n};  // 1 / (f1 - f0)
        Vec2 b = cmul(a, f0_);
        renorm_.ax = a.x;
        renorm_.ay = a.y;
        renorm_.bx = -b.x;
        renorm_.by = -b.y;
    }

    bound_ = expansion_radius(6);
}

const Traversal::Piece* Traversal::pick(const Gen& g, double u,
                                        double* local) const {
    const Piece* last = nullptr;
    for (const Piece& p : g.pieces) {
        if (p.is_jump) continue;
        last = &p;
        if (u < p.w_hi) {
            *local = (u - p.w_lo) / (p.w_hi - p.w_lo);
            return &p;
        }
    }
    *local = 1.0;
    return last;
}

Vec2 Traversal::eval_raw(double t, int depth) const {
    double stop = std::max(std::ldexp(1.0, -depth), kScaleFloor);
    Cxf acc;
    int gen = start_;
    double u = t;
    for (int level = 0; level < kMaxLevels && acc.scale() >= stop; ++level) {
        double v;
        const Piece* p = pick(gens_[gen], u, &v);
        if (p->reversed) v = 1.0 - v;
        acc = acc.compose(p->map);
        gen = p->target;
        u = v;
    }
    return acc.apply({u, 0.0});
}

Vec2 Traversal::point_at(double t, int depth) const {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::out_of_range("parameter outside [0,1]");
    if (depth < 1) throw std::out_of_range("depth must be at least 1");
    double raw = t;
    if (restricted_)
        raw = (t == 0.0) ? r0_ : (t == 1.0) ? r1_ : r0_ + (r1_ - r0_) * t;
    Vec2 p = eval_raw(raw, depth);
    if (restricted_) p = renorm_.apply(p);
    return p;
}

void Traversal::expansion_vertices(int gen, const Cxf& acc, int level,
                                   int max_level, double* worst) const {
    for (const Piece& p : gens_[gen].pieces) {
        Cxf child = acc.compose(p.map);
        Vec2 e0 = child.apply({0.0, 0.0});
        Vec2 e1 = child.apply({1.0, 0.0});
        for (const Vec2& v : {e0, e1}) {
            double d = std::min(v.norm(), (v - Vec2{1.0, 0.0}).norm());
            *worst = std::max(*worst, d);
        }
        if (!p.is_jump && level + 1 <= max_level)
            expansion_vertices(p.target, child, level + 1, max_level, worst);
    }
}

ExpansionBound Traversal::expansion_radius(int depth) const {
    if (c_max_ >= 1.0)
        throw std::invalid_argument("definition does not contract");
    depth = std::max(depth, 1);
    // Cap the vertex walk; the bound is valid (just looser) at any depth.
    size_t branch = 1;
    for (const Gen& g : gens_) branch = std::max(branch, g.pieces.size());
    long nodes = 1;
    int usable = 0;
    while (usable < depth) {
        if (nodes > kMaxBoundNodes / long(branch)) break;
        nodes *= long(branch);
        ++usable;
    }
    usable = std::max(usable, 1);

    double v_deep = 0.0, v1 = 0.0;
    expansion_vertices(start_, Cxf{}, 1, usable, &v_deep);
    expansion_vertices(start_, Cxf{}, 1, 1, &v1);
    double tail = std::pow(c_max_, usable) * v1 / (1.0 - c_max_);
    return {v_deep + tail, usable};
}

double Traversal::out_t(double raw) const {
    if (!restricted_) return raw;
    if (raw == r1_) return 1.0;
    return (raw - r0_) / (r1_ - r0_);
}

struct Traversal::WalkCtx {
    double limit = 0.0;
    const std::function<Vec2(const Vec2&)>* metric = nullptr;
    double win_lo = 0.0, win_hi = 1.0;
    std::vector<SamplePoint>* out = nullptr;
    double last_t = -1.0;

    Vec2 measure(const Vec2& p) const { return *metric ? (*metric)(p) : p; }
    void emit(double t, const Vec2& p, bool on_jump) {
        // Guards ulp-level collisions after dense connector chains.
        if (t <= last_t) t = std::nextafter(last_t, 2.0);
        out->push_back({t, p, on_jump});
        last_t = t;
    }
};

void Traversal::connector(WalkCtx& ctx, const Vec2& from, const Vec2& to,
                          double t_jump, int depth) const {
    if (depth < 48 &&
        distance(ctx.measure(from), ctx.measure(to)) >= ctx.limit) {
        Vec2 mid = (from + to) * 0.5;
        connector(ctx, from, mid, t_jump, depth + 1);
        connector(ctx, mid, to, t_jump, depth + 1);
        return;
    }
    ctx.emit(std::nextafter(std::max(t_jump, ctx.last_t), 2.0), to, true);
}

void Traversal::walk(int gen, const Cxf& acc, double raw_lo, double raw_hi,
                     bool flipped, WalkCtx& ctx) const {
    if (restricted_ && (raw_hi <= r0_ || raw_lo >= r1_)) return;
    double s_lo = out_t(raw_lo), s_hi = out_t(raw_hi);
    // Leaves of this node fall in (s_lo, s_hi], boundary jumps in [s_lo, s_hi].
    if (s_hi < ctx.win_lo || s_lo >= ctx.win_hi) return;

    Vec2 ea = acc.apply(flipped ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0});
    Vec2 eb = acc.apply(flipped ? Vec2{0.0, 0.0} : Vec2{1.0, 0.0});
    bool straddle = restricted_ && ((raw_lo < r0_ && r0_ < raw_hi) ||
                                    (raw_lo < r1_ && r1_ < raw_hi));
    double chord = distance(ctx.measure(ea), ctx.measure(eb));
    if (!straddle && chord < ctx.limit) {
        if (s_hi > ctx.win_lo && s_hi <= ctx.win_hi) ctx.emit(s_hi, eb, false);
        return;
    }
    if (straddle && chord < kSliverChord) return;

    const auto& pieces = gens_[gen].pieces;
    double span = raw_hi - raw_lo;
    int n = int(pieces.size());
    for (int k = 0; k < n; ++k) {
        const Piece& p = pieces[flipped ? n - 1 - k : k];
        double c_lo, c_hi;  // child raw interval, endpoints kept exact
        if (!flipped) {
            c_lo = (p.w_lo == 0.0) ? raw_lo : raw_lo + p.w_lo * span;
            c_hi = (p.w_hi == 1.0) ? raw_hi : raw_lo + p.w_hi * span;
        } else {
            c_lo = (p.w_hi == 1.0) ? raw_lo : raw_hi - p.w_hi * span;
            c_hi = (p.w_lo == 0.0) ? raw_hi : raw_hi - p.w_lo * span;
        }
        if (p.is_jump) {
            if (restricted_ && (c_lo < r0_ || c_lo > r1_)) continue;
            double tj = out_t(c_lo);
            if (tj >= 1.0) continue;  // a connector past the end has no t
            if (tj < ctx.win_lo || tj >= ctx.win_hi) continue;
            Vec2 exit = acc.apply(
                p.map.apply(flipped ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0}));
            Vec2 entry = acc.apply(
                p.map.apply(flipped ? Vec2{0.0, 0.0} : Vec2{1.0, 0.0}));
            connector(ctx, exit, entry, tj, 0);
        } else {
            walk(p.target, acc.compose(p.map), c_lo, c_hi,
                 flipped != p.reversed, ctx);
        }
    }
}

std::vector<SamplePoint> Traversal::sample_window(const SampleOptions& opt,
                                                  double win_lo, double win_hi,
                                                  bool emit_start,
                                                  bool emit_end) const {
    if (!(opt.max_gap > 0.0)) throw std::invalid_argument("max_gap must be > 0");
    if (opt.oversample < 1) throw std::invalid_argument("oversample must be >= 1");
    std::vector<SamplePoint> out;
    WalkCtx ctx;
    ctx.limit = opt.max_gap / opt.oversample;
    ctx.metric = &opt.metric;
    ctx.win_lo = win_lo;
    ctx.win_hi = win_hi;
    ctx.out = &out;
    if (emit_start) {
        Vec2 p0 = restricted_ ? renorm_.apply(f0_) : Vec2{0.0, 0.0};
        ctx.emit(0.0, p0, false);
    }
    walk(start_, restricted_ ? renorm_ : Cxf{}, 0.0, 1.0, false, ctx);
    if (emit_end && ctx.last_t < 1.0) {
        Vec2 p1 = restricted_ ? renorm_.apply(f1_) : Vec2{1.0, 0.0};
        ctx.emit(1.0, p1, false);
    }
    return out;
}

std::vector<SamplePoint> Traversal::sample(const SampleOptions& opt) const {
    return sample_window(opt, -1.0, 1.0, true, true);
}

std::vector<SamplePoint> Traversal::sample_chunk(const SampleOptions& opt,
                                                 int index, int count) const {
    if (count < 1 || index < 0 || index >= count)
        throw std::invalid_argument("bad chunk index");
    double lo = (index == 0) ? -1.0 : double(index) / count;
    double hi = double(index + 1) / count;
    return sample_window(opt, lo, hi, index == 0, index == count - 1);
}

bool Traversal::inverse_rec(int gen, const Cxf& acc, double raw_lo,
                            double raw_hi, bool flipped, int level,
                            const Vec2& q, double eps, double eps_t,
                            double bound, double* out) const {
    if (restricted_ && (raw_hi <= r0_ || raw_lo >= r1_)) return false;
    Vec2 ea = acc.apply(flipped ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0});
    Vec2 eb = acc.apply(flipped ? Vec2{0.0, 0.0} : Vec2{1.0, 0.0});
    double d = distance(ea, eb);
    if (std::min(distance(q, ea), distance(q, eb)) > d * bound + eps)
        return false;
    double s_lo = out_t(raw_lo), s_hi = out_t(raw_hi);
    if (s_hi - s_lo <= eps_t || level >= 2048) {
        // A restriction sliver can anchor just outside [0,1]; clamp.
        if (distance(ea, q) <= eps) {
            double cand = std::clamp(s_lo, 0.0, 1.0);
            // cand is a rounded double and weights are squared
            // contractions, so re-descending at it can drift the image
            // by ~sqrt(ulp); accept only what evaluation confirms and
            // let the ascending scan move on otherwise
            if (distance(point_at(cand), q) <= eps) {
                *out = cand;
                return true;
            }
        }
        return false;
    }
    const auto& pieces = gens_[gen].pieces;
    double span = raw_hi - raw_lo;
    int n = int(pieces.size());
    for (int k = 0; k < n; ++k) {
        const Piece& p = pieces[flipped ? n - 1 - k : k];
        if (p.is_jump) continue;
        double c_lo, c_hi;
        if (!flipped) {
            c_lo = (p.w_lo == 0.0) ? raw_lo : raw_lo + p.w_lo * span;
            c_hi = (p.w_hi == 1.0) ? raw_hi : raw_lo + p.w_hi * span;
        } else {
            c_lo = (p.w_hi == 1.0) ? raw_lo : raw_hi - p.w_hi * span;
            c_hi = (p.w_lo == 0.0) ? raw_hi : raw_hi - p.w_lo * span;
        }
        if (inverse_rec(p.target, acc.compose(p.map), c_lo, c_hi,
                        flipped != p.reversed, level + 1, q, eps, eps_t, bound,
                        out))
            return true;
    }
    return false;
}

std::optional<double> Traversal::inverse_at(const Vec2& q, double eps,
                                            double eps_t) const {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    double t;
    if (inverse_rec(start_, restricted_ ? renorm_ : Cxf{}, 0.0, 1.0, false, 0,
                    q, eps, eps_t, bound_.radius, &t))
        return t;
    return std::nullopt;
}

Vec2 CloseupMap::map_xy(const Vec2& p) const {
    Vec2 d = p - focus;
    double r2 = d.norm2();
    if (r2 == 0.0) return {0.0, 0.0};
    // r^(1/zeta - 1) as a factor keeps the angle untouched.
    double f = std::pow(r2, (1.0 / zeta - 1.0) * 0.5);
    return d * f;
}

double CloseupMap::map_t(double t) const {
    double dt = t - t_focus;
    if (dt == 0.0) return 0.0;
    double mag = std::pow(std::abs(dt), t_exponent());
    return dt < 0.0 ? -mag : mag;
}

std::vector<SamplePoint> closeup(const std::vector<SamplePoint>& points,
                                 const CloseupMap& map) {
    if (map.zeta < 1.0) throw std::invalid_argument("zeta must be >= 1");
    std::vector<SamplePoint> out;
    out.reserve(points.size());
    for (const SamplePoint& p : points)
        out.push_back({map.map_t(p.t), map.map_xy(p.position), p.on_jump});
    return out;
}

Vec2 point_at(const CurveDefinition& def, double t, int depth) {
    return Traversal(def).point_at(t, depth);
}

ExpansionBound expansion_radius(const CurveDefinition& def, int depth) {
    return Traversal(def).expansion_radius(depth);
}

std::vector<SamplePoint> sample(const CurveDefinition& def, double max_gap,
                                int oversample) {
    SampleOptions opt;
    opt.max_gap = max_gap;
    opt.oversample = oversample;
    return Traversal(def).sample(opt);
}

std::optional<double> inverse_at(const CurveDefinition& def, const Vec2& q,
                                 double eps, double eps_t) {
    return Traversal(def).inverse_at(q, eps, eps_t);
}

}  // namespace pftrail
