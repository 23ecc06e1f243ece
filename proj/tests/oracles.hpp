#pragma once

// Reference implementations used only by tests. Deliberately written
// with different machinery than the library (plain 2x2 matrices instead
// of complex transforms, fixed level counts instead of scale thresholds)
// so shared bugs are unlikely.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pftrail/curvedef.hpp"
#include "pftrail/geometry.hpp"

namespace oracles {

// f(t) by brute-force descent with explicit matrix composition. The level
// count is fixed, so 60 levels cover 30 binary digits even at the slowest
// builtin contraction of sqrt(1/2).
inline pftrail::Vec2 matrix_point(const pftrail::CurveDefinition& def,
                                  double t, int levels = 60) {
    using pftrail::Vec2;
    struct Piece {
        double L[2][2];
        double tx, ty;
        double w_lo, w_hi;
        bool rev, jump;
        int target;
    };
    std::vector<std::vector<Piece>> gens;
    for (const pftrail::Generator& g : def.generators) {
        auto st = pftrail::segment_transforms(g, def);
        std::vector<Piece> ps;
        double run = 0.0;
        int last = -1;
        for (const auto& s : st) {
            Piece p{};
            double c = std::cos(s.map.rotation), sn = std::sin(s.map.rotation);
            p.L[0][0] = s.map.scale * c;
            p.L[1][0] = s.map.scale * sn;
            p.L[0][1] = s.map.scale * (s.map.mirrored ? sn : -sn);
            p.L[1][1] = s.map.scale * (s.map.mirrored ? -c : c);
            p.tx = s.map.translation.x;
            p.ty = s.map.translation.y;
            p.jump = s.is_jump;
            p.rev = s.reversed;
            p.target = s.target;
            p.w_lo = run;
            if (!s.is_jump) {
                run += s.weight;
                last = int(ps.size());
            }
            p.w_hi = run;
            ps.push_back(p);
        }
        ps[last].w_hi = 1.0;
        gens.push_back(std::move(ps));
    }

    double A[2][2] = {{1, 0}, {0, 1}};
    double T[2] = {0, 0};
    int gen = def.generator_index(def.start);
    double u = t;
    for (int lvl = 0; lvl < levels; ++lvl) {
        const Piece* pick = nullptr;
        double local = 1.0;
        for (const Piece& p : gens[gen]) {
            if (p.jump) continue;
            pick = &p;
            if (u < p.w_hi) {
                local = (u - p.w_lo) / (p.w_hi - p.w_lo);
                break;
            }
        }
        if (pick->rev) local = 1.0 - local;
        double N[2][2], S[2];
        for (int r = 0; r < 2; ++r) {
            N[r][0] = A[r][0] * pick->L[0][0] + A[r][1] * pick->L[1][0];
            N[r][1] = A[r][0] * pick->L[0][1] + A[r][1] * pick->L[1][1];
            S[r] = A[r][0] * pick->tx + A[r][1] * pick->ty + T[r];
        }
        A[0][0] = N[0][0];
        A[0][1] = N[0][1];
        A[1][0] = N[1][0];
        A[1][1] = N[1][1];
        T[0] = S[0];
        T[1] = S[1];
        gen = pick->target;
        u = local;
    }
    return {A[0][0] * u + T[0], A[1][0] * u + T[1]};
}

// Classic integer Hilbert walk: index d in an n*n grid (n a power of two)
// to cell coordinates, first cell bottom-left, last cell bottom-right.
inline void hilbert_d2xy(int n, int d, int* x, int* y) {
    int t = d;
    *x = *y = 0;
    for (int s = 1; s < n; s *= 2) {
        int rx = 1 & (t / 2);
        int ry = 1 & (t ^ rx);
        if (ry == 0) {
            if (rx == 1) {
                *x = s - 1 - *x;
                *y = s - 1 - *y;
            }
            std::swap(*x, *y);
        }
        *x += s * rx;
        *y += s * ry;
        t /= 4;
    }
}

inline bool in_polya_triangle(const pftrail::Vec2& p, double eps = 1e-9) {
    return p.y >= -eps && p.y <= std::min(p.x, 1.0 - p.x) + eps;
}

inline bool in_unit_square(const pftrail::Vec2& p, double eps = 1e-9) {
    return p.x >= -eps && p.x <= 1.0 + eps && p.y >= -eps && p.y <= 1.0 + eps;
}

// Peano and Z-order variants fill the diamond |x-1/2| + |y| <= 1/2.
inline bool in_diamond(const pftrail::Vec2& p, double eps = 1e-9) {
    return std::abs(p.x - 0.5) + std::abs(p.y) <= 0.5 + eps;
}

}  // namespace oracles
