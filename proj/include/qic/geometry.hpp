#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qic/errors.hpp"

namespace qic {

inline constexpr double kGeomTol = 1e-9;

// Conjunction of rows a.r <= b over named nonnegative variables; r >= 0 is
// implicit and participates in elimination and membership.
struct HalfspaceSystem {
    struct Row {
        std::vector<double> a;
        double b = 0.0;
    };

    std::vector<std::string> vars;
    std::vector<Row> rows;

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return static_cast<int>(i);
        throw input_error("HalfspaceSystem: unknown variable " + name);
    }

    void add_row(const std::vector<double>& a, double b) {
        if (a.size() != vars.size()) throw input_error("HalfspaceSystem: row arity mismatch");
        rows.push_back(Row{a, b});
    }

    bool feasible(const std::vector<double>& point, double tol = kGeomTol) const {
        if (point.size() != vars.size()) throw input_error("HalfspaceSystem: point arity mismatch");
        for (double x : point)
            if (x < -tol) return false;
        for (const Row& r : rows) {
            double lhs = 0.0;
            for (std::size_t i = 0; i < r.a.size(); ++i) lhs += r.a[i] * point[i];
            if (lhs > r.b + tol) return false;
        }
        return true;
    }
};

namespace detail {

inline double row_scale(const HalfspaceSystem::Row& r) {
    double m = 0.0;
    for (double c : r.a) m = std::max(m, std::abs(c));
    return m;
}

// Drops trivial rows, duplicates (keeping the tightest), and rows implied by
// single-variable interval bounds. Keeps at most one witness of infeasibility.
inline void prune_rows(HalfspaceSystem& sys) {
    std::vector<HalfspaceSystem::Row> kept;
    for (const auto& r : sys.rows) {
        double scale = row_scale(r);
        if (scale <= 1e-12) {
            if (r.b < -kGeomTol) kept.push_back(r); // infeasible marker
            continue;
        }
        HalfspaceSystem::Row n = r;
        for (double& c : n.a) c /= scale;
        n.b /= scale;
        kept.push_back(std::move(n));
    }

    // Duplicate / domination pruning on normalized rows.
    std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
        for (std::size_t i = 0; i < x.a.size(); ++i) {
            if (std::abs(x.a[i] - y.a[i]) > 1e-9) return x.a[i] < y.a[i];
        }
        return x.b < y.b;
    });
    std::vector<HalfspaceSystem::Row> dedup;
    for (const auto& r : kept) {
        if (!dedup.empty()) {
            bool same = true;
            for (std::size_t i = 0; i < r.a.size(); ++i)
                if (std::abs(r.a[i] - dedup.back().a[i]) > 1e-9) { same = false; break; }
            if (same) continue; // earlier row has the smaller rhs
        }
        dedup.push_back(r);
    }

    // Interval check: upper bounds from single-variable rows; a row whose
    // left side cannot exceed its rhs on the bounding box is redundant.
    std::size_t nv = sys.vars.size();
    std::vector<double> ub(nv, std::numeric_limits<double>::infinity());
    for (const auto& r : dedup) {
        int nz = -1;
        bool single = true;
        for (std::size_t i = 0; i < nv; ++i) {
            if (std::abs(r.a[i]) > 1e-12) {
                if (nz >= 0) { single = false; break; }
                nz = static_cast<int>(i);
            }
        }
        if (single && nz >= 0 && r.a[nz] > 0.0)
            ub[nz] = std::min(ub[nz], r.b / r.a[nz]);
    }
    std::vector<HalfspaceSystem::Row> out;
    for (const auto& r : dedup) {
        int nzc = 0, nz = -1;
        for (std::size_t i = 0; i < nv; ++i)
            if (std::abs(r.a[i]) > 1e-12) { ++nzc; nz = static_cast<int>(i); }
        bool keep = true;
        if (nzc > 1 || (nzc == 1 && r.a[nz] < 0.0)) {
            double lhs_max = 0.0;
            bool bounded = true;
            for (std::size_t i = 0; i < nv; ++i) {
                if (r.a[i] > 1e-12) {
                    if (!std::isfinite(ub[i])) { bounded = false; break; }
                    lhs_max += r.a[i] * ub[i];
                }
            }
            if (bounded && lhs_max <= r.b - 1e-12) keep = false;
        }
        if (keep) out.push_back(r);
    }
    sys.rows = std::move(out);
}

} // namespace detail

// Projects out one nonnegative variable: a point satisfies the result iff
// some value of the eliminated variable >= 0 satisfies the input.
inline HalfspaceSystem fm_eliminate(const HalfspaceSystem& sys, const std::string& var) {
    int v = sys.var_index(var);
    HalfspaceSystem out;
    for (std::size_t i = 0; i < sys.vars.size(); ++i)
        if (static_cast<int>(i) != v) out.vars.push_back(sys.vars[i]);

    auto drop = [&](const HalfspaceSystem::Row& r) {
        HalfspaceSystem::Row n;
        n.b = r.b;
        for (std::size_t i = 0; i < r.a.size(); ++i)
            if (static_cast<int>(i) != v) n.a.push_back(r.a[i]);
        return n;
    };

    std::vector<const HalfspaceSystem::Row*> pos, neg;
    for (const auto& r : sys.rows) {
        double c = r.a[v];
        if (c > 1e-12) pos.push_back(&r);
        else if (c < -1e-12) neg.push_back(&r);
        else out.rows.push_back(drop(r));
    }

    // Pair every upper bound on the variable with every lower bound; the
    // implicit var >= 0 is a lower bound, so positive rows also survive with
    // the column dropped.
    for (const auto* p : pos) out.rows.push_back(drop(*p));
    for (const auto* p : pos)
        for (const auto* n : neg) {
            double cp = p->a[v], cn = -n->a[v];
            HalfspaceSystem::Row m;
            m.b = cn * p->b + cp * n->b;
            for (std::size_t i = 0; i < sys.vars.size(); ++i) {
                if (static_cast<int>(i) == v) continue;
                m.a.push_back(cn * p->a[i] + cp * n->a[i]);
            }
            out.rows.push_back(std::move(m));
        }
    detail::prune_rows(out);
    return out;
}

// Closed 2-D rate region, downward closed in the nonnegative quadrant.
// frontier runs from (0, ymax) to (xmax, 0) with nondecreasing x.
struct RateRegion2D {
    bool empty = true;
    double xmax = 0.0;
    double ymax = 0.0;
    std::vector<std::array<double, 2>> frontier;
};

namespace detail {

inline std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const auto& a, const auto& b) {
                              return std::abs(a[0] - b[0]) < 1e-12 && std::abs(a[1] - b[1]) < 1e-12;
                          }),
              pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    // Pop on exact zero: a tolerance here scales with edge length and would
    // discard true vertices whose incident edges are short.
    std::vector<std::array<double, 2>> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        const auto& p = pts[i];
        while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    return hull;
}

inline RateRegion2D region_from_points(const std::vector<std::array<double, 2>>& feasible) {
    RateRegion2D reg;
    if (feasible.empty()) return reg;
    reg.empty = false;
    for (const auto& p : feasible) {
        reg.xmax = std::max(reg.xmax, p[0]);
        reg.ymax = std::max(reg.ymax, p[1]);
    }
    reg.xmax = std::max(reg.xmax, 0.0);
    reg.ymax = std::max(reg.ymax, 0.0);

    std::vector<std::array<double, 2>> pts = feasible;
    pts.push_back({0.0, 0.0});
    pts.push_back({reg.xmax, 0.0});
    pts.push_back({0.0, reg.ymax});
    for (auto& p : pts) {
        p[0] = std::max(p[0], 0.0);
        p[1] = std::max(p[1], 0.0);
    }
    auto hull = convex_hull(pts);

    // Pareto-maximal hull corners form the upper-right chain.
    std::vector<std::array<double, 2>> pareto;
    for (const auto& p : hull) {
        bool dominated = false;
        for (const auto& q : hull)
            if (q[0] >= p[0] - 1e-12 && q[1] >= p[1] - 1e-12 &&
                (q[0] > p[0] + 1e-12 || q[1] > p[1] + 1e-12)) {
                dominated = true;
                break;
            }
        if (!dominated) pareto.push_back(p);
    }
    std::sort(pareto.begin(), pareto.end());

    std::vector<std::array<double, 2>> frontier;
    if (pareto.empty()) pareto.push_back({reg.xmax, reg.ymax});
    if (pareto.front()[0] > 1e-12) frontier.push_back({0.0, reg.ymax});
    for (const auto& p : pareto) frontier.push_back(p);
    if (frontier.back()[1] > 1e-12) frontier.push_back({reg.xmax, 0.0});
    reg.frontier = std::move(frontier);
    return reg;
}

} // namespace detail

// Vertex-enumerates a two-variable system and applies downward closure
// (any rate point dominated by an achievable one is achievable).
inline RateRegion2D to_region2d(const HalfspaceSystem& sys, const std::string& xvar = "R1",
                                const std::string& yvar = "R2") {
    int xi = sys.var_index(xvar), yi = sys.var_index(yvar);
    if (sys.vars.size() != 2) throw input_error("to_region2d: system must have exactly two variables");

    // Unbounded iff the recession cone {d >= 0 : A d <= 0} has a nonzero
    // ray; every extreme ray is an axis direction or lies on a row boundary.
    {
        std::vector<std::array<double, 2>> dirs = {{1.0, 0.0}, {0.0, 1.0}};
        for (const auto& r : sys.rows) {
            double nx = -r.a[yi], ny = r.a[xi];
            double len = std::hypot(nx, ny);
            if (len > 1e-12) {
                dirs.push_back({nx / len, ny / len});
                dirs.push_back({-nx / len, -ny / len});
            }
        }
        for (const auto& d : dirs) {
            if (d[0] < -1e-9 || d[1] < -1e-9) continue;
            bool recedes = true;
            for (const auto& r : sys.rows)
                if (r.a[xi] * d[0] + r.a[yi] * d[1] > 1e-9) { recedes = false; break; }
            if (recedes) throw input_error("to_region2d: region is unbounded");
        }
    }

    // Candidate vertices: pairwise row intersections plus axis crossings.
    struct Line {
        double ax, ay, b;
    };
    std::vector<Line> lines;
    for (const auto& r : sys.rows) lines.push_back({r.a[xi], r.a[yi], r.b});
    lines.push_back({1.0, 0.0, 0.0}); // x = 0 boundary as equality candidates
    lines.push_back({0.0, 1.0, 0.0});

    std::vector<std::array<double, 2>> cand;
    cand.push_back({0.0, 0.0});
    for (std::size_t i = 0; i < lines.size(); ++i)
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
            double det = lines[i].ax * lines[j].ay - lines[i].ay * lines[j].ax;
            double scale = std::max({std::abs(lines[i].ax), std::abs(lines[i].ay),
                                     std::abs(lines[j].ax), std::abs(lines[j].ay), 1.0});
            if (std::abs(det) < 1e-12 * scale * scale) continue;
            double x = (lines[i].b * lines[j].ay - lines[i].ay * lines[j].b) / det;
            double y = (lines[i].ax * lines[j].b - lines[i].b * lines[j].ax) / det;
            cand.push_back({x, y});
        }

    std::vector<std::array<double, 2>> feas;
    for (const auto& p : cand) {
        if (p[0] < -kGeomTol || p[1] < -kGeomTol) continue;
        std::vector<double> pt(sys.vars.size());
        pt[xi] = std::max(p[0], 0.0);
        pt[yi] = std::max(p[1], 0.0);
        if (sys.feasible(pt)) feas.push_back({pt[xi], pt[yi]});
    }
    return detail::region_from_points(feas);
}

// Piecewise-linear frontier height at x; -inf outside [0, xmax].
inline double frontier_height(const RateRegion2D& reg, double x, double tol = kGeomTol) {
    if (reg.empty) return -std::numeric_limits<double>::infinity();
    if (x < -tol || x > reg.xmax + tol) return -std::numeric_limits<double>::infinity();
    double xc = std::clamp(x, 0.0, reg.xmax);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < reg.frontier.size(); ++i) {
        double x1 = reg.frontier[i][0], y1 = reg.frontier[i][1];
        double x2 = reg.frontier[i + 1][0], y2 = reg.frontier[i + 1][1];
        if (xc >= x1 - 1e-12 && xc <= x2 + 1e-12) {
            if (x2 - x1 > 1e-12)
                best = std::max(best, y1 + (y2 - y1) * (xc - x1) / (x2 - x1));
            else
                best = std::max(best, std::max(y1, y2));
        }
    }
    if (reg.frontier.size() == 1) best = reg.frontier[0][1];
    return best;
}

inline bool contains(const RateRegion2D& reg, double x, double y, double tol = kGeomTol) {
    if (reg.empty) return false;
    if (x < -tol || y < -tol) return false;
    return y <= frontier_height(reg, x, tol) + tol;
}

// Supporting halfspaces of a region (frontier edges plus the two box rows).
inline HalfspaceSystem region_to_halfspaces(const RateRegion2D& reg, const std::string& xvar = "R1",
                                            const std::string& yvar = "R2") {
    HalfspaceSystem sys;
    sys.vars = {xvar, yvar};
    if (reg.empty) {
        sys.add_row({0.0, 0.0}, -1.0);
        return sys;
    }
    sys.add_row({1.0, 0.0}, reg.xmax);
    sys.add_row({0.0, 1.0}, reg.ymax);
    for (std::size_t i = 0; i + 1 < reg.frontier.size(); ++i) {
        double x1 = reg.frontier[i][0], y1 = reg.frontier[i][1];
        double x2 = reg.frontier[i + 1][0], y2 = reg.frontier[i + 1][1];
        if (x2 - x1 <= 1e-12) continue;
        double ax = y1 - y2, ay = x2 - x1;
        if (ax < 0.0) continue; // upward edge cannot support a downward-closed set
        sys.add_row({ax, ay}, ax * x1 + ay * y1);
    }
    return sys;
}

inline RateRegion2D intersect(const RateRegion2D& a, const RateRegion2D& b) {
    if (a.empty || b.empty) return RateRegion2D{};
    HalfspaceSystem sys = region_to_halfspaces(a);
    HalfspaceSystem other = region_to_halfspaces(b);
    for (const auto& r : other.rows) sys.rows.push_back(r);
    return to_region2d(sys);
}

// Convex hull of a family of regions (coded time sharing between strategies).
inline RateRegion2D union_hull(const std::vector<RateRegion2D>& regions) {
    std::vector<std::array<double, 2>> pts;
    for (const auto& r : regions) {
        if (r.empty) continue;
        for (const auto& p : r.frontier) pts.push_back(p);
        pts.push_back({r.xmax, 0.0});
        pts.push_back({0.0, r.ymax});
    }
    if (pts.empty()) return RateRegion2D{};
    return detail::region_from_points(pts);
}

} // namespace qic
