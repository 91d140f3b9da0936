#include "pcgk/geometry/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include "pcgk/common/error.hpp"

namespace pcgk::geometry {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Face {
    std::array<std::size_t, 3> v{};
    // neighbor[i] shares edge v[i] -> v[(i+1)%3]
    std::array<std::size_t, 3> neighbor{kNone, kNone, kNone};
    Vec3 normal;
    double offset = 0.0;
    std::vector<std::size_t> outside;
    bool alive = true;
    std::size_t visit = 0;
};

class QuickHull {
public:
    QuickHull(std::span<const Vec3> pts, double eps) : pts_(pts), eps_(eps) {}

    Hull3D run() {
        build_simplex();
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            while (faces_[f].alive && !faces_[f].outside.empty()) add_point(f);
        }
        return polygonize();
    }

private:
    // Triangles sharing a supporting plane are replaced by a fan over the strict
    // planar hull of every point on that plane, which drops points on edges and
    // recovers coplanar corners the incremental pass treated as inside.
    Hull3D polygonize() const {
        Hull3D hull;
        std::vector<bool> used(pts_.size(), false);
        std::set<std::vector<std::size_t>> planes;
        for (const auto& f : faces_) {
            if (!f.alive) continue;
            std::vector<std::size_t> on;
            for (std::size_t i = 0; i < pts_.size(); ++i)
                if (std::fabs(dist(f, pts_[i])) <= eps_) on.push_back(i);
            if (!planes.insert(on).second) continue;
            const auto poly = planar_hull(on, f.normal);
            if (poly.size() < 3) throw GeometryError("convex_hull_3d: collapsed face (numerically degenerate input)");
            for (std::size_t j = 1; j + 1 < poly.size(); ++j) hull.faces.push_back({poly[0], poly[j], poly[j + 1]});
            for (auto v : poly) used[v] = true;
        }
        for (std::size_t i = 0; i < used.size(); ++i)
            if (used[i]) hull.vertices.push_back(i);
        return hull;
    }

    // Strict convex polygon of coplanar points, counter-clockwise seen along +n.
    std::vector<std::size_t> planar_hull(const std::vector<std::size_t>& ids, const Vec3& n) const {
        const Vec3 axis = std::fabs(n.x) < 0.6 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        const Vec3 u = cross(axis, n) / norm(cross(axis, n));
        const Vec3 w = cross(n, u);
        struct P {
            double x, y;
            std::size_t id;
        };
        std::vector<P> q;
        for (auto i : ids) q.push_back({dot(pts_[i], u), dot(pts_[i], w), i});
        std::sort(q.begin(), q.end(), [](const P& a, const P& b) {
            return a.x < b.x || (a.x == b.x && (a.y < b.y || (a.y == b.y && a.id < b.id)));
        });
        const double tol = eps_ * eps_ * 1e9;  // 1e-9 * diagonal^2
        auto turn = [](const P& o, const P& a, const P& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); };
        std::vector<P> h(2 * q.size());
        std::size_t k = 0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            while (k >= 2 && turn(h[k - 2], h[k - 1], q[i]) <= tol) --k;
            h[k++] = q[i];
        }
        for (std::size_t i = q.size() - 1, lo = k + 1; i-- > 0;) {
            while (k >= lo && turn(h[k - 2], h[k - 1], q[i]) <= tol) --k;
            h[k++] = q[i];
        }
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i + 1 < k; ++i) out.push_back(h[i].id);
        return out;
    }

    double dist(const Face& f, const Vec3& p) const { return dot(f.normal, p) - f.offset; }

    std::size_t make_face(std::size_t a, std::size_t b, std::size_t c) {
        Face f;
        f.v = {a, b, c};
        const Vec3 n = cross(pts_[b] - pts_[a], pts_[c] - pts_[a]);
        const double len = norm(n);
        if (!(len > 0.0)) throw GeometryError("convex_hull_3d: degenerate face during construction");
        f.normal = n / len;
        f.offset = dot(f.normal, pts_[a]);
        faces_.push_back(std::move(f));
        return faces_.size() - 1;
    }

    void build_simplex() {
        const std::size_t n = pts_.size();
        // Extreme points along the axes; the farthest pair seeds the simplex.
        std::array<std::size_t, 6> ext{};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < 3; ++a) {
                if (pts_[i][a] < pts_[ext[2 * a]][a]) ext[2 * a] = i;
                if (pts_[i][a] > pts_[ext[2 * a + 1]][a]) ext[2 * a + 1] = i;
            }
        std::size_t i0 = 0, i1 = 0;
        double best = -1.0;
        for (auto a : ext)
            for (auto b : ext) {
                const double d = squared_distance(pts_[a], pts_[b]);
                if (d > best) {
                    best = d;
                    i0 = a;
                    i1 = b;
                }
            }
        if (std::sqrt(best) <= eps_) throw GeometryError("convex_hull_3d: degenerate hull (all points coincide)");

        const Vec3 dir = (pts_[i1] - pts_[i0]) / norm(pts_[i1] - pts_[i0]);
        std::size_t i2 = kNone;
        best = eps_;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = norm(cross(pts_[i] - pts_[i0], dir));
            if (d > best) {
                best = d;
                i2 = i;
            }
        }
        if (i2 == kNone) throw GeometryError("convex_hull_3d: degenerate hull (collinear points)");

        const Vec3 pn = cross(pts_[i1] - pts_[i0], pts_[i2] - pts_[i0]);
        const Vec3 pnu = pn / norm(pn);
        std::size_t i3 = kNone;
        best = eps_;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = std::fabs(dot(pnu, pts_[i] - pts_[i0]));
            if (d > best) {
                best = d;
                i3 = i;
            }
        }
        if (i3 == kNone) throw GeometryError("convex_hull_3d: degenerate hull (coplanar points)");

        // Orient so the apex lies below the base.
        if (dot(pnu, pts_[i3] - pts_[i0]) > 0.0) std::swap(i1, i2);
        const std::size_t f0 = make_face(i0, i1, i2);
        const std::size_t f1 = make_face(i0, i3, i1);
        const std::size_t f2 = make_face(i1, i3, i2);
        const std::size_t f3 = make_face(i2, i3, i0);
        link_all({f0, f1, f2, f3});

        for (std::size_t i = 0; i < n; ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            assign(i, {f0, f1, f2, f3});
        }
    }

    // Connects faces that share an edge in opposite directions.
    void link_all(const std::vector<std::size_t>& ids) {
        for (auto a : ids)
            for (std::size_t ea = 0; ea < 3; ++ea) {
                const std::size_t u = faces_[a].v[ea], w = faces_[a].v[(ea + 1) % 3];
                for (auto b : ids)
                    for (std::size_t eb = 0; eb < 3; ++eb)
                        if (faces_[b].v[eb] == w && faces_[b].v[(eb + 1) % 3] == u) faces_[a].neighbor[ea] = b;
            }
    }

    void assign(std::size_t p, const std::vector<std::size_t>& candidates) {
        for (auto f : candidates) {
            if (dist(faces_[f], pts_[p]) > eps_) {
                faces_[f].outside.push_back(p);
                return;
            }
        }
    }

    void add_point(std::size_t start) {
        auto& outside = faces_[start].outside;
        std::size_t eye_slot = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < outside.size(); ++i) {
            const double d = dist(faces_[start], pts_[outside[i]]);
            if (d > best) {
                best = d;
                eye_slot = i;
            }
        }
        const std::size_t eye = outside[eye_slot];
        outside.erase(outside.begin() + static_cast<std::ptrdiff_t>(eye_slot));

        ++round_;
        std::vector<std::size_t> visible;
        std::vector<std::pair<std::size_t, std::size_t>> horizon;  // (face, edge)
        collect(start, eye, visible, horizon);

        std::vector<std::size_t> orphans;
        for (auto f : visible) {
            faces_[f].alive = false;
            orphans.insert(orphans.end(), faces_[f].outside.begin(), faces_[f].outside.end());
            faces_[f].outside.clear();
        }

        std::vector<std::size_t> created;
        std::unordered_map<std::size_t, std::size_t> by_start, by_end;
        for (const auto& [f, e] : horizon) {
            const std::size_t a = faces_[f].v[e], b = faces_[f].v[(e + 1) % 3];
            const std::size_t across = faces_[f].neighbor[e];
            const std::size_t nf = make_face(a, b, eye);
            faces_[nf].neighbor[0] = across;
            for (std::size_t k = 0; k < 3; ++k)
                if (faces_[across].neighbor[k] == f) faces_[across].neighbor[k] = nf;
            if (!by_start.emplace(a, nf).second || !by_end.emplace(b, nf).second)
                throw GeometryError("convex_hull_3d: non-manifold horizon (numerically degenerate input)");
            created.push_back(nf);
        }
        for (auto nf : created) {
            const std::size_t a = faces_[nf].v[0], b = faces_[nf].v[1];
            auto next = by_start.find(b), prev = by_end.find(a);
            if (next == by_start.end() || prev == by_end.end())
                throw GeometryError("convex_hull_3d: open horizon (numerically degenerate input)");
            faces_[nf].neighbor[1] = next->second;  // edge b -> eye
            faces_[nf].neighbor[2] = prev->second;  // edge eye -> a
        }
        for (auto p : orphans) assign(p, created);
    }

    // Depth-first sweep over faces that see the eye; records the horizon edges.
    void collect(std::size_t start, std::size_t eye, std::vector<std::size_t>& visible,
                 std::vector<std::pair<std::size_t, std::size_t>>& horizon) {
        std::vector<std::size_t> stack{start};
        faces_[start].visit = round_;
        visible.push_back(start);
        while (!stack.empty()) {
            const std::size_t f = stack.back();
            stack.pop_back();
            for (std::size_t e = 0; e < 3; ++e) {
                const std::size_t nb = faces_[f].neighbor[e];
                if (faces_[nb].visit == round_) {
                    // Already classified; a visible neighbour never borders the horizon.
                    if (std::find(visible.begin(), visible.end(), nb) == visible.end()) horizon.emplace_back(f, e);
                    continue;
                }
                if (dist(faces_[nb], pts_[eye]) > eps_) {
                    faces_[nb].visit = round_;
                    visible.push_back(nb);
                    stack.push_back(nb);
                } else {
                    faces_[nb].visit = round_;
                    horizon.emplace_back(f, e);
                }
            }
        }
    }

    std::span<const Vec3> pts_;
    double eps_;
    std::vector<Face> faces_;
    std::size_t round_ = 0;
};

}  // namespace

double hull_tolerance(std::span<const Vec3> points) {
    if (points.empty()) return 0.0;
    Vec3 lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    return 1e-9 * norm(hi - lo);
}

Hull3D convex_hull_3d(std::span<const Vec3> points) {
    if (points.size() < 4)
        throw GeometryError("convex_hull_3d: degenerate hull (need >= 4 points, got " + std::to_string(points.size()) +
                            ")");
    for (std::size_t i = 0; i < points.size(); ++i)
        if (!std::isfinite(points[i].x) || !std::isfinite(points[i].y) || !std::isfinite(points[i].z))
            throw GeometryError("convex_hull_3d: non-finite coordinate at point " + std::to_string(i));
    return QuickHull(points, hull_tolerance(points)).run();
}

double face_distance(std::span<const Vec3> points, const std::array<std::size_t, 3>& face, const Vec3& p) {
    const Vec3& a = points[face[0]];
    const Vec3 n = cross(points[face[1]] - a, points[face[2]] - a);
    return dot(n / norm(n), p - a);
}

}  // namespace pcgk::geometry
