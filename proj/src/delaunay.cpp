#include "smocklab/delaunay.hpp"

#include "smocklab/error.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>

namespace smocklab::geom {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon() * 0.5;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

int sign_of(const mpq_class& q) { return sgn(q); }

int orient_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
  const mpq_class ax(a.x()), ay(a.y()), bx(b.x()), by(b.y()), cx(c.x()), cy(c.y());
  const mpq_class det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return sign_of(det);
}

int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const mpq_class dx(d.x()), dy(d.y());
  const mpq_class adx = mpq_class(a.x()) - dx, ady = mpq_class(a.y()) - dy;
  const mpq_class bdx = mpq_class(b.x()) - dx, bdy = mpq_class(b.y()) - dy;
  const mpq_class cdx = mpq_class(c.x()) - dx, cdy = mpq_class(c.y()) - dy;
  const mpq_class alift = adx * adx + ady * ady;
  const mpq_class blift = bdx * bdx + bdy * bdy;
  const mpq_class clift = cdx * cdx + cdy * cdy;
  const mpq_class det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                        clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

std::uint64_t key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// Triangle soup with a directed-edge index; enough for incremental hull
// construction plus flips on the input sizes this library sees.
class Mesh {
 public:
  explicit Mesh(std::span<const Vec2> pts) : pts_(pts) {}

  int add(int a, int b, int c) {
    const int t = static_cast<int>(tris_.size());
    tris_.push_back({a, b, c});
    alive_.push_back(true);
    half_[key(a, b)] = t;
    half_[key(b, c)] = t;
    half_[key(c, a)] = t;
    return t;
  }

  void remove(int t) {
    const auto& tr = tris_[t];
    for (int k = 0; k < 3; ++k) half_.erase(key(tr[k], tr[(k + 1) % 3]));
    alive_[t] = false;
  }

  // Triangle owning directed edge a->b, or -1.
  int owner(int a, int b) const {
    auto it = half_.find(key(a, b));
    return it == half_.end() ? -1 : it->second;
  }

  static int opposite(const std::array<int, 3>& t, int a, int b) {
    for (int v : t)
      if (v != a && v != b) return v;
    return -1;
  }

  const std::array<int, 3>& tri(int t) const { return tris_[t]; }

  bool has_edge(int a, int b) const { return owner(a, b) >= 0 || owner(b, a) >= 0; }

  // Flip interior edge {a, b}. Returns the new diagonal endpoints, or nothing
  // when the edge is on the boundary.
  bool flip(int a, int b, int& c_out, int& d_out) {
    const int t1 = owner(a, b);
    const int t2 = owner(b, a);
    if (t1 < 0 || t2 < 0) return false;
    const int c = opposite(tris_[t1], a, b);
    const int d = opposite(tris_[t2], a, b);
    remove(t1);
    remove(t2);
    add(c, d, b);  // replaces (a, b, c) and (b, a, d)
    add(d, c, a);
    c_out = c;
    d_out = d;
    return true;
  }

  // Apex pair (c, d) across interior edge {a, b}: (a, b, c) and (b, a, d).
  bool quad(int a, int b, int& c, int& d) const {
    const int t1 = owner(a, b);
    const int t2 = owner(b, a);
    if (t1 < 0 || t2 < 0) return false;
    c = opposite(tris_[t1], a, b);
    d = opposite(tris_[t2], a, b);
    return true;
  }

  std::vector<Edge> all_edges() const {
    std::set<Edge> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const auto& tr = tris_[t];
      for (int k = 0; k < 3; ++k) out.emplace(tr[k], tr[(k + 1) % 3]);
    }
    return {out.begin(), out.end()};
  }

  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      auto tr = tris_[t];
      // canonical rotation: smallest index first
      std::rotate(tr.begin(), std::min_element(tr.begin(), tr.end()), tr.end());
      out.push_back(tr);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::span<const Vec2> pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<bool> alive_;
  std::unordered_map<std::uint64_t, int> half_;
};

void legalize(Mesh& mesh, std::span<const Vec2> pts, const std::set<Edge>& locked,
              std::vector<Edge> stack) {
  while (!stack.empty()) {
    const Edge e = stack.back();
    stack.pop_back();
    if (locked.count(e)) continue;
    int a = e.a, b = e.b, c = -1, d = -1;
    if (!mesh.quad(a, b, c, d)) continue;
    // (a, b, c) is counter-clockwise by construction.
    if (incircle(pts[a], pts[b], pts[c], pts[d]) <= 0) continue;
    mesh.flip(a, b, c, d);
    stack.emplace_back(a, c);
    stack.emplace_back(c, b);
    stack.emplace_back(b, d);
    stack.emplace_back(d, a);
  }
}

}  // namespace

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double detleft = (a.x() - c.x()) * (b.y() - c.y());
  const double detright = (a.y() - c.y()) * (b.x() - c.x());
  const double det = detleft - detright;
  const double detsum = std::abs(detleft) + std::abs(detright);
  if (std::abs(det) > kOrientBound * detsum) return det > 0 ? 1 : -1;
  return orient_exact(a, b, c);
}

int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  if (std::abs(det) > kIncircleBound * permanent) return det > 0 ? 1 : -1;
  return incircle_exact(a, b, c, d);
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const int o1 = orient2d(a, b, c);
  const int o2 = orient2d(a, b, d);
  const int o3 = orient2d(c, d, a);
  const int o4 = orient2d(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  // Collinear overlap that is more than a shared endpoint.
  if (o1 == 0 && o2 == 0) {
    const Vec2 dir = b - a;
    auto t = [&](const Vec2& p) { return (p - a).dot(dir); };
    const double lo = std::max(0.0, std::min(t(c), t(d)));
    const double hi = std::min(dir.squaredNorm(), std::max(t(c), t(d)));
    return hi > lo;
  }
  return false;
}

std::vector<Edge> Triangulation::edges() const {
  std::set<Edge> out;
  for (const auto& t : triangles)
    for (int k = 0; k < 3; ++k) out.emplace(t[k], t[(k + 1) % 3]);
  return {out.begin(), out.end()};
}

Triangulation delaunay(std::span<const Vec2> pts, std::span<const Edge> constraints) {
  const int n = static_cast<int>(pts.size());
  if (n < 3) throw Error(ErrorKind::Degenerate, "triangulation needs at least 3 points");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (pts[i].x() != pts[j].x()) return pts[i].x() < pts[j].x();
    return pts[i].y() < pts[j].y();
  });
  for (int k = 1; k < n; ++k) {
    if (pts[order[k]] == pts[order[k - 1]])
      throw Error(ErrorKind::Degenerate, "duplicate point " + std::to_string(order[k - 1]) + " / " +
                                             std::to_string(order[k]));
  }

  int first = -1;
  for (int k = 2; k < n; ++k) {
    if (orient2d(pts[order[0]], pts[order[1]], pts[order[k]]) != 0) {
      first = k;
      break;
    }
  }
  if (first < 0) throw Error(ErrorKind::Degenerate, "all points are collinear");

  Mesh mesh(pts);
  std::vector<int> hull;  // counter-clockwise cycle
  const int apex = order[first];
  const bool left = orient2d(pts[order[0]], pts[order[1]], pts[apex]) > 0;
  for (int k = 0; k + 1 < first; ++k) {
    const int u = order[k], v = order[k + 1];
    if (left)
      mesh.add(u, v, apex);
    else
      mesh.add(v, u, apex);
  }
  if (left) {
    for (int k = 0; k < first; ++k) hull.push_back(order[k]);
    hull.push_back(apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(apex);
    for (int k = first - 1; k >= 1; --k) hull.push_back(order[k]);
  }

  // Remaining points lie strictly outside the current hull: each one is
  // lexicographically larger than every inserted point.
  for (int k = first + 1; k < n; ++k) {
    const int q = order[k];
    const int h = static_cast<int>(hull.size());
    std::vector<bool> visible(h);
    for (int e = 0; e < h; ++e) visible[e] = orient2d(pts[hull[e]], pts[hull[(e + 1) % h]], pts[q]) < 0;
    int start = -1;
    for (int e = 0; e < h; ++e) {
      if (visible[e] && !visible[(e + h - 1) % h]) {
        start = e;
        break;
      }
    }
    if (start < 0) throw Error(ErrorKind::Degenerate, "hull insertion failed");
    int e = start;
    std::vector<int> chain{hull[start]};
    while (visible[e]) {
      const int a = hull[e], b = hull[(e + 1) % h];
      mesh.add(a, q, b);
      chain.push_back(b);
      e = (e + 1) % h;
    }
    // Replace the interior of the visible chain by q.
    std::vector<int> next;
    next.reserve(h + 1);
    const int last = e;  // index of the chain's final vertex
    for (int idx = last;; idx = (idx + 1) % h) {
      next.push_back(hull[idx]);
      if (idx == start) break;
    }
    next.push_back(q);
    hull = std::move(next);
  }

  std::set<Edge> locked;
  {
    auto all = mesh.all_edges();
    legalize(mesh, pts, locked, all);
  }

  if (constraints.empty()) return {mesh.triangles()};

  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const Edge& ci = constraints[i];
    if (ci.a == ci.b || ci.a < 0 || ci.b >= n)
      throw Error(ErrorKind::Input, "constraint " + std::to_string(i) + " is invalid");
    for (std::size_t j = i + 1; j < constraints.size(); ++j) {
      const Edge& cj = constraints[j];
      if (segments_cross(pts[ci.a], pts[ci.b], pts[cj.a], pts[cj.b]))
        throw Error(ErrorKind::Input, "constraint segments " + std::to_string(i) + " and " +
                                          std::to_string(j) + " cross");
    }
    for (int v = 0; v < n; ++v) {
      if (v == ci.a || v == ci.b) continue;
      if (orient2d(pts[ci.a], pts[ci.b], pts[v]) != 0) continue;
      const Vec2 dir = pts[ci.b] - pts[ci.a];
      const double t = (pts[v] - pts[ci.a]).dot(dir);
      if (t > 0 && t < dir.squaredNorm())
        throw Error(ErrorKind::Input, "constraint " + std::to_string(i) + " passes through point " +
                                          std::to_string(v));
    }
  }

  for (const Edge& c : constraints) {
    locked.insert(c);
    if (mesh.has_edge(c.a, c.b)) continue;
    const Vec2& a = pts[c.a];
    const Vec2& b = pts[c.b];
    std::vector<Edge> crossing;
    for (const Edge& e : mesh.all_edges()) {
      if (e.a == c.a || e.a == c.b || e.b == c.a || e.b == c.b) continue;
      if (orient2d(a, b, pts[e.a]) * orient2d(a, b, pts[e.b]) < 0 &&
          orient2d(pts[e.a], pts[e.b], a) * orient2d(pts[e.a], pts[e.b], b) < 0)
        crossing.push_back(e);
    }
    std::size_t guard = 0;
    const std::size_t guard_limit = 64 * (crossing.size() + 1) * (crossing.size() + 1);
    while (!crossing.empty()) {
      if (++guard > guard_limit) throw Error(ErrorKind::Degenerate, "constraint recovery did not terminate");
      const Edge e = crossing.front();
      crossing.erase(crossing.begin());
      int u = e.a, v = e.b, p = -1, q = -1;
      if (!mesh.quad(u, v, p, q)) continue;
      const bool convex = orient2d(pts[p], pts[q], pts[u]) * orient2d(pts[p], pts[q], pts[v]) < 0;
      if (!convex) {
        crossing.push_back(e);
        continue;
      }
      mesh.flip(u, v, p, q);
      const Edge diag(p, q);
      if (diag.a != c.a && diag.a != c.b && diag.b != c.a && diag.b != c.b &&
          orient2d(a, b, pts[p]) * orient2d(a, b, pts[q]) < 0)
        crossing.push_back(diag);
    }
    if (!mesh.has_edge(c.a, c.b)) throw Error(ErrorKind::Degenerate, "constraint recovery failed");
  }

  legalize(mesh, pts, locked, mesh.all_edges());
  return {mesh.triangles()};
}

}  // namespace smocklab::geom
