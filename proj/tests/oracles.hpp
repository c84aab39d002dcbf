#pragma once

// Reference implementations written independently of the library, used by the
// unit tests and the acceptance runner.

#include "smocklab/pattern.hpp"
#include "smocklab/smocked_graph.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

using smocklab::Vec2;
using smocklab::Vec3;

// Exhaustive minimum over the flat points behind two smocked-graph nodes.
inline double bound(const smocklab::SmockingPattern& p, const smocklab::SmockedGraph& s, int a, int b) {
  auto points = [&](int node) {
    std::vector<Vec2> out;
    if (s.is_underlay(node)) {
      for (int v : p.lines[s.nodes[node].source].vertex_ids) out.push_back(p.vertices[v]);
    } else {
      out.push_back(p.vertices[s.nodes[node].source]);
    }
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : points(a))
    for (const auto& y : points(b)) best = std::min(best, (x - y).norm());
  return best;
}

// q-p is a Delaunay edge iff some third point r spans a triangle with q and p
// whose circumcircle is empty. Plain doubles; meant for random inputs.
inline std::set<int> delaunay_neighbors(const std::vector<Vec2>& pts, const Vec2& q) {
  std::vector<Vec2> all = pts;
  all.push_back(q);
  const int n = static_cast<int>(all.size());
  const int qi = n - 1;
  std::set<int> out;
  for (int p = 0; p < qi; ++p)
    for (int r = 0; r < qi; ++r) {
      if (r == p) continue;
      const Vec2 a = all[qi];
      const Vec2 bb = all[p] - a, cc = all[r] - a;
      const double d = 2.0 * (bb.x() * cc.y() - bb.y() * cc.x());
      if (std::abs(d) < 1e-12) continue;
      const Vec2 centre = a + Vec2((cc.y() * bb.squaredNorm() - bb.y() * cc.squaredNorm()) / d,
                                   (bb.x() * cc.squaredNorm() - cc.x() * bb.squaredNorm()) / d);
      const double rad = (a - centre).norm();
      bool empty = true;
      for (int s = 0; s < n && empty; ++s)
        if (s != qi && s != p && s != r && (all[s] - centre).norm() < rad - 1e-9) empty = false;
      if (empty) out.insert(p);
    }
  return out;
}

// ARAP energy: each edge gets half the cotangent of every opposite angle, and
// each vertex its own SVD-fitted rotation.
inline double arap_energy(const std::vector<Vec3>& rest, const std::vector<std::array<int, 3>>& faces,
                          const std::vector<Vec3>& x) {
  const int n = static_cast<int>(rest.size());
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& t : faces)
    for (int k = 0; k < 3; ++k) {
      const int o = t[k], a = t[(k + 1) % 3], b = t[(k + 2) % 3];
      const Vec3 u = rest[a] - rest[o], v = rest[b] - rest[o];
      const double cot = u.dot(v) / u.cross(v).norm();
      W(a, b) += 0.5 * cot;
      W(b, a) += 0.5 * cot;
    }
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
    for (int j = 0; j < n; ++j)
      if (W(i, j) != 0.0) S += W(i, j) * (rest[i] - rest[j]) * (x[i] - x[j]).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
    const Eigen::Matrix3d R = svd.matrixV() * D * svd.matrixU().transpose();
    for (int j = 0; j < n; ++j)
      if (W(i, j) != 0.0) e += W(i, j) * ((x[i] - x[j]) - R * (rest[i] - rest[j])).squaredNorm();
  }
  return e;
}

// Dense BFGS on central-difference gradients.
inline Eigen::VectorXd bfgs(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x) {
  const int n = static_cast<int>(x.size());
  auto grad = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd g(n);
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd a = p, b = p;
      a[k] += 1e-6;
      b[k] -= 1e-6;
      g[k] = (f(a) - f(b)) / 2e-6;
    }
    return g;
  };
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd H = I;
  Eigen::VectorXd g = grad(x);
  double fx = f(x);
  for (int it = 0; it < 2000 && g.norm() > 1e-9; ++it) {
    Eigen::VectorXd d = -H * g;
    if (g.dot(d) >= 0) {
      H = I;
      d = -g;
    }
    double t = 1.0;
    while (f(x + t * d) > fx + 1e-4 * t * g.dot(d) && t > 1e-12) t *= 0.5;
    const Eigen::VectorXd s = t * d;
    x += s;
    const Eigen::VectorXd g2 = grad(x);
    const Eigen::VectorXd y = g2 - g;
    const double sy = s.dot(y);
    if (sy > 1e-14) H = (I - s * y.transpose() / sy) * H * (I - y * s.transpose() / sy) + s * s.transpose() / sy;
    g = g2;
    fx = f(x);
  }
  return x;
}

}  // namespace oracle
