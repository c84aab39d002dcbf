#include "smocklab/arap.hpp"

#include "smocklab/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

#include <cmath>
#include <random>
#include <set>

namespace smocklab {

namespace {

using Mat3 = Eigen::Matrix3d;
using Triplet = Eigen::Triplet<double>;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Neighbor {
  int j;
  double w;
};

std::vector<std::vector<Neighbor>> adjacency(int n, const EdgeWeights& weights) {
  std::vector<std::vector<Neighbor>> adj(n);
  for (const auto& [e, w] : weights.w) {
    adj[e.first].push_back({e.second, w});
    adj[e.second].push_back({e.first, w});
  }
  return adj;
}

Mat3 fit_rotation(const std::vector<Vec3>& rest, const std::vector<Vec3>& x, int i, const std::vector<Neighbor>& nb) {
  Mat3 S = Mat3::Zero();
  for (const Neighbor& n : nb) S += n.w * (rest[i] - rest[n.j]) * (x[i] - x[n.j]).transpose();
  Eigen::JacobiSVD<Mat3> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  const Mat3 V = svd.matrixV();
  Mat3 R = V * U.transpose();
  if (R.determinant() < 0.0) {
    U.col(2) *= -1.0;
    R = V * U.transpose();
  }
  return R;
}

std::vector<Mat3> fit_rotations(const std::vector<Vec3>& rest, const std::vector<Vec3>& x,
                                const std::vector<std::vector<Neighbor>>& adj) {
  std::vector<Mat3> R(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) R[i] = fit_rotation(rest, x, static_cast<int>(i), adj[i]);
  return R;
}

double energy_with(const std::vector<Vec3>& rest, const std::vector<Vec3>& x,
                   const std::vector<std::vector<Neighbor>>& adj, const std::vector<Mat3>& R) {
  double e = 0.0;
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (const Neighbor& n : adj[i])
      e += n.w * ((x[i] - x[n.j]) - R[i] * (rest[i] - rest[n.j])).squaredNorm();
  return e;
}

Eigen::MatrixX3d rhs(const std::vector<Vec3>& rest, const std::vector<std::vector<Neighbor>>& adj,
                     const std::vector<Mat3>& R) {
  Eigen::MatrixX3d b = Eigen::MatrixX3d::Zero(static_cast<Eigen::Index>(rest.size()), 3);
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (const Neighbor& n : adj[i])
      b.row(i) += (0.5 * n.w * (R[i] + R[n.j]) * (rest[i] - rest[n.j])).transpose();
  return b;
}

std::vector<Vec3> rigid_start(const std::vector<Vec3>& rest, const std::map<int, Vec3>& pins) {
  std::vector<Vec3> x = rest;
  if (pins.empty()) return x;
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  if (pins.size() >= 2) {
    Eigen::Matrix3Xd src(3, pins.size()), dst(3, pins.size());
    int k = 0;
    for (const auto& [v, target] : pins) {
      src.col(k) = rest[v];
      dst.col(k) = target;
      ++k;
    }
    T = Eigen::umeyama(src, dst, false);
  } else {
    const auto& [v, target] = *pins.begin();
    T.block<3, 1>(0, 3) = target - rest[v];
  }
  for (auto& p : x) p = T.topLeftCorner<3, 3>() * p + T.block<3, 1>(0, 3);
  for (const auto& [v, target] : pins) x[v] = target;
  return x;
}

}  // namespace

EdgeWeights arap_weights(const std::vector<Vec3>& rest, const std::vector<std::array<int, 3>>& faces,
                         WeightScheme scheme) {
  EdgeWeights out;
  std::set<std::pair<int, int>> uniform;
  double scale = 0.0;
  for (const auto& f : faces)
    for (int k = 0; k < 3; ++k) scale = std::max(scale, (rest[f[k]] - rest[f[(k + 1) % 3]]).squaredNorm());
  for (const auto& f : faces) {
    const double area2 = (rest[f[1]] - rest[f[0]]).cross(rest[f[2]] - rest[f[0]]).norm();
    const bool degenerate = area2 <= 1e-12 * scale;
    if (degenerate) ++out.degenerate_triangles;
    for (int k = 0; k < 3; ++k) {
      const int i = f[(k + 1) % 3], j = f[(k + 2) % 3], o = f[k];
      const auto key = std::minmax(i, j);
      if (scheme == WeightScheme::Uniform || degenerate) {
        uniform.insert(key);
        out.w[key] = 1.0;
        continue;
      }
      if (uniform.count(key)) continue;
      const Vec3 u = rest[i] - rest[o];
      const Vec3 v = rest[j] - rest[o];
      out.w[key] += 0.5 * u.dot(v) / u.cross(v).norm();
    }
  }
  if (out.degenerate_triangles > 0 && scheme == WeightScheme::Cotangent)
    spdlog::warn("{} degenerate rest triangles; their edges use uniform weights", out.degenerate_triangles);
  return out;
}

double arap_energy(const std::vector<Vec3>& rest, const EdgeWeights& weights, const std::vector<Vec3>& x) {
  const auto adj = adjacency(static_cast<int>(rest.size()), weights);
  return energy_with(rest, x, adj, fit_rotations(rest, x, adj));
}

ArapResult arap_solve(const std::vector<Vec3>& rest, const std::vector<std::array<int, 3>>& faces,
                      const std::map<int, Vec3>& pins_in, const ArapConfig& cfg) {
  const int n = static_cast<int>(rest.size());
  for (const auto& [v, target] : pins_in) {
    if (v < 0 || v >= n) throw Error(ErrorKind::Input, "pin on missing vertex " + std::to_string(v));
    if (!target.allFinite()) throw Error(ErrorKind::Input, "pin target of vertex " + std::to_string(v) + " is not finite");
  }
  std::map<int, Vec3> pins = pins_in;
  if (pins.empty() && n > 0) pins.emplace(0, rest[0]);

  const EdgeWeights weights = arap_weights(rest, faces, cfg.weight_scheme);
  const auto adj = adjacency(n, weights);

  std::vector<int> slot(n, -1);
  int free_count = 0;
  for (int v = 0; v < n; ++v)
    if (!pins.count(v)) slot[v] = free_count++;

  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i) {
    if (slot[i] < 0) continue;
    double diag = 0.0;
    for (const Neighbor& nb : adj[i]) {
      diag += nb.w;
      if (slot[nb.j] >= 0) trips.emplace_back(slot[i], slot[nb.j], -nb.w);
    }
    trips.emplace_back(slot[i], slot[i], diag);
  }
  SparseMatrix A(free_count, free_count);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<SparseMatrix> solver;
  if (free_count > 0) {
    solver.compute(A);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::Solver, "ARAP system factorization failed");
  }

  ArapResult out;
  out.degenerate_triangles = weights.degenerate_triangles;
  std::vector<Vec3> x = rigid_start(rest, pins);
  std::vector<Mat3> R = fit_rotations(rest, x, adj);
  double energy = energy_with(rest, x, adj, R);
  out.energy_trace.push_back(energy);

  for (int it = 0; it < cfg.max_outer_iters; ++it) {
    if (energy < 1e-24) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixX3d b = rhs(rest, adj, R);
    Eigen::MatrixX3d bf(free_count, 3);
    for (int i = 0; i < n; ++i) {
      if (slot[i] < 0) continue;
      bf.row(slot[i]) = b.row(i);
      for (const Neighbor& nb : adj[i])
        if (slot[nb.j] < 0) bf.row(slot[i]) += nb.w * pins.at(nb.j).transpose();
    }
    const Eigen::MatrixX3d sol = free_count > 0 ? Eigen::MatrixX3d(solver.solve(bf)) : bf;
    for (int i = 0; i < n; ++i)
      if (slot[i] >= 0) x[i] = sol.row(slot[i]).transpose();

    R = fit_rotations(rest, x, adj);
    const double next = energy_with(rest, x, adj, R);
    out.energy_trace.push_back(next);
    out.iterations = it + 1;
    const double change = std::abs(energy - next);
    energy = next;
    if (change <= cfg.tol * std::max(energy, 1e-300)) {
      out.converged = true;
      break;
    }
  }
  for (const auto& [v, target] : pins) x[v] = target;
  out.positions = std::move(x);
  out.energy = energy;
  return out;
}

ArapResult arap_pinned(const FinePattern& fine, const std::map<int, Vec3>& coarse_pins, const ArapConfig& cfg) {
  std::vector<Vec3> rest;
  rest.reserve(fine.vertices.size());
  for (const Vec2& v : fine.vertices) rest.emplace_back(v.x(), v.y(), 0.0);
  std::map<int, Vec3> pins;
  for (const auto& [c, target] : coarse_pins) {
    if (c < 0 || c >= static_cast<int>(fine.coarse_to_fine.size()))
      throw Error(ErrorKind::Input, "pin on missing coarse vertex " + std::to_string(c));
    pins[fine.coarse_to_fine[c]] = target;
  }
  return arap_solve(rest, fine.faces, pins, cfg);
}

std::vector<double> default_epsilon_schedule(const FinePattern& fine, const std::vector<StitchingLine>& lines) {
  double total = 0.0;
  int pairs = 0;
  for (const auto& line : lines) {
    for (std::size_t k = 0; k + 1 < line.vertex_ids.size(); ++k) {
      total += (fine.vertices[fine.coarse_to_fine[line.vertex_ids[k]]] -
                fine.vertices[fine.coarse_to_fine[line.vertex_ids[k + 1]]])
                   .norm();
      ++pairs;
    }
  }
  if (pairs == 0) return {0.0};
  const double half = 0.5 * total / pairs;
  return {half, half / 2, half / 4, half / 8, 0.0};
}

ArapResult arap_stitch_baseline(const FinePattern& fine, const std::vector<StitchingLine>& lines,
                                const ArapConfig& cfg) {
  const int n = fine.vertex_count();
  std::vector<Vec3> rest;
  rest.reserve(n);
  for (const Vec2& v : fine.vertices) rest.emplace_back(v.x(), v.y(), 0.0);

  ArapResult out;
  if (lines.empty()) {
    out.positions = rest;
    out.converged = true;
    out.energy_trace.push_back(0.0);
    return out;
  }

  std::vector<std::pair<int, int>> pairs;
  std::vector<bool> stitched(n, false);
  for (const auto& line : lines) {
    for (std::size_t k = 0; k < line.vertex_ids.size(); ++k) {
      const int v = fine.coarse_to_fine.at(line.vertex_ids[k]);
      stitched[v] = true;
      if (k + 1 < line.vertex_ids.size()) pairs.emplace_back(v, fine.coarse_to_fine.at(line.vertex_ids[k + 1]));
    }
  }
  int anchor = 0;
  for (int v = 0; v < n; ++v) {
    if (!stitched[v]) {
      anchor = v;
      break;
    }
  }

  std::vector<double> schedule = cfg.epsilon_schedule.empty() ? default_epsilon_schedule(fine, lines)
                                                              : cfg.epsilon_schedule;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k] < 0.0 || (k > 0 && schedule[k] > schedule[k - 1]))
      throw Error(ErrorKind::InvalidSpec, "epsilon schedule must be non-negative and non-increasing");
  }

  const EdgeWeights weights = arap_weights(rest, fine.faces, cfg.weight_scheme);
  out.degenerate_triangles = weights.degenerate_triangles;
  const auto adj = adjacency(n, weights);

  std::vector<Vec3> x = rest;
  if (schedule.front() > 0.0) {
    // A flat start with in-plane constraints never leaves the plane.
    std::mt19937 rng(0);
    std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
    for (int v = 0; v < n; ++v)
      if (v != anchor) x[v].z() += jitter(rng);
  }
  const Vec3 anchor_pos = x[anchor];

  std::vector<Triplet> lap;
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (const Neighbor& nb : adj[i]) {
      diag += nb.w;
      for (int c = 0; c < 3; ++c) lap.emplace_back(3 * i + c, 3 * nb.j + c, -nb.w);
    }
    for (int c = 0; c < 3; ++c) lap.emplace_back(3 * i + c, 3 * i + c, diag);
  }

  std::vector<Mat3> R = fit_rotations(rest, x, adj);
  out.energy_trace.push_back(energy_with(rest, x, adj, R));
  Eigen::SparseLU<SparseMatrix> lu;
  for (double eps : schedule) {
    for (int it = 0; it < cfg.baseline_iters_per_step; ++it) {
      std::vector<Triplet> trips = lap;
      std::vector<double> cvals;
      int row = 3 * n;
      auto constrain = [&](std::initializer_list<std::pair<int, double>> terms, double value) {
        for (const auto& [col, coeff] : terms) {
          trips.emplace_back(row, col, coeff);
          trips.emplace_back(col, row, coeff);
        }
        cvals.push_back(value);
        ++row;
      };
      for (int c = 0; c < 3; ++c) constrain({{3 * anchor + c, 1.0}}, anchor_pos[c]);
      for (const auto& [p, q] : pairs) {
        if (eps == 0.0) {
          for (int c = 0; c < 3; ++c) constrain({{3 * p + c, 1.0}, {3 * q + c, -1.0}}, 0.0);
        } else {
          Vec3 dir = x[p] - x[q];
          if (dir.norm() < 1e-12) dir = rest[p] - rest[q];
          dir.normalize();
          constrain({{3 * p, dir.x()}, {3 * p + 1, dir.y()}, {3 * p + 2, dir.z()},
                     {3 * q, -dir.x()}, {3 * q + 1, -dir.y()}, {3 * q + 2, -dir.z()}},
                    eps);
        }
      }
      SparseMatrix K(row, row);
      K.setFromTriplets(trips.begin(), trips.end());
      K.makeCompressed();
      Eigen::VectorXd b = Eigen::VectorXd::Zero(row);
      const Eigen::MatrixX3d local = rhs(rest, adj, R);
      for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) b[3 * i + c] = local(i, c);
      for (std::size_t k = 0; k < cvals.size(); ++k) b[3 * n + static_cast<int>(k)] = cvals[k];

      lu.compute(K);
      if (lu.info() != Eigen::Success) throw Error(ErrorKind::Solver, "stitching KKT factorization failed");
      const Eigen::VectorXd sol = lu.solve(b);
      for (int i = 0; i < n; ++i) x[i] = sol.segment<3>(3 * i);

      R = fit_rotations(rest, x, adj);
      out.energy_trace.push_back(energy_with(rest, x, adj, R));
      ++out.iterations;
    }
  }
  out.positions = std::move(x);
  out.energy = out.energy_trace.back();
  out.converged = true;
  return out;
}

MergedMesh merge_stitched(const std::vector<Vec3>& positions, const std::vector<std::array<int, 3>>& faces,
                          const std::vector<std::vector<int>>& groups, double tolerance) {
  const int n = static_cast<int>(positions.size());
  std::vector<int> rep(n);
  for (int v = 0; v < n; ++v) rep[v] = v;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) continue;
    const int r = *std::min_element(groups[g].begin(), groups[g].end());
    double deviation = 0.0;
    for (int v : groups[g]) deviation = std::max(deviation, (positions[v] - positions[r]).norm());
    if (deviation > tolerance) {
      throw Error(ErrorKind::Solver, "stitched group " + std::to_string(g) + " is not coincident (max deviation " +
                                         std::to_string(deviation) + ")");
    }
    for (int v : groups[g]) rep[v] = r;
  }
  MergedMesh out;
  out.fine_to_merged.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (rep[v] != v) continue;
    out.fine_to_merged[v] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(positions[v]);
  }
  for (int v = 0; v < n; ++v) out.fine_to_merged[v] = out.fine_to_merged[rep[v]];
  for (const auto& f : faces) {
    const std::array<int, 3> m{out.fine_to_merged[f[0]], out.fine_to_merged[f[1]], out.fine_to_merged[f[2]]};
    if (m[0] == m[1] || m[1] == m[2] || m[0] == m[2]) continue;
    out.faces.push_back(m);
  }
  return out;
}

}  // namespace smocklab
