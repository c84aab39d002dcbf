#include "smocklab/embedding.hpp"

#include "smocklab/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SparseCore>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <random>

namespace smocklab {

namespace {

constexpr double kCoincident = 1e-12;
constexpr double kEigenFloor = 1e-8;

StageReport to_stage(const SolveReport& r, double seconds) {
  return {r.energy, r.iterations, r.converged, r.status, seconds, r.trace};
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Rigid motion taking node 0 to the origin and node 1 onto the +x axis.
Eigen::MatrixX2d gauge_rest(const SmockedGraph& s) {
  const int n = s.underlay_count();
  Eigen::MatrixX2d xy(n, 2);
  if (n == 0) return xy;
  const Vec2 origin = s.nodes[0].rest;
  double c = 1.0, sn = 0.0;
  if (n > 1) {
    const Vec2 dir = s.nodes[1].rest - origin;
    if (dir.norm() > kCoincident) {
      c = dir.x() / dir.norm();
      sn = -dir.y() / dir.norm();
    }
  }
  for (int i = 0; i < n; ++i) {
    const Vec2 q = s.nodes[i].rest - origin;
    xy(i, 0) = c * q.x() - sn * q.y();
    xy(i, 1) = sn * q.x() + c * q.y();
  }
  // A collinear start is a saddle of the spring energy that Newton steps never
  // leave, so lift the free nodes off the line by a small seeded jitter.
  const double scale = n > 1 ? xy.col(0).cwiseAbs().maxCoeff() : 0.0;
  if (n > 2 && scale > kCoincident && xy.col(1).cwiseAbs().maxCoeff() <= 1e-9 * scale) {
    std::mt19937 rng(0);
    std::uniform_real_distribution<double> jitter(-1e-3 * scale, 1e-3 * scale);
    for (int i = 2; i < n; ++i) xy(i, 1) += jitter(rng);
  }
  return xy;
}

}  // namespace

EmbeddingObjective::EmbeddingObjective(int points, int dims, Eigen::VectorXd full, std::vector<bool> free_mask)
    : points_(points), dims_(dims), base_(std::move(full)), slot_(free_mask.size(), -1) {
  for (std::size_t k = 0; k < free_mask.size(); ++k)
    if (free_mask[k]) slot_[k] = free_count_++;
}

void EmbeddingObjective::set_spread(double weight, std::vector<bool> flagged) {
  spread_weight_ = weight;
  spread_flag_ = std::move(flagged);
}

void EmbeddingObjective::set_height_variance(double weight, std::vector<int> nodes) {
  var_weight_ = weight;
  var_nodes_ = std::move(nodes);
}

Eigen::VectorXd EmbeddingObjective::pack(const Eigen::VectorXd& full) const {
  Eigen::VectorXd x(free_count_);
  for (std::size_t k = 0; k < slot_.size(); ++k)
    if (slot_[k] >= 0) x[slot_[k]] = full[k];
  return x;
}

Eigen::VectorXd EmbeddingObjective::unpack(const Eigen::VectorXd& x) const {
  Eigen::VectorXd full = base_;
  for (std::size_t k = 0; k < slot_.size(); ++k)
    if (slot_[k] >= 0) full[k] = x[slot_[k]];
  return full;
}

double EmbeddingObjective::spring_energy(const Eigen::VectorXd& full) const {
  double e = 0.0;
  for (const Spring& s : springs_) {
    const double len = (full.segment(dims_ * s.i, dims_) - full.segment(dims_ * s.j, dims_)).norm();
    e += (len - s.rest) * (len - s.rest);
  }
  return e;
}

double EmbeddingObjective::eval(const Eigen::VectorXd& full, Eigen::VectorXd* grad) const {
  const int D = dims_;
  if (grad) grad->setZero(full.size());
  double e = 0.0;
  for (const Spring& s : springs_) {
    const Eigen::VectorXd diff = full.segment(D * s.i, D) - full.segment(D * s.j, D);
    const double len = diff.norm();
    const double r = len - s.rest;
    e += r * r;
    if (grad && len > kCoincident) {
      const Eigen::VectorXd g = (2.0 * r / len) * diff;
      grad->segment(D * s.i, D) += g;
      grad->segment(D * s.j, D) -= g;
    }
  }
  if (spread_weight_ != 0.0) {
    // Ordered pairs: each unordered pair counts twice.
    const double w = 2.0 * spread_weight_;
    for (int i = 0; i < points_; ++i) {
      for (int j = i + 1; j < points_; ++j) {
        if (!spread_flag_[i] && !spread_flag_[j]) continue;
        const Eigen::VectorXd diff = full.segment(D * i, D) - full.segment(D * j, D);
        const double len = diff.norm();
        e -= w * len;
        if (grad && len > kCoincident) {
          const Eigen::VectorXd g = (w / len) * diff;
          grad->segment(D * i, D) -= g;
          grad->segment(D * j, D) += g;
        }
      }
    }
  }
  if (var_weight_ != 0.0 && !var_nodes_.empty()) {
    const double n = static_cast<double>(var_nodes_.size());
    double mean = 0.0;
    for (int v : var_nodes_) mean += full[D * v + D - 1];
    mean /= n;
    double var = 0.0;
    for (int v : var_nodes_) {
      const double dz = full[D * v + D - 1] - mean;
      var += dz * dz;
      if (grad) (*grad)[D * v + D - 1] += var_weight_ * 2.0 * dz / n;
    }
    e += var_weight_ * var / n;
  }
  return e;
}

double EmbeddingObjective::value(const Eigen::VectorXd& x) const { return eval(unpack(x), nullptr); }

double EmbeddingObjective::gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
  Eigen::VectorXd full_grad;
  const double e = eval(unpack(x), &full_grad);
  g = pack(full_grad);
  return e;
}

SparseMatrix EmbeddingObjective::projected_hessian(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd full = unpack(x);
  const int D = dims_;
  std::vector<Eigen::Triplet<double>> trips;
  auto put = [&](int row, int col, double v) {
    const int a = slot_[row], b = slot_[col];
    if (a >= 0 && b >= 0) trips.emplace_back(a, b, v);
  };
  for (const Spring& s : springs_) {
    const Eigen::VectorXd diff = full.segment(D * s.i, D) - full.segment(D * s.j, D);
    const double len = diff.norm();
    Eigen::MatrixXd H;
    if (len > kCoincident) {
      const Eigen::VectorXd n = diff / len;
      const Eigen::MatrixXd nn = n * n.transpose();
      // Eigenvalues: 2 along n, 2 (len - d) / len across; clamp the latter.
      const double across = 2.0 * std::max(0.0, (len - s.rest) / len);
      const double top = std::max(2.0, across);
      const double lateral = std::max(across, kEigenFloor * top);
      H = 2.0 * nn + lateral * (Eigen::MatrixXd::Identity(D, D) - nn);
    } else {
      H = 2.0 * kEigenFloor * Eigen::MatrixXd::Identity(D, D);
    }
    for (int a = 0; a < D; ++a) {
      for (int b = 0; b < D; ++b) {
        put(D * s.i + a, D * s.i + b, H(a, b));
        put(D * s.j + a, D * s.j + b, H(a, b));
        put(D * s.i + a, D * s.j + b, -H(a, b));
        put(D * s.j + a, D * s.i + b, -H(a, b));
      }
    }
  }
  // The spread term is concave (its projection is zero); the variance term is
  // bounded above by the diagonal 2 w / n.
  if (var_weight_ != 0.0 && !var_nodes_.empty()) {
    const double d = 2.0 * var_weight_ / static_cast<double>(var_nodes_.size());
    for (int v : var_nodes_) put(D * v + D - 1, D * v + D - 1, d);
  }
  SparseMatrix H(free_count_, free_count_);
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

std::vector<Vec3> EmbeddingSolution::node_positions() const {
  std::vector<Vec3> out;
  out.reserve(underlay_xy.rows() + pleat_xyz.rows());
  for (Eigen::Index i = 0; i < underlay_xy.rows(); ++i) out.emplace_back(underlay_xy(i, 0), underlay_xy(i, 1), 0.0);
  for (Eigen::Index i = 0; i < pleat_xyz.rows(); ++i) out.emplace_back(pleat_xyz.row(i).transpose());
  return out;
}

UnderlayEmbedding embed_underlay(const SmockedGraph& s, const EmbedParams& params, std::span<const int> edge_ids) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = s.underlay_count();
  std::vector<int> chosen(edge_ids.begin(), edge_ids.end());
  if (chosen.empty()) chosen = s.underlay_edges();

  const Eigen::MatrixX2d init = gauge_rest(s);
  Eigen::VectorXd full(2 * n);
  for (int i = 0; i < n; ++i) full.segment<2>(2 * i) = init.row(i).transpose();
  std::vector<bool> mask(2 * n, true);
  if (n > 0) mask[0] = mask[1] = false;
  if (n > 1) mask[3] = false;

  EmbeddingObjective f(n, 2, full, mask);
  for (int e : chosen) {
    const SmockedEdge& edge = s.edges[e];
    if (!s.is_underlay(edge.a) || !s.is_underlay(edge.b))
      throw Error(ErrorKind::Input, "edge " + std::to_string(e) + " is not an underlay edge");
    f.add_spring(edge.a, edge.b, edge.bound);
  }

  const SolveReport r = minimize(f, f.pack(full), {params.max_iters, params.grad_tol, params.energy_tol});
  UnderlayEmbedding out;
  const Eigen::VectorXd sol = f.unpack(r.x);
  out.xy.resize(n, 2);
  for (int i = 0; i < n; ++i) out.xy.row(i) = sol.segment<2>(2 * i).transpose();
  out.report = to_stage(r, elapsed(t0));
  spdlog::debug("underlay: energy {:.3e} after {} iterations", r.energy, r.iterations);
  return out;
}

PleatEmbedding embed_pleats(const SmockedGraph& s, const Eigen::MatrixX2d& underlay_xy, const EmbedParams& params,
                            const Eigen::MatrixX3d* init) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nu = s.underlay_count();
  const int np = s.pleat_count();
  const int n = s.node_count();
  PleatEmbedding out;
  out.xyz.resize(np, 3);
  if (np == 0) {
    out.report.status = "empty";
    return out;
  }

  std::vector<int> degree(n, 0);
  const auto pleat_edges = s.pleat_edges();
  for (int e : pleat_edges) {
    ++degree[s.edges[e].a];
    ++degree[s.edges[e].b];
  }
  for (int v = nu; v < n; ++v)
    if (degree[v] == 0)
      throw Error(ErrorKind::Input, "pleat node " + std::to_string(v) + " (pattern vertex " +
                                        std::to_string(s.nodes[v].source) +
                                        ") has no pleat edges; add them with the grid-free builder");

  Eigen::VectorXd full(3 * n);
  for (int i = 0; i < nu; ++i) full.segment<3>(3 * i) << underlay_xy(i, 0), underlay_xy(i, 1), 0.0;
  if (init) {
    for (int k = 0; k < np; ++k) full.segment<3>(3 * (nu + k)) = init->row(k).transpose();
  } else {
    Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
    if (nu >= 2) {
      Eigen::Matrix2Xd src(2, nu), dst(2, nu);
      for (int i = 0; i < nu; ++i) {
        src.col(i) = s.nodes[i].rest;
        dst.col(i) = underlay_xy.row(i).transpose();
      }
      T = Eigen::umeyama(src, dst, true);
    } else if (nu == 1) {
      T.block<2, 1>(0, 2) = underlay_xy.row(0).transpose() - s.nodes[0].rest;
    }
    for (int k = 0; k < np; ++k) {
      const Vec2 q = T.topLeftCorner<2, 2>() * s.nodes[nu + k].rest + T.block<2, 1>(0, 2);
      full.segment<3>(3 * (nu + k)) << q.x(), q.y(), params.pleat_init_height;
    }
  }

  std::vector<bool> mask(3 * n, false);
  for (int k = 3 * nu; k < 3 * n; ++k) mask[k] = true;
  EmbeddingObjective f(n, 3, full, mask);
  for (int e : pleat_edges) f.add_spring(s.edges[e].a, s.edges[e].b, s.edges[e].bound);
  std::vector<bool> flagged(n, false);
  std::vector<int> pleats;
  for (int v = nu; v < n; ++v) {
    flagged[v] = true;
    pleats.push_back(v);
  }
  if (params.w_embed != 0.0) f.set_spread(params.w_embed, flagged);
  if (params.w_height != 0.0) f.set_height_variance(params.w_height, pleats);

  // The pleat objective can be negative, so only the gradient decides.
  const SolveReport r = minimize(f, f.pack(full), {params.max_iters, params.grad_tol, 0.0});
  const Eigen::VectorXd sol = f.unpack(r.x);
  for (int k = 0; k < np; ++k) out.xyz.row(k) = sol.segment<3>(3 * (nu + k)).transpose();
  out.spring_energy = f.spring_energy(sol);
  out.report = to_stage(r, elapsed(t0));
  spdlog::debug("pleats: energy {:.3e} after {} iterations", r.energy, r.iterations);
  return out;
}

EmbeddingSolution embed_two_stage(const SmockedGraph& s, const EmbedParams& params) {
  EmbeddingSolution sol;
  auto u = embed_underlay(s, params);
  auto p = embed_pleats(s, u.xy, params);
  sol.underlay_xy = std::move(u.xy);
  sol.underlay_energy = u.report.energy;
  sol.underlay = std::move(u.report);
  sol.pleat_xyz = std::move(p.xyz);
  sol.pleat_energy = p.report.energy;
  sol.pleat_spring_energy = p.spring_energy;
  sol.pleat = std::move(p.report);
  return sol;
}

EmbeddingSolution embed_simultaneous(const SmockedGraph& s, const EmbedParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const int nu = s.underlay_count();
  const int n = s.node_count();
  const Eigen::MatrixX2d gauged = gauge_rest(s);

  Eigen::VectorXd full(3 * n);
  for (int i = 0; i < nu; ++i) full.segment<3>(3 * i) << gauged(i, 0), gauged(i, 1), 0.0;
  // Pleats follow the same rigid motion as the underlay start.
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  if (nu >= 2) {
    Eigen::Matrix2Xd src(2, nu), dst(2, nu);
    for (int i = 0; i < nu; ++i) {
      src.col(i) = s.nodes[i].rest;
      dst.col(i) = gauged.row(i).transpose();
    }
    T = Eigen::umeyama(src, dst, false);
  } else if (nu == 1) {
    T.block<2, 1>(0, 2) = -s.nodes[0].rest;
  }
  for (int v = nu; v < n; ++v) {
    const Vec2 q = T.topLeftCorner<2, 2>() * s.nodes[v].rest + T.block<2, 1>(0, 2);
    full.segment<3>(3 * v) << q.x(), q.y(), params.pleat_init_height;
  }

  std::vector<bool> mask(3 * n, true);
  for (int i = 0; i < nu; ++i) mask[3 * i + 2] = false;
  if (nu > 0) mask[0] = mask[1] = false;
  if (nu > 1) mask[4] = false;

  EmbeddingObjective f(n, 3, full, mask);
  for (const SmockedEdge& e : s.edges) f.add_spring(e.a, e.b, e.bound);
  std::vector<bool> flagged(n, false);
  std::vector<int> pleats;
  for (int v = nu; v < n; ++v) {
    flagged[v] = true;
    pleats.push_back(v);
  }
  if (params.w_embed != 0.0 && !pleats.empty()) f.set_spread(params.w_embed, flagged);
  if (params.w_height != 0.0) f.set_height_variance(params.w_height, pleats);

  const SolveReport r = minimize(f, f.pack(full), {params.max_iters, params.grad_tol, params.energy_tol});
  const Eigen::VectorXd x = f.unpack(r.x);

  EmbeddingSolution sol;
  sol.underlay_xy.resize(nu, 2);
  sol.pleat_xyz.resize(n - nu, 3);
  for (int i = 0; i < nu; ++i) sol.underlay_xy.row(i) << x[3 * i], x[3 * i + 1];
  for (int v = nu; v < n; ++v) sol.pleat_xyz.row(v - nu) = x.segment<3>(3 * v).transpose();
  sol.underlay = to_stage(r, elapsed(t0));
  sol.pleat.status = "joint";

  const auto positions = sol.node_positions();
  const auto ue = s.underlay_edges();
  const auto pe = s.pleat_edges();
  sol.underlay_energy = edge_residual_energy(s, positions, ue);
  sol.pleat_spring_energy = edge_residual_energy(s, positions, pe);
  sol.pleat_energy = r.energy - sol.underlay_energy;
  return sol;
}

double edge_residual_energy(const SmockedGraph& s, std::span<const Vec3> positions, std::span<const int> edge_ids) {
  double e = 0.0;
  for (int id : edge_ids) {
    const SmockedEdge& edge = s.edges[id];
    const double r = (positions[edge.a] - positions[edge.b]).norm() - edge.bound;
    e += r * r;
  }
  return e;
}

PruneResult prune_constraints(const Eigen::MatrixXd& bounds, std::span<const std::pair<int, int>> pairs) {
  PruneResult out;
  const int n = static_cast<int>(bounds.rows());
  for (const auto& [i, k] : pairs) {
    double detour = std::numeric_limits<double>::infinity();
    int via = -1;
    for (int j = 0; j < n; ++j) {
      if (j == i || j == k) continue;
      const double d = bounds(i, j) + bounds(j, k);
      if (d < detour) {
        detour = d;
        via = j;
      }
    }
    if (via >= 0 && detour <= bounds(i, k))
      out.pruned.push_back({i, k, via, bounds(i, k) - detour});
    else
      out.active.emplace_back(i, k);
  }
  return out;
}

}  // namespace smocklab
