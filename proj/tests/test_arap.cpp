#include "smocklab/arap.hpp"
#include "smocklab/error.hpp"
#include "smocklab/pattern.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>

using namespace smocklab;

namespace {

FinePattern small_sheet(int subdivision) {
  GridSpec spec;
  spec.cols = 1;
  spec.rows = 1;
  return refine(build_grid(spec), subdivision);
}

std::vector<Vec3> lift(const FinePattern& f) {
  std::vector<Vec3> out;
  for (const auto& v : f.vertices) out.emplace_back(v.x(), v.y(), 0.0);
  return out;
}

}  // namespace

TEST_CASE("rest pose is a fixed point") {
  const auto fine = small_sheet(3);
  const auto rest = lift(fine);
  std::map<int, Vec3> pins = {{0, rest[0]}, {fine.coarse_to_fine[3], rest[fine.coarse_to_fine[3]]}};
  const auto r = arap_solve(rest, fine.faces, pins, ArapConfig{});
  CHECK(r.energy < 1e-20);
  for (std::size_t i = 0; i < rest.size(); ++i) CHECK((r.positions[i] - rest[i]).norm() < 1e-10);
}

TEST_CASE("rigidly moved pins give the rigidly moved sheet") {
  const auto fine = small_sheet(3);
  const auto rest = lift(fine);
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 t(0.3, -1.2, 2.0);
  std::map<int, Vec3> pins;
  for (int c : {0, 1, 2}) pins[fine.coarse_to_fine[c]] = R * rest[fine.coarse_to_fine[c]] + t;
  const auto r = arap_solve(rest, fine.faces, pins, ArapConfig{});
  CHECK(r.energy < 1e-18);
  for (std::size_t i = 0; i < rest.size(); ++i) CHECK((r.positions[i] - (R * rest[i] + t)).norm() < 1e-10);
}

TEST_CASE("local-global solve matches an independent quasi-Newton minimisation") {
  const auto fine = small_sheet(2);
  const auto rest = lift(fine);
  const int n = static_cast<int>(rest.size());
  REQUIRE(n <= 12);
  const std::array<Vec3, 4> corners = {Vec3(0, 0, 0), Vec3(1.2, 0, 0.1), Vec3(0, 1.0, 0.3), Vec3(1.1, 1.1, 0.2)};
  std::map<int, Vec3> pins;
  for (int c = 0; c < 4; ++c) {
    const Vec2 p = fine.vertices[fine.coarse_to_fine[c]];
    pins[fine.coarse_to_fine[c]] = corners[(p.x() > 0.5 ? 1 : 0) + (p.y() > 0.5 ? 2 : 0)];
  }

  ArapConfig cfg;
  cfg.tol = 1e-14;
  cfg.max_outer_iters = 5000;
  const auto r = arap_solve(rest, fine.faces, pins, cfg);

  std::vector<int> free;
  for (int i = 0; i < n; ++i)
    if (!pins.count(i)) free.push_back(i);
  auto unpack = [&](const Eigen::VectorXd& z) {
    std::vector<Vec3> x(n);
    for (const auto& [i, p] : pins) x[i] = p;
    for (std::size_t k = 0; k < free.size(); ++k) x[free[k]] = z.segment<3>(3 * k);
    return x;
  };
  Eigen::VectorXd z0(3 * free.size());
  for (std::size_t k = 0; k < free.size(); ++k) z0.segment<3>(3 * k) = rest[free[k]] + Vec3(0.05, 0.0, 0.1);
  const auto z = oracle::bfgs([&](const Eigen::VectorXd& v) { return oracle::arap_energy(rest, fine.faces, unpack(v)); }, z0);
  const double reference = oracle::arap_energy(rest, fine.faces, unpack(z));

  CHECK(reference > 1e-6);
  CHECK(r.energy == doctest::Approx(reference).epsilon(1e-4));
  CHECK(oracle::arap_energy(rest, fine.faces, r.positions) == doctest::Approx(r.energy).epsilon(1e-8));
  for (std::size_t k = 1; k < r.energy_trace.size(); ++k) CHECK(r.energy_trace[k] <= r.energy_trace[k - 1] * (1 + 1e-12));
}

TEST_CASE("cotangent weights are symmetric and sum like the Laplacian of a flat grid") {
  const auto fine = small_sheet(4);
  const auto w = arap_weights(lift(fine), fine.faces, WeightScheme::Cotangent);
  CHECK(w.degenerate_triangles == 0);
  for (const auto& [key, value] : w.w) {
    CHECK(key.first < key.second);
    CHECK(std::isfinite(value));
  }
  // A linear map of the plane has zero Laplacian at interior vertices.
  const auto rest = lift(fine);
  std::vector<Vec3> sheared;
  for (const auto& p : rest) sheared.emplace_back(p.x() + 0.4 * p.y(), 1.3 * p.y(), 0.0);
  for (int i = 0; i < fine.vertex_count(); ++i) {
    const Vec2 p = fine.vertices[i];
    if (p.x() < 1e-9 || p.y() < 1e-9 || p.x() > 1 - 1e-9 || p.y() > 1 - 1e-9) continue;
    Vec3 lap = Vec3::Zero();
    for (const auto& [key, value] : w.w) {
      if (key.first == i) lap += value * (sheared[key.second] - sheared[i]);
      if (key.second == i) lap += value * (sheared[key.first] - sheared[i]);
    }
    CHECK(lap.norm() < 1e-12);
  }

  const auto uniform = arap_weights(rest, fine.faces, WeightScheme::Uniform);
  for (const auto& [key, value] : uniform.w) CHECK(value == 1.0);
}

TEST_CASE("pins on missing vertices are input errors") {
  const auto fine = small_sheet(2);
  CHECK_THROWS_AS(arap_solve(lift(fine), fine.faces, {{999, Vec3::Zero()}}, ArapConfig{}), Error);
}

TEST_CASE("merging stitched groups") {
  const auto fine = small_sheet(2);
  auto pos = lift(fine);
  const int a = fine.coarse_to_fine[0], b = fine.coarse_to_fine[3];
  pos[b] = pos[a];
  const auto merged = merge_stitched(pos, fine.faces, {{a, b}});
  CHECK(merged.vertices.size() == pos.size() - 1);
  CHECK(merged.fine_to_merged[a] == merged.fine_to_merged[b]);
  for (const auto& t : merged.faces) CHECK((t[0] != t[1] && t[1] != t[2] && t[0] != t[2]));

  pos[b] += Vec3(0.1, 0, 0);
  CHECK_THROWS(merge_stitched(pos, fine.faces, {{a, b}}));
}

TEST_CASE("stitching baseline pulls lines together") {
  GridSpec spec;
  spec.cols = 2;
  spec.rows = 1;
  auto p = build_grid(spec);
  p.lines.push_back(StitchingLine{{0, 2}});
  const auto fine = refine(p, 2);
  const auto schedule = default_epsilon_schedule(fine, p.lines);
  REQUIRE(schedule.size() == 5);
  CHECK(schedule.back() == 0.0);
  for (std::size_t k = 1; k < schedule.size(); ++k) CHECK(schedule[k] < schedule[k - 1]);

  ArapConfig cfg;
  const auto r = arap_stitch_baseline(fine, p.lines, cfg);
  const double gap = (r.positions[fine.coarse_to_fine[0]] - r.positions[fine.coarse_to_fine[2]]).norm();
  CHECK(gap < 0.25 * 2.0);
  for (const auto& v : r.positions) CHECK(v.allFinite());
}
