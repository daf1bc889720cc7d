#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bidomain/errors.hpp"
#include "bidomain/fv.hpp"

using namespace bidomain;
using doctest::Approx;

namespace {

// |M e_x| for the rotated tensors of the reference parameters.
const double kMi = std::hypot(3.3, 2.7);
const double kMe = std::hypot(18.0, 6.0);

}  // namespace

TEST_CASE("same-level face coefficient") {
  const ModelParams p;
  const FaceCoefficient f = face_coefficient({3, 2, 2}, {3, 3, 2}, Medium::Intra, p);
  CHECK(f.d_star == Approx(kMi));
  CHECK(f.face_length == Approx(0.125));
  CHECK(f.distance == Approx(0.125));
  CHECK(f.transmissibility() == Approx(kMi));
  const FaceCoefficient g = face_coefficient({3, 2, 2}, {3, 2, 1}, Medium::Extra, p);
  CHECK(g.transmissibility() == Approx(kMe));
}

TEST_CASE("face coefficient across a 2:1 interface") {
  const ModelParams p;
  const FaceCoefficient f = face_coefficient({1, 0, 0}, {2, 2, 0}, Medium::Intra, p);
  CHECK(f.face_length == Approx(0.25));
  CHECK(f.distance == Approx(0.375));
  CHECK(f.transmissibility() == Approx(kMi * 0.25 / 0.375));
  CHECK_THROWS_AS(face_coefficient({1, 0, 0}, {2, 3, 0}, Medium::Intra, p), AdjacencyError);
  CHECK_THROWS_AS(face_coefficient({2, 0, 0}, {2, 1, 1}, Medium::Intra, p), AdjacencyError);
}

TEST_CASE("harmonic transmissibility") {
  CHECK(harmonic_d_star(2.0, 2.0, 0.5, 0.5) == Approx(2.0));
  CHECK(harmonic_d_star(1.0, 3.0, 0.5, 0.5) == Approx(1.5));
}

TEST_CASE("uniform operators are symmetric with zero row sums") {
  const ModelParams p;
  const FvMesh mesh = make_uniform_mesh(3, p);
  CHECK(mesh.size() == 64);
  CHECK(mesh.faces.size() == 2 * 8 * 7);
  CHECK(mesh.symmetric);
  CHECK(mesh.op_i.is_symmetric());
  for (double s : mesh.op_ie.row_sums()) CHECK(std::abs(s) < 1e-12);
  CHECK(mesh.op_i.at(0, 0) == Approx(2 * kMi));  // corner cell: two faces
}

TEST_CASE("explicit update on 2x2 cells against a hand computation") {
  ModelParams p;
  const FvMesh mesh = make_uniform_mesh(1, p);
  // Z order: (0,0), (1,0), (0,1), (1,1).
  FieldState s;
  s.v = {10.0, 20.0, 30.0, 40.0};
  s.w = {1.0, 0.5, 0.2, 0.0};
  s.ue = {1.0, -2.0, 0.5, 0.5};
  const std::vector<double> iapp{0.3, -0.1, -0.1, -0.1};
  const double dt = 1e-6;
  const auto v_new = explicit_v_step(mesh, s, iapp, dt, p);
  const int nb[4][2] = {{1, 2}, {0, 3}, {0, 3}, {1, 2}};
  for (int k = 0; k < 4; ++k) {
    // sum over faces of t_e (u_K - u_L) / |K|
    double op = 0.0;
    for (int m : nb[k]) op += kMe * (s.ue[k] - s.ue[m]);
    const double expected = s.v[k] + dt / p.c_m * (iapp[k] / p.beta - i_ion(s.v[k], s.w[k], p)) +
                            dt / (p.beta * p.c_m) * op / 0.25;
    CHECK(v_new[k] == Approx(expected).epsilon(1e-14));
  }
  const auto w_new = w_step(s, dt, p);
  for (int k = 0; k < 4; ++k) CHECK(w_new[k] == Approx(s.w[k] + dt * h_gate(s.v[k], s.w[k], p)));
}

TEST_CASE("stability bound") {
  const ModelParams p;
  CHECK(tensor_norm_max(p) == Approx(30.0));
  const double h = std::ldexp(1.0, -9);
  CHECK(cfl_bound(0.0, 30.0, h) == Approx(h * h / 120.0).epsilon(1e-14));
  // Reference parameters at L = 6: R = 0.05 (leak at v = v_p, w = 0 plus no current).
  CHECK(0.5 * cfl_bound(0.05, 30.0, 1.0 / 64.0) == Approx(1.017229e-6).epsilon(1e-6));
}

TEST_CASE("step rejects a time step above the bound") {
  ModelParams p;
  const FvMesh mesh = make_uniform_mesh(4, p);
  FieldState s;
  s.v.assign(mesh.size(), 0.0);
  s.w.assign(mesh.size(), 1.0);
  s.ue.assign(mesh.size(), 0.0);
  s.v[0] = 100.0;
  FvStepper stepper(p, {}, {});
  const double h = 1.0 / 16.0;
  const double bound = cfl_bound(reaction_max(s, {}, p), tensor_norm_max(p), h);
  CHECK_NOTHROW(stepper.step(mesh, s, 0.0, 0.5 * bound));
  try {
    stepper.step(mesh, s, 0.0, 4.0 * bound);
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(e.level() == 4);
  }
}

TEST_CASE("diffusion conserves the v mass on a uniform mesh") {
  ModelParams p;
  p.reaction = false;
  const FvMesh mesh = make_uniform_mesh(4, p);
  FieldState s;
  s.v.assign(mesh.size(), 0.0);
  s.w.assign(mesh.size(), 1.0);
  s.ue.assign(mesh.size(), 0.0);
  for (std::size_t k = 0; k < mesh.size(); ++k) s.v[k] = std::sin(double(k));
  FvStepper stepper(p, {}, {});
  stepper.solve_ue(mesh, s, stepper.applied_current(mesh, 0.0));
  const double before = std::inner_product(s.v.begin(), s.v.end(), mesh.area.begin(), 0.0);
  const double dt = 0.5 * cfl_bound(0.0, tensor_norm_max(p), 1.0 / 16.0);
  for (int n = 0; n < 20; ++n) stepper.step(mesh, s, n * dt, dt);
  const double after = std::inner_product(s.v.begin(), s.v.end(), mesh.area.begin(), 0.0);
  CHECK(std::abs(after - before) < 1e-12);
  CHECK(stepper.stats().max_compatibility < 1e-12);
}
