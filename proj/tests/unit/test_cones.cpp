#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "gridsoc/cones.hpp"
#include "oracles.hpp"

using namespace gridsoc;

namespace {

Eigen::VectorXd project(const Cone& cone, Eigen::VectorXd v) {
  project_cone(cone, std::span<double>(v.data(), v.size()));
  return v;
}

Eigen::VectorXd random_vector(std::mt19937& rng, int n, double scale = 2.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("second-order cone projection on frozen points") {
  const Cone soc{ConeType::SecondOrder, 3};

  Eigen::VectorXd inside(3);
  inside << 2.0, 1.0, 0.0;
  CHECK(project(soc, inside) == inside);

  Eigen::VectorXd polar(3);
  polar << -2.0, 1.0, 0.0;
  CHECK(project(soc, polar).norm() == doctest::Approx(0.0));

  // Derived with the variational inequality below and by hand: midpoint of
  // (0,(2,0)) and its reflection.
  Eigen::VectorXd boundary(3);
  boundary << 0.0, 2.0, 0.0;
  const Eigen::VectorXd p = project(soc, boundary);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.0));
}

TEST_CASE("rotated cone projection is consistent with its definition") {
  const Cone rsoc{ConeType::RotatedSecondOrder, 4};
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd v = random_vector(rng, 4);
    const Eigen::VectorXd p = project(rsoc, v);
    CHECK(cone_violation(rsoc, std::span<const double>(p.data(), p.size())) <= 1e-9);
    // idempotent
    CHECK((project(rsoc, p) - p).norm() <= 1e-12);
  }
}

TEST_CASE("projections are idempotent and non-expansive") {
  std::mt19937 rng(11);
  const std::vector<Cone> cones = {{ConeType::Zero, 3},
                                   {ConeType::NonNegative, 4},
                                   {ConeType::SecondOrder, 5},
                                   {ConeType::RotatedSecondOrder, 5}};
  for (const Cone& cone : cones) {
    for (int trial = 0; trial < 250; ++trial) {
      const Eigen::VectorXd u = random_vector(rng, cone.dim);
      const Eigen::VectorXd v = random_vector(rng, cone.dim);
      const Eigen::VectorXd pu = project(cone, u);
      const Eigen::VectorXd pv = project(cone, v);
      CHECK((project(cone, pu) - pu).norm() <= 1e-12 * (1.0 + pu.norm()));
      CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);
    }
  }
}

TEST_CASE("Moreau decomposition holds for the self-dual cones") {
  std::mt19937 rng(13);
  for (const Cone& cone : {Cone{ConeType::SecondOrder, 4},
                           Cone{ConeType::RotatedSecondOrder, 4},
                           Cone{ConeType::NonNegative, 4}}) {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd v = random_vector(rng, cone.dim);
      const Eigen::VectorXd p = project(cone, v);
      const Eigen::VectorXd q = project(cone, -v);
      CHECK((v - (p - q)).norm() <= 1e-10 * (1.0 + v.norm()));
      CHECK(std::abs(p.dot(q)) <= 1e-9 * (1.0 + v.squaredNorm()));
    }
  }
}

TEST_CASE("cone projections satisfy the nearest-point variational inequality") {
  std::mt19937 rng(17);
  const Cone soc{ConeType::SecondOrder, 4};
  const Cone rsoc{ConeType::RotatedSecondOrder, 4};
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto sample_soc = [&] {
    Eigen::VectorXd q = random_vector(rng, 4);
    q[0] = q.tail(3).norm() + std::abs(normal(rng));
    return q;
  };
  const auto sample_rsoc = [&] {
    Eigen::VectorXd q = random_vector(rng, 4);
    const double u = std::abs(normal(rng)) + 0.1;
    q[0] = u;
    q[1] = q.tail(2).squaredNorm() / (2.0 * u) + std::abs(normal(rng));
    return q;
  };

  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd v = random_vector(rng, 4);
    CHECK(oracle::variational_inequality_holds(v, project(soc, v), sample_soc, 60));
    CHECK(oracle::variational_inequality_holds(v, project(rsoc, v), sample_rsoc, 60));
  }
}

TEST_CASE("cone projection rejects dimension mismatches") {
  Eigen::VectorXd v(3);
  v.setZero();
  CHECK_THROWS_AS(project_cone({ConeType::SecondOrder, 4}, std::span<double>(v.data(), 3)),
                  std::invalid_argument);
}

TEST_CASE("simplex projection on frozen points") {
  {
    const auto p = project_simplex(std::vector<double>{0.5, 0.5});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
  }
  {
    const auto p = project_simplex(std::vector<double>{0.6, 0.6});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
  }
  {
    // Verified against the exhaustive active-set oracle.
    const auto p = project_simplex(std::vector<double>{1.2, -0.2});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(project_simplex(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("simplex projection matches the exhaustive oracle") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> dim(2, 5);
  std::normal_distribution<double> normal(0.0, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> w(dim(rng));
    for (double& x : w) x = normal(rng);
    const auto p = project_simplex(w);
    const auto q = oracle::simplex_qp(w);

    double sum = 0.0;
    for (double x : p) {
      CHECK(x >= -1e-12);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(q.size() == p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i] == doctest::Approx(q[i]).epsilon(1e-9));
    }
  }
}
