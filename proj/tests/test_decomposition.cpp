#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "subspace_descent/decomposition.hpp"
#include "subspace_descent/objective.hpp"

using namespace subspace_descent;

namespace {

// J = sum over levels l = 1..level of (2^l - 1).
Index subspace_count_oracle(int level) {
  Index j = 0;
  for (int l = 1; l <= level; ++l) j += (Index{1} << l) - 1;
  return j;
}

// 1 / lambda_min(B A) from dense matrices, B = sum I_i A_i^{-1} I_i^T.
double stability_oracle(const Decomposition& d) {
  const Index n = d.dimension();
  Matrix b = Matrix::Zero(n, n);
  for (const Subspace& s : d.subspaces()) {
    Matrix p(n, s.size());
    for (Index c = 0; c < s.size(); ++c) p.col(c) = s.basis()[static_cast<std::size_t>(c)].to_dense(n);
    const Matrix ai = p.transpose() * d.preconditioner().matrix().to_dense() * p;
    b += p * ai.inverse() * p.transpose();
  }
  const Eigen::EigenSolver<Matrix> es(b * d.preconditioner().matrix().to_dense());
  return 1.0 / es.eigenvalues().real().minCoeff();
}

}  // namespace

TEST_CASE("multilevel subspace counts") {
  const Index table[] = {11, 26, 57, 120, 247, 502, 1013, 2036, 4083, 8178};
  for (int level = 3; level <= 12; ++level) {
    CHECK(multilevel_subspace_count(level) == subspace_count_oracle(level));
    CHECK(multilevel_subspace_count(level) == table[level - 3]);
  }
  for (int level = 1; level <= 7; ++level) {
    const Index n = (Index{1} << level) - 1;
    const Decomposition d = multilevel_nodal_decomposition(level, SpdOperator(SymmetricMatrix::laplacian_1d(n)));
    CHECK(static_cast<Index>(d.size()) == 2 * n - level);
  }
}

TEST_CASE("hat functions for N = 7") {
  const Decomposition d = multilevel_nodal_decomposition(3, SpdOperator(SymmetricMatrix::laplacian_1d(7)));
  REQUIRE(d.size() == 11);
  for (std::size_t i = 0; i < 7; ++i) {
    const SparseVector& v = d[i].basis()[0];
    CHECK(v.indices == std::vector<Index>{static_cast<Index>(i)});
    CHECK(v.values == std::vector<double>{1.0});
    CHECK(d[i].level() == 3);
  }
  const std::vector<std::vector<Index>> mid_support = {{0, 1, 2}, {2, 3, 4}, {4, 5, 6}};
  for (std::size_t k = 0; k < 3; ++k) {
    const SparseVector& v = d[7 + k].basis()[0];
    CHECK(v.indices == mid_support[k]);
    CHECK(v.values == std::vector<double>{0.5, 1.0, 0.5});
    CHECK(d[7 + k].level() == 2);
  }
  const SparseVector& coarse = d[10].basis()[0];
  CHECK(coarse.indices == std::vector<Index>{0, 1, 2, 3, 4, 5, 6});
  CHECK(coarse.values == std::vector<double>{0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25});
  CHECK(d[10].level() == 1);

  // v^T T v = 2 / stride for a hat of half-width stride.
  CHECK(d[0].local_matrix().matrix()(0, 0) == doctest::Approx(2.0));
  CHECK(d[7].local_matrix().matrix()(0, 0) == doctest::Approx(1.0));
  CHECK(d[10].local_matrix().matrix()(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("Galerkin local matrix equals R A I") {
  const SymmetricMatrix a = SymmetricMatrix::laplacian_1d(6, 3.0);
  std::vector<SparseVector> cols = {SparseVector{{0, 1}, {1.0, 0.5}}, SparseVector{{2, 3, 5}, {1.0, -1.0, 2.0}}};
  const SpdOperator local = galerkin_local_matrix(a, cols);
  Matrix p(6, 2);
  p.col(0) = cols[0].to_dense(6);
  p.col(1) = cols[1].to_dense(6);
  const Matrix expected = p.transpose() * a.to_dense() * p;
  CHECK((local.matrix().to_dense() - expected).norm() < 1e-13);

  std::vector<SparseVector> dependent = {SparseVector{{0}, {1.0}}, SparseVector{{0}, {2.0}}};
  CHECK_THROWS_AS(galerkin_local_matrix(a, dependent), NotSpdError);
}

TEST_CASE("local Lipschitz constants") {
  SUBCASE("multilevel with the Laplacian metric gives L/2") {
    for (double l : {2.0, 4.0}) {
      const NesterovWorst f(15, 15, l);
      const Decomposition d = assign_quadratic_lipschitz(
          multilevel_nodal_decomposition(4, SpdOperator(SymmetricMatrix::laplacian_1d(15))),
          f.as_quadratic()->hessian_matrix());
      for (double li : d.local_lipschitz()) CHECK(li == doctest::Approx(l / 2.0).epsilon(1e-14));
      CHECK(d.mean_lipschitz() == doctest::Approx(l / 2.0));
    }
  }
  SUBCASE("coordinate column norms") {
    const SymmetricMatrix h = SymmetricMatrix::laplacian_1d(5);
    CHECK(rcd_column_lipschitz(h, 0) == doctest::Approx(std::sqrt(5.0)));
    CHECK(rcd_column_lipschitz(h, 2) == doctest::Approx(std::sqrt(6.0)));
  }
  SUBCASE("block constants are block eigenvalues") {
    const SymmetricMatrix h = SymmetricMatrix::laplacian_1d(6);
    const Decomposition d =
        assign_quadratic_lipschitz(block_decomposition({{0, 1}, {2, 3, 4}, {5}}, SpdOperator::identity(6)), h);
    CHECK(d[0].local_lipschitz() == doctest::Approx(3.0));
    CHECK(d[1].local_lipschitz() == doctest::Approx(2.0 + std::sqrt(2.0)));
    CHECK(d[2].local_lipschitz() == doctest::Approx(2.0));
    CHECK(d.max_lipschitz() == doctest::Approx(2.0 + std::sqrt(2.0)));
  }
}

TEST_CASE("stability constants") {
  SUBCASE("coordinate decomposition in the identity metric") {
    CHECK(stability_constant(coordinate_decomposition(9, SpdOperator::identity(9))) == doctest::Approx(1.0));
  }
  SUBCASE("multilevel matches the dense oracle") {
    for (int level = 2; level <= 5; ++level) {
      const Index n = (Index{1} << level) - 1;
      const Decomposition d = multilevel_nodal_decomposition(level, SpdOperator(SymmetricMatrix::laplacian_1d(n)));
      CHECK(stability_constant(d) == doctest::Approx(stability_oracle(d)).epsilon(1e-9));
    }
  }
  SUBCASE("coordinate decomposition in a Laplacian metric") {
    const Decomposition d = coordinate_decomposition(7, SpdOperator(SymmetricMatrix::laplacian_1d(7)));
    CHECK(stability_constant(d) == doctest::Approx(stability_oracle(d)).epsilon(1e-9));
    CHECK(stability_constant(d) > 1.0);
  }
  SUBCASE("iterative path agrees with the dense path") {
    const Decomposition ml = multilevel_nodal_decomposition(6, SpdOperator(SymmetricMatrix::laplacian_1d(63)));
    CHECK(stability_constant(ml, 8) == doctest::Approx(stability_constant(ml)).epsilon(1e-6));
    const Decomposition cd = coordinate_decomposition(40, SpdOperator(SymmetricMatrix::laplacian_1d(40)));
    CHECK(stability_constant(cd, 8) == doctest::Approx(stability_constant(cd)).epsilon(1e-6));
  }
}

TEST_CASE("additive Schwarz application") {
  const Decomposition d = multilevel_nodal_decomposition(3, SpdOperator(SymmetricMatrix::laplacian_1d(7)));
  const Vector g = Vector::LinSpaced(7, -1.0, 1.0);
  Vector expected = Vector::Zero(7);
  for (const Subspace& s : d.subspaces()) {
    const Vector v = s.basis()[0].to_dense(7);
    expected += v * (v.dot(g) / s.local_matrix().matrix()(0, 0));
  }
  CHECK((d.apply_additive_schwarz(g) - expected).norm() < 1e-13);
}

TEST_CASE("invalid decompositions") {
  CHECK_THROWS_AS(block_decomposition({{0, 1}, {1, 2}}, SpdOperator::identity(3)), std::invalid_argument);
  CHECK_THROWS_AS(block_decomposition({{0, 1}}, SpdOperator::identity(3)), std::invalid_argument);
  CHECK_THROWS_AS(block_decomposition({{0, 1}, {5}}, SpdOperator::identity(3)), std::invalid_argument);
  std::vector<Subspace> partial;
  partial.emplace_back(std::vector<SparseVector>{SparseVector{{0}, {1.0}}}, SpdOperator::identity(1));
  partial.emplace_back(std::vector<SparseVector>{SparseVector{{0}, {2.0}}}, SpdOperator::identity(1));
  CHECK_THROWS_AS(Decomposition(partial, SpdOperator::identity(2)), std::invalid_argument);
  std::vector<Subspace> out_of_range;
  out_of_range.emplace_back(std::vector<SparseVector>{SparseVector{{4}, {1.0}}}, SpdOperator::identity(1));
  CHECK_THROWS_AS(Decomposition(out_of_range, SpdOperator::identity(2)), DimensionError);
  CHECK_THROWS_AS(multilevel_nodal_decomposition(3, SpdOperator::identity(8)), DimensionError);
  CHECK_THROWS_AS(multilevel_nodal_decomposition(0, SpdOperator::identity(1)), std::invalid_argument);
}

TEST_CASE("export format") {
  const Decomposition d = multilevel_nodal_decomposition(2, SpdOperator(SymmetricMatrix::laplacian_1d(3)));
  std::ostringstream out;
  export_decomposition(d, out);
  CHECK(out.str() == "1 2 1 1 1:1\n2 2 1 1 2:1\n3 2 1 1 3:1\n4 1 1 1 1:0.5 2:1 3:0.5\n");
}
