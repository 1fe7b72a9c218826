#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "qbxfds/id.hpp"

using namespace qbxfds;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
std::mt19937_64 rng(1234);

MatrixXd random_matrix(long m, long n) {
  std::normal_distribution<double> g;
  MatrixXd M(m, n);
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) M(i, j) = g(rng);
  return M;
}

// matrix with prescribed singular values
MatrixXd with_spectrum(long m, long n, const VectorXd& s) {
  const MatrixXd A = random_matrix(m, m), B = random_matrix(n, n);
  const MatrixXd U = Eigen::HouseholderQR<MatrixXd>(A).householderQ();
  const MatrixXd V = Eigen::HouseholderQR<MatrixXd>(B).householderQ();
  MatrixXd S = MatrixXd::Zero(m, n);
  for (long i = 0; i < s.size(); ++i) S(i, i) = s[i];
  return U * S * V.transpose();
}

double spec_norm(const MatrixXd& M) {
  return Eigen::BDCSVD<MatrixXd>(M).singularValues()[0];
}
}  // namespace

TEST_CASE("rank-1 matrix is recovered at rank 1") {
  const MatrixXd u = random_matrix(30, 1), v = random_matrix(20, 1);
  const MatrixXd M = u * v.transpose();
  const IdResult id = id_columns(M, IdOptions::tolerance(1e-12));
  CHECK(id.rank == 1);
  CHECK(spec_norm(M - M(Eigen::all, id.skeleton) * id.interp) <=
        1e-14 * spec_norm(M));
}

TEST_CASE("identity matrix at zero tolerance keeps full rank") {
  const long n = 12;
  const MatrixXd M = MatrixXd::Identity(n, n);
  const IdResult id = id_columns(M, IdOptions::tolerance(0.0));
  CHECK(id.rank == n);
  // interp is a permutation-identity
  for (long j = 0; j < n; ++j) {
    CHECK(id.interp(j, id.skeleton[j]) == doctest::Approx(1.0));
    CHECK(id.interp.col(id.skeleton[j]).cwiseAbs().sum() ==
          doctest::Approx(1.0));
  }
}

TEST_CASE("residual bound against an SVD oracle") {
  const long m = 50, n = 50;
  VectorXd s(n);
  for (long j = 0; j < n; ++j) s[j] = std::pow(2.0, -static_cast<double>(j));
  const MatrixXd M = with_spectrum(m, n, s);
  const VectorXd sv = Eigen::BDCSVD<MatrixXd>(M).singularValues();
  for (long k : {5L, 12L, 25L}) {
    const IdResult id = id_columns(M, IdOptions::fixed_rank(k));
    REQUIRE(id.rank == k);
    const double res = spec_norm(M - M(Eigen::all, id.skeleton) * id.interp);
    const double bound = sv[k] * std::sqrt(1.0 + k * (n - k));
    CHECK(res <= bound * 10);
  }
}

TEST_CASE("skeleton columns are reproduced exactly") {
  const MatrixXd M = random_matrix(40, 25);
  const IdResult id = id_columns(M, IdOptions::fixed_rank(10));
  const MatrixXd approx = M(Eigen::all, id.skeleton) * id.interp;
  for (long pos : id.skeleton) {
    CHECK((approx.col(pos) - M.col(pos)).norm() <= 1e-12 * M.col(pos).norm());
  }
}

TEST_CASE("residual decreases with rank") {
  VectorXd s(30);
  for (long j = 0; j < 30; ++j) s[j] = 1.0 / (1.0 + j * j);
  const MatrixXd M = with_spectrum(35, 30, s);
  double prev = 1e300;
  for (long k = 2; k <= 28; k += 4) {
    const IdResult id = id_columns(M, IdOptions::fixed_rank(k));
    const double res = spec_norm(M - M(Eigen::all, id.skeleton) * id.interp);
    CHECK(res <= prev * (1 + 1e-12));
    prev = res;
  }
}

TEST_CASE("interp entries obey the soft bound") {
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd M = random_matrix(40, 60);
    const IdResult id = id_columns(M, IdOptions::tolerance(1e-6));
    CHECK(id.interp.cwiseAbs().maxCoeff() <= 10.0);
  }
}

TEST_CASE("row id mirrors column id of the transpose") {
  const MatrixXd M = random_matrix(22, 31);
  const IdResult rows = id_rows(M, IdOptions::fixed_rank(8));
  const IdResult cols = id_columns(M.transpose(), IdOptions::fixed_rank(8));
  REQUIRE(rows.rank == cols.rank);
  for (long i = 0; i < rows.rank; ++i)
    CHECK(rows.skeleton[i] == cols.skeleton[i]);
  // interp carries identity on the skeleton rows
  for (long i = 0; i < rows.rank; ++i) {
    CHECK(rows.interp(rows.skeleton[i], i) == doctest::Approx(1.0));
  }
  // rank-2 outer-product sum is exact at rank 2
  const MatrixXd M2 = random_matrix(20, 1) * random_matrix(15, 1).transpose() +
                      random_matrix(20, 1) * random_matrix(15, 1).transpose();
  const IdResult id2 = id_rows(M2, IdOptions::tolerance(1e-10));
  CHECK(id2.rank == 2);
  CHECK(spec_norm(M2 - id2.interp * M2(id2.skeleton, Eigen::all)) <=
        1e-10 * spec_norm(M2));
}

TEST_CASE("input validation") {
  MatrixXd M = random_matrix(5, 5);
  CHECK_THROWS_AS(id_columns(M, IdOptions{}), ParameterError);
  M(2, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(id_columns(M, IdOptions::tolerance(1e-4)), ParameterError);
}
