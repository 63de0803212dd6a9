#include <catch2/catch_amalgamated.hpp>

#include <markov/markov.hpp>

using namespace markov;

namespace {

StructuredOperator random_operator(int alphabet, SplitMix64& rng) {
  const int kind = static_cast<int>(rng.next() % 4);
  const int k = 1 + static_cast<int>(rng.next() % 3);
  const int m = static_cast<int>(rng.next() % static_cast<std::uint64_t>(k + 1));
  switch (kind) {
    case 0:
      return StructuredOperator::marginalization(alphabet, k, m);
    case 1:
      return StructuredOperator::branching(k, m, random_family(alphabet, k, rng.next()));
    case 2:
      return StructuredOperator::cycling(alphabet, k, m);
    default: {
      const std::size_t n = 2 + rng.next() % 3;
      const std::size_t blocks = 2 + rng.next() % 3;
      return StructuredOperator::commutation(n, blocks);
    }
  }
}

}  // namespace

TEST_CASE("commutation matrix small cases") {
  SECTION("single summand reduces to the identity") {
    CHECK(max_abs_diff(commutation_matrix(3, 1), DenseMatrix::identity(3)) == 0.0);
  }
  SECTION("2x2 block swap permutes the middle entries") {
    const auto c = commutation_matrix(2, 2);
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const auto y = matvec(c, x);
    CHECK(y == std::vector<double>{1.0, 3.0, 2.0, 4.0});
  }
  SECTION("transposed sizes compose to the identity") {
    const auto prod = matmul(commutation_matrix(3, 2), commutation_matrix(2, 3));
    CHECK(max_abs_diff(prod, DenseMatrix::identity(6)) == 0.0);
  }
  SECTION("swaps Kronecker factors") {
    SplitMix64 rng(11);
    const auto u = random_simplex(rng, 3, 0.0);
    const auto v = random_simplex(rng, 4, 0.0);
    std::vector<double> uv, vu;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) uv.push_back(u[i] * v[j]);
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 3; ++i) vu.push_back(v[j] * u[i]);
    const auto y = matvec(commutation_matrix(4, 3), uv);
    CHECK(l1_distance(y, vu) < 1e-15);
  }
  SECTION("capacity cap") {
    CHECK_THROWS_AS(commutation_matrix(2048, 2048), capacity_error);
  }
}

TEST_CASE("operator application examples") {
  SECTION("marginalization sums out the lowest digit") {
    const auto op = StructuredOperator::marginalization(2, 1, 1);
    const auto y = op.apply(SimplexVector({0.1, 0.2, 0.3, 0.4}));
    CHECK(y[0] == Catch::Approx(0.3).margin(1e-15));
    CHECK(y[1] == Catch::Approx(0.7).margin(1e-15));
  }
  SECTION("cycling moves the lowest digit to the top") {
    const auto op = StructuredOperator::cycling(2, 2, 1);
    const auto y = op.apply(SimplexVector({0.1, 0.2, 0.3, 0.4}));
    CHECK(y.entries() == std::vector<double>{0.1, 0.3, 0.2, 0.4});
  }
  SECTION("branching from the empty state emits the lone conditional") {
    const ConditionalFamily fam(3, 0, std::vector<double>{0.2, 0.3, 0.5});
    const auto op = StructuredOperator::branching(0, 0, fam);
    const auto y = op.apply(SimplexVector({1.0}));
    CHECK(y.entries() == std::vector<double>{0.2, 0.3, 0.5});
  }
  SECTION("dimension mismatch is a contract error") {
    const auto op = StructuredOperator::marginalization(2, 1, 1);
    CHECK_THROWS_AS(op.apply(SimplexVector({0.5, 0.5})), contract_error);
  }
}

TEST_CASE("materialize examples") {
  SECTION("marginalization dense form") {
    const auto m = StructuredOperator::marginalization(2, 1, 1).materialize();
    const DenseMatrix expected(2, 4, {1, 1, 0, 0, 0, 0, 1, 1});
    CHECK(max_abs_diff(m, expected) == 0.0);
  }
  SECTION("zero rotation is the identity") {
    for (int k : {1, 2, 3}) {
      const auto c = StructuredOperator::cycling(2, k, 0).materialize();
      CHECK(max_abs_diff(c, DenseMatrix::identity(ipow(2, k))) == 0.0);
    }
  }
  SECTION("composition materializes to the factor product") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      StructuredOperator a = random_operator(2, rng);
      StructuredOperator b = random_operator(2, rng);
      if (a.input_dim() != b.output_dim()) continue;
      const auto composed = StructuredOperator::compose({a, b}).materialize();
      CHECK(max_abs_diff(composed, matmul(a.materialize(), b.materialize())) < 1e-15);
    }
  }
}

TEST_CASE("matrix-free application agrees with the dense oracle") {
  SplitMix64 rng(17);
  for (int alphabet : {2, 3})
    for (int trial = 0; trial < 40; ++trial) {
      const StructuredOperator op = random_operator(alphabet, rng);
      const DenseMatrix dense = op.materialize();
      const auto x = random_simplex(rng, op.input_dim(), 0.0);
      const auto fast = op.apply(x);
      const auto slow = matvec(dense, x.span());
      double worst = 0.0;
      for (std::size_t i = 0; i < fast.dim(); ++i)
        worst = std::max(worst, std::abs(fast[i] - slow[i]));
      CHECK(worst < 1e-12);
    }
}

TEST_CASE("materialized operators are column-stochastic, rotations are permutations") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const StructuredOperator op = random_operator(2, rng);
    const DenseMatrix dense = op.materialize();
    CHECK(is_column_stochastic(dense));
  }
  for (int k : {1, 2, 3})
    for (int m = 0; m <= k; ++m) {
      const auto c = StructuredOperator::cycling(3, k, m).materialize();
      for (std::size_t i = 0; i < c.rows(); ++i) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < c.cols(); ++j) {
          row += c.at(i, j);
          col += c.at(j, i);
          CHECK((c.at(i, j) == 0.0 || c.at(i, j) == 1.0));
        }
        CHECK(row == 1.0);
        CHECK(col == 1.0);
      }
    }
}

TEST_CASE("applying an operator keeps the vector on the simplex") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const StructuredOperator op = random_operator(3, rng);
    const auto y = op.apply(random_simplex(rng, op.input_dim(), 0.0));
    double sum = 0.0;
    for (double v : y.entries()) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("operator identity suite") {
  SECTION("reported errors stay below 1e-12") {
    CHECK(check_identities(2, 2, 0).max_error() < 1e-12);
    CHECK(check_identities(3, 1, 7).max_error() < 1e-12);
  }
  SECTION("zero-rotation instance is exact by construction") {
    const auto lhs = StructuredOperator::marginalization(2, 2, 1).materialize();
    const auto rhs = StructuredOperator::compose({StructuredOperator::cycling(2, 2, 0),
                                                  StructuredOperator::marginalization(2, 2, 1),
                                                  StructuredOperator::cycling(2, 3, 0)})
                         .materialize();
    CHECK(max_abs_diff(lhs, rhs) == 0.0);
  }
}

TEST_CASE("transition matrix factors through the shift operators") {
  // Q = M_k C_1 B_k = C_1 M_{k-1} B_k, and both match the commutation-sum
  // decomposition of the transition matrix.
  for (int alphabet : {2, 3})
    for (int k : {1, 2, 3}) {
      const auto fam = random_family(alphabet, k, 1234 + static_cast<std::uint64_t>(10 * k));
      const DenseMatrix q = build_transition(fam);
      const auto route1 =
          StructuredOperator::compose({StructuredOperator::marginalization(alphabet, k, k),
                                       StructuredOperator::cycling(alphabet, k + 1, 1),
                                       StructuredOperator::branching(k, k, fam)})
              .materialize();
      const auto route2 =
          StructuredOperator::compose({StructuredOperator::cycling(alphabet, k, 1),
                                       StructuredOperator::marginalization(alphabet, k, k - 1),
                                       StructuredOperator::branching(k, k, fam)})
              .materialize();
      CHECK(max_abs_diff(q, route1) < 1e-12);
      CHECK(max_abs_diff(q, route2) < 1e-12);
    }
}

TEST_CASE("operator constructor contracts") {
  CHECK_THROWS_AS(StructuredOperator::marginalization(2, 2, 3), contract_error);
  CHECK_THROWS_AS(StructuredOperator::marginalization(2, 2, -1), contract_error);
  CHECK_THROWS_AS(StructuredOperator::branching(2, 0, random_family(2, 1, 0)), contract_error);
  CHECK_THROWS_AS(StructuredOperator::compose({}), contract_error);
  CHECK_THROWS_AS(
      StructuredOperator::compose({StructuredOperator::marginalization(2, 1, 0),
                                   StructuredOperator::marginalization(2, 3, 0)}),
      contract_error);
  // Negative cycling subscripts normalize instead of throwing.
  CHECK(StructuredOperator::cycling(2, 3, -2).materialize().rows() == 8);
}
