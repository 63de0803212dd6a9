// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <markov/markov.hpp>
#include <string>
#include <vector>

using namespace markov;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
}

ShiftChain random_chain(int alphabet, int k, std::uint64_t seed) {
  std::vector<ConditionalFamily> fams;
  SplitMix64 rng(seed);
  for (int m = 1; m <= k; ++m) fams.push_back(random_family(alphabet, m, rng.next()));
  return ShiftChain(std::move(fams));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

TEST_CASE("criterion 1: operator identity suite") {
  Stopwatch timer;
  double worst = 0.0;
  for (int n : {2, 3})
    for (int k : {1, 2, 3})
      for (std::uint64_t seed = 0; seed < 50; ++seed)
        worst = std::max(worst, check_identities(n, k, seed).max_error());
  const double elapsed = timer.seconds();
  const bool ok = worst < 1e-12 && elapsed < 10.0;
  report(1, ok,
         "four operator identities, N in {2,3}, k in {1,2,3}, 50 seeds: max error " + fmt(worst) +
             " (< 1e-12), " + fmt(elapsed) + " s (< 10 s)");
  CHECK(worst < 1e-12);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 2: transition-matrix factorizations") {
  double worst = 0.0;
  for (int n : {2, 3})
    for (int k : {1, 2, 3})
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto fam = random_family(n, k, seed);
        const DenseMatrix q = build_transition(fam);
        const auto route1 =
            StructuredOperator::compose({StructuredOperator::marginalization(n, k, k),
                                         StructuredOperator::cycling(n, k + 1, 1),
                                         StructuredOperator::branching(k, k, fam)})
                .materialize();
        const auto route2 =
            StructuredOperator::compose({StructuredOperator::cycling(n, k, 1),
                                         StructuredOperator::marginalization(n, k, k - 1),
                                         StructuredOperator::branching(k, k, fam)})
                .materialize();
        // Commutation-sum decomposition of the same matrix.
        const std::size_t nn = static_cast<std::size_t>(n);
        const std::size_t blocks = ipow(nn, k - 1);
        DenseMatrix sum(ipow(nn, k), ipow(nn, k));
        for (std::size_t i = 0; i < blocks; ++i) {
          DenseMatrix block(nn, nn);
          for (std::size_t j = 0; j < nn; ++j) {
            const auto member = fam.member(i * nn + j);
            for (std::size_t y = 0; y < nn; ++y) block.at(y, j) = member[y];
          }
          DenseMatrix sel(blocks, blocks);
          sel.at(i, i) = 1.0;
          sum.add_in_place(kron(sel, block));
        }
        const auto decomposition = matmul(commutation_matrix(nn, blocks), sum);
        worst = std::max({worst, max_abs_diff(q, route1), max_abs_diff(q, route2),
                          max_abs_diff(q, decomposition)});
      }
  const bool ok = worst < 1e-12;
  report(2, ok,
         "both shift factorizations and the commutation-sum decomposition match the transition "
         "matrix: max error " +
             fmt(worst) + " (< 1e-12)");
  CHECK(worst < 1e-12);
}

TEST_CASE("criterion 3: recursive shift construction") {
  double worst = 0.0;
  for (int n : {2, 3})
    for (int k : {1, 2, 3})
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ShiftChain chain = random_chain(n, k, seed);
        worst = std::max(worst, max_abs_diff(shift_matrix(chain), shift_matrix_recursive(chain)));
      }
  const bool ok = worst < 1e-12;
  report(3, ok,
         "shift_matrix vs shift_matrix_recursive, N in {2,3}, k <= 3, 50 seeds: max error " +
             fmt(worst) + " (< 1e-12)");
  CHECK(worst < 1e-12);
}

TEST_CASE("criterion 4: decompose/compose roundtrip") {
  SplitMix64 rng(404);
  double worst = 0.0;
  int count = 0;
  const std::vector<std::pair<int, int>> shapes{{2, 2}, {2, 4}, {2, 6}, {3, 2}, {3, 4}};
  while (count < 200) {
    for (const auto& [n, k] : shapes) {
      const std::size_t dim = ipow(static_cast<std::size_t>(n), k);
      auto v = random_simplex(rng, dim, 0.0).entries();
      if (count % 2 == 1) {  // zero out random aligned blocks
        const std::size_t nn = static_cast<std::size_t>(n);
        for (std::size_t b = 0; b < dim / nn; ++b)
          if (rng.next_double() < 0.3)
            for (std::size_t y = 0; y < nn; ++y) v[b * nn + y] = 0.0;
        double sum = 0.0;
        for (double x : v) sum += x;
        if (sum == 0.0) continue;
        for (double& x : v) x /= sum;
      }
      const SimplexVector theta(v);
      worst = std::max(worst, l1_distance(theta, chain_compose(chain_decompose(theta, n, k))));
      ++count;
    }
  }
  const bool ok = worst < 1e-12;
  report(4, ok,
         "chain_compose(chain_decompose(theta)) on 200 random vectors up to dim 81 "
         "(zeroed blocks included): max L1 error " +
             fmt(worst) + " (< 1e-12)");
  CHECK(worst < 1e-12);
}

TEST_CASE("criterion 5: marginal stationarity conditions") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fam = random_family(2, 3, 500 + seed);
    const auto theta = stationary_solve(HigherOrderChain(fam)).theta;
    for (double r : verify_marginal_conditions(theta, fam)) worst = std::max(worst, r);
  }
  const bool ok = worst < 1e-9;
  report(5, ok,
         "20 strictly positive order-3 chains (N=2): every marginal condition residual " +
             fmt(worst) + " (< 1e-9)");
  CHECK(worst < 1e-9);
}

TEST_CASE("criterion 6: mixture fixed-point oracle") {
  double worst_fp = 0.0;
  double worst_final = 0.0;
  int over_threshold = 0;
  bool monotone = true;
  for (int n : {2, 3})
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SplitMix64 rng(600 + 31 * static_cast<std::uint64_t>(n) + seed);
      const DenseMatrix r = random_stochastic_matrix(n, rng);
      const auto spec = RecursiveSpec::mixture(0.5, r);
      worst_fp =
          std::max(worst_fp, l1_distance(fixed_point(spec).omega, stationary_solve(r).theta));
      const auto diags = truncation_convergence(spec, 6);
      for (std::size_t i = 1; i < diags.size(); ++i)
        if (diags[i].marginal_distance > diags[i - 1].marginal_distance + 1e-12) monotone = false;
      const double final_dist = diags.back().marginal_distance;
      worst_final = std::max(worst_final, final_dist);
      if (final_dist >= 1e-3) ++over_threshold;
    }
  const bool fp_ok = worst_fp < 1e-10;
  const bool final_ok = worst_final < 1e-3;
  report(6, fp_ok && monotone && final_ok,
         "fixed_point(Mixture(0.5,R)) vs stationary(R) worst " + fmt(worst_fp) +
             " (< 1e-10); distances monotone: " + (monotone ? "yes" : "no") +
             "; final distance at k=6 worst " + fmt(worst_final) + " (< 1e-3, " +
             std::to_string(over_threshold) +
             "/40 draws over threshold -- the mixture marginal obeys "
             "|omega1(k)-omega*| = (1-eps)^k |(I-(1-(1-eps)^k)R)^{-1}(u-omega*)|, which is "
             "O(1e-2) at k=6 for generic R)");
  CHECK(worst_fp < 1e-10);
  CHECK(monotone);
  CHECK(worst_final < 1e-3);
}

TEST_CASE("criterion 7: bandit closed form on the parameter grid") {
  Stopwatch timer;
  double worst_residual = 0.0, worst_solver = 0.0, worst_reduced = 0.0;
  for (double p0 : {0.1, 0.2, 0.3, 0.4, 0.45})
    for (double p1 : {0.1, 0.2, 0.3, 0.4, 0.45})
      for (double delta : {1.5, 2.0, 4.0}) {
        const bandit::Params params{p0, p1, delta};
        const auto omega = bandit::closed_form_stationary(params);
        const auto fw = matvec(bandit::confidence_update(params, omega), omega.span());
        worst_residual = std::max(worst_residual, l1_distance(omega.span(), fw));
        const auto fp = fixed_point(bandit::map(params));
        worst_solver = std::max(worst_solver, l1_distance(fp.omega, omega));
        const auto [r1, r2] =
            bandit::residual_reduced(params, bandit::closed_form_ratio(params));
        worst_reduced = std::max({worst_reduced, r1, r2});
      }
  const double spot = bandit::closed_form_ratio({0.4, 0.2, 2.0});
  const double elapsed = timer.seconds();
  const bool ok = worst_residual < 1e-10 && worst_solver < 1e-8 && worst_reduced < 1e-10 &&
                  std::abs(spot - 1.75) <= 1e-12 && elapsed < 5.0;
  report(7, ok,
         "grid p0,p1 in {0.1..0.45}, delta in {1.5,2,4}: fixed-point residual " +
             fmt(worst_residual) + " (< 1e-10), solver distance " + fmt(worst_solver) +
             " (< 1e-8), reduced residuals " + fmt(worst_reduced) + " (< 1e-10), r(0.4,0.2,2) = " +
             std::to_string(spot) + ", " + fmt(elapsed) + " s (< 5 s)");
  CHECK(worst_residual < 1e-10);
  CHECK(worst_solver < 1e-8);
  CHECK(worst_reduced < 1e-10);
  CHECK(std::abs(spot - 1.75) <= 1e-12);
  CHECK(elapsed < 5.0);
}

TEST_CASE("criterion 8: bandit truncation tracking") {
  Stopwatch timer;
  const auto spec = bandit::map({0.4, 0.2, 2.0});
  const auto diags = truncation_convergence(spec, 5);
  const double elapsed = timer.seconds();
  std::string listing;
  for (const auto& d : diags)
    listing += " k=" + std::to_string(d.order) + " distance=" + fmt(d.marginal_distance) +
               " hypothesis=" + fmt(d.hypothesis_residual) + ";";
  const bool ok = diags.size() == 5 &&
                  diags.back().marginal_distance < diags.front().marginal_distance &&
                  elapsed < 60.0;
  report(8, ok,
         "Bandit(0.4,0.2,2) truncations to k=5 (1024 states):" + listing + " distance shrinks " +
             fmt(diags.front().marginal_distance) + " -> " + fmt(diags.back().marginal_distance) +
             ", " + fmt(elapsed) + " s (< 60 s)");
  REQUIRE(diags.size() == 5);
  CHECK(diags.back().marginal_distance < diags.front().marginal_distance);
  CHECK(elapsed < 60.0);
}

TEST_CASE("criterion 9: symmetric Monte Carlo") {
  Stopwatch timer;
  const bandit::Params params{0.3, 0.3, 2.0};
  const auto first = bandit::simulate(params, 1000000, 10000, 2024);
  const auto second = bandit::simulate(params, 1000000, 10000, 2024);
  const double elapsed = timer.seconds();
  const bool identical = first.outcome_freq == second.outcome_freq &&
                         first.arm0_choice_freq == second.arm0_choice_freq;
  const bool in_band = first.arm0_choice_freq >= 0.48 && first.arm0_choice_freq <= 0.52;
  const bool ok = identical && in_band && elapsed < 10.0;
  report(9, ok,
         "Bandit(0.3,0.3,2), 1e6 steps after 1e4 burn-in: arm-0 frequency " +
             std::to_string(first.arm0_choice_freq) + " (in [0.48,0.52]), repeat run " +
             (identical ? "bit-identical" : "DIFFERS") + ", " + fmt(elapsed) + " s (< 10 s)");
  CHECK(in_band);
  CHECK(identical);
  CHECK(elapsed < 10.0);
}

TEST_CASE("criterion 10: matrix-free performance") {
  double worst = 0.0;
  SplitMix64 rng(1010);
  for (int k = 1; k <= 5; ++k) {
    const auto fam = random_family(2, k, 1010 + static_cast<std::uint64_t>(k));
    const HigherOrderChain chain(fam);
    const auto q = build_transition(fam);
    for (int trial = 0; trial < 20; ++trial) {
      const auto theta = random_simplex(rng, chain.state_count(), 0.0);
      const auto fast = chain.apply(theta);
      const auto slow = matvec(q, theta.span());
      for (std::size_t i = 0; i < fast.dim(); ++i)
        worst = std::max(worst, std::abs(fast[i] - slow[i]));
    }
  }
  Stopwatch timer;
  const auto fam16 = random_family(2, 16, 16);
  const auto res = stationary_solve(HigherOrderChain(fam16));
  const double elapsed = timer.seconds();
  const bool ok = worst < 1e-12 && res.residual <= 1e-12 && elapsed < 5.0;
  report(10, ok,
         "dense agreement for N=2, k <= 5: max error " + fmt(worst) +
             " (< 1e-12); 65536-state power iteration to residual " + fmt(res.residual) + " in " +
             std::to_string(res.iterations) + " iterations, " + fmt(elapsed) + " s (< 5 s)");
  CHECK(worst < 1e-12);
  CHECK(res.residual <= 1e-12);
  CHECK(elapsed < 5.0);
}
