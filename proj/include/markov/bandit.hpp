#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "markov/dense.hpp"
#include "markov/errors.hpp"
#include "markov/recursive.hpp"
#include "markov/rng.hpp"
#include "markov/simplex.hpp"

namespace markov::bandit {

// Two arms with constant win rates p0, p1; the gambler multiplies the chosen
// arm's confidence by delta on a win and divides it on a loss.
struct Params {
  double p0;
  double p1;
  double delta;
};

inline void validate(const Params& p) {
  if (p.p0 < 0.0 || p.p0 > 1.0 || p.p1 < 0.0 || p.p1 > 1.0)
    throw contract_error("bandit: win rates must lie in [0, 1]");
  if (!(p.delta > 1.0)) throw contract_error("bandit: delta must exceed 1");
}

// Outcome codes, in the order of the 4-state vector:
// 1 arm0-win, 2 arm0-lose, 3 arm1-win, 4 arm1-lose.
enum class Outcome : int { kArm0Win = 1, kArm0Lose = 2, kArm1Win = 3, kArm1Lose = 4 };

// One-step confidence update: given the outcome distribution omega, column j
// of the result is the next outcome distribution after outcome j adjusted
// the confidences.
inline DenseMatrix confidence_update(const Params& p, const SimplexVector& omega) {
  validate(p);
  if (omega.dim() != 4) throw contract_error("bandit: omega must have dimension 4");
  const double q0 = omega[0] + omega[1];
  const double q1 = omega[2] + omega[3];
  if (std::abs(q0 + q1 - 1.0) > 1e-9)
    throw contract_error("bandit: q0 + q1 deviates from 1 by more than 1e-9");
  const double pb0 = 1.0 - p.p0;
  const double pb1 = 1.0 - p.p1;
  // Confidences (a, b) after outcomes 1..4.
  const std::array<std::pair<double, double>, 4> updated = {{
      {q0 * p.delta, q1},
      {q0 / p.delta, q1},
      {q0, q1 * p.delta},
      {q0, q1 / p.delta},
  }};
  DenseMatrix f(4, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto [a, b] = updated[j];
    const double z = a + b;
    f.at(0, j) = p.p0 * a / z;
    f.at(1, j) = pb0 * a / z;
    f.at(2, j) = p.p1 * b / z;
    f.at(3, j) = pb1 * b / z;
  }
  return f;
}

// The recursion rule of the confidence strategy as a 4-letter recursive spec.
inline RecursiveSpec map(const Params& p) {
  validate(p);
  return RecursiveSpec(
      4, [p](const SimplexVector& omega) { return confidence_update(p, omega); }, "bandit");
}

// r = q0/q1 = (delta(1-p1) - p1) / (delta(1-p0) - p0); defined only when both
// parts are positive.
inline double closed_form_ratio(const Params& p) {
  validate(p);
  const double num = p.delta * (1.0 - p.p1) - p.p1;
  const double den = p.delta * (1.0 - p.p0) - p.p0;
  if (num <= 0.0 || den <= 0.0)
    throw domain_error("bandit closed form: requires delta*(1-p) - p > 0 for both arms (got " +
                       std::to_string(den) + " for arm 0, " + std::to_string(num) +
                       " for arm 1)");
  return num / den;
}

// omega = (p0 q0, (1-p0) q0, p1 q1, (1-p1) q1) with q0/q1 the closed-form
// ratio and q0 + q1 = 1.
inline SimplexVector closed_form_stationary(const Params& p) {
  const double r = closed_form_ratio(p);
  const double q0 = r / (1.0 + r);
  const double q1 = 1.0 / (1.0 + r);
  return SimplexVector({p.p0 * q0, (1.0 - p.p0) * q0, p.p1 * q1, (1.0 - p.p1) * q1});
}

// Residuals of the two reduced stationarity equations at the candidate ratio
// q0/q1 = r (evaluated with q0 = r, q1 = 1). Both vanish exactly at the
// closed-form root.
inline std::pair<double, double> residual_reduced(const Params& p, double r) {
  validate(p);
  if (!(r > 0.0)) throw contract_error("bandit residual: ratio must be positive");
  const double q0 = r, q1 = 1.0;
  const double pb0 = 1.0 - p.p0;
  const double pb1 = 1.0 - p.p1;
  const double d1 = q0 * p.delta + q1;
  const double d2 = q0 + q1 * p.delta;
  const double win_mass = p.p0 * q0 + pb1 * q1;
  const double lose_mass = pb0 * q0 + p.p1 * q1;
  const double first = d1 * d2 - p.delta * win_mass * d2 - lose_mass * d1;
  const double second = d1 * d2 - win_mass * d2 - p.delta * lose_mass * d1;
  return {std::abs(first), std::abs(second)};
}

struct SimulationResult {
  std::array<double, 4> outcome_freq;  // ordered as Outcome codes 1..4
  double arm0_choice_freq;
  std::uint64_t steps;
  std::uint64_t burn_in;
  std::uint64_t seed;
};

// Simulates the true infinite-memory confidence process. Confidences start
// at (1/2, 1/2) and are renormalized to sum one every step; only their ratio
// enters the arm choice, so the renormalization is exact. Deterministic for
// a given seed.
inline SimulationResult simulate(const Params& p, std::uint64_t steps, std::uint64_t burn_in,
                                 std::uint64_t seed) {
  validate(p);
  if (steps < 1) throw contract_error("bandit simulate: steps must be >= 1");
  SplitMix64 rng(seed);
  double c0 = 0.5, c1 = 0.5;
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t arm0_choices = 0;
  const std::uint64_t total = burn_in + steps;
  for (std::uint64_t t = 0; t < total; ++t) {
    const bool arm0 = rng.next_double() < c0 / (c0 + c1);
    const double rate = arm0 ? p.p0 : p.p1;
    const bool win = rng.next_double() < rate;
    if (arm0)
      c0 *= win ? p.delta : 1.0 / p.delta;
    else
      c1 *= win ? p.delta : 1.0 / p.delta;
    const double z = c0 + c1;
    c0 /= z;
    c1 /= z;
    if (t >= burn_in) {
      const int code = arm0 ? (win ? 0 : 1) : (win ? 2 : 3);
      ++counts[static_cast<std::size_t>(code)];
      if (arm0) ++arm0_choices;
    }
  }
  SimulationResult result{};
  for (std::size_t i = 0; i < 4; ++i)
    result.outcome_freq[i] = static_cast<double>(counts[i]) / static_cast<double>(steps);
  result.arm0_choice_freq = static_cast<double>(arm0_choices) / static_cast<double>(steps);
  result.steps = steps;
  result.burn_in = burn_in;
  result.seed = seed;
  return result;
}

}  // namespace markov::bandit
