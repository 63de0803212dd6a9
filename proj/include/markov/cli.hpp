#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "markov/markov.hpp"
#include "markov/model_io.hpp"

namespace markov::cli {

namespace detail {

using nlohmann::json;

inline json matrix_json(const DenseMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline json family_rows(const ConditionalFamily& f) {
  json rows = json::array();
  for (std::size_t i = 0; i < f.member_count(); ++i) {
    json row = json::array();
    for (double v : f.member(i)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct SolverFlags {
  double tol = SolverConfig{}.tolerance;
  std::uint64_t max_iter = SolverConfig{}.max_iterations;
  double damping = SolverConfig{}.damping;

  SolverConfig config() const {
    return SolverConfig{tol, static_cast<std::size_t>(max_iter), damping};
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--tol", tol, "L1 residual tolerance");
    cmd->add_option("--max-iter", max_iter, "iteration budget");
    cmd->add_option("--damping", damping, "damped-iteration weight in (0,1]");
  }

  void echo(json& record) const {
    record["tol"] = tol;
    record["max_iter"] = max_iter;
    record["damping"] = damping;
  }
};

// Extractors copy out of the variant so call sites can feed them a temporary.
inline ConditionalFamily as_family(const Model& m, const std::string& path) {
  if (const auto* f = std::get_if<ConditionalFamily>(&m)) return *f;
  throw io_error("'" + path + "' is not a conditional-family model");
}

inline ShiftChain as_shift_chain(const Model& m, const std::string& path) {
  if (const auto* c = std::get_if<ShiftChain>(&m)) return *c;
  throw io_error("'" + path + "' is not a shift-chain model");
}

inline RecursiveSpec as_recursive_spec(const Model& m, const std::string& path) {
  if (const auto* s = std::get_if<RecursiveSpec>(&m)) return *s;
  throw io_error("'" + path + "' is not a recursive-spec model");
}

}  // namespace detail

// Dispatches one invocation. Writes exactly one JSON record to `out` on
// success; diagnostics go to `err`. Exit codes: 0 success, 1 numeric failure
// (non-convergence, domain error), 2 input or usage error.
inline int run(const std::vector<std::string>& args, std::istream& /*in*/, std::ostream& out,
               std::ostream& err) {
  using detail::json;

  CLI::App app{"higher-order and recursive Markov chain toolkit", "markov"};
  app.require_subcommand(1);

  std::string model_path;
  int flag_n = 2, flag_k = 1, flag_m = 1, flag_kmax = 1;
  std::uint64_t flag_seed = 0;
  std::uint64_t flag_steps = 1000000, flag_burn_in = 10000;
  double flag_p0 = 0.0, flag_p1 = 0.0, flag_delta = 2.0;
  detail::SolverFlags solver;

  auto* c_validate = app.add_subcommand("validate", "load a model file and report its shape");
  c_validate->add_option("--model", model_path, "model file")->required();

  auto* c_identities =
      app.add_subcommand("identities", "operator identity check on a random family");
  c_identities->add_option("--N", flag_n, "alphabet size")->required();
  c_identities->add_option("--k", flag_k, "order")->required();
  c_identities->add_option("--seed", flag_seed, "random seed");

  auto* c_build = app.add_subcommand("build", "materialize the transition matrix of a family");
  c_build->add_option("--model", model_path, "family file")->required();

  auto* c_stationary = app.add_subcommand("stationary", "stationary distribution of a family");
  c_stationary->add_option("--model", model_path, "family file")->required();
  solver.attach(c_stationary);

  auto* c_marginal = app.add_subcommand("marginal", "order-m marginal of the stationary vector");
  c_marginal->add_option("--model", model_path, "family file")->required();
  c_marginal->add_option("--m", flag_m, "target order")->required();
  solver.attach(c_marginal);

  auto* c_shift = app.add_subcommand("shift", "k-shift matrix of a chain of families");
  c_shift->add_option("--model", model_path, "shift-chain file")->required();

  auto* c_decompose =
      app.add_subcommand("decompose", "chain-rule decomposition of the stationary vector");
  c_decompose->add_option("--model", model_path, "family file")->required();
  solver.attach(c_decompose);

  auto* c_fixedpoint = app.add_subcommand("fixedpoint", "fixed point of a recursive spec");
  c_fixedpoint->add_option("--model", model_path, "recursive-spec file")->required();
  solver.attach(c_fixedpoint);

  auto* c_truncate = app.add_subcommand("truncate", "order-k truncation of a recursive spec");
  c_truncate->add_option("--model", model_path, "recursive-spec file")->required();
  c_truncate->add_option("--k", flag_k, "truncation order")->required();

  auto* c_converge =
      app.add_subcommand("converge", "truncation convergence diagnostics of a recursive spec");
  c_converge->add_option("--model", model_path, "recursive-spec file")->required();
  c_converge->add_option("--kmax", flag_kmax, "largest truncation order")->required();
  solver.attach(c_converge);

  auto* c_bandit_solve = app.add_subcommand("bandit-solve", "closed-form bandit stationary point");
  c_bandit_solve->add_option("--p0", flag_p0, "arm-0 win rate")->required();
  c_bandit_solve->add_option("--p1", flag_p1, "arm-1 win rate")->required();
  c_bandit_solve->add_option("--delta", flag_delta, "confidence multiplier")->required();

  auto* c_bandit_simulate =
      app.add_subcommand("bandit-simulate", "seeded simulation of the confidence process");
  c_bandit_simulate->add_option("--p0", flag_p0, "arm-0 win rate")->required();
  c_bandit_simulate->add_option("--p1", flag_p1, "arm-1 win rate")->required();
  c_bandit_simulate->add_option("--delta", flag_delta, "confidence multiplier")->required();
  c_bandit_simulate->add_option("--steps", flag_steps, "recorded steps");
  c_bandit_simulate->add_option("--burn-in", flag_burn_in, "discarded initial steps");
  c_bandit_simulate->add_option("--seed", flag_seed, "random seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    json record;

    if (c_validate->parsed()) {
      const Model model = load_model(model_path);
      record["command"] = "validate";
      record["model"] = model_path;
      if (const auto* f = std::get_if<ConditionalFamily>(&model)) {
        record["type"] = "family";
        record["N"] = f->alphabet();
        record["order"] = f->order();
        record["members"] = f->member_count();
      } else if (const auto* c = std::get_if<ShiftChain>(&model)) {
        record["type"] = "shift_chain";
        record["N"] = c->alphabet();
        record["k"] = c->order();
      } else {
        const auto& s = std::get<RecursiveSpec>(model);
        record["type"] = "recursive_spec";
        record["N"] = s.alphabet();
        record["kind"] = s.kind();
      }
    } else if (c_identities->parsed()) {
      const IdentityReport rep = check_identities(flag_n, flag_k, flag_seed);
      record["command"] = "identities";
      record["N"] = flag_n;
      record["k"] = flag_k;
      record["seed"] = flag_seed;
      record["errors"] = {{"marginalization_cycle", rep.marginalization_cycle},
                          {"marginalization_exchange", rep.marginalization_exchange},
                          {"branching_cycle", rep.branching_cycle},
                          {"cycling_power", rep.cycling_power}};
      record["max_error"] = rep.max_error();
    } else if (c_build->parsed()) {
      const ConditionalFamily family = detail::as_family(load_model(model_path), model_path);
      record["command"] = "build";
      record["model"] = model_path;
      record["N"] = family.alphabet();
      record["order"] = family.order();
      record["transition"] = detail::matrix_json(build_transition(family));
    } else if (c_stationary->parsed()) {
      const ConditionalFamily family = detail::as_family(load_model(model_path), model_path);
      const StationaryResult res = stationary_solve(HigherOrderChain(family), solver.config());
      record["command"] = "stationary";
      record["model"] = model_path;
      record["N"] = family.alphabet();
      record["order"] = family.order();
      record["dim"] = res.theta.dim();
      record["theta"] = res.theta.entries();
      record["iterations"] = res.iterations;
      record["residual"] = res.residual;
      solver.echo(record);
    } else if (c_marginal->parsed()) {
      const ConditionalFamily family = detail::as_family(load_model(model_path), model_path);
      const SimplexVector omega = marginal_stationary(family, flag_m, solver.config());
      record["command"] = "marginal";
      record["model"] = model_path;
      record["N"] = family.alphabet();
      record["order"] = family.order();
      record["m"] = flag_m;
      record["omega"] = omega.entries();
      solver.echo(record);
    } else if (c_shift->parsed()) {
      const ShiftChain chain = detail::as_shift_chain(load_model(model_path), model_path);
      const DenseMatrix s = shift_matrix(chain);
      const DenseMatrix s_rec = shift_matrix_recursive(chain);
      record["command"] = "shift";
      record["model"] = model_path;
      record["N"] = chain.alphabet();
      record["k"] = chain.order();
      record["shift_matrix"] = detail::matrix_json(s);
      record["recursive_max_diff"] = max_abs_diff(s, s_rec);
    } else if (c_decompose->parsed()) {
      const ConditionalFamily family = detail::as_family(load_model(model_path), model_path);
      const StationaryResult res = stationary_solve(HigherOrderChain(family), solver.config());
      const ChainDecomposition d =
          chain_decompose(res.theta, family.alphabet(), family.order());
      record["command"] = "decompose";
      record["model"] = model_path;
      record["N"] = family.alphabet();
      record["order"] = family.order();
      record["theta"] = res.theta.entries();
      json levels = json::array();
      for (const auto& level : d.levels)
        levels.push_back({{"order", level.order()}, {"family", detail::family_rows(level)}});
      record["levels"] = std::move(levels);
      record["roundtrip_error"] = l1_distance(res.theta, chain_compose(d));
      record["marginal_residuals"] = verify_marginal_conditions(res.theta, family);
      solver.echo(record);
    } else if (c_fixedpoint->parsed()) {
      const RecursiveSpec spec = detail::as_recursive_spec(load_model(model_path), model_path);
      const FixedPointResult res = fixed_point(spec, solver.config());
      record["command"] = "fixedpoint";
      record["model"] = model_path;
      record["N"] = spec.alphabet();
      record["kind"] = spec.kind();
      record["omega"] = res.omega.entries();
      record["iterations"] = res.iterations;
      record["residual"] = res.residual;
      solver.echo(record);
    } else if (c_truncate->parsed()) {
      const RecursiveSpec spec = detail::as_recursive_spec(load_model(model_path), model_path);
      const ConditionalFamily family = build_truncation(spec, flag_k);
      record["command"] = "truncate";
      record["model"] = model_path;
      // Named spec_kind so the record itself stays loadable as a family model.
      record["spec_kind"] = spec.kind();
      record["N"] = family.alphabet();
      record["order"] = family.order();
      record["family"] = detail::family_rows(family);
    } else if (c_converge->parsed()) {
      const RecursiveSpec spec = detail::as_recursive_spec(load_model(model_path), model_path);
      const SimplexVector omega_star = fixed_point(spec, solver.config()).omega;
      const auto diags = truncation_convergence(spec, flag_kmax, solver.config());
      record["command"] = "converge";
      record["model"] = model_path;
      record["kind"] = spec.kind();
      record["N"] = spec.alphabet();
      record["kmax"] = flag_kmax;
      record["omega_star"] = omega_star.entries();
      json list = json::array();
      for (const auto& d : diags)
        list.push_back({{"k", d.order},
                        {"distance", d.marginal_distance},
                        {"hypothesis_residual", d.hypothesis_residual}});
      record["diagnostics"] = std::move(list);
      solver.echo(record);
    } else if (c_bandit_solve->parsed()) {
      const bandit::Params params{flag_p0, flag_p1, flag_delta};
      const double r = bandit::closed_form_ratio(params);
      const SimplexVector omega = bandit::closed_form_stationary(params);
      const auto fw = matvec(bandit::confidence_update(params, omega), omega.span());
      record["command"] = "bandit-solve";
      record["p0"] = flag_p0;
      record["p1"] = flag_p1;
      record["delta"] = flag_delta;
      record["r"] = r;
      record["q0"] = r / (1.0 + r);
      record["q1"] = 1.0 / (1.0 + r);
      record["omega"] = omega.entries();
      record["residual"] = l1_distance(omega.span(), fw);
    } else if (c_bandit_simulate->parsed()) {
      const bandit::Params params{flag_p0, flag_p1, flag_delta};
      const auto sim = bandit::simulate(params, flag_steps, flag_burn_in, flag_seed);
      record["command"] = "bandit-simulate";
      record["p0"] = flag_p0;
      record["p1"] = flag_p1;
      record["delta"] = flag_delta;
      record["steps"] = sim.steps;
      record["burn_in"] = sim.burn_in;
      record["seed"] = sim.seed;
      record["freq"] = sim.outcome_freq;
      record["arm0_choice_freq"] = sim.arm0_choice_freq;
      try {
        const double r = bandit::closed_form_ratio(params);
        record["model_q0"] = r / (1.0 + r);
      } catch (const domain_error&) {
        record["model_q0"] = nullptr;
      }
    }

    out << record.dump() << "\n";
    return 0;
  } catch (const convergence_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const domain_error& e) {
    err << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const numeric_error& e) {
    err << "numeric failure: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace markov::cli
