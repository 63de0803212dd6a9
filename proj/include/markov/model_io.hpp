#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "markov/bandit.hpp"
#include "markov/errors.hpp"
#include "markov/family.hpp"
#include "markov/recursive.hpp"
#include "markov/shift.hpp"

namespace markov {

using Model = std::variant<ConditionalFamily, ShiftChain, RecursiveSpec>;

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const std::string& name,
                                           const std::string& where) {
  if (!j.is_object()) throw io_error(where + ": expected an object");
  auto it = j.find(name);
  if (it == j.end()) throw io_error(where + ": missing field '" + name + "'");
  return *it;
}

inline int require_int(const nlohmann::json& j, const std::string& name,
                       const std::string& where) {
  const auto& f = require_field(j, name, where);
  if (!f.is_number_integer()) throw io_error(where + ": field '" + name + "' must be an integer");
  return f.get<int>();
}

inline double require_number(const nlohmann::json& j, const std::string& name,
                             const std::string& where) {
  const auto& f = require_field(j, name, where);
  if (!f.is_number()) throw io_error(where + ": field '" + name + "' must be a number");
  return f.get<double>();
}

// Parses one conditional row: N non-negative reals summing to 1 within 1e-6,
// renormalized exactly on load.
inline void parse_row(const nlohmann::json& row, std::size_t n, const std::string& where,
                      std::vector<double>& out) {
  if (!row.is_array() || row.size() != n)
    throw io_error(where + ": expected an array of " + std::to_string(n) + " numbers");
  double sum = 0.0;
  std::vector<double> vals(n);
  for (std::size_t y = 0; y < n; ++y) {
    if (!row[y].is_number()) throw io_error(where + "[" + std::to_string(y) + "]: not a number");
    vals[y] = row[y].get<double>();
    if (vals[y] < 0.0)
      throw io_error(where + "[" + std::to_string(y) + "]: negative probability " +
                     std::to_string(vals[y]));
    sum += vals[y];
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw io_error(where + ": row sums to " + std::to_string(sum) +
                   ", more than 1e-6 away from 1");
  for (double v : vals) out.push_back(v / sum);
}

}  // namespace detail

inline ConditionalFamily parse_family(const nlohmann::json& j,
                                      const std::string& where = "family model") {
  const int n = detail::require_int(j, "N", where);
  const int order = detail::require_int(j, "order", where);
  if (n < 2) throw io_error(where + ": N must be >= 2");
  if (order < 0) throw io_error(where + ": order must be >= 0");
  const auto& rows = detail::require_field(j, "family", where);
  const std::size_t count = ipow(static_cast<std::size_t>(n), order);
  if (!rows.is_array() || rows.size() != count)
    throw io_error(where + ": 'family' must be an array of " + std::to_string(count) +
                   " rows for N=" + std::to_string(n) + ", order=" + std::to_string(order));
  std::vector<double> flat;
  flat.reserve(count * static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < count; ++i)
    detail::parse_row(rows[i], static_cast<std::size_t>(n),
                      where + ".family[" + std::to_string(i) + "]", flat);
  return ConditionalFamily(n, order, std::move(flat));
}

inline ShiftChain parse_shift_chain(const nlohmann::json& j,
                                    const std::string& where = "shift-chain model") {
  const int n = detail::require_int(j, "N", where);
  const auto& fams = detail::require_field(j, "families", where);
  if (!fams.is_array() || fams.empty())
    throw io_error(where + ": 'families' must be a non-empty array");
  std::vector<ConditionalFamily> families;
  families.reserve(fams.size());
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const std::string sub = where + ".families[" + std::to_string(i) + "]";
    ConditionalFamily f = parse_family(fams[i], sub);
    if (f.alphabet() != n) throw io_error(sub + ": N differs from the chain's N");
    if (f.order() != static_cast<int>(i) + 1)
      throw io_error(sub + ": expected order " + std::to_string(i + 1) + ", got " +
                     std::to_string(f.order()));
    families.push_back(std::move(f));
  }
  return ShiftChain(std::move(families));
}

inline RecursiveSpec parse_recursive_spec(const nlohmann::json& j,
                                          const std::string& where = "recursive-spec model") {
  const int n = detail::require_int(j, "N", where);
  const auto& kind_field = detail::require_field(j, "kind", where);
  if (!kind_field.is_string()) throw io_error(where + ": 'kind' must be a string");
  const std::string kind = kind_field.get<std::string>();
  const auto& params = detail::require_field(j, "params", where);

  auto parse_r = [&]() {
    const auto& rj = detail::require_field(params, "R", where + ".params");
    const std::size_t nn = static_cast<std::size_t>(n);
    if (!rj.is_array() || rj.size() != nn)
      throw io_error(where + ".params.R: expected " + std::to_string(n) + " columns");
    DenseMatrix r(nn, nn);
    std::vector<double> col;
    for (std::size_t jcol = 0; jcol < nn; ++jcol) {
      col.clear();
      detail::parse_row(rj[jcol], nn, where + ".params.R[" + std::to_string(jcol) + "]", col);
      for (std::size_t i = 0; i < nn; ++i) r.at(i, jcol) = col[i];
    }
    return r;
  };

  if (kind == "constant") return RecursiveSpec::constant(parse_r());
  if (kind == "mixture") {
    const double eps = detail::require_number(params, "epsilon", where + ".params");
    if (!(eps > 0.0) || eps > 1.0) throw io_error(where + ".params.epsilon: must lie in (0, 1]");
    return RecursiveSpec::mixture(eps, parse_r());
  }
  if (kind == "bandit") {
    if (n != 4) throw io_error(where + ": bandit specs require N = 4");
    bandit::Params p{detail::require_number(params, "p0", where + ".params"),
                     detail::require_number(params, "p1", where + ".params"),
                     detail::require_number(params, "delta", where + ".params")};
    try {
      return bandit::map(p);
    } catch (const contract_error& e) {
      throw io_error(where + ".params: " + e.what());
    }
  }
  throw io_error(where + ": unknown kind '" + kind + "' (expected constant, mixture or bandit)");
}

inline Model parse_model(const nlohmann::json& j, const std::string& where = "model") {
  if (!j.is_object()) throw io_error(where + ": expected a JSON object");
  if (j.contains("kind")) return parse_recursive_spec(j, where);
  if (j.contains("families")) return parse_shift_chain(j, where);
  if (j.contains("family")) return parse_family(j, where);
  throw io_error(where + ": object has none of the fields 'family', 'families', 'kind'");
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open model file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("cannot parse '" + path + "': " + e.what());
  }
  return parse_model(j, path);
}

}  // namespace markov
