#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcfi/channel.hpp"
#include "pcfi/coherence.hpp"
#include "pcfi/qsd.hpp"
#include "pcfi/types.hpp"

// JSON (de)serialization for the on-disk formats. Complex numbers are
// two-element [re, im] arrays; matrices are {"rows", "cols", "entries"} with
// a row-major entry list; density files add {"dim_a", "dim_b"}; channel
// files list elements with 1-based target indices.
namespace pcfi {
namespace io {

using json = nlohmann::json;

inline json complex_to_json(const Complex<double>& z) { return json::array({z.real(), z.imag()}); }

inline Complex<double> complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ValidationError(where + ": complex entries must be [re, im] number pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Matrix<double>& m) {
  json entries = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) entries.push_back(complex_to_json(m(r, c)));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline Matrix<double> matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw ValidationError(where + ": matrix JSON needs rows, cols, entries");
  const Index rows = j["rows"].get<Index>();
  const Index cols = j["cols"].get<Index>();
  const json& entries = j["entries"];
  if (rows <= 0 || cols <= 0) throw ValidationError(where + ": matrix dimensions must be positive");
  if (!entries.is_array() || static_cast<Index>(entries.size()) != rows * cols)
    throw ValidationError(where + ": entry count does not match rows*cols");
  Matrix<double> m(rows, cols);
  Index k = 0;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(entries[k++], where);
  return m;
}

inline json density_to_json(const DensityMatrix<double>& rho) {
  json j = matrix_to_json(rho.mat);
  j["dim_a"] = rho.dim_a;
  j["dim_b"] = rho.dim_b;
  return j;
}

inline DensityMatrix<double> density_from_json(const json& j, const Tolerances<double>& tol = {}) {
  if (!j.contains("dim_a") || !j.contains("dim_b"))
    throw ValidationError("density JSON needs dim_a and dim_b");
  DensityMatrix<double> rho;
  rho.dim_a = j["dim_a"].get<Index>();
  rho.dim_b = j["dim_b"].get<Index>();
  rho.mat = matrix_from_json(j, "density");
  validate_density(rho.mat, rho.dim_a, rho.dim_b, tol);
  return rho;
}

inline json channel_to_json(const PioChannel<double>& ch) {
  json elements = json::array();
  for (const auto& el : ch.elements) {
    json targets = json::array();
    for (Index t : el.targets) targets.push_back(t + 1);  // 1-based on disk
    json coeffs = json::array(), phase0 = json::array(), deriv = json::array();
    for (Index n = 0; n < el.coeffs.size(); ++n) {
      coeffs.push_back(complex_to_json(el.coeffs[n]));
      phase0.push_back(el.phase0[n]);
      deriv.push_back(el.deriv[n]);
    }
    elements.push_back(json{{"targets", targets},
                            {"coeffs", coeffs},
                            {"phase0", phase0},
                            {"deriv", deriv}});
  }
  json j{{"dim_a", ch.dim_a}, {"elements", elements}};
  if (ch.deriv_bound != 1.0) j["deriv_bound"] = ch.deriv_bound;
  return j;
}

inline PioChannel<double> channel_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dim_a") || !j.contains("elements"))
    throw ValidationError("channel JSON needs dim_a and elements");
  PioChannel<double> ch;
  ch.dim_a = j["dim_a"].get<Index>();
  if (j.contains("deriv_bound")) ch.deriv_bound = j["deriv_bound"].get<double>();
  const json& elements = j["elements"];
  if (!elements.is_array() || elements.empty())
    throw ValidationError("channel JSON: elements must be a non-empty array");
  for (const json& ej : elements) {
    KrausElement<double> el;
    const json& targets = ej.at("targets");
    const json& coeffs = ej.at("coeffs");
    const json& phase0 = ej.at("phase0");
    const json& deriv = ej.at("deriv");
    const Index n = static_cast<Index>(targets.size());
    if (n != ch.dim_a || static_cast<Index>(coeffs.size()) != n ||
        static_cast<Index>(phase0.size()) != n || static_cast<Index>(deriv.size()) != n)
      throw ValidationError("channel JSON: element arrays must all have length dim_a");
    el.coeffs = Vector<double>(n);
    el.phase0 = RealVector<double>(n);
    el.deriv = RealVector<double>(n);
    el.targets.resize(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) {
      const Index t = targets[static_cast<std::size_t>(k)].get<Index>();
      if (t < 1 || t > ch.dim_a)
        throw ValidationError("channel JSON: target indices are 1-based in [1, dim_a]");
      el.targets[static_cast<std::size_t>(k)] = t - 1;
      el.coeffs[k] = complex_from_json(coeffs[static_cast<std::size_t>(k)], "channel coeffs");
      el.phase0[k] = phase0[static_cast<std::size_t>(k)].get<double>();
      el.deriv[k] = deriv[static_cast<std::size_t>(k)].get<double>();
    }
    ch.elements.push_back(std::move(el));
  }
  require_valid_channel(ch);
  return ch;
}

inline json ensemble_to_json(const QsdEnsemble<double>& ens) {
  json priors = json::array(), states = json::array();
  for (Index i = 0; i < ens.size(); ++i) {
    priors.push_back(ens.priors[i]);
    states.push_back(matrix_to_json(ens.states[static_cast<std::size_t>(i)]));
  }
  return json{{"priors", priors}, {"states", states}};
}

inline QsdEnsemble<double> ensemble_from_json(const json& j, const Tolerances<double>& tol = {}) {
  if (!j.is_object() || !j.contains("priors") || !j.contains("states"))
    throw ValidationError("ensemble JSON needs priors and states");
  const json& priors = j["priors"];
  const json& states = j["states"];
  if (!priors.is_array() || !states.is_array() || priors.size() != states.size())
    throw ValidationError("ensemble JSON: priors and states must be arrays of equal length");
  QsdEnsemble<double> ens;
  ens.priors = RealVector<double>(static_cast<Index>(priors.size()));
  for (Index i = 0; i < ens.priors.size(); ++i) {
    ens.priors[i] = priors[static_cast<std::size_t>(i)].get<double>();
    ens.states.push_back(matrix_from_json(states[static_cast<std::size_t>(i)], "ensemble state"));
  }
  validate_ensemble(ens, tol);
  return ens;
}

inline json coherence_to_json(const CoherenceResult<double>& res) {
  return json{{"value", res.value},
              {"mode", to_string(res.mode)},
              {"certificate", channel_to_json(res.certificate)}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("cannot parse " + path + ": " + e.what());
  }
  return j;
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline DensityMatrix<double> load_density(const std::string& path,
                                          const Tolerances<double>& tol = {}) {
  return density_from_json(load_json_file(path), tol);
}

inline PioChannel<double> load_channel(const std::string& path) {
  return channel_from_json(load_json_file(path));
}

inline QsdEnsemble<double> load_ensemble(const std::string& path,
                                         const Tolerances<double>& tol = {}) {
  return ensemble_from_json(load_json_file(path), tol);
}

}  // namespace io
}  // namespace pcfi
