#pragma once

#include <grexp/lie_core.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grexp {

/// Raised for malformed algebra files (as opposed to algebras that load but
/// fail validation).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses {"name", "dim", "bracket": [[i, j, k, "p/q"]], "sigma": [...],
/// "matrix_rep": [[row-major floats], ...]}. Only i < j entries are listed.
inline SymmetricPair pair_from_json(const nlohmann::json& j) {
  try {
    const auto name = j.at("name").get<std::string>();
    const int dim = j.at("dim").get<int>();
    if (dim <= 0) throw FormatError("dim must be positive");
    std::vector<BracketEntry> entries;
    for (const auto& row : j.at("bracket")) {
      if (!row.is_array() || row.size() != 4) throw FormatError("bracket rows must be [i, j, k, \"p/q\"]");
      const int a = row[0].get<int>(), b = row[1].get<int>(), c = row[2].get<int>();
      if (a < 0 || b < 0 || c < 0 || a >= dim || b >= dim || c >= dim)
        throw FormatError("bracket index out of range");
      if (a >= b) throw FormatError("bracket rows must satisfy i < j");
      const Rational coeff =
          row[3].is_string() ? parse_rational(row[3].get<std::string>()) : Rational(row[3].get<long long>());
      entries.push_back({a, b, c, coeff});
    }
    std::vector<int> signs;
    if (j.contains("sigma")) {
      signs = j.at("sigma").get<std::vector<int>>();
      if (static_cast<int>(signs.size()) != dim) throw FormatError("sigma must have length dim");
      for (int s : signs)
        if (s != 1 && s != -1) throw FormatError("sigma entries must be +1 or -1");
    } else {
      signs.assign(dim, 1);
    }
    std::optional<std::vector<Eigen::MatrixXd>> rep;
    if (j.contains("matrix_rep")) {
      rep.emplace();
      for (const auto& flat : j.at("matrix_rep")) {
        const auto values = flat.get<std::vector<double>>();
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(values.size()))));
        if (n * n != static_cast<Eigen::Index>(values.size()))
          throw FormatError("matrix_rep entries must be square row-major matrices");
        Eigen::MatrixXd m(n, n);
        for (Eigen::Index r = 0; r < n; ++r)
          for (Eigen::Index c = 0; c < n; ++c) m(r, c) = values[r * n + c];
        rep->push_back(m);
      }
      if (static_cast<int>(rep->size()) != dim) throw FormatError("matrix_rep must have dim entries");
    }
    return SymmetricPair(name, LieAlgebra(name, dim, entries, rep), signs);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed algebra file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("malformed algebra file: ") + e.what());
  }
}

inline SymmetricPair load_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
  return pair_from_json(j);
}

inline nlohmann::json to_json(const SymmetricPair& pair) {
  const auto& g = pair.algebra();
  nlohmann::json j;
  j["name"] = pair.key();
  j["dim"] = g.dim();
  auto rows = nlohmann::json::array();
  for (int a = 0; a < g.dim(); ++a)
    for (int b = a + 1; b < g.dim(); ++b)
      for (int c = 0; c < g.dim(); ++c)
        if (!is_zero(g.structure(a, b, c))) rows.push_back({a, b, c, to_string(g.structure(a, b, c))});
  j["bracket"] = rows;
  std::vector<int> signs;
  for (int a = 0; a < g.dim(); ++a) signs.push_back(pair.sigma()(a, a) == 1 ? 1 : -1);
  j["sigma"] = signs;
  if (g.matrix_rep()) {
    auto reps = nlohmann::json::array();
    for (const auto& m : *g.matrix_rep()) {
      std::vector<double> flat;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
      reps.push_back(flat);
    }
    j["matrix_rep"] = reps;
  }
  return j;
}

inline nlohmann::json to_json(const Violation& v) {
  return {{"kind", v.kind}, {"indices", v.indices}, {"residual", v.residual}, {"detail", v.detail}};
}

}  // namespace grexp
