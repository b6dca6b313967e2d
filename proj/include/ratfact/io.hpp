#pragma once

// JSON interchange for systems and reports. Doubles are written in shortest
// round-trip form, so parse(write(sys)) is bit-exact.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ratfact/fact.hpp"

namespace ratfact {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

inline Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// A 0×k matrix serializes as [], so its column count comes from the caller
// (cols < 0: unknown, taken as 0).
inline Matrix matrix_from_json(const Json& j, const std::string& field,
                               Index cols = -1) {
  if (!j.is_array()) throw InputError("field '" + field + "': expected an array of rows");
  const Index r = static_cast<Index>(j.size());
  if (r == 0) return Matrix(0, std::max<Index>(cols, 0));
  Index c = -1;
  for (Index i = 0; i < r; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array())
      throw InputError("field '" + field + "' row " + std::to_string(i) +
                       ": expected an array");
    const Index len = static_cast<Index>(row.size());
    if (c < 0) c = len;
    if (len != c)
      throw InputError("field '" + field + "' row " + std::to_string(i) +
                       ": ragged row (" + std::to_string(len) + " entries, expected " +
                       std::to_string(c) + ")");
  }
  Matrix M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index k = 0; k < c; ++k) {
      const Json& v = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      if (!v.is_number())
        throw InputError("field '" + field + "' entry (" + std::to_string(i) + "," +
                         std::to_string(k) + "): expected a number");
      M(i, k) = v.get<double>();
    }
  require_finite(M, field.c_str());
  return M;
}

inline Json system_to_json(const DescriptorSystem& s) {
  Json j;
  j["ts"] = to_string(s.ts);
  j["n"] = s.n();
  j["m"] = s.m();
  j["p"] = s.p();
  j["A"] = matrix_to_json(s.A);
  j["E"] = s.e_identity ? Json(nullptr) : matrix_to_json(s.E);
  j["B"] = matrix_to_json(s.B);
  j["C"] = matrix_to_json(s.C);
  j["D"] = matrix_to_json(s.D);
  return j;
}

inline DescriptorSystem system_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("system file: top level must be an object");
  for (const char* key : {"ts", "A", "B", "C", "D"})
    if (!j.contains(key)) throw InputError(std::string("system file: missing field '") + key + "'");
  if (!j["ts"].is_string()) throw InputError("field 'ts': expected a string");
  const std::string ts_name = j["ts"].get<std::string>();
  TimeDomain ts;
  if (ts_name == "continuous") ts = TimeDomain::continuous;
  else if (ts_name == "discrete") ts = TimeDomain::discrete;
  else throw InputError("field 'ts': expected \"continuous\" or \"discrete\", got \"" + ts_name + "\"");

  auto dim = [&](const char* key) -> Index {
    if (!j.contains(key)) return -1;
    if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
      throw InputError(std::string("field '") + key + "': expected a non-negative integer");
    return static_cast<Index>(j[key].get<long long>());
  };
  const Index n0 = dim("n"), m0 = dim("m");
  const Matrix A = matrix_from_json(j["A"], "A", n0);
  const Matrix B = matrix_from_json(j["B"], "B", m0);
  const Matrix D = matrix_from_json(j["D"], "D", B.cols());
  const Matrix C = matrix_from_json(j["C"], "C", A.rows());
  std::optional<Matrix> E;
  if (j.contains("E") && !j["E"].is_null()) E = matrix_from_json(j["E"], "E", A.rows());
  if (n0 >= 0 && A.rows() != n0) throw InputError("field 'n' disagrees with A");
  if (j.contains("p") && dim("p") != D.rows()) throw InputError("field 'p' disagrees with D");
  return make_dss(A, E, B, C, D, ts);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": malformed JSON (" + e.what() + ")");
  }
}

inline DescriptorSystem parse_system_file(const std::string& path) {
  const Json j = parse_json_text(read_text_file(path), path);
  try {
    return system_from_json(j);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_system_file(const std::string& path, const DescriptorSystem& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << system_to_json(s).dump(2) << '\n';
}

// Report pieces ------------------------------------------------------------

inline Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json eigenvalues_to_json(const EigenvalueList& l) {
  Json j;
  Json fin = Json::array();
  for (const Complex& z : l.finite) fin.push_back(complex_to_json(z));
  j["finite"] = std::move(fin);
  Json inf = Json::array();
  for (Index k : l.infinite_multiplicities)
    inf.push_back({{"value", "inf"}, {"multiplicity", k}});
  j["infinite"] = std::move(inf);
  j["count"] = l.total();
  return j;
}

inline Json certificate_to_json(const FactorCertificate& c) {
  return {{"order", c.order},
          {"normal_rank", c.normal_rank},
          {"mcmillan_degree", c.mcmillan_degree},
          {"poles", eigenvalues_to_json(c.poles)},
          {"zeros", eigenvalues_to_json(c.zeros)}};
}

inline Json residual_to_json(const ResidualStats& r, const std::string& grid) {
  return {{"max_residual", r.max_residual},
          {"points", r.points},
          {"skipped", r.skipped},
          {"grid", grid}};
}

}  // namespace ratfact
