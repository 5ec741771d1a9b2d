#pragma once

// File formats: density matrices and metrics as JSON, tomography datasets,
// CSV plot series and the published measurement table.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spdcqkd/qkd_metrics.hpp"
#include "spdcqkd/quantum_core.hpp"
#include "spdcqkd/spdc_model.hpp"
#include "spdcqkd/tomography.hpp"

namespace spdcqkd {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating input. The message names the offending field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the double, independent of locale.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), end);
}

// ---------------------------------------------------------------------------
// density matrices and metrics

inline Json to_json(const DensityMatrix& rho) {
  Json re = Json::array();
  Json im = Json::array();
  for (int r = 0; r < 4; ++r) {
    Json rr = Json::array();
    Json ir = Json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(rho(r, c).real());
      ir.push_back(rho(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return Json{{"re", re}, {"im", im}};
}

inline DensityMatrix density_matrix_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("density matrix: expected an object with \"re\" and \"im\"");
  Matrix4c m;
  for (const char* part : {"re", "im"}) {
    if (!j.contains(part)) throw InputError(std::string("density matrix: missing field \"") + part + "\"");
    const Json& a = j.at(part);
    if (!a.is_array() || a.size() != 4) throw InputError(std::string("density matrix: \"") + part + "\" must be 4x4");
    for (int r = 0; r < 4; ++r) {
      if (!a[r].is_array() || a[r].size() != 4)
        throw InputError(std::string("density matrix: \"") + part + "\"[" + std::to_string(r) + "] must have 4 entries");
      for (int c = 0; c < 4; ++c) {
        if (!a[r][c].is_number())
          throw InputError(std::string("density matrix: \"") + part + "\"[" + std::to_string(r) + "][" +
                           std::to_string(c) + "] is not a number");
        const double v = a[r][c].get<double>();
        if (part[0] == 'r') m(r, c) = cplx(v, 0.0);
        else m(r, c) += cplx(0.0, v);
      }
    }
  }
  try {
    return DensityMatrix(m);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("density matrix: ") + e.what());
  }
}

inline DensityMatrix read_density_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return density_matrix_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline Json to_json(const QkdMetrics& m) {
  return Json{{"S", m.S}, {"Q", m.Q}, {"r_dw", m.r_dw}, {"r_c", m.r_c}, {"R_key", m.R_key}};
}

inline QkdMetrics metrics_from_json(const Json& j) {
  QkdMetrics m;
  try {
    m.S = j.at("S").get<double>();
    m.Q = j.at("Q").get<double>();
    m.r_dw = j.at("r_dw").get<double>();
    m.r_c = j.at("r_c").get<double>();
    m.R_key = j.at("R_key").get<double>();
  } catch (const Json::exception& e) {
    throw InputError(std::string("metrics: ") + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------
// tomography datasets
//
// {"tau_s": number, "duration_s": number,
//  "measurements": [{"a": "H", "b": "V", "count": 123}, ... 36 entries]}
// Input order is free; output is in canonical setting order.

inline TomographyDataset dataset_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("dataset: top level must be an object");
  auto number = [&](const char* key) {
    if (!j.contains(key)) throw InputError(std::string("dataset: missing field \"") + key + "\"");
    if (!j.at(key).is_number()) throw InputError(std::string("dataset: field \"") + key + "\" must be a number");
    return j.at(key).get<double>();
  };
  TomographyDataset ds;
  ds.tau_s = number("tau_s");
  ds.duration_s = number("duration_s");
  if (!j.contains("measurements") || !j.at("measurements").is_array())
    throw InputError("dataset: \"measurements\" must be an array");
  const Json& ms = j.at("measurements");
  if (ms.size() != TomographySettings::kSize)
    throw InputError("dataset: \"measurements\" must have 36 entries, found " + std::to_string(ms.size()));

  std::array<bool, TomographySettings::kSize> seen{};
  for (std::size_t k = 0; k < ms.size(); ++k) {
    const std::string where = "dataset: measurements[" + std::to_string(k) + "]";
    const Json& e = ms[k];
    if (!e.is_object()) throw InputError(where + " must be an object");
    auto pol = [&](const char* key) {
      if (!e.contains(key) || !e.at(key).is_string())
        throw InputError(where + "." + key + " must be one of H, V, D, A, R, L");
      auto p = parse_polarization(e.at(key).get<std::string>());
      if (!p) throw InputError(where + "." + key + " must be one of H, V, D, A, R, L");
      return *p;
    };
    const SettingPair pair{pol("a"), pol("b")};
    if (!e.contains("count") || !e.at("count").is_number_integer())
      throw InputError(where + ".count must be an integer");
    const std::int64_t count = e.at("count").get<std::int64_t>();
    if (count < 0) throw InputError(where + ".count must be non-negative");
    const std::size_t idx = TomographySettings::canonical_index(pair);
    if (seen[idx])
      throw InputError(where + " repeats setting " + std::string{to_char(pair.a), to_char(pair.b)});
    seen[idx] = true;
    ds.counts[idx] = count;
  }
  try {
    ds.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("dataset: ") + e.what());
  }
  return ds;
}

inline TomographyDataset parse_dataset(std::string_view text) {
  try {
    return dataset_from_json(Json::parse(text));
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("dataset: ") + e.what());
  }
}

inline TomographyDataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dataset(buf.str());
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline Json to_json(const TomographyDataset& ds) {
  Json ms = Json::array();
  for (std::size_t i = 0; i < ds.counts.size(); ++i) {
    const SettingPair& p = ds.settings[i];
    ms.push_back(Json{{"a", std::string(1, to_char(p.a))}, {"b", std::string(1, to_char(p.b))}, {"count", ds.counts[i]}});
  }
  // Canonical order regardless of the settings order held in memory.
  std::vector<Json> sorted(TomographySettings::kSize);
  for (std::size_t i = 0; i < ds.counts.size(); ++i) sorted[TomographySettings::canonical_index(ds.settings[i])] = ms[i];
  return Json{{"tau_s", ds.tau_s}, {"duration_s", ds.duration_s}, {"measurements", sorted}};
}

inline std::string serialize_dataset(const TomographyDataset& ds) { return to_json(ds).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// CSV and grids

inline void write_model_csv(std::ostream& out, const std::vector<ModelPoint>& points) {
  out << "n_bar,kappa,S,Q,r_dw,r_c,R_key\n";
  for (const ModelPoint& p : points) {
    out << format_double(p.mean_pairs) << ',' << format_double(p.kappa) << ',' << format_double(p.S) << ','
        << format_double(p.Q) << ',' << format_double(p.r_dw) << ',' << format_double(p.r_c) << ','
        << format_double(p.R_key) << '\n';
  }
}

inline double parse_number(std::string_view s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) throw InputError(what + ": not a number: '" + std::string(s) + "'");
  return v;
}

/// "start:stop:steps" to `steps` points, linear or logarithmic, strictly
/// increasing.
inline std::vector<double> parse_grid(const std::string& text, bool log_spacing) {
  const auto c1 = text.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c2 == std::string::npos) throw InputError("grid must look like start:stop:steps, got '" + text + "'");
  const double start = parse_number(std::string_view(text).substr(0, c1), "grid start");
  const double stop = parse_number(std::string_view(text).substr(c1 + 1, c2 - c1 - 1), "grid stop");
  const double steps_d = parse_number(std::string_view(text).substr(c2 + 1), "grid steps");
  if (steps_d < 1 || steps_d != std::floor(steps_d) || steps_d > 1e7) throw InputError("grid steps must be a positive integer");
  const auto steps = static_cast<std::size_t>(steps_d);
  if (start < 0.0) throw InputError("grid values must be non-negative");
  if (steps > 1 && !(stop > start)) throw InputError("grid must be increasing (stop > start)");
  if (log_spacing && !(start > 0.0)) throw InputError("logarithmic grid needs start > 0");
  std::vector<double> g(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
    g[i] = log_spacing ? start * std::pow(stop / start, t) : start + (stop - start) * t;
  }
  if (steps > 1) g.back() = stop;
  return g;
}

// ---------------------------------------------------------------------------
// published measurement table
//
// Values are stored as printed, in concise uncertainty notation:
// "2.815(5)" is 2.815 +- 0.005 and "8.2(2)e-6" is 8.2e-6 +- 0.2e-6.
// A bare "0" is an exact zero.

struct PrintedValue {
  double value = 0.0;
  double uncertainty = 0.0;  ///< quoted standard uncertainty
  double resolution = 0.0;   ///< one unit of the last printed digit

  /// Agreement window: quoted uncertainty plus half a unit of the last digit.
  double tolerance() const { return uncertainty + 0.5 * resolution; }
  bool exact_zero() const { return value == 0.0 && uncertainty == 0.0; }
};

inline PrintedValue parse_printed_value(const std::string& text) {
  std::string mantissa = text;
  double scale = 1.0;
  if (const auto e = text.find_first_of("eE"); e != std::string::npos) {
    mantissa = text.substr(0, e);
    scale = std::pow(10.0, parse_number(std::string_view(text).substr(e + 1), "exponent"));
  }
  std::string digits = mantissa;
  std::string unc;
  if (const auto open = mantissa.find('('); open != std::string::npos) {
    const auto close = mantissa.find(')', open);
    if (close == std::string::npos || close != mantissa.size() - 1) throw InputError("bad printed value '" + text + "'");
    digits = mantissa.substr(0, open);
    unc = mantissa.substr(open + 1, close - open - 1);
  }
  PrintedValue pv;
  pv.value = parse_number(digits, "printed value") * scale;
  const auto dot = digits.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(digits.size() - dot - 1);
  if (unc.empty() && pv.value == 0.0) return pv;
  pv.resolution = std::pow(10.0, -decimals) * scale;
  if (!unc.empty()) pv.uncertainty = parse_number(unc, "uncertainty") * pv.resolution;
  return pv;
}

struct Table1Row {
  std::string tau_ns;
  PrintedValue r_c;
  PrintedValue S;
  PrintedValue Q;
  PrintedValue r_dw;
  PrintedValue R_key;
};

inline std::vector<Table1Row> table1_from_json(const Json& j) {
  if (!j.contains("rows") || !j.at("rows").is_array()) throw InputError("table: missing \"rows\" array");
  std::vector<Table1Row> rows;
  for (const Json& r : j.at("rows")) {
    try {
      rows.push_back({r.at("tau_ns").get<std::string>(), parse_printed_value(r.at("r_c").get<std::string>()),
                      parse_printed_value(r.at("S").get<std::string>()), parse_printed_value(r.at("Q").get<std::string>()),
                      parse_printed_value(r.at("r_dw").get<std::string>()),
                      parse_printed_value(r.at("R_key").get<std::string>())});
    } catch (const Json::exception& e) {
      throw InputError(std::string("table row: ") + e.what());
    }
  }
  return rows;
}

inline std::vector<Table1Row> read_table1_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return table1_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

struct Table1Check {
  std::string tau_ns;
  double r_dw = 0.0;    ///< recomputed from printed S, Q
  double R_key = 0.0;   ///< recomputed r_dw times printed r_c
  double r_dw_diff = 0.0;
  double R_key_diff = 0.0;
  bool r_dw_ok = false;
  bool R_key_ok = false;
  bool ok() const { return r_dw_ok && R_key_ok; }
};

inline bool agrees(double computed, const PrintedValue& printed) {
  if (printed.exact_zero()) return computed == 0.0;
  return std::abs(computed - printed.value) <= printed.tolerance();
}

/// Recomputes r_dw and R_key of every row from the printed S, Q and r_c.
inline std::vector<Table1Check> check_table1(const std::vector<Table1Row>& rows) {
  std::vector<Table1Check> out;
  for (const Table1Row& row : rows) {
    Table1Check c;
    c.tau_ns = row.tau_ns;
    c.r_dw = devetak_winter(row.S.value, row.Q.value);
    c.R_key = key_rate(c.r_dw, row.r_c.value);
    c.r_dw_diff = c.r_dw - row.r_dw.value;
    c.R_key_diff = c.R_key - row.R_key.value;
    c.r_dw_ok = agrees(c.r_dw, row.r_dw);
    c.R_key_ok = agrees(c.R_key, row.R_key);
    out.push_back(c);
  }
  return out;
}

}  // namespace spdcqkd
