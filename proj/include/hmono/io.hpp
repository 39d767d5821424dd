#pragma once

// Text formats: complex and boundary-point strings, CSV tables, key = value
// configuration, and the JSON run report.

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rep.hpp"

namespace hmono::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ------------------------------------------------------------- numbers

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_double(const std::string& s) {
  const std::string t = trim(s);
  const std::string l = lower(t);
  if (l == "nan") return NAN;
  if (l == "inf" || l == "+inf") return INFINITY;
  if (l == "-inf") return -INFINITY;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  return v;
}

// "a+bi", "a-bi", "a", "bi", "i", "-i".
inline cplx parse_complex(const std::string& s) {
  std::string t;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw Error(ErrorCode::ParseError, "empty complex number");
  const char* p = t.c_str();
  const char* const end = p + t.size();
  auto bad = [&] { return Error(ErrorCode::ParseError, "not a complex number: '" + s + "'"); };
  auto imag_unit = [&](const char* q, double sign) -> std::optional<double> {
    // bare "i" / "+i" / "-i"
    if (*q == 'i' && q + 1 == end) return sign;
    return std::nullopt;
  };
  if (auto u = imag_unit(p, 1.0)) return {0.0, *u};
  if ((*p == '+' || *p == '-') && p + 1 < end)
    if (auto u = imag_unit(p + 1, *p == '-' ? -1.0 : 1.0)) return {0.0, *u};
  char* q = nullptr;
  const double a = std::strtod(p, &q);
  if (q == p) throw bad();
  if (q == end) return {a, 0.0};
  if (*q == 'i' && q + 1 == end) return {0.0, a};
  if (*q != '+' && *q != '-') throw bad();
  if (auto u = imag_unit(q + 1, *q == '-' ? -1.0 : 1.0)) return {a, *u};
  char* r = nullptr;
  const double b = std::strtod(q, &r);
  if (r == q || *r != 'i' || r + 1 != end) throw bad();
  return {a, b};
}

inline std::string format_complex(cplx z) {
  std::string s = fmt(z.real());
  const double b = z.imag();
  s += (std::signbit(b) ? "-" : "+") + fmt(std::abs(b)) + "i";
  return s;
}

inline BoundaryPoint parse_point(const std::string& s) {
  const std::string l = lower(trim(s));
  if (l == "inf" || l == "infinity" || l == "oo") return BoundaryPoint::infinity();
  return BoundaryPoint(parse_complex(s));
}

inline std::string format_point(const BoundaryPoint& p) {
  return p.is_infinite() ? "inf" : format_complex(p.value());
}

// Comma-separated points; complex entries never contain commas.
inline std::vector<BoundaryPoint> parse_point_list(const std::string& s) {
  std::vector<BoundaryPoint> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_point(item));
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty point list");
  return out;
}

// ----------------------------------------------------------------- CSV

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw Error(ErrorCode::ParseError, "missing column '" + name + "'");
  }
  double number(std::size_t row, const std::string& name) const { return parse_double(rows.at(row).at(column(name))); }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string to_csv(const CsvTable& t) {
  std::string s;
  auto line = [&s](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    s += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return s;
}

inline CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) throw Error(ErrorCode::ParseError, "row width differs from header");
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw Error(ErrorCode::ParseError, "CSV has no header");
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    out << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
}

// Schemas consumed by the plotting scripts.
inline CsvTable locus_csv(const std::vector<LocusPoint>& locus) {
  CsvTable t{{"re_w", "im_w", "re_z", "im_z", "value"}, {}};
  for (const auto& p : locus)
    t.rows.push_back({fmt(p.w.real()), fmt(p.w.imag()), fmt(p.z.real()), fmt(p.z.imag()), fmt(p.value)});
  return t;
}

inline std::vector<LocusPoint> locus_from_csv(const CsvTable& t) {
  std::vector<LocusPoint> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({cplx(t.number(r, "re_w"), t.number(r, "im_w")), cplx(t.number(r, "re_z"), t.number(r, "im_z")),
                   t.number(r, "value")});
  return out;
}

struct NPointRow {
  std::vector<BoundaryPoint> points;
  cplx value;
  double err = 0.0;
};

inline CsvTable npoint_csv(const std::vector<NPointRow>& rows) {
  const std::size_t n = rows.empty() ? 0 : rows.front().points.size();
  CsvTable t;
  for (std::size_t i = 1; i <= n; ++i) t.header.push_back("z" + std::to_string(i));
  for (const char* c : {"re", "im", "err"}) t.header.emplace_back(c);
  for (const auto& r : rows) {
    if (r.points.size() != n) throw Error(ErrorCode::ShapeMismatch, "all n-point rows must have the same n");
    std::vector<std::string> cells;
    for (const auto& p : r.points) cells.push_back(format_point(p));
    cells.push_back(fmt(r.value.real()));
    cells.push_back(fmt(r.value.imag()));
    cells.push_back(fmt(r.err));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline std::vector<NPointRow> npoint_from_csv(const CsvTable& t) {
  std::size_t n = 0;
  while (n < t.header.size() && t.header[n] == "z" + std::to_string(n + 1)) ++n;
  std::vector<NPointRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    NPointRow row;
    for (std::size_t i = 0; i < n; ++i) row.points.push_back(parse_point(t.rows[r][i]));
    row.value = cplx(t.number(r, "re"), t.number(r, "im"));
    row.err = t.number(r, "err");
    out.push_back(std::move(row));
  }
  return out;
}

inline CsvTable boundary_map_csv(const std::vector<ConnectionMapRow>& rows) {
  CsvTable t{{"re_z", "im_z", "re_lambda", "im_lambda", "F"}, {}};
  for (const auto& r : rows)
    t.rows.push_back({fmt(r.z.real()), fmt(r.z.imag()), fmt(r.lambda.real()), fmt(r.lambda.imag()), fmt(r.F)});
  return t;
}

inline std::vector<ConnectionMapRow> boundary_map_from_csv(const CsvTable& t) {
  std::vector<ConnectionMapRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    out.push_back({cplx(t.number(r, "re_z"), t.number(r, "im_z")),
                   cplx(t.number(r, "re_lambda"), t.number(r, "im_lambda")), t.number(r, "F")});
  return out;
}

// Radial profile: column a is the gauge profile K.
inline CsvTable profile_csv(const RadialProfile& prof, std::size_t n, double rho_hi) {
  CsvTable t{{"rho", "h", "a"}, {}};
  for (const auto& r : prof.sample(n, rho_hi)) t.rows.push_back({fmt(r[0]), fmt(r[1]), fmt(r[2])});
  return t;
}

// Physical (not rescaled) solution along its geodesic.
inline CsvTable trajectory_csv(const ScatterSolution& sol, std::size_t n) {
  CsvTable t{{"t", "re_s1", "im_s1", "re_s2", "im_s2", "norm"}, {}};
  const double T = sol.geodesic().T();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = n > 1 ? -T + 2.0 * T * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    const Vec2c v = sol.value(s);
    t.rows.push_back({fmt(s), fmt(v(0).real()), fmt(v(0).imag()), fmt(v(1).real()), fmt(v(1).imag()),
                      fmt(std::exp(sol.log_norm(s)))});
  }
  return t;
}

// ---------------------------------------------------------------- config

enum class FieldKind { Abelian, Hedgehog, FromNahm };

inline FieldKind parse_field_kind(const std::string& s) {
  const std::string l = lower(trim(s));
  if (l == "abelian") return FieldKind::Abelian;
  if (l == "hedgehog") return FieldKind::Hedgehog;
  if (l == "from-nahm") return FieldKind::FromNahm;
  throw Error(ErrorCode::ParseError, "unknown field '" + s + "'");
}

inline std::string to_string(FieldKind k) {
  switch (k) {
    case FieldKind::Abelian: return "abelian";
    case FieldKind::Hedgehog: return "hedgehog";
    case FieldKind::FromNahm: return "from-nahm";
  }
  return "?";
}

struct RunConfig {
  FieldKind field = FieldKind::Hedgehog;
  double mass = 1.0;
  int charge = 1;
  double T = 0.0;  // 0: automatic
  double ode_rtol = 1e-10;
  double ode_atol = 1e-12;
  double fd_step = 1e-3;
  int grid_n = 40;
  double threshold = 1e-3;
  std::uint64_t seed = 1;
  int workers = 1;

  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw Error(ErrorCode::InvalidArgument, what);
    };
    need(mass > 0.0, "mass must be positive");
    need(charge >= 1, "charge must be at least 1");
    need(T >= 0.0, "T must be non-negative (0 = automatic)");
    need(ode_rtol > 0.0 && ode_atol > 0.0, "ODE tolerances must be positive");
    need(fd_step > 0.0, "fd_step must be positive");
    need(grid_n >= 8, "grid_n must be at least 8");
    need(threshold > 0.0, "threshold must be positive");
    need(workers >= 1, "workers must be at least 1");
  }

  void set(const std::string& key, const std::string& value) {
    const std::string k = lower(trim(key));
    const std::string v = trim(value);
    auto integer = [&] {
      const double d = parse_double(v);
      if (d != std::floor(d)) throw Error(ErrorCode::ParseError, "'" + key + "' must be an integer");
      return d;
    };
    if (k == "field") field = parse_field_kind(v);
    else if (k == "mass") mass = parse_double(v);
    else if (k == "charge") charge = static_cast<int>(integer());
    else if (k == "t") T = parse_double(v);
    else if (k == "ode_rtol") ode_rtol = parse_double(v);
    else if (k == "ode_atol") ode_atol = parse_double(v);
    else if (k == "fd_step") fd_step = parse_double(v);
    else if (k == "grid_n") grid_n = static_cast<int>(integer());
    else if (k == "threshold") threshold = parse_double(v);
    else if (k == "seed") seed = static_cast<std::uint64_t>(integer());
    else if (k == "workers") workers = static_cast<int>(integer());
    else throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
  }

  ScatterOptions scatter_options() const {
    ScatterOptions o;
    o.rtol = ode_rtol;
    o.atol = ode_atol;
    o.T = T;
    return o;
  }

  json to_json() const {
    return json{{"field", to_string(field)}, {"mass", mass},       {"charge", charge},   {"T", T},
                {"ode_rtol", ode_rtol},      {"ode_atol", ode_atol}, {"fd_step", fd_step}, {"grid_n", grid_n},
                {"threshold", threshold},    {"seed", seed},        {"workers", workers}};
  }
};

// Applies "key = value" lines; '#' starts a comment.
inline void apply_config_text(RunConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(lineno) + " lacks '='");
    cfg.set(line.substr(0, eq), line.substr(eq + 1));
  }
}

// Defaults, then $MONO_CONFIG if set, then an explicit file.
inline RunConfig load_config(const std::string& explicit_path = "") {
  RunConfig cfg;
  if (const char* env = std::getenv("MONO_CONFIG"); env && *env) apply_config_text(cfg, read_file(env));
  if (!explicit_path.empty()) apply_config_text(cfg, read_file(explicit_path));
  return cfg;
}

// ------------------------------------------------------------------ JSON

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json matrix_json(const MatXc& M) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      rr.push_back(M(i, j).real());
      ii.push_back(M(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"re", re}, {"im", im}};
}

inline MatXc matrix_from_json(const json& j) {
  const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  MatXc M(r, c);
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < c; ++b)
      M(a, b) = cplx(j.at("re").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>(),
                     j.at("im").at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>());
  return M;
}

inline json vector_json(const VecXc& v) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re.push_back(v(i).real());
    im.push_back(v(i).imag());
  }
  return json{{"re", re}, {"im", im}};
}

inline VecXc vector_from_json(const json& j) {
  VecXc v(static_cast<Eigen::Index>(j.at("re").size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = cplx(j.at("re").at(static_cast<std::size_t>(i)).get<double>(), j.at("im").at(static_cast<std::size_t>(i)).get<double>());
  return v;
}

inline json nahm_json(const NahmData& d) {
  json beta = json::object(), gamma = json::object();
  for (const auto& [j, b] : d.beta) beta[std::to_string(j)] = matrix_json(b);
  for (const auto& [j, c] : d.gamma) gamma[std::to_string(j)] = matrix_json(c);
  return json{{"k", d.k}, {"m", d.m.str()}, {"beta", beta}, {"gamma", gamma}, {"v", vector_json(d.v)}};
}

inline NahmData nahm_from_json(const json& j) {
  NahmData d;
  d.k = j.at("k").get<int>();
  d.m = HalfInt::parse(j.at("m").get<std::string>());
  for (const auto& [key, val] : j.at("beta").items()) d.beta[std::stoi(key)] = matrix_from_json(val);
  for (const auto& [key, val] : j.at("gamma").items()) d.gamma[std::stoi(key)] = matrix_from_json(val);
  d.v = vector_from_json(j.at("v"));
  return d;
}

inline json holo_json(const HoloSphere& q) { return json{{"k", q.k}, {"U", matrix_json(q.U)}}; }

inline HoloSphere holo_from_json(const json& j) { return HoloSphere{j.at("k").get<int>(), matrix_from_json(j.at("U"))}; }

inline json tensor_json(const FourPointTensor& t) {
  json bp = json::array();
  for (const auto& b : t.basepoints) bp.push_back(format_point(b));
  return json{{"basepoints", bp}, {"cond", t.cond}, {"rank", t.rank}};
}

// Run report. Every numeric result carries an err field.
struct Report {
  std::string command;
  json params = json::object();
  json results = json::array();
  json diagnostics = json::object();
  json timings = json::object();

  void add_result(json rec) {
    if (!rec.contains("err")) throw Error(ErrorCode::InvalidArgument, "report result lacks an err field");
    results.push_back(std::move(rec));
  }

  json to_json(bool with_timings = true) const {
    json diag = diagnostics;
    if (with_timings) diag["timings"] = timings;
    return json{{"schema_version", kSchemaVersion},
                {"command", command},
                {"params", params},
                {"results", results},
                {"diagnostics", diag}};
  }
};

}  // namespace hmono::io
