// Command-line front end: npoint, scan, boundary, nahm, rep, verify.
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 non-convergence or degenerate data.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmono/verify.hpp"

using namespace hmono;
using io::json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kInvalid = 2, kNonConvergence = 3 };

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::CoincidentEndpoints:
    case ErrorCode::OutOfRange:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::ParseError:
    case ErrorCode::BasePoint:
    case ErrorCode::MismatchedGeodesic:
      return kInvalid;
    default:
      return kNonConvergence;
  }
}

struct Flags {
  std::string config;
  std::optional<std::string> field;
  std::optional<std::string> mass;  // real, or "p/2" for Nahm data
  std::optional<int> charge;
  std::optional<double> T, rtol, atol, fd_step, threshold;
  std::optional<int> grid, workers;
  std::optional<std::uint64_t> seed;
  bool no_timings = false;
  std::string out;
};

io::RunConfig resolve(const Flags& fl) {
  io::RunConfig cfg = io::load_config(fl.config);
  if (fl.field) cfg.set("field", *fl.field);
  if (fl.mass) {
    // "3/2" is accepted anywhere a mass is.
    cfg.mass = fl.mass->find('/') != std::string::npos ? HalfInt::parse(*fl.mass).value() : io::parse_double(*fl.mass);
  }
  if (fl.charge) cfg.charge = *fl.charge;
  if (fl.T) cfg.T = *fl.T;
  if (fl.rtol) cfg.ode_rtol = *fl.rtol;
  if (fl.atol) cfg.ode_atol = *fl.atol;
  if (fl.fd_step) cfg.fd_step = *fl.fd_step;
  if (fl.threshold) cfg.threshold = *fl.threshold;
  if (fl.grid) cfg.grid_n = *fl.grid;
  if (fl.workers) cfg.workers = *fl.workers;
  if (fl.seed) cfg.seed = *fl.seed;
  cfg.validate();
  return cfg;
}

HalfInt half_mass(double m) {
  const double two = 2.0 * m;
  const int t = static_cast<int>(std::lround(two));
  if (std::abs(two - t) > 1e-12 || t % 2 == 0 || t <= 0)
    throw Error(ErrorCode::InvalidArgument, "Nahm data need a half-odd-integer mass");
  return HalfInt{t};
}

MonopoleField make_field(const io::RunConfig& cfg) {
  switch (cfg.field) {
    case io::FieldKind::Abelian: return abelian_field(cfg.mass);
    case io::FieldKind::Hedgehog:
      if (cfg.charge != 1) throw Error(ErrorCode::InvalidArgument, "the built-in bulk field has charge 1");
      return hedgehog_field(cfg.mass);
    case io::FieldKind::FromNahm: break;
  }
  throw Error(ErrorCode::InvalidArgument, "from-nahm has no bulk field; use npoint or rep");
}

// Boundary-side sphere for field = from-nahm.
HoloSphere nahm_sphere(const io::RunConfig& cfg, json* diag = nullptr) {
  NahmSolveOptions o;
  o.workers = static_cast<unsigned>(cfg.workers);
  const auto sol = solve_nahm(cfg.charge, half_mass(cfg.mass), cfg.seed, o);
  if (diag) (*diag)["nahm_residual"] = sol.residual;
  return q_from_monad(monad(sol.data));
}

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void emit(const io::Report& rep, const Flags& fl) { std::cout << rep.to_json(!fl.no_timings).dump(2) << "\n"; }

// ------------------------------------------------------------------ npoint

int cmd_npoint(const Flags& fl, const std::vector<std::string>& tuples, const std::string& profile_out,
               const std::string& traj_out) {
  const Timer timer;
  const io::RunConfig cfg = resolve(fl);
  io::Report rep;
  rep.command = "npoint";
  rep.params = cfg.to_json();
  std::vector<PointTuple> pts;
  for (const auto& t : tuples) pts.push_back({io::parse_point_list(t)});
  rep.params["points"] = tuples;

  std::vector<io::NPointRow> rows;
  bool all_converged = true;
  double err_total = 0.0;
  if (cfg.field == io::FieldKind::FromNahm) {
    const HoloSphere q = nahm_sphere(cfg, &rep.diagnostics);
    for (const auto& t : pts) {
      const cplx v = trace_npoint(q, t);
      rep.add_result({{"points", tuples[rows.size()]}, {"value", io::complex_json(v)}, {"err", 0.0}});
      rows.push_back({t.points, v, 0.0});
    }
  } else {
    const MonopoleField f = make_field(cfg);
    const ScatterOptions opt = cfg.scatter_options();
    const auto vals = parallel_map(pts.size(), static_cast<unsigned>(cfg.workers), [&](std::size_t i) {
      return pts[i].points.size() == 2 ? two_point(f, pts[i].points[0], pts[i].points[1], opt) : n_point(f, pts[i], opt);
    });
    json reductions = json::array();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const auto& v = vals[i];
      rep.add_result({{"points", tuples[i]},
                      {"value", io::complex_json(v.value)},
                      {"err", v.err},
                      {"T", v.T},
                      {"drift", v.drift},
                      {"constancy", v.constancy}});
      if (v.reduced) reductions.push_back({{"points", tuples[i]}, {"effective_n", v.effective_n}});
      all_converged = all_converged && v.drift <= opt.drift_tol;
      err_total += v.err;
      rows.push_back({pts[i].points, v.value, v.err});
    }
    rep.diagnostics["coalescence_reductions"] = reductions;
    if (!profile_out.empty()) {
      if (!f.profile()) throw Error(ErrorCode::InvalidArgument, "this field has no radial profile");
      io::write_file(profile_out, io::to_csv(io::profile_csv(*f.profile(), 401, 10.0)));
    }
    if (!traj_out.empty()) {
      if (pts.empty() || pts[0].points.size() < 2) throw Error(ErrorCode::InvalidArgument, "trajectory needs a geodesic");
      const auto gs = scatter_geodesic(f, pts[0].points[0], pts[0].points[1], auto_truncation(f.mass(), opt), opt);
      io::write_file(traj_out, io::to_csv(io::trajectory_csv(gs.s, 401)));
    }
  }
  rep.diagnostics["err_total"] = err_total;
  rep.diagnostics["converged"] = all_converged;
  if (!fl.out.empty()) {
    bool same_n = true;
    for (const auto& r : rows) same_n = same_n && r.points.size() == rows.front().points.size();
    if (!same_n) throw Error(ErrorCode::InvalidArgument, "CSV output needs tuples of equal length");
    io::write_file(fl.out, io::to_csv(io::npoint_csv(rows)));
  }
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return kOk;
}

// -------------------------------------------------------------------- scan

int cmd_scan(const Flags& fl, int w_grid, double w_half, double z_half, bool fit) {
  const Timer timer;
  const io::RunConfig cfg = resolve(fl);
  if (w_grid < 1) throw Error(ErrorCode::InvalidArgument, "w grid must have at least one point");
  const MonopoleField f = make_field(cfg);
  io::Report rep;
  rep.command = "scan";
  rep.params = cfg.to_json();
  rep.params["w_grid"] = w_grid;
  rep.params["w_half_width"] = w_half;
  rep.params["z_half_width"] = z_half;
  ScanOptions so;
  so.threshold = cfg.threshold;
  so.workers = static_cast<unsigned>(cfg.workers);
  const std::vector<cplx> ws = w_grid == 1 ? std::vector<cplx>{cplx(0.0, 0.0)} : Grid2D::square(w_half, w_grid).points();
  const auto locus = spectral_scan(f, ws, Grid2D::square(z_half, cfg.grid_n), so, cfg.scatter_options());
  for (const auto& p : locus)
    rep.add_result({{"w", io::complex_json(p.w)}, {"z", io::complex_json(p.z)}, {"value", p.value}, {"err", p.value}});
  rep.diagnostics["locus_points"] = locus.size();
  rep.diagnostics["converged"] = true;
  if (fit) {
    const auto sf = fit_spectral_poly(locus, cfg.charge);
    rep.diagnostics["fit"] = {{"k", sf.k}, {"coeffs", io::matrix_json(sf.coeffs)}, {"fit_residual", sf.fit_residual}};
  }
  if (!fl.out.empty()) io::write_file(fl.out, io::to_csv(io::locus_csv(locus)));
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return kOk;
}

// ---------------------------------------------------------------- boundary

int cmd_boundary(const Flags& fl, const std::string& w_str, const std::vector<std::string>& z_strs, double half) {
  const Timer timer;
  const io::RunConfig cfg = resolve(fl);
  const MonopoleField f = make_field(cfg);
  const BoundaryPoint w = io::parse_point(w_str);
  const ScatterOptions opt = cfg.scatter_options();
  io::Report rep;
  rep.command = "boundary";
  rep.params = cfg.to_json();
  rep.params["w"] = w_str;
  bool converged = true;
  for (const auto& zs : z_strs) {
    const BoundaryPoint z = io::parse_point(zs);
    const auto c = lambda_fd(f, w, z, cfg.fd_step, opt);
    const double F = curvature_fd(f, z, w, 5.0 * cfg.fd_step, opt);
    converged = converged && c.converged;
    rep.add_result({{"z", zs}, {"lambda", io::complex_json(c.lambda)}, {"F", F}, {"err", c.err}, {"converged", c.converged}});
  }
  if (!fl.out.empty()) {
    const auto rows = connection_map(f, w, Grid2D::square(half, cfg.grid_n), static_cast<unsigned>(cfg.workers), opt);
    io::write_file(fl.out, io::to_csv(io::boundary_map_csv(rows)));
    rep.diagnostics["map_rows"] = rows.size();
  }
  rep.diagnostics["converged"] = converged;
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return kOk;
}

// -------------------------------------------------------------------- nahm

int cmd_nahm(const Flags& fl, int k, const std::string& mass) {
  const Timer timer;
  io::RunConfig cfg = resolve(fl);
  const HalfInt m = HalfInt::parse(mass);
  io::Report rep;
  rep.command = "nahm";
  rep.params = {{"k", k}, {"m", m.str()}, {"seed", cfg.seed}, {"workers", cfg.workers}};
  NahmSolveOptions o;
  o.workers = static_cast<unsigned>(cfg.workers);
  const auto sol = solve_nahm(k, m, cfg.seed, o);
  const HoloSphere q = q_from_monad(monad(sol.data), true);
  const auto di = degree_info(q);
  rep.add_result({{"data", io::nahm_json(sol.data)},
                  {"residual", sol.residual},
                  {"err", sol.residual},
                  {"restart", sol.restart},
                  {"map", io::holo_json(q)},
                  {"degree", di.degree},
                  {"root_count", di.root_count}});
  rep.diagnostics["converged"] = true;
  if (!fl.out.empty()) io::write_file(fl.out, io::nahm_json(sol.data).dump(2) + "\n");
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return kOk;
}

// --------------------------------------------------------------------- rep

int cmd_rep(const Flags& fl, const std::string& source, const std::vector<std::string>& tuples,
            const std::vector<std::string>& basepoints, const std::string& w_str) {
  const Timer timer;
  const io::RunConfig cfg = resolve(fl);
  io::Report rep;
  rep.command = "rep";
  rep.params = cfg.to_json();
  rep.params["source"] = source;
  HoloSphere q;
  if (source == "identity") {
    q = HoloSphere::identity();
  } else if (source == "veronese") {
    q = HoloSphere::veronese();
  } else if (source == "nahm") {
    q = nahm_sphere(cfg, &rep.diagnostics);
  } else if (source == "scan") {
    const MonopoleField f = make_field(cfg);
    ScanOptions so;
    so.threshold = cfg.threshold;
    so.workers = static_cast<unsigned>(cfg.workers);
    const auto locus = spectral_scan(f, Grid2D::square(1.5, 4).points(), Grid2D::square(2.0, cfg.grid_n), so,
                                     cfg.scatter_options());
    const auto fit = fit_spectral_poly(locus, cfg.charge);
    rep.diagnostics["fit_residual"] = fit.fit_residual;
    q = q_from_spectral(fit);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown source '" + source + "'");
  }
  const auto di = degree_info(q);
  rep.add_result({{"map", io::holo_json(q)},
                  {"degree", di.degree},
                  {"root_count", di.root_count},
                  {"degree_integral", fs_degree_integral(q)},
                  {"err", 0.0}});
  for (const auto& t : tuples)
    rep.add_result({{"points", t}, {"trace", io::complex_json(trace_npoint(q, {io::parse_point_list(t)}))}, {"err", 0.0}});
  if (!basepoints.empty()) {
    std::vector<BoundaryPoint> bp;
    for (const auto& b : basepoints) bp.push_back(io::parse_point(b));
    const FourPointTensor t = four_point_tensor(q, bp);
    rep.diagnostics["four_point_tensor"] = io::tensor_json(t);
  }
  if (!w_str.empty()) {
    const auto s = subalgebra_structure(q, io::parse_point(w_str));
    json table = json::array();
    for (const auto& M : s.table) table.push_back(io::matrix_json(M));
    rep.add_result({{"subalgebra",
                     {{"w", w_str},
                      {"z1", io::format_point(s.z1)},
                      {"z2", io::format_point(s.z2)},
                      {"tau", io::complex_json(s.tau)},
                      {"table", table}}},
                    {"err", s.closure_residual}});
  }
  rep.diagnostics["converged"] = true;
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return kOk;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const Flags& fl, const std::string& suite, std::optional<int> k, std::optional<std::string> mass) {
  const Timer timer;
  const io::RunConfig cfg = resolve(fl);
  io::Report rep;
  rep.command = "verify";
  rep.params = {{"suite", suite}, {"seed", cfg.seed}, {"workers", cfg.workers}};
  bool ok = true;
  int code = kOk;
  if (suite == "nahm" && (k || mass)) {
    // Single solve at the requested (k, m).
    const int kk = k.value_or(1);
    const HalfInt m = HalfInt::parse(mass.value_or("3/2"));
    rep.params["k"] = kk;
    rep.params["m"] = m.str();
    try {
      const auto sol = solve_nahm(kk, m, cfg.seed);
      rep.add_result({{"residual", sol.residual}, {"err", sol.residual}, {"pass", true}});
    } catch (const Error& e) {
      rep.add_result({{"error", std::string(to_string(e.code()))}, {"detail", e.what()}, {"err", 0.0}, {"pass", false}});
      rep.diagnostics["degenerate"] = e.code() == ErrorCode::DegenerateMass;
      std::cerr << e.what() << "\n";
      code = kNonConvergence;
    }
  } else {
    verify::Settings s;
    s.seed = cfg.seed;
    s.workers = static_cast<unsigned>(cfg.workers);
    verify::Context ctx(s);
    for (int id : verify::suite_members(suite)) {
      const auto r = verify::run_criterion(id, ctx);
      std::cerr << r.line() << "\n";
      rep.add_result(r.to_json());
      rep.timings["C" + std::to_string(id) + "_s"] = r.seconds;
      ok = ok && r.pass();
    }
    code = ok ? kOk : kVerifyFailed;
  }
  rep.diagnostics["all_pass"] = ok && code == kOk;
  rep.timings["total_s"] = timer.seconds();
  emit(rep, fl);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic monopole boundary data"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  Flags fl;
  app.add_option("--config", fl.config, "key = value config file (after $MONO_CONFIG)");
  app.add_option("--field", fl.field, "abelian | hedgehog | from-nahm");
  app.add_option("--mass", fl.mass, "monopole mass (real, or p/2)");
  app.add_option("--charge", fl.charge, "monopole charge");
  app.add_option("--T", fl.T, "truncation half-length (0: automatic)");
  app.add_option("--ode-rtol", fl.rtol);
  app.add_option("--ode-atol", fl.atol);
  app.add_option("--fd-step", fl.fd_step);
  app.add_option("--grid", fl.grid, "grid points per side");
  app.add_option("--threshold", fl.threshold, "spectral scan threshold");
  app.add_option("--seed", fl.seed);
  app.add_option("--workers", fl.workers);
  app.add_flag("--no-timings", fl.no_timings, "omit timings from the report");
  app.add_option("--out", fl.out, "output file (CSV, or JSON for nahm)");

  auto* np = app.add_subcommand("npoint", "n-point function of boundary points");
  std::vector<std::string> tuples;
  std::string profile_out, traj_out;
  np->add_option("--points", tuples, "comma-separated points, repeatable; 'inf' for infinity")->required();
  np->add_option("--profile-out", profile_out, "radial profile CSV (rho, h, a)");
  np->add_option("--trajectory-out", traj_out, "decaying solution CSV along the first geodesic");

  auto* sc = app.add_subcommand("scan", "spectral-curve scan");
  int w_grid = 4;
  double w_half = 1.5, z_half = 2.0;
  bool do_fit = false;
  sc->add_option("--w-grid", w_grid, "w points per side (1: w = 0 only)");
  sc->add_option("--w-half-width", w_half);
  sc->add_option("--z-half-width", z_half);
  sc->add_flag("--fit", do_fit, "fit a bidegree-(k,k) polynomial to the locus");

  auto* bd = app.add_subcommand("boundary", "boundary connection and curvature");
  std::string w_str = "0";
  std::vector<std::string> z_strs;
  double b_half = 2.0;
  bd->add_option("--w", w_str, "reference point");
  bd->add_option("--z", z_strs, "evaluation points");
  bd->add_option("--half-width", b_half, "half-width of the --out map grid");

  auto* nh = app.add_subcommand("nahm", "solve the discrete Nahm equations");
  int nk = 1;
  std::string nm = "3/2";
  nh->add_option("--k", nk, "charge");
  nh->add_option("--m", nm, "half-integer mass, e.g. 3/2");

  auto* rp = app.add_subcommand("rep", "holomorphic sphere and trace representation");
  std::string source = "identity", sub_w;
  std::vector<std::string> rtuples, bpts;
  rp->add_option("--source", source, "identity | veronese | nahm | scan");
  rp->add_option("--points", rtuples, "trace n-point tuples, repeatable");
  rp->add_option("--basepoints", bpts, "4-point tensor base points");
  rp->add_option("--subalgebra-w", sub_w, "k = 2 subalgebra at this w");

  auto* vf = app.add_subcommand("verify", "acceptance suites");
  std::string suite = "all";
  std::optional<int> vk;
  std::optional<std::string> vmass;
  vf->add_option("suite", suite, "all | scatter | npoint | boundary | nahm | rep");
  vf->add_option("--k", vk, "nahm suite: single solve at this charge");
  vf->add_option("--m", vmass, "nahm suite: single solve at this mass (p/2 or decimal)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  try {
    if (*np) return cmd_npoint(fl, tuples, profile_out, traj_out);
    if (*sc) return cmd_scan(fl, w_grid, w_half, z_half, do_fit);
    if (*bd) return cmd_boundary(fl, w_str, z_strs, b_half);
    if (*nh) return cmd_nahm(fl, nk, nm);
    if (*rp) return cmd_rep(fl, source, rtuples, bpts, sub_w);
    if (*vf) {
      // "--mass 0.5" is accepted as an alias for the nahm suite's --m.
      if (!vmass && fl.mass && suite == "nahm") vmass = fl.mass;
      if (vmass && vmass->find('/') == std::string::npos) vmass = half_mass(io::parse_double(*vmass)).str();
      return cmd_verify(fl, suite, vk, vmass);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kInvalid;
}
