#pragma once

// Acceptance checks shared by the test binary and the `verify` command.

#include <chrono>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "io.hpp"

namespace hmono::verify {

struct Check {
  std::string label;
  double measured = 0.0;
  double limit = 0.0;
  bool upper = true;  // measured < limit (else measured > limit)
  bool pass() const { return std::isfinite(measured) && (upper ? measured < limit : measured > limit); }
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  std::string error;  // set when the check itself threw
  double seconds = 0.0;
  double budget = 0.0;

  bool pass() const {
    if (!error.empty()) return false;
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }

  std::string line() const {
    std::ostringstream s;
    s.precision(8);
    s << (pass() ? "PASS" : "FAIL") << " C" << id << " " << title << ":";
    for (const auto& c : checks)
      s << " " << c.label << "=" << c.measured << (c.upper ? " (<" : " (>") << c.limit << ")";
    if (!error.empty()) s << " error: " << error;
    s << " [" << std::fixed << std::setprecision(2) << seconds << " s]";
    return s.str();
  }

  io::json to_json() const {
    io::json checks_j = io::json::array();
    for (const auto& c : checks)
      if (c.label != "seconds")  // timings live in the report diagnostics
        checks_j.push_back({{"label", c.label}, {"measured", c.measured}, {"limit", c.limit},
                          {"relation", c.upper ? "<" : ">"}, {"pass", c.pass()}, {"err", 0.0}});
    io::json j{{"criterion", id}, {"title", title}, {"pass", pass()}, {"checks", checks_j}, {"err", 0.0}};
    if (!error.empty()) j["error"] = error;
    return j;
  }
};

struct Settings {
  std::uint64_t seed = 20240611;
  unsigned workers = 1;
  double mass = 1.0;
  int scan_grid = 24;     // z-grid points per side for the spectral scan
  int scan_w_grid = 4;    // w-grid points per side
};

// Shared, lazily built state: the hedgehog field and its spectral data.
class Context {
 public:
  explicit Context(Settings s = {}) : s_(s) {}

  const Settings& settings() const { return s_; }
  std::mt19937_64 rng(std::uint64_t stream) const { return std::mt19937_64(detail::stream_seed(s_.seed, stream)); }

  const MonopoleField& hedgehog() {
    if (!hedgehog_) hedgehog_ = std::make_unique<MonopoleField>(hedgehog_field(s_.mass));
    return *hedgehog_;
  }

  const std::vector<LocusPoint>& locus() {
    if (!locus_) {
      std::vector<cplx> ws = Grid2D::square(1.5, s_.scan_w_grid).points();
      ScanOptions so;
      so.workers = s_.workers;
      locus_ = std::make_unique<std::vector<LocusPoint>>(
          spectral_scan(hedgehog(), ws, Grid2D::square(2.0, s_.scan_grid), so));
    }
    return *locus_;
  }

  const SpectralCurveFit& fit() {
    if (!fit_) fit_ = std::make_unique<SpectralCurveFit>(fit_spectral_poly(locus(), 1));
    return *fit_;
  }

  const HoloSphere& q_fit() {
    if (!q_) q_ = std::make_unique<HoloSphere>(q_from_spectral(fit()));
    return *q_;
  }

 private:
  Settings s_;
  std::unique_ptr<MonopoleField> hedgehog_;
  std::unique_ptr<std::vector<LocusPoint>> locus_;
  std::unique_ptr<SpectralCurveFit> fit_;
  std::unique_ptr<HoloSphere> q_;
};

// ------------------------------------------------------------- sampling

inline BoundaryPoint random_boundary_point(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec3 u(N(rng), N(rng), N(rng));
  return from_sphere(u.normalized());
}

// n points with pairwise chordal separation >= sep.
inline std::vector<BoundaryPoint> random_separated(std::mt19937_64& rng, std::size_t n, double sep) {
  std::vector<BoundaryPoint> pts;
  while (pts.size() < n) {
    const BoundaryPoint p = random_boundary_point(rng);
    bool ok = !p.is_infinite();
    for (const auto& q : pts) ok = ok && chordal_distance(p, q) >= sep;
    if (ok) pts.push_back(p);
  }
  return pts;
}

inline cplx random_disc(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  return std::polar(radius * std::sqrt(U(rng)), 2.0 * M_PI * U(rng));
}

inline MatXc random_complex(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatXc M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = cplx(N(rng), N(rng));
  return M;
}

// ------------------------------------------------------------ criteria

inline CriterionResult trivial_field(Context& ctx) {
  CriterionResult r{1, "trivial-field exactness", {}, {}, 0.0, 60.0};
  const MonopoleField f = abelian_field(ctx.settings().mass);
  auto rng = ctx.rng(1);
  std::vector<PointTuple> tuples;
  for (int i = 0; i < 50; ++i) tuples.push_back({random_separated(rng, static_cast<std::size_t>(2 + i % 3), 0.05)});
  const auto vals = parallel_map(tuples.size(), ctx.settings().workers, [&](std::size_t i) { return n_point(f, tuples[i]); });
  double worst = 0.0;
  for (const auto& v : vals) worst = std::max(worst, std::abs(v.value - 1.0));
  r.checks.push_back({"max|v-1|", worst, 1e-6});
  return r;
}

inline CriterionResult integration_soundness(Context& ctx) {
  CriterionResult r{2, "integration soundness", {}, {}, 0.0, 120.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(2);
  std::vector<std::vector<BoundaryPoint>> ends;
  for (int i = 0; i < 50; ++i) ends.push_back(random_separated(rng, 2, 0.1));
  const ScatterOptions opt;
  const double T = auto_truncation(f.mass(), opt);
  struct Out {
    double constancy, drift;
  };
  const auto outs = parallel_map(ends.size(), ctx.settings().workers, [&](std::size_t i) {
    const auto a = scatter_geodesic(f, ends[i][0], ends[i][1], T, opt);
    const auto b = scatter_geodesic(f, ends[i][0], ends[i][1], 1.25 * T, opt);
    const double scale = std::max(std::abs(a.pair.value), 1e-3);
    return Out{a.pair.constancy_dev / scale, std::abs(std::abs(a.pair.value) - std::abs(b.pair.value))};
  });
  double c = 0.0, d = 0.0;
  for (const auto& o : outs) c = std::max(c, o.constancy), d = std::max(d, o.drift);
  r.checks.push_back({"constancy_rel", c, 1e-6});
  r.checks.push_back({"T_drift", d, 1e-6});
  return r;
}

inline CriterionResult solution_validity(Context& ctx) {
  CriterionResult r{3, "built-in solution validity", {}, {}, 0.0, 60.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(3);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec3> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(Vec3(N(rng), N(rng), N(rng)).normalized() * 0.95 * std::cbrt(U(rng)));
  const auto res = parallel_map(xs.size(), ctx.settings().workers,
                                [&](std::size_t i) { return bogomolny_residual(f, BulkPoint(xs[i])); });
  double worst = 0.0;
  for (double v : res) worst = std::max(worst, v);
  // |Phi| against m, including points close to the boundary.
  double phi_max = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double rad = 1.0 - std::pow(10.0, -4.0 * U(rng));
    phi_max = std::max(phi_max, op_norm(f(Vec3(N(rng), N(rng), N(rng)).normalized() * rad).Phi));
  }
  r.checks.push_back({"max_residual", worst, 1e-5});
  r.checks.push_back({"max|Phi|/m", phi_max / f.mass(), 1.0});
  return r;
}

inline CriterionResult strict_bound(Context& ctx) {
  CriterionResult r{4, "strict bound", {}, {}, 0.0, 180.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(4);
  std::vector<PointTuple> tuples;
  for (int i = 0; i < 200; ++i) tuples.push_back({random_separated(rng, static_cast<std::size_t>(2 + i % 3), 0.25)});
  const auto vals = parallel_map(tuples.size(), ctx.settings().workers, [&](std::size_t i) { return n_point(f, tuples[i]); });
  double worst = 0.0;
  for (const auto& v : vals) worst = std::max(worst, std::abs(v.value));
  r.checks.push_back({"max|n_point|", worst, 1.0 - 1e-3});
  return r;
}

inline CriterionResult coalescence(Context& ctx) {
  CriterionResult r{5, "coalescence", {}, {}, 0.0, 60.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(5);
  std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
  double worst_ratio = 0.0, worst_c = 0.0;
  for (int i = 0; i < 10; ++i) {
    const cplx z = random_disc(rng, 2.0);
    const cplx dir = std::polar(1.0, U(rng));
    std::vector<double> C;
    for (double eps : {0.1, 0.05, 0.025}) C.push_back(std::abs(two_point(f, z, z + eps * dir).value - 1.0) / eps);
    for (double c : C) worst_ratio = std::max(worst_ratio, c / C[0]);
    worst_c = std::max(worst_c, C[0]);
  }
  r.checks.push_back({"max C(eps)/C(0.1)", worst_ratio, 2.0 + 1e-12});
  r.checks.push_back({"max C(0.1)", worst_c, 1e3});
  return r;
}

inline CriterionResult gauge_invariance(Context& ctx) {
  CriterionResult r{6, "gauge invariance", {}, {}, 0.0, 120.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(6);
  std::normal_distribution<double> N(0.0, 1.0);
  const Vec3 axis(N(rng), N(rng), N(rng));
  const Vec3 a(N(rng), N(rng), N(rng));
  const double c2 = 0.6;
  auto theta = [a, c2](const Vec3& x) { return a.dot(x) + c2 * x(1) * x(2) + 0.5 * x.squaredNorm() + 0.3; };
  auto grad = [a, c2](const Vec3& x) { return Vec3(a(0) + x(0), a(1) + c2 * x(2) + x(1), a(2) + c2 * x(1) + x(2)); };
  const MonopoleField g = gauge_transform(f, exp_gauge(axis, theta, grad));
  std::vector<PointTuple> tuples;
  for (int i = 0; i < 20; ++i) tuples.push_back({random_separated(rng, static_cast<std::size_t>(2 + i % 3), 0.1)});
  const auto d = parallel_map(tuples.size(), ctx.settings().workers, [&](std::size_t i) {
    return std::abs(n_point(f, tuples[i]).value - n_point(g, tuples[i]).value);
  });
  double worst = 0.0;
  for (double v : d) worst = std::max(worst, v);
  r.checks.push_back({"max|delta|", worst, 1e-5});
  return r;
}

inline CriterionResult spectral_curve(Context& ctx) {
  CriterionResult r{7, "spectral curve", {}, {}, 0.0, 180.0};
  const auto& locus = ctx.locus();
  double dist = locus.empty() ? INFINITY : 0.0;
  for (const auto& p : locus) dist = std::max(dist, std::abs(p.z - p.w));
  const auto& fit = ctx.fit();
  MatXc e = MatXc::Zero(2, 2);
  e(1, 0) = 1.0 / std::sqrt(2.0);
  e(0, 1) = -1.0 / std::sqrt(2.0);
  const double mass = std::norm((e.conjugate().cwiseProduct(fit.coeffs)).sum()) / fit.coeffs.squaredNorm();
  const int nw = ctx.settings().scan_w_grid * ctx.settings().scan_w_grid;
  r.checks.push_back({"locus_points", static_cast<double>(locus.size()), nw - 0.5, false});
  r.checks.push_back({"max|z-w|", dist, 0.05});
  r.checks.push_back({"(w-z)_mass", mass, 0.99, false});
  return r;
}

inline CriterionResult holography(Context& ctx) {
  CriterionResult r{8, "holography consistency", {}, {}, 0.0, 120.0};
  const MonopoleField& f = ctx.hedgehog();
  const HoloSphere& q = ctx.q_fit();
  auto rng = ctx.rng(8);
  std::vector<PointTuple> tuples;
  for (int i = 0; i < 100; ++i) tuples.push_back({random_separated(rng, i < 50 ? 2 : 3, 0.05)});
  const auto d = parallel_map(tuples.size(), ctx.settings().workers, [&](std::size_t i) {
    return std::abs(n_point(f, tuples[i]).value - trace_npoint(q, tuples[i]));
  });
  double d2 = 0.0, d3 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (i < 50 ? d2 : d3) = std::max(i < 50 ? d2 : d3, d[i]);
  r.checks.push_back({"max_2pt_dev", d2, 1e-2});
  r.checks.push_back({"max_3pt_dev", d3, 2e-2});
  return r;
}

inline CriterionResult boundary_connection(Context& ctx) {
  CriterionResult r{9, "boundary connection", {}, {}, 0.0, 180.0};
  const MonopoleField& f = ctx.hedgehog();
  const HoloSphere& q = ctx.q_fit();
  auto rng = ctx.rng(9);
  const unsigned W = ctx.settings().workers;

  std::vector<cplx> ws;
  for (int i = 0; i < 5; ++i) ws.push_back(random_disc(rng, 1.5));
  const auto lam = parallel_map(ws.size(), W, [&](std::size_t i) { return std::abs(lambda_fd(f, ws[i], ws[i]).lambda); });
  double lam_max = 0.0;
  for (double v : lam) lam_max = std::max(lam_max, v);

  const std::array<cplx, 3> wset{cplx(0.3, 0.0), cplx(-0.2, 0.4), cplx(0.0, -0.5)};
  std::vector<cplx> zs;
  for (int i = 0; i < 5; ++i) zs.push_back(random_disc(rng, 1.0));
  const auto spread = parallel_map(zs.size(), W, [&](std::size_t i) {
    double lo = INFINITY, hi = -INFINITY;
    for (cplx w : wset) {
      const double F = curvature_fd(f, zs[i], w);
      lo = std::min(lo, F);
      hi = std::max(hi, F);
    }
    return hi - lo;
  });
  double spread_max = 0.0;
  for (double v : spread) spread_max = std::max(spread_max, v);

  std::vector<cplx> zc;
  for (int i = 0; i < 20; ++i) zc.push_back(random_disc(rng, 2.0));
  const auto rel = parallel_map(zc.size(), W, [&](std::size_t i) {
    const double F = curvature_fd(f, zc[i], cplx(0.3, 0.0));
    const double kappa = fs_curvature(q, zc[i]);
    return std::abs(F + kappa) / std::abs(kappa);
  });
  double rel_max = 0.0;
  for (double v : rel) rel_max = std::max(rel_max, v);

  const double deg = fs_degree_integral(q);
  r.checks.push_back({"max|lambda(w,w)|", lam_max, 1e-3});
  r.checks.push_back({"F_w_spread", spread_max, 1e-3});
  r.checks.push_back({"F_vs_-kappa_rel", rel_max, 2e-2});
  r.checks.push_back({"|deg_int-1|", std::abs(deg - 1.0), 2e-2});
  return r;
}

inline CriterionResult linear_algebra(Context& ctx) {
  CriterionResult r{10, "linear-algebra identities", {}, {}, 0.0, 60.0};
  auto rng = ctx.rng(10);
  double worst1 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + i % 6;
    const VecXc u = random_complex(rng, n, 1), v = random_complex(rng, n, 1);
    const auto [a, b] = rank_one_det(u, v);
    worst1 = std::max(worst1, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  double worst2 = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int k = 1 + i % 3;
    const MonadData md{random_complex(rng, k, k), random_complex(rng, k, 1)};
    const cplx w = random_disc(rng, 3.0), z = random_disc(rng, 3.0);
    const VecXc bw = beta_map(md, antipode(BoundaryPoint(w))), bz = beta_map(md, z);
    const double scale = bw.norm() * bz.norm();
    worst2 = std::max(worst2, std::abs(spectral_det(md, w, z) - herm(bw, bz)) / scale);
  }
  r.checks.push_back({"rank_one_rel", worst1, 1e-12});
  r.checks.push_back({"spectral_det_rel", worst2, 1e-10});
  return r;
}

inline CriterionResult nahm_solve(Context& ctx) {
  CriterionResult r{11, "discrete Nahm solve", {}, {}, 0.0, 120.0};
  auto rng = ctx.rng(11);
  NahmSolveOptions o;
  o.workers = ctx.settings().workers;
  for (int k : {1, 2}) {
    const auto sol = solve_nahm(k, HalfInt{3}, ctx.settings().seed, o);
    double inv = 0.0;
    for (int t = 0; t < 10; ++t)
      inv = std::max(inv, std::abs(nahm_residual(gauge_act(sol.data, random_gauge_tuple(k, HalfInt{3}, rng))) - sol.residual));
    r.checks.push_back({"residual_k" + std::to_string(k), sol.residual, 1e-8});
    r.checks.push_back({"gauge_dev_k" + std::to_string(k), inv, 1e-10});
  }
  double degenerate = 0.0;
  try {
    solve_nahm(1, HalfInt{1}, ctx.settings().seed, o);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateMass) degenerate = 1.0;
  }
  r.checks.push_back({"m=1/2_degenerate_reported", degenerate, 0.5, false});
  return r;
}

// Base points for the 4-point tensor: candidate sets of k+1 spread points,
// taking the best conditioned.
inline FourPointTensor spread_tensor(const HoloSphere& q) {
  const int n = q.k + 1;
  std::optional<FourPointTensor> best;
  for (double radius : {0.5, 1.0, 2.0})
    for (double phase : {0.1, 0.7}) {
      std::vector<BoundaryPoint> bp;
      for (int i = 0; i < n; ++i) bp.emplace_back(std::polar(radius, phase + 2.0 * M_PI * i / n));
      try {
        auto t = four_point_tensor(q, bp);
        if (!best || t.cond < best->cond) best = std::move(t);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateBasepoints && e.code() != ErrorCode::BasePoint) throw;
      }
    }
  if (!best) throw Error(ErrorCode::DegenerateBasepoints, "no candidate base-point set is well conditioned");
  return *best;
}

inline CriterionResult four_point(Context& ctx) {
  CriterionResult r{12, "4-point reconstruction", {}, {}, 0.0, 60.0};
  auto rng = ctx.rng(12);
  for (int k : {1, 2}) {
    const HoloSphere q{k, random_complex(rng, k + 1, k + 1)};
    const FourPointTensor t = spread_tensor(q);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const auto wz = random_separated(rng, 2, 0.05);
      worst = std::max(worst, std::abs(four_point_reconstruct(q, t, wz[0], wz[1]) - trace_npoint(q, {wz})));
    }
    r.checks.push_back({"max_err_k" + std::to_string(k), worst, 1e-8});
  }
  return r;
}

inline CriterionResult positivity(Context& ctx) {
  CriterionResult r{13, "positivity / Gram rank", {}, {}, 0.0, 60.0};
  const MonopoleField& f = ctx.hedgehog();
  auto rng = ctx.rng(13);
  const auto pts = random_separated(rng, 12, 0.05);
  const GramResult g = gram_matrix(f, pts, {}, ctx.settings().workers);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.M);
  const Eigen::VectorXd lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) rank += lam(i) > 1e-6 * top;
  r.checks.push_back({"min_eigenvalue", lam.minCoeff(), -1e-8, false});
  r.checks.push_back({"rank", static_cast<double>(rank), (f.charge() + 1) * (f.charge() + 1) + 0.5});
  return r;
}

// --------------------------------------------------------------- suites

using Criterion = std::function<CriterionResult(Context&)>;

inline const std::vector<std::pair<int, Criterion>>& all_criteria() {
  static const std::vector<std::pair<int, Criterion>> v{
      {1, trivial_field},      {2, integration_soundness}, {3, solution_validity}, {4, strict_bound},
      {5, coalescence},        {6, gauge_invariance},      {7, spectral_curve},    {8, holography},
      {9, boundary_connection}, {10, linear_algebra},      {11, nahm_solve},       {12, four_point},
      {13, positivity}};
  return v;
}

inline std::vector<int> suite_members(const std::string& suite) {
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  if (suite == "scatter") return {1, 2, 3};
  if (suite == "npoint") return {4, 5, 6, 13};
  if (suite == "boundary") return {7, 9};
  if (suite == "nahm") return {10, 11};
  if (suite == "rep") return {8, 12};
  throw Error(ErrorCode::InvalidArgument, "unknown suite '" + suite + "'");
}

inline CriterionResult run_criterion(int id, Context& ctx) {
  for (const auto& [cid, fn] : all_criteria()) {
    if (cid != id) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn(ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.budget > 0.0) r.checks.push_back({"seconds", r.seconds, r.budget});
    return r;
  }
  throw Error(ErrorCode::InvalidArgument, "no criterion " + std::to_string(id));
}

}  // namespace hmono::verify
