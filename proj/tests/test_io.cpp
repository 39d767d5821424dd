#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>

#include <hmono/io.hpp>

using namespace hmono;
using namespace hmono::io;

namespace {

std::string temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hmono_io_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Io, DoubleRoundTrip) {
  std::mt19937_64 rng(91);
  std::normal_distribution<double> N(0.0, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double x = N(rng);
    EXPECT_EQ(parse_double(fmt(x)), x);
  }
  EXPECT_TRUE(std::isnan(parse_double(fmt(NAN))));
  EXPECT_EQ(parse_double(fmt(INFINITY)), INFINITY);
  EXPECT_EQ(parse_double(" -inf "), -INFINITY);
  EXPECT_EQ(code_of([] { parse_double("1.5x"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_double(""); }), ErrorCode::ParseError);
}

TEST(Io, ComplexForms) {
  EXPECT_EQ(parse_complex("1+2i"), cplx(1, 2));
  EXPECT_EQ(parse_complex("1 - 2i"), cplx(1, -2));
  EXPECT_EQ(parse_complex("-3"), cplx(-3, 0));
  EXPECT_EQ(parse_complex("2.5i"), cplx(0, 2.5));
  EXPECT_EQ(parse_complex("-2i"), cplx(0, -2));
  EXPECT_EQ(parse_complex("i"), cplx(0, 1));
  EXPECT_EQ(parse_complex("-i"), cplx(0, -1));
  EXPECT_EQ(parse_complex("0.5-i"), cplx(0.5, -1));
  EXPECT_EQ(parse_complex("1e-3+1e2i"), cplx(1e-3, 1e2));
  for (const char* bad : {"", "abc", "1+2", "1+2j", "i2", "1++2i"})
    EXPECT_EQ(code_of([&] { parse_complex(bad); }), ErrorCode::ParseError) << bad;
}

TEST(Io, ComplexFormatRoundTrip) {
  for (cplx z : {cplx(0.1, -0.2), cplx(-3, 0), cplx(0, 7), cplx(1e-300, -1e300)})
    EXPECT_EQ(parse_complex(format_complex(z)), z);
}

TEST(Io, Points) {
  EXPECT_TRUE(parse_point("inf").is_infinite());
  EXPECT_TRUE(parse_point(" Infinity").is_infinite());
  EXPECT_TRUE(parse_point("oo").is_infinite());
  EXPECT_EQ(format_point(BoundaryPoint::infinity()), "inf");
  EXPECT_EQ(parse_point("1-i").value(), cplx(1, -1));
  const auto pts = parse_point_list("0, 1+i,inf");
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[1].value(), cplx(1, 1));
  EXPECT_TRUE(pts[2].is_infinite());
  EXPECT_EQ(code_of([] { parse_point_list(""); }), ErrorCode::ParseError);
}

TEST(Io, CsvRoundTrip) {
  EXPECT_EQ(split_csv_line("a, b ,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(split_csv_line("a,"), (std::vector<std::string>{"a", ""}));
  const CsvTable t{{"x", "y"}, {{"1", "2"}, {"3", "4"}}};
  const std::string text = to_csv(t);
  EXPECT_EQ(text, "x,y\n1,2\n3,4\n");
  const CsvTable back = parse_csv("x,y\r\n1,2\n\n3,4\n");
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.number(1, "y"), 4.0);
  EXPECT_EQ(code_of([&] { back.column("z"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("x,y\n1\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_csv("\n\n"); }), ErrorCode::ParseError);
}

TEST(Io, LocusSchema) {
  const std::vector<LocusPoint> locus{{cplx(0.1, 0.2), cplx(0.3, -0.4), 1e-5}, {cplx(-1, 0), cplx(2, 1), 0.0}};
  const CsvTable t = locus_csv(locus);
  EXPECT_EQ(t.header, (std::vector<std::string>{"re_w", "im_w", "re_z", "im_z", "value"}));
  const auto back = locus_from_csv(parse_csv(to_csv(t)));
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].w, locus[i].w);
    EXPECT_EQ(back[i].z, locus[i].z);
    EXPECT_EQ(back[i].value, locus[i].value);
  }
}

TEST(Io, NPointSchema) {
  const std::vector<NPointRow> rows{{{0.0, BoundaryPoint::infinity(), cplx(1, 1)}, cplx(0.25, -0.5), 1e-9},
                                    {{1.0, I, 2.0 * I}, cplx(0.45, -0.15), 2e-9}};
  const CsvTable t = npoint_csv(rows);
  EXPECT_EQ(t.header, (std::vector<std::string>{"z1", "z2", "z3", "re", "im", "err"}));
  const auto back = npoint_from_csv(parse_csv(to_csv(t)));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_TRUE(back[0].points[1].is_infinite());
  EXPECT_EQ(back[1].points[2].value(), cplx(0, 2));
  EXPECT_EQ(back[1].value, rows[1].value);
  EXPECT_EQ(back[0].err, 1e-9);
  EXPECT_EQ(code_of([&] { npoint_csv({rows[0], NPointRow{{0.0}, 1.0, 0.0}}); }), ErrorCode::ShapeMismatch);
}

TEST(Io, BoundaryMapSchema) {
  const std::vector<ConnectionMapRow> rows{{cplx(0.5, -0.5), cplx(-0.1, 0.02), -0.44}};
  const CsvTable t = boundary_map_csv(rows);
  EXPECT_EQ(t.header, (std::vector<std::string>{"re_z", "im_z", "re_lambda", "im_lambda", "F"}));
  const auto back = boundary_map_from_csv(parse_csv(to_csv(t)));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].z, rows[0].z);
  EXPECT_EQ(back[0].lambda, rows[0].lambda);
  EXPECT_EQ(back[0].F, rows[0].F);
}

TEST(Io, ProfileSchema) {
  const RadialProfile prof(1.0);
  const CsvTable t = profile_csv(prof, 11, 5.0);
  EXPECT_EQ(t.header, (std::vector<std::string>{"rho", "h", "a"}));
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_NEAR(t.number(0, "h"), 0.0, 1e-8);
  EXPECT_NEAR(t.number(0, "a"), 1.0, 1e-8);
}

TEST(Io, FieldKinds) {
  for (FieldKind k : {FieldKind::Abelian, FieldKind::Hedgehog, FieldKind::FromNahm})
    EXPECT_EQ(parse_field_kind(to_string(k)), k);
  EXPECT_EQ(parse_field_kind(" Hedgehog "), FieldKind::Hedgehog);
  EXPECT_EQ(code_of([] { parse_field_kind("dyon"); }), ErrorCode::ParseError);
}

TEST(Io, RunConfigSetAndValidate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  c.set("mass", "2.5");
  c.set(" Charge ", " 3 ");
  c.set("T", "12");
  c.set("field", "abelian");
  c.set("seed", "77");
  EXPECT_EQ(c.mass, 2.5);
  EXPECT_EQ(c.charge, 3);
  EXPECT_EQ(c.T, 12.0);
  EXPECT_EQ(c.field, FieldKind::Abelian);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.scatter_options().T, 12.0);
  EXPECT_EQ(code_of([&] { c.set("colour", "red"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { c.set("charge", "1.5"); }), ErrorCode::ParseError);
  c.mass = -1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c.mass = 1.0;
  c.grid_n = 4;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  const json j = RunConfig{}.to_json();
  EXPECT_EQ(j.at("grid_n"), 40);
  EXPECT_EQ(j.at("field"), "hedgehog");
}

TEST(Io, ConfigTextAndLayering) {
  RunConfig c;
  apply_config_text(c, "# comment\nmass = 0.5  # trailing\n\n workers=2\n");
  EXPECT_EQ(c.mass, 0.5);
  EXPECT_EQ(c.workers, 2);
  EXPECT_EQ(code_of([&] { apply_config_text(c, "mass 0.5\n"); }), ErrorCode::ParseError);

  const std::string env_file = temp_path("env.cfg"), cli_file = temp_path("cli.cfg");
  write_file(env_file, "mass = 3\ncharge = 2\n");
  write_file(cli_file, "charge = 4\n");
  EXPECT_EQ(read_file(cli_file), "charge = 4\n");
  ::setenv("MONO_CONFIG", env_file.c_str(), 1);
  const RunConfig from_env = load_config();
  EXPECT_EQ(from_env.mass, 3.0);
  EXPECT_EQ(from_env.charge, 2);
  const RunConfig both = load_config(cli_file);
  EXPECT_EQ(both.mass, 3.0);
  EXPECT_EQ(both.charge, 4);
  ::unsetenv("MONO_CONFIG");
  EXPECT_EQ(load_config().mass, 1.0);
  EXPECT_EQ(code_of([] { read_file("/nonexistent/hmono.cfg"); }), ErrorCode::InvalidArgument);
}

TEST(Io, MatrixAndVectorJson) {
  std::mt19937_64 rng(92);
  std::normal_distribution<double> N(0.0, 1.0);
  MatXc M(2, 3);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = cplx(N(rng), N(rng));
  EXPECT_EQ(matrix_from_json(json::parse(matrix_json(M).dump())), M);
  const VecXc v = M.row(0).transpose();
  EXPECT_EQ(vector_from_json(json::parse(vector_json(v).dump())), v);
  EXPECT_EQ(complex_json(cplx(1, -2)).at("im"), -2.0);
}

TEST(Io, NahmJsonRoundTrip) {
  std::mt19937_64 rng(93);
  const NahmData d = random_nahm_data(2, HalfInt::parse("5/2"), rng);
  const json j = json::parse(nahm_json(d).dump());
  EXPECT_EQ(j.at("m"), "5/2");
  const NahmData e = nahm_from_json(j);
  EXPECT_EQ(e.k, d.k);
  EXPECT_EQ(e.m.str(), d.m.str());
  EXPECT_EQ(e.beta.size(), d.beta.size());
  EXPECT_EQ(e.gamma.size(), d.gamma.size());
  for (const auto& [idx, b] : d.beta) EXPECT_EQ(e.beta.at(idx), b);
  for (const auto& [idx, c] : d.gamma) EXPECT_EQ(e.gamma.at(idx), c);
  EXPECT_EQ(e.v, d.v);
}

TEST(Io, HoloAndTensorJson) {
  const HoloSphere q = HoloSphere::veronese();
  const HoloSphere r = holo_from_json(json::parse(holo_json(q).dump()));
  EXPECT_EQ(r.k, 2);
  EXPECT_EQ(r.U, q.U);
  const FourPointTensor t = four_point_tensor(HoloSphere::identity(), {0.0, 1.0});
  const json tj = tensor_json(t);
  EXPECT_EQ(tj.at("basepoints").size(), 2u);
  EXPECT_EQ(tj.at("rank"), 4);
}

TEST(Io, ReportShape) {
  Report rep;
  rep.command = "two-point";
  rep.params["mass"] = 1.0;
  rep.add_result(json{{"value", 0.5}, {"err", 1e-9}});
  EXPECT_EQ(code_of([&] { rep.add_result(json{{"value", 0.5}}); }), ErrorCode::InvalidArgument);
  rep.timings["total_s"] = 0.1;
  const json a = rep.to_json();
  EXPECT_EQ(a.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(a.at("results").size(), 1u);
  EXPECT_TRUE(a.at("diagnostics").contains("timings"));
  const json b = rep.to_json(false);
  EXPECT_FALSE(b.at("diagnostics").contains("timings"));
  // Key order is stable.
  EXPECT_EQ(a.begin().key(), "schema_version");
}
