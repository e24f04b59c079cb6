#include "phfb/io.hpp"

#include <limits>
#include <filesystem>
#include <optional>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "harness.hpp"

namespace phfb {
namespace {

using testing::mat;

const ToleranceConfig kTol;

std::string scalar_document(const std::string& d) {
  return R"({"n":1,"m":1,"E":[[1]],"J":[[0]],"R":[[0]],"G":[[1]],"P":[[0]],"D":)" + d + "}";
}

std::optional<ErrorCode> parse_code(const std::string& text) {
  try {
    system_from_json(parse_json(text));
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

TEST(SystemJson, ParsesScalarDocument) {
  const SystemDocument doc = system_from_json(parse_json(scalar_document("[[0]]")));
  EXPECT_EQ(doc.system.n(), 1);
  EXPECT_EQ(doc.system.m(), 1);
  EXPECT_EQ(doc.system.G(0, 0), 1.0);
  EXPECT_FALSE(doc.metadata.name.has_value());
}

TEST(SystemJson, SplitsFeedthroughOnLoad) {
  const std::string text =
      R"({"n":1,"m":2,"E":[[1]],"J":[[0]],"R":[[0]],"G":[[1,0]],"P":[[0,0]],"D":[[1,2],[0,1]]})";
  const PHSystem sys = system_from_json(parse_json(text)).system;
  EXPECT_EQ(sys.S, mat(2, 2, {1, 1, 1, 1}));
  EXPECT_EQ(sys.N, mat(2, 2, {0, 1, -1, 0}));
}

TEST(SystemJson, RoundTripIsExact) {
  Rng rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const testing::InstanceSpec spec = testing::random_spec(rng);
    const PHSystem sys = testing::generate(spec);
    SystemMetadata meta;
    meta.name = "case";
    meta.seed = spec.seed;
    meta.knobs = spec.knobs;
    const std::string text = dump(system_to_json(sys, meta));
    const SystemDocument back = system_from_json(parse_json(text));
    EXPECT_EQ(back.system.E, sys.E);
    EXPECT_EQ(back.system.J, sys.J);
    EXPECT_EQ(back.system.R, sys.R);
    EXPECT_EQ(back.system.G, sys.G);
    EXPECT_EQ(back.system.P, sys.P);
    const Json stored = system_to_json(sys).at("D");
    EXPECT_EQ(matrix_from_json(parse_json(stored.dump()), sys.m(), sys.m(), "D"), sys.D());
    const double band = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, sys.D().norm());
    EXPECT_LE((back.system.S - sys.S).norm(), band);
    EXPECT_LE((back.system.N - sys.N).norm(), band);
    ASSERT_TRUE(back.metadata.seed.has_value());
    EXPECT_EQ(*back.metadata.seed, spec.seed);
    ASSERT_TRUE(back.metadata.knobs.has_value());
    EXPECT_EQ(back.metadata.knobs->rank_E, spec.knobs.rank_E);
    EXPECT_EQ(back.metadata.knobs->rank_W, spec.knobs.rank_W);
    EXPECT_EQ(back.metadata.knobs->force_singular, spec.knobs.force_singular);
    EXPECT_EQ(dump(system_to_json(sys, meta)), text);
  }
}

TEST(SystemJson, AwkwardNumbersSurvive) {
  PHSystem sys = testing::scalar_system(0.1, 0, 1.0 / 3.0, 1e-300, 0, 2.0 / 3.0, 0);
  sys.G(0, 0) = 0.30000000000000004;
  const PHSystem back = system_from_json(parse_json(system_to_json(sys).dump())).system;
  EXPECT_EQ(back.E, sys.E);
  EXPECT_EQ(back.R, sys.R);
  EXPECT_EQ(back.G, sys.G);
  EXPECT_EQ(back.S, sys.S);
}

TEST(SystemJson, ParseErrors) {
  EXPECT_EQ(parse_code("{not json"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code("[1,2]"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code(R"({"n":1,"m":1})"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code(scalar_document(R"([["a"]])")), ErrorCode::ParseError);
  EXPECT_EQ(parse_code(scalar_document("3")), ErrorCode::ParseError);
  EXPECT_EQ(parse_code(R"({"n":-1,"m":1})"), ErrorCode::ParseError);
  EXPECT_EQ(parse_code(R"({"n":1.5,"m":1})"), ErrorCode::ParseError);
}

TEST(SystemJson, ShapeErrors) {
  EXPECT_EQ(parse_code(scalar_document("[[0],[0]]")), ErrorCode::ShapeMismatch);
  EXPECT_EQ(parse_code(scalar_document("[[0,0]]")), ErrorCode::ShapeMismatch);
  EXPECT_EQ(parse_code(scalar_document("[]")), ErrorCode::ShapeMismatch);
}

TEST(SystemFile, SaveAndLoad) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "phfb_io_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "sys.json").string();
  const PHSystem sys = random_ph(4, 2, 3);
  save_system(path, sys);
  const SystemDocument doc = load_system(path);
  EXPECT_EQ(doc.system.E, sys.E);
  EXPECT_EQ(doc.system.D(), sys.D());
  std::filesystem::remove_all(dir);
}

TEST(SystemFile, MissingFile) {
  try {
    load_system("/nonexistent/phfb/sys.json");
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  EXPECT_THROW(write_text_file("/nonexistent/phfb/out.json", "x"), Error);
}

TEST(FeedbackJson, ReadsFieldF) {
  const Feedback fb = feedback_from_json(parse_json(R"({"F":[[-2, 0.5]],"other":1})"), 1, 2);
  EXPECT_EQ(fb.F, mat(1, 2, {-2, 0.5}));
  EXPECT_THROW(feedback_from_json(parse_json(R"({"G":[[1]]})"), 1, 1), Error);
  EXPECT_THROW(feedback_from_json(parse_json(R"({"F":[[1]]})"), 1, 2), Error);
}

TEST(Reports, CarryMarginsAndTolerances) {
  const PHSystem sys = testing::scalar_system(1, 0, 1, 1, 0, 1, 0);
  const Json v = validation_to_json(validate(sys, kTol));
  EXPECT_TRUE(v.at("passed").get<bool>());
  for (const Json& c : v.at("checks")) {
    EXPECT_TRUE(c.contains("margin"));
    EXPECT_TRUE(c.contains("tolerance"));
  }
  const Json c2 = con2_to_json(condition_con2(sys, kTol), kTol);
  EXPECT_TRUE(c2.at("holds").get<bool>());
  EXPECT_NEAR(c2.at("condition_matrix").at("min_eigenvalue").get<double>(), 2.0, 1e-14);
  EXPECT_TRUE(c2.at("condition_matrix").contains("tolerance"));

  const Json cert = cert_to_json(certify_closed_loop(sys, testing::scalar_feedback(-2), Goal::Passify, kTol));
  EXPECT_TRUE(cert.at("strictly_passive").at("passed").get<bool>());
  EXPECT_TRUE(cert.at("strictly_passive").contains("tolerance"));
  EXPECT_TRUE(cert.at("asymptotically_stable").contains("tolerance"));

  const Json witnesses = complex_list_to_json({Complex(0, 2), Complex(0, -2)});
  ASSERT_EQ(witnesses.size(), 2u);
  EXPECT_EQ(witnesses[0].at("im").get<double>(), 2.0);
}

}  // namespace
}  // namespace phfb
