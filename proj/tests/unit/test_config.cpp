#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "hypkob/config.hpp"
#include "hypkob/error.hpp"

using namespace hypkob;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::PreconditionViolated;
}

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST(Config, ParsesMinimalBall) {
  const auto c = parse_run_config(R"({"domain": {"type": "ball", "dimension": 4}})");
  EXPECT_EQ(c.graph.n_nodes, 2000);
  EXPECT_EQ(c.graph.anisotropy, 8.0);
  EXPECT_EQ(c.sampler.seed, 7u);
  auto d = build_domain(c.domain_spec);
  EXPECT_EQ(d->dimension(), 4);
  EXPECT_LT(d->rho(Vec::Zero(4)), 0.0);
  auto s = build_structure(c.structure_spec, 4);
  EXPECT_EQ(s->J(Vec::Zero(4)), standard_J(4));
}

TEST(Config, OverridesAreApplied) {
  const auto c = parse_run_config(R"({
    "domain": {"type": "ellipsoid", "semi_axes": [2, 1, 1, 1]},
    "graph": {"n_nodes": 500, "lambda": 12, "seed": 3, "refinement": 1},
    "sampler": {"kind": "uniform", "seed": 99},
    "qi": {"budget": 2.5},
    "dynamics": {"family": "rotation", "angles": [0.1, 0.2], "n_max": 80},
    "output_dir": "elsewhere"
  })");
  EXPECT_EQ(c.graph.n_nodes, 500);
  EXPECT_EQ(c.graph.anisotropy, 12.0);
  EXPECT_EQ(c.graph.refinement, 1);
  EXPECT_EQ(c.sampler.kind, SamplerKind::Uniform);
  EXPECT_EQ(c.sampler.seed, 99u);
  EXPECT_EQ(c.qi.budget, 2.5);
  EXPECT_EQ(c.dynamics.family, "rotation");
  EXPECT_EQ(c.iterate.n_max, 80);
  EXPECT_EQ(c.output_dir, "elsewhere");
  EXPECT_NEAR(build_domain(c.domain_spec)->rho(make_vec({2, 0, 0, 0})), 0.0, 1e-12);
}

TEST(Config, PolynomialDomainAndConjugatedStructure) {
  const auto d = build_domain(R"({"type": "polynomial", "dimension": 4,
    "terms": [{"coefficient": 1, "exponents": [2,0,0,0]}, {"coefficient": 1, "exponents": [0,2,0,0]},
              {"coefficient": 1, "exponents": [0,0,2,0]}, {"coefficient": 1, "exponents": [0,0,0,2]},
              {"coefficient": -1, "exponents": [0,0,0,0]}],
    "box": {"lo": [-1.1,-1.1,-1.1,-1.1], "hi": [1.1,1.1,1.1,1.1]}})");
  EXPECT_NEAR(d->rho(make_vec({0.5, 0.5, 0.5, 0.5})), 0.0, 1e-12);
  const auto s = build_structure(R"({"type": "conjugated",
    "P0": [[1,0,0,0.2],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "B": []})", 4);
  const Mat J = s->J(Vec::Zero(4));
  EXPECT_LT((J * J + Mat::Identity(4, 4)).norm(), 1e-12);
}

TEST(Config, MalformedInputsAreConfigErrors) {
  EXPECT_EQ(code_of([] { parse_run_config("{not json"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_run_config(R"({"graph": {}})"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_run_config(R"({"domain": {"type": "torus"}})"); build_domain(R"({"type": "torus"})"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_run_config(R"({"domain": {"type": "ball"}, "solver": {"rel_tol": -1}})"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_run_config(R"({"domain": {"type": "ball"}, "graph": {"n_nodes": "many"}})"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_run_config(R"({"domain": {"type": "ball"}, "sampler": {"kind": "sobol"}})"); }),
            ErrorCode::ConfigError);
}

TEST(Config, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_run_config("/nonexistent/hypkob.json"); }), ErrorCode::IoError);
}

TEST(Config, DomainSpecByRelativePath) {
  const std::string dom = temp_file("hypkob_dom.json", R"({"type": "ball", "dimension": 4, "radius": 2})");
  const std::string cfg = temp_file("hypkob_cfg.json", R"({"domain": "hypkob_dom.json"})");
  const auto c = load_run_config(cfg);
  EXPECT_NEAR(build_domain(c.domain_spec)->rho(make_vec({2, 0, 0, 0})), 0.0, 1e-12);
  std::remove(dom.c_str());
  std::remove(cfg.c_str());
}

TEST(Config, ContentHashIsFnv1a) {
  EXPECT_EQ(content_hash(""), "cbf29ce484222325");
  EXPECT_EQ(content_hash("a"), "af63dc4c8601ec8c");
  EXPECT_NE(content_hash("{}"), content_hash("{ }"));
}

TEST(Pairs, RowsAndRowErrors) {
  const std::string path = temp_file("hypkob_pairs.csv",
                                     "# x0,x1,x2,x3,y0,y1,y2,y3\n"
                                     "0.1,0,0,0,0.2,0,0,0\n"
                                     "\n"
                                     "0.1,0,0,0,0.2,0\n"
                                     "0.1,0,zero,0,0.2,0,0,0\n"
                                     "0.9,0,0,0, 0.8,0,0,0  # trailing comment\n");
  const auto rows = read_pairs(path, 4);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows[0].pair.has_value());
  EXPECT_EQ(rows[0].line, 2u);
  EXPECT_FALSE(rows[1].pair.has_value());
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_FALSE(rows[2].pair.has_value());
  ASSERT_TRUE(rows[3].pair.has_value());
  EXPECT_EQ(rows[3].pair->second(0), 0.8);
  std::remove(path.c_str());
}

TEST(Version, NonEmpty) { EXPECT_STRNE(version(), ""); }
