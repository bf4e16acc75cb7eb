#include "groupdeconv/experiments.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

using namespace groupdeconv;

namespace {

ScenarioGrid
small_grid(std::size_t reps)
{
  return { { TestLaw::normal(2.0, 1.0) }, { 1000 }, { 5 }, reps, 1.1, 7 };
}

} // namespace

TEST_CASE("replications are deterministic per seed")
{
  const auto law = TestLaw::gumbel(3.0, 1.0);
  const auto a = run_replication(law, 1000, 5, 1.1, 123);
  const auto b = run_replication(law, 1000, 5, 1.1, 123);
  CHECK(a.risk_adaptive == b.risk_adaptive);
  CHECK(a.risk_oracle == b.risk_oracle);
  CHECK(a.m_adaptive == b.m_adaptive);
  CHECK(a.m_oracle == b.m_oracle);
}

TEST_CASE("oracle risk never exceeds adaptive risk")
{
  for (const auto& law : TestLaw::study_laws())
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = run_replication(law, 1000, 10, 1.1, seed);
      INFO(law.label() << " seed " << seed);
      CHECK(r.risk_oracle <= r.risk_adaptive);
      CHECK(r.risk_oracle > 0.0);
      CHECK(r.m_adaptive > 0.0);
    }
}

TEST_CASE("a one-cell grid yields two rows")
{
  const auto report = run_grid(small_grid(4), { 1, {} });
  REQUIRE(report.rows.size() == 2);
  const auto* oracle = report.find(TestLaw::normal(2.0, 1.0), 1000, 5, Method::oracle);
  const auto* adaptive = report.find(TestLaw::normal(2.0, 1.0), 1000, 5, Method::adaptive);
  REQUIRE(oracle);
  REQUIRE(adaptive);
  CHECK(oracle->replications == 4);
  CHECK(oracle->mean_risk <= adaptive->mean_risk);
  CHECK(std::isfinite(adaptive->std_error));

  // mean over replications done by hand
  double sum = 0;
  for (std::size_t rep = 0; rep < 4; ++rep)
    sum += run_replication(TestLaw::normal(2.0, 1.0), 1000, 5, 1.1,
                           replication_seed(7, TestLaw::normal(2.0, 1.0), 1000, 5, rep))
             .risk_adaptive;
  CHECK(adaptive->mean_risk == Catch::Approx(sum / 4).epsilon(1e-14));
}

TEST_CASE("csv layout")
{
  const auto csv = report_csv(run_grid(small_grid(2), { 1, {} }));
  CHECK(csv.rfind("law,n,K,method,mean_risk,std_error,reps,mean_cutoff\n", 0) == 0);
  CHECK(csv.find("\"normal(2,1)\",1000,5,oracle,") != std::string::npos);
  CHECK(csv.find("\"normal(2,1)\",1000,5,adaptive,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("results do not depend on the worker count")
{
  ScenarioGrid g{ { TestLaw::laplace(0.5, 1.0 / 3.0), TestLaw::gamma(6.0, 3.0) }, { 1000 }, { 5, 10 }, 3,
                  1.1, 11 };
  CHECK(report_csv(run_grid(g, { 1, {} })) == report_csv(run_grid(g, { 3, {} })));
}

TEST_CASE("failing cells are reported, not dropped")
{
  RunOptions opts{ 1, {} };
  opts.replication.x_count = 1; // every x grid is rejected
  const auto report = run_grid(small_grid(2), opts);
  REQUIRE(report.rows.size() == 2);
  for (const auto& r : report.rows) {
    CHECK(r.failed());
    CHECK(r.failures == 2);
    CHECK(std::isnan(r.mean_risk));
    CHECK_FALSE(r.first_error.empty());
  }
  const auto csv = report_csv(report);
  CHECK(csv.find(",nan,nan,0,nan") != std::string::npos);
  const auto table = report_table(report);
  CHECK(table.find("FAILED") != std::string::npos);
  CHECK(table.find("# failures") != std::string::npos);
}

TEST_CASE("adaptive cutoff shrinks with K")
{
  ScenarioGrid g{ { TestLaw::normal(2.0, 1.0) }, { 1000 }, { 5, 10, 20, 50 }, 5, 1.1, 3 };
  const auto report = run_grid(g, { 1, {} });
  double prev = INFINITY;
  for (int K : g.ks) {
    const auto* r = report.find(g.laws[0], 1000, K, Method::adaptive);
    REQUIRE(r);
    CHECK(r->mean_cutoff < prev);
    prev = r->mean_cutoff;
  }
}

TEST_CASE("scenario grid validation")
{
  auto g = small_grid(1);
  g.eta = 1.0;
  CHECK_THROWS_AS(run_grid(g), ParameterError);
  g = small_grid(0);
  CHECK_THROWS_AS(run_grid(g), ParameterError);
  g = small_grid(1);
  g.ks = { 0 };
  CHECK_THROWS_AS(run_grid(g), ParameterError);
  CHECK(ScenarioGrid::study().laws.size() * ScenarioGrid::study().ns.size() *
          ScenarioGrid::study().ks.size() ==
        48);
}

TEST_CASE("parallel_for visits every index once")
{
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}
