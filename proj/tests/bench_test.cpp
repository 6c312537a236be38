#include <csg/bench.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

namespace {

using namespace csg::bench;
using csg::Distribution;

TraceRow row(double t, double best, double ub, double beta, std::uint64_t examined)
{
	TraceRow r;
	r.elapsed_ms = t;
	r.best_value = best;
	r.ub_star = ub;
	r.beta = beta;
	if (best > 0) {
		r.r_bound = best / ub;
	}
	r.cs_examined = examined;
	return r;
}

TEST(Trace, RowsFromSolution)
{
	const auto t = csg::generate(12, {Distribution::uniform, 3});
	csg::SearchConfig config;
	config.snapshot_cadence = std::chrono::milliseconds(0);
	const auto sol = csg::solve(t, config);
	const double opt = csg::dp_solve(t).value;
	const auto rows = trace_rows(sol, opt);
	ASSERT_EQ(rows.size(), sol.trace.size());
	EXPECT_TRUE(validate_trace(rows, true).empty());
	for (const auto& r : rows) {
		ASSERT_TRUE(r.r_bound.has_value());
		ASSERT_TRUE(r.r_opt.has_value());
		EXPECT_LE(*r.r_opt, 1.0 + 1e-12);
	}
	EXPECT_NEAR(*rows.back().r_opt, 1.0, 1e-9);
}

TEST(Trace, CsvRoundTrip)
{
	std::vector<TraceRow> rows = {row(0.5, 3.0, 6.0, 2.0, 0), row(1.25, 4.0, 5.0, 1.25, 100),
	                              row(2.0, 5.0, 5.0, 1.0, 150)};
	rows[1].r_opt = 0.8;
	std::stringstream ss;
	write_trace_csv(ss, rows);
	const std::string text = ss.str();
	EXPECT_EQ(text.rfind("# csg-trace v1\nelapsed_ms,best_value,ub_star,beta,r_bound,cs_examined,r_opt\n", 0), 0U);
	const auto back = read_trace_csv(ss);
	ASSERT_EQ(back.size(), rows.size());
	for (std::size_t i = 0; i < rows.size(); ++i) {
		EXPECT_EQ(back[i].elapsed_ms, rows[i].elapsed_ms);
		EXPECT_EQ(back[i].best_value, rows[i].best_value);
		EXPECT_EQ(back[i].beta, rows[i].beta);
		EXPECT_EQ(back[i].r_bound, rows[i].r_bound);
		EXPECT_EQ(back[i].r_opt, rows[i].r_opt);
		EXPECT_EQ(back[i].cs_examined, rows[i].cs_examined);
	}
}

TEST(Trace, InfiniteBetaSurvivesRoundTrip)
{
	std::vector<TraceRow> rows = {row(0.0, -2.0, 3.0, csg::infinity, 0)};
	std::stringstream ss;
	write_trace_csv(ss, rows);
	const auto back = read_trace_csv(ss);
	EXPECT_EQ(back[0].beta, csg::infinity);
	EXPECT_FALSE(back[0].r_bound.has_value());
}

TEST(Trace, ValidatorCatchesViolations)
{
	EXPECT_TRUE(validate_trace({row(0, 3, 6, 2, 0), row(1, 5, 5, 1, 9)}, true).empty());
	EXPECT_FALSE(validate_trace({row(0, 3, 6, 2, 0), row(1, 2, 5, 1, 9)}, false).empty());
	EXPECT_FALSE(validate_trace({row(0, 3, 6, 2, 0), row(1, 4, 7, 1.5, 9)}, false).empty());
	EXPECT_FALSE(validate_trace({row(0, 3, 6, 2, 0), row(1, 4, 5, 2.5, 9)}, false).empty());
	EXPECT_FALSE(validate_trace({row(0, 3, 6, 2, 5), row(1, 4, 5, 1.25, 1)}, false).empty());
	EXPECT_FALSE(validate_trace({row(0, 3, 6, 2, 0), row(1, 4, 5, 1.25, 9)}, true).empty());
	EXPECT_FALSE(validate_trace({row(0, 7, 6, 1, 0)}, false).empty());
	EXPECT_FALSE(validate_trace({}, false).empty());
	auto bad = row(0, 3, 6, 2, 0);
	bad.r_opt = 1.5;
	EXPECT_FALSE(validate_trace({bad}, false).empty());
}

TEST(Runs, CsvRoundTrip)
{
	RunRecord a{"n10-ndcs-s3", 10, Distribution::ndcs, 3, Solver::ip, 1.5, 12.25, 400, {}, "optimal", true, ""};
	RunRecord b{"n10-ndcs-s3", 10, Distribution::ndcs, 3, Solver::brute, 0.0, {}, {}, {}, "error", {},
	            "too big, really"};
	std::stringstream ss;
	write_runs_csv(ss, {a, b});
	const auto back = read_runs_csv(ss);
	ASSERT_EQ(back.size(), 2U);
	EXPECT_EQ(back[0].instance_id, a.instance_id);
	EXPECT_EQ(back[0].final_value, a.final_value);
	EXPECT_EQ(back[0].cs_examined, a.cs_examined);
	EXPECT_EQ(back[0].agrees, a.agrees);
	EXPECT_EQ(back[1].error, "too big; really");
	EXPECT_FALSE(back[1].final_value.has_value());
}

TEST(Summary, MedianAndInterval)
{
	EXPECT_EQ(median({3, 1, 2}), 2.0);
	EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
	const auto [mean, lo, hi] = mean_ci95({1, 2, 3, 4, 5});
	EXPECT_DOUBLE_EQ(mean, 3.0);
	// sd = sqrt(2.5), t(4) = 2.776.
	EXPECT_NEAR(hi - mean, 2.776 * std::sqrt(2.5) / std::sqrt(5.0), 1e-12);
	EXPECT_NEAR(mean - lo, hi - mean, 1e-12);
}

TEST(Summary, GroupsAndCountsFailures)
{
	std::vector<RunRecord> rows;
	for (int seed = 0; seed < 4; ++seed) {
		rows.push_back({instance_id(8, Distribution::uniform, seed), 8, Distribution::uniform,
		                static_cast<std::uint64_t>(seed), Solver::ip, 1.0 + seed, 1.0, 10U + seed, {}, "optimal",
		                true, ""});
		rows.push_back({instance_id(8, Distribution::uniform, seed), 8, Distribution::uniform,
		                static_cast<std::uint64_t>(seed), Solver::dp, 2.0, 1.0, {}, 3000U, "optimal", true, ""});
	}
	rows.push_back({"x", 8, Distribution::uniform, 9, Solver::dp, 0.0, {}, {}, {}, "error", {}, "boom"});
	const auto s = aggregate(rows);
	ASSERT_EQ(s.size(), 2U);
	EXPECT_EQ(s[0].solver, Solver::ip);
	EXPECT_EQ(s[0].runs, 4U);
	EXPECT_EQ(s[0].median_time_ms, 2.5);
	EXPECT_EQ(s[0].median_cs_examined, 11.5);
	EXPECT_EQ(s[1].runs, 5U);
	EXPECT_EQ(s[1].failures, 1U);
	EXPECT_FALSE(s[1].median_cs_examined.has_value());
}

TEST(Summary, ReaggregationIsByteIdentical)
{
	SweepSpec spec;
	spec.agents = {6, 7};
	spec.distributions = {Distribution::uniform, Distribution::ndcs};
	spec.seeds = {1, 2, 3};
	spec.solvers = {Solver::ip, Solver::dp};
	const auto rows = run_sweep(spec, 2);
	std::stringstream runs, first, second;
	write_runs_csv(runs, rows);
	write_summary_csv(first, aggregate(rows));
	write_summary_csv(second, aggregate(read_runs_csv(runs)));
	EXPECT_EQ(first.str(), second.str());
	EXPECT_EQ(first.str().rfind("# csg-summary v1\n", 0), 0U);
}

TEST(Sweep, CrossChecksAndKeepsOrder)
{
	SweepSpec spec;
	spec.agents = {10, 11};
	spec.distributions = {Distribution::normal};
	spec.seeds = {5, 6, 7};
	spec.solvers = {Solver::ip, Solver::dp, Solver::brute};
	const auto serial = run_sweep(spec, 1);
	const auto parallel = run_sweep(spec, 4);
	ASSERT_EQ(serial.size(), 18U);
	for (std::size_t i = 0; i < serial.size(); ++i) {
		EXPECT_EQ(serial[i].instance_id, parallel[i].instance_id);
		EXPECT_EQ(serial[i].solver, parallel[i].solver);
		EXPECT_EQ(serial[i].final_value, parallel[i].final_value);
		ASSERT_TRUE(serial[i].agrees.has_value());
		EXPECT_TRUE(*serial[i].agrees) << serial[i].instance_id;
	}
}

TEST(Sweep, FailuresAreRecordedPerRow)
{
	SweepSpec spec;
	spec.agents = {14};
	spec.distributions = {Distribution::uniform};
	spec.seeds = {1};
	spec.solvers = {Solver::brute, Solver::ip, Solver::dp};
	const auto rows = run_sweep(spec, 1);
	ASSERT_EQ(rows.size(), 3U);
	EXPECT_EQ(rows[0].status, "error");
	EXPECT_FALSE(rows[0].error.empty());
	EXPECT_TRUE(*rows[1].agrees);
	EXPECT_TRUE(*rows[2].agrees);
}

TEST(Sweep, EmptySpecRejected)
{
	SweepSpec spec;
	spec.agents = {6};
	spec.distributions = {Distribution::uniform};
	spec.solvers = {Solver::ip};
	EXPECT_THROW(run_sweep(spec, 1), std::invalid_argument);
}

TEST(Sweep, ThreadCountFromEnvironment)
{
	::setenv("CSG_THREADS", "3", 1);
	EXPECT_EQ(sweep_threads(), 3U);
	::setenv("CSG_THREADS", "zero", 1);
	EXPECT_GE(sweep_threads(), 1U);
	::unsetenv("CSG_THREADS");
}

TEST(Arguments, RangeLists)
{
	EXPECT_EQ(parse_range_list("10..14"), (std::vector<long long>{10, 11, 12, 13, 14}));
	EXPECT_EQ(parse_range_list("1,2,5"), (std::vector<long long>{1, 2, 5}));
	EXPECT_EQ(parse_range_list("1..3,8"), (std::vector<long long>{1, 2, 3, 8}));
	EXPECT_TRUE(parse_range_list("").empty());
	EXPECT_THROW(parse_range_list("5..2"), std::invalid_argument);
	EXPECT_THROW(parse_range_list("x"), std::invalid_argument);
	EXPECT_EQ(split_names("ip,,dp"), (std::vector<std::string>{"ip", "dp"}));
	EXPECT_EQ(parse_solver("brute"), Solver::brute);
	EXPECT_THROW(parse_solver("idp"), std::invalid_argument);
}

} // namespace
