#pragma once

// Benchmark plumbing: anytime trace rows, run records, summary aggregation
// and their CSV schemas.

#include <csg/baselines.hpp>
#include <csg/ip_search.hpp>
#include <csg/value_model.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace csg::bench {

inline constexpr const char* trace_schema = "# csg-trace v1";
inline constexpr const char* runs_schema = "# csg-runs v1";
inline constexpr const char* summary_schema = "# csg-summary v1";

enum class Solver { ip, dp, brute };

inline std::string_view to_string(Solver s) noexcept
{
	switch (s) {
	case Solver::ip: return "ip";
	case Solver::dp: return "dp";
	case Solver::brute: return "brute";
	}
	return "ip";
}

inline Solver parse_solver(std::string_view s)
{
	if (s == "ip") return Solver::ip;
	if (s == "dp") return Solver::dp;
	if (s == "brute") return Solver::brute;
	throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

namespace detail {

inline std::string fmt_double(double v)
{
	if (std::isinf(v)) {
		return v > 0 ? "inf" : "-inf";
	}
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline std::string fmt_opt(const std::optional<double>& v)
{
	return v ? fmt_double(*v) : std::string();
}

inline double parse_double(const std::string& s)
{
	if (s == "inf") return std::numeric_limits<double>::infinity();
	if (s == "-inf") return -std::numeric_limits<double>::infinity();
	std::size_t used = 0;
	const double v = std::stod(s, &used);
	if (used != s.size()) {
		throw std::invalid_argument("bad number '" + s + "'");
	}
	return v;
}

inline std::optional<double> parse_opt(const std::string& s)
{
	if (s.empty()) {
		return std::nullopt;
	}
	return parse_double(s);
}

inline std::vector<std::string> split_csv(const std::string& line)
{
	std::vector<std::string> out;
	std::string cur;
	for (char c : line) {
		if (c == ',') {
			out.push_back(cur);
			cur.clear();
		} else {
			cur.push_back(c);
		}
	}
	out.push_back(cur);
	return out;
}

/// Reads the schema line and the column header; throws if either differs.
inline void expect_header(std::istream& is, const char* schema, const char* columns)
{
	std::string line;
	if (!std::getline(is, line) || line != schema) {
		throw std::runtime_error(std::string("expected schema line '") + schema + "'");
	}
	if (!std::getline(is, line) || line != columns) {
		throw std::runtime_error(std::string("expected column header '") + columns + "'");
	}
}

} // namespace detail

// ---------------------------------------------------------------------------
// Anytime traces
// ---------------------------------------------------------------------------

struct TraceRow
{
	double elapsed_ms = 0.0;
	double best_value = 0.0;
	double ub_star = 0.0;
	double beta = 0.0;
	std::optional<double> r_bound; ///< best_value / ub_star, only for positive best values
	std::uint64_t cs_examined = 0;
	std::optional<double> r_opt; ///< best_value / optimum, when the optimum is known
};

inline constexpr const char* trace_columns = "elapsed_ms,best_value,ub_star,beta,r_bound,cs_examined,r_opt";

inline std::vector<TraceRow> trace_rows(const Solution& sol, std::optional<double> optimum = std::nullopt)
{
	std::vector<TraceRow> rows;
	rows.reserve(sol.trace.size());
	for (const auto& s : sol.trace) {
		TraceRow r;
		r.elapsed_ms = s.elapsed_ms;
		r.best_value = s.best_value;
		r.ub_star = s.ub_star;
		r.beta = s.beta;
		if (s.best_value > 0.0) {
			r.r_bound = s.best_value / s.ub_star;
		}
		r.cs_examined = s.cs_examined;
		if (optimum && *optimum > 0.0) {
			r.r_opt = s.best_value / *optimum;
		}
		rows.push_back(r);
	}
	return rows;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows)
{
	os << trace_schema << '\n' << trace_columns << '\n';
	for (const auto& r : rows) {
		os << detail::fmt_double(r.elapsed_ms) << ',' << detail::fmt_double(r.best_value) << ','
		   << detail::fmt_double(r.ub_star) << ',' << detail::fmt_double(r.beta) << ','
		   << detail::fmt_opt(r.r_bound) << ',' << r.cs_examined << ',' << detail::fmt_opt(r.r_opt) << '\n';
	}
}

inline std::vector<TraceRow> read_trace_csv(std::istream& is)
{
	detail::expect_header(is, trace_schema, trace_columns);
	std::vector<TraceRow> rows;
	std::string line;
	while (std::getline(is, line)) {
		if (line.empty()) {
			continue;
		}
		const auto f = detail::split_csv(line);
		if (f.size() != 7) {
			throw std::runtime_error("trace row has " + std::to_string(f.size()) + " fields: " + line);
		}
		TraceRow r;
		r.elapsed_ms = detail::parse_double(f[0]);
		r.best_value = detail::parse_double(f[1]);
		r.ub_star = detail::parse_double(f[2]);
		r.beta = detail::parse_double(f[3]);
		r.r_bound = detail::parse_opt(f[4]);
		r.cs_examined = std::stoull(f[5]);
		r.r_opt = detail::parse_opt(f[6]);
		rows.push_back(r);
	}
	return rows;
}

/// Problems found in a trace; empty when it is consistent. With
/// `expect_certified` the last row must carry beta = 1.
inline std::vector<std::string> validate_trace(const std::vector<TraceRow>& rows, bool expect_certified)
{
	std::vector<std::string> problems;
	auto complain = [&](std::size_t i, const std::string& what) {
		problems.push_back("row " + std::to_string(i + 1) + ": " + what);
	};
	if (rows.empty()) {
		problems.emplace_back("trace is empty");
		return problems;
	}
	for (std::size_t i = 0; i < rows.size(); ++i) {
		const auto& r = rows[i];
		if (r.best_value > r.ub_star) {
			complain(i, "best_value exceeds ub_star");
		}
		if (r.r_bound && !(*r.r_bound > 0.0 && *r.r_bound <= 1.0)) {
			complain(i, "r_bound outside (0, 1]");
		}
		if (r.r_opt && *r.r_opt > 1.0 + 1e-9) {
			complain(i, "r_opt above 1");
		}
		if (i == 0) {
			continue;
		}
		const auto& p = rows[i - 1];
		if (r.elapsed_ms < p.elapsed_ms) {
			complain(i, "elapsed_ms decreases");
		}
		if (r.best_value < p.best_value) {
			complain(i, "best_value decreases");
		}
		if (r.ub_star > p.ub_star) {
			complain(i, "ub_star increases");
		}
		if (r.beta > p.beta) {
			complain(i, "beta increases");
		}
		if (r.cs_examined < p.cs_examined) {
			complain(i, "cs_examined decreases");
		}
	}
	if (expect_certified && std::abs(rows.back().beta - 1.0) > 1e-9) {
		problems.emplace_back("final beta is not 1 for a completed run");
	}
	return problems;
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

struct RunRecord
{
	std::string instance_id;
	int n = 0;
	Distribution distribution = Distribution::uniform;
	std::uint64_t seed = 0;
	Solver solver = Solver::ip;
	double time_ms = 0.0;
	std::optional<double> final_value;
	std::optional<std::uint64_t> cs_examined;       ///< ip and brute
	std::optional<std::uint64_t> split_evaluations; ///< dp
	std::string status;                             ///< solver status, or "error"
	std::optional<bool> agrees;                     ///< matches the exact reference value
	std::string error;
};

inline constexpr const char* runs_columns =
    "instance_id,n,distribution,seed,solver,time_ms,final_value,cs_examined,split_evaluations,status,agrees,error";

inline std::string instance_id(int n, Distribution d, std::uint64_t seed)
{
	return "n" + std::to_string(n) + "-" + std::string(to_string(d)) + "-s" + std::to_string(seed);
}

inline std::string sanitize_field(std::string s)
{
	std::replace(s.begin(), s.end(), ',', ';');
	std::replace(s.begin(), s.end(), '\n', ' ');
	return s;
}

inline void write_runs_csv(std::ostream& os, const std::vector<RunRecord>& rows)
{
	os << runs_schema << '\n' << runs_columns << '\n';
	for (const auto& r : rows) {
		os << r.instance_id << ',' << r.n << ',' << to_string(r.distribution) << ',' << r.seed << ','
		   << to_string(r.solver) << ',' << detail::fmt_double(r.time_ms) << ',' << detail::fmt_opt(r.final_value)
		   << ',' << (r.cs_examined ? std::to_string(*r.cs_examined) : "") << ','
		   << (r.split_evaluations ? std::to_string(*r.split_evaluations) : "") << ',' << r.status << ','
		   << (r.agrees ? (*r.agrees ? "1" : "0") : "") << ',' << sanitize_field(r.error) << '\n';
	}
}

inline std::vector<RunRecord> read_runs_csv(std::istream& is)
{
	detail::expect_header(is, runs_schema, runs_columns);
	std::vector<RunRecord> rows;
	std::string line;
	while (std::getline(is, line)) {
		if (line.empty()) {
			continue;
		}
		const auto f = detail::split_csv(line);
		if (f.size() != 12) {
			throw std::runtime_error("run row has " + std::to_string(f.size()) + " fields: " + line);
		}
		RunRecord r;
		r.instance_id = f[0];
		r.n = std::stoi(f[1]);
		r.distribution = parse_distribution(f[2]);
		r.seed = std::stoull(f[3]);
		r.solver = parse_solver(f[4]);
		r.time_ms = detail::parse_double(f[5]);
		r.final_value = detail::parse_opt(f[6]);
		if (!f[7].empty()) r.cs_examined = std::stoull(f[7]);
		if (!f[8].empty()) r.split_evaluations = std::stoull(f[8]);
		r.status = f[9];
		if (!f[10].empty()) r.agrees = f[10] == "1";
		r.error = f[11];
		rows.push_back(r);
	}
	return rows;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct SummaryRow
{
	int n = 0;
	Distribution distribution = Distribution::uniform;
	Solver solver = Solver::ip;
	std::size_t runs = 0;
	std::size_t failures = 0;
	double median_time_ms = 0.0;
	double mean_time_ms = 0.0;
	double ci95_low_ms = 0.0;
	double ci95_high_ms = 0.0;
	std::optional<double> median_cs_examined;
	bool all_agree = true;
};

inline constexpr const char* summary_columns =
    "n,distribution,solver,runs,failures,median_time_ms,mean_time_ms,ci95_low_ms,ci95_high_ms,median_cs_examined,"
    "all_agree";

inline double median(std::vector<double> v)
{
	if (v.empty()) {
		return std::numeric_limits<double>::quiet_NaN();
	}
	std::sort(v.begin(), v.end());
	const std::size_t m = v.size() / 2;
	return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Two-sided 95% Student t critical value.
inline double t_critical_95(std::size_t df)
{
	static constexpr double table[] = {0,      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
	                                   2.201,  2.179,  2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
	                                   2.074,  2.069,  2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
	if (df == 0) {
		return std::numeric_limits<double>::quiet_NaN();
	}
	if (df < std::size(table)) {
		return table[df];
	}
	if (df <= 60) return 2.000;
	if (df <= 120) return 1.980;
	return 1.960;
}

/// Mean and 95% confidence interval of the mean.
inline std::tuple<double, double, double> mean_ci95(const std::vector<double>& v)
{
	if (v.empty()) {
		const double nan = std::numeric_limits<double>::quiet_NaN();
		return {nan, nan, nan};
	}
	KahanSum sum;
	for (double x : v) {
		sum.add(x);
	}
	const double mean = sum.sum / static_cast<double>(v.size());
	if (v.size() < 2) {
		return {mean, mean, mean};
	}
	KahanSum sq;
	for (double x : v) {
		sq.add((x - mean) * (x - mean));
	}
	const double sd = std::sqrt(sq.sum / static_cast<double>(v.size() - 1));
	const double half = t_critical_95(v.size() - 1) * sd / std::sqrt(static_cast<double>(v.size()));
	return {mean, mean - half, mean + half};
}

/// Groups rows by (n, distribution, solver) in that order. Failed rows count
/// towards `failures` only.
inline std::vector<SummaryRow> aggregate(const std::vector<RunRecord>& rows)
{
	using Key = std::tuple<int, int, int>;
	std::map<Key, std::vector<const RunRecord*>> groups;
	for (const auto& r : rows) {
		groups[{r.n, static_cast<int>(r.distribution), static_cast<int>(r.solver)}].push_back(&r);
	}
	std::vector<SummaryRow> out;
	for (const auto& [key, members] : groups) {
		SummaryRow s;
		s.n = std::get<0>(key);
		s.distribution = static_cast<Distribution>(std::get<1>(key));
		s.solver = static_cast<Solver>(std::get<2>(key));
		std::vector<double> times, examined;
		for (const RunRecord* r : members) {
			++s.runs;
			if (!r->error.empty()) {
				++s.failures;
				continue;
			}
			times.push_back(r->time_ms);
			if (r->cs_examined) {
				examined.push_back(static_cast<double>(*r->cs_examined));
			}
			if (r->agrees && !*r->agrees) {
				s.all_agree = false;
			}
		}
		s.median_time_ms = median(times);
		std::tie(s.mean_time_ms, s.ci95_low_ms, s.ci95_high_ms) = mean_ci95(times);
		if (!examined.empty()) {
			s.median_cs_examined = median(examined);
		}
		out.push_back(s);
	}
	return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows)
{
	os << summary_schema << '\n' << summary_columns << '\n';
	for (const auto& s : rows) {
		os << s.n << ',' << to_string(s.distribution) << ',' << to_string(s.solver) << ',' << s.runs << ','
		   << s.failures << ',' << detail::fmt_double(s.median_time_ms) << ',' << detail::fmt_double(s.mean_time_ms)
		   << ',' << detail::fmt_double(s.ci95_low_ms) << ',' << detail::fmt_double(s.ci95_high_ms) << ','
		   << detail::fmt_opt(s.median_cs_examined) << ',' << (s.all_agree ? 1 : 0) << '\n';
	}
}

// ---------------------------------------------------------------------------
// Argument lists
// ---------------------------------------------------------------------------

/// Parses "10..14", "1,2,5" or a mix such as "1..3,8".
inline std::vector<long long> parse_range_list(const std::string& text)
{
	std::vector<long long> out;
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ',')) {
		if (item.empty()) {
			continue;
		}
		const auto dots = item.find("..");
		if (dots == std::string::npos) {
			out.push_back(std::stoll(item));
			continue;
		}
		const long long lo = std::stoll(item.substr(0, dots));
		const long long hi = std::stoll(item.substr(dots + 2));
		if (hi < lo) {
			throw std::invalid_argument("empty range '" + item + "'");
		}
		for (long long v = lo; v <= hi; ++v) {
			out.push_back(v);
		}
	}
	return out;
}

inline std::vector<std::string> split_names(const std::string& text)
{
	std::vector<std::string> out;
	std::stringstream ss(text);
	std::string item;
	while (std::getline(ss, item, ',')) {
		if (!item.empty()) {
			out.push_back(item);
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec
{
	std::vector<int> agents;
	std::vector<Distribution> distributions;
	std::vector<std::uint64_t> seeds;
	std::vector<Solver> solvers;
	SearchConfig ip_config;
	/// When set, one trace CSV per ip run is written here.
	std::optional<std::filesystem::path> trace_dir;
};

struct RunOutput
{
	RunRecord record;
	std::optional<Solution> ip_solution;
};

inline RunOutput run_solver(const ValueTable& table, Solver solver, const SearchConfig& ip_config)
{
	RunOutput out;
	auto& rec = out.record;
	rec.n = table.n();
	rec.distribution = table.source().kind;
	rec.seed = table.source().seed;
	rec.solver = solver;
	rec.instance_id = instance_id(rec.n, rec.distribution, rec.seed);
	const auto t0 = Clock::now();
	try {
		switch (solver) {
		case Solver::ip: {
			Solution sol = solve(table, ip_config);
			rec.final_value = sol.value;
			rec.cs_examined = sol.cs_examined;
			rec.status = std::string(to_string(sol.status));
			out.ip_solution = std::move(sol);
			break;
		}
		case Solver::dp: {
			const auto sol = dp_solve(table);
			rec.final_value = sol.value;
			rec.split_evaluations = sol.work;
			rec.status = "optimal";
			break;
		}
		case Solver::brute: {
			const auto sol = brute_force_solve(table);
			rec.final_value = sol.value;
			rec.cs_examined = sol.work;
			rec.status = "optimal";
			break;
		}
		}
	} catch (const std::exception& e) {
		rec.status = "error";
		rec.error = e.what();
	}
	rec.time_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
	return out;
}

inline bool values_agree(double a, double b, double rel = 1e-9)
{
	return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Worker count from CSG_THREADS, else the hardware concurrency.
inline unsigned sweep_threads()
{
	if (const char* env = std::getenv("CSG_THREADS")) {
		try {
			const long v = std::stol(env);
			if (v >= 1) {
				return static_cast<unsigned>(v);
			}
		} catch (const std::exception&) {
		}
	}
	return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs every (instance, solver) pair. Rows come back in (n, distribution,
/// seed, solver) order regardless of the thread count. A failing run is
/// recorded and the sweep continues.
inline std::vector<RunRecord> run_sweep(const SweepSpec& spec, unsigned threads)
{
	if (spec.agents.empty() || spec.distributions.empty() || spec.seeds.empty() || spec.solvers.empty()) {
		throw std::invalid_argument("sweep needs at least one agent count, distribution, seed and solver");
	}
	struct Task
	{
		int n;
		Distribution d;
		std::uint64_t seed;
	};
	std::vector<Task> tasks;
	for (int n : spec.agents) {
		for (auto d : spec.distributions) {
			for (auto seed : spec.seeds) {
				tasks.push_back({n, d, seed});
			}
		}
	}
	std::vector<std::vector<RunRecord>> results(tasks.size());
	std::atomic<std::size_t> next{0};

	auto worker = [&] {
		for (std::size_t i = next++; i < tasks.size(); i = next++) {
			const Task& t = tasks[i];
			auto& rows = results[i];
			std::optional<ValueTable> table;
			std::string gen_error;
			try {
				table = generate(t.n, {t.d, t.seed});
			} catch (const std::exception& e) {
				gen_error = e.what();
			}
			std::optional<double> reference;
			std::optional<Solution> ip_solution;
			for (Solver s : spec.solvers) {
				RunOutput out;
				if (table) {
					out = run_solver(*table, s, spec.ip_config);
				} else {
					out.record = {instance_id(t.n, t.d, t.seed), t.n, t.d, t.seed, s, 0.0, {}, {}, {}, "error", {},
					              gen_error};
				}
				if (out.record.error.empty() && s != Solver::ip && !reference) {
					reference = out.record.final_value;
				}
				if (out.ip_solution) {
					ip_solution = std::move(out.ip_solution);
				}
				rows.push_back(std::move(out.record));
			}
			if (reference) {
				for (auto& r : rows) {
					if (r.final_value) {
						r.agrees = values_agree(*r.final_value, *reference);
					}
				}
			}
			if (spec.trace_dir && ip_solution) {
				std::ofstream os(*spec.trace_dir / (instance_id(t.n, t.d, t.seed) + "-ip-trace.csv"));
				write_trace_csv(os, trace_rows(*ip_solution, reference));
			}
		}
	};

	threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
	if (threads == 1) {
		worker();
	} else {
		std::vector<std::thread> pool;
		for (unsigned i = 0; i < threads; ++i) {
			pool.emplace_back(worker);
		}
		for (auto& th : pool) {
			th.join();
		}
	}
	std::vector<RunRecord> all;
	for (auto& rows : results) {
		for (auto& r : rows) {
			all.push_back(std::move(r));
		}
	}
	return all;
}

} // namespace csg::bench
