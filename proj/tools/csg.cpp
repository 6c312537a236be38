// csg: generate instances, run solvers, and sweep benchmarks.

#include <csg/csg.hpp>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

constexpr int exit_error = 1;
constexpr int exit_time_limited = 3;

std::string sha256_hex(const std::string& bytes)
{
	unsigned char digest[EVP_MAX_MD_SIZE];
	unsigned int len = 0;
	if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
		throw std::runtime_error("SHA-256 failed");
	}
	std::string hex;
	char buf[3];
	for (unsigned int i = 0; i < len; ++i) {
		std::snprintf(buf, sizeof buf, "%02x", digest[i]);
		hex += buf;
	}
	return hex;
}

std::string read_file(const fs::path& p)
{
	std::ifstream is(p, std::ios::binary);
	if (!is) {
		throw std::runtime_error("cannot open " + p.string());
	}
	return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

csg::ValueTable read_instance(const fs::path& p)
{
	if (p.extension() == ".csv") {
		std::ifstream is(p);
		if (!is) {
			throw csg::instance_error(csg::InstanceErrorKind::io, "cannot open " + p.string());
		}
		return csg::load_csv(is);
	}
	return csg::load(p.string());
}

struct GenArgs
{
	int n = 0;
	std::string dist = "uniform";
	std::uint64_t seed = 0;
	std::string out;
	bool csv = false;
};

int cmd_gen(const GenArgs& a)
{
	if (a.n < 1 || a.n > csg::max_agents) {
		throw std::invalid_argument("n must be in 1.." + std::to_string(csg::max_agents));
	}
	const auto table = csg::generate(a.n, {csg::parse_distribution(a.dist), a.seed});
	{
		std::ofstream os(a.out, std::ios::binary);
		if (!os) {
			throw std::runtime_error("cannot write " + a.out);
		}
		if (a.csv) {
			csg::save_csv(table, os);
		} else {
			csg::save(table, os);
		}
		if (!os) {
			throw std::runtime_error("write failed for " + a.out);
		}
	}
	std::cout << a.out << ' ' << sha256_hex(read_file(a.out)) << '\n';
	return 0;
}

struct SolveArgs
{
	std::string in;
	std::string algo = "ip";
	double beta_star = 1.0;
	std::optional<long> time_limit_ms;
	std::string trace_out;
	std::string policy = "max";
	std::optional<int> parts;
	std::optional<int> max_part;
	bool r_opt = false;
};

void print_result(int n, std::string_view algo, std::string_view status, double value, std::optional<double> beta,
                  double time_ms, std::optional<std::uint64_t> examined, const csg::CoalitionStructure& cs)
{
	std::cout << "algo: " << algo << '\n'
	          << "n: " << n << '\n'
	          << "status: " << status << '\n'
	          << "value: " << csg::bench::detail::fmt_double(value) << '\n';
	if (beta) {
		std::cout << "beta: " << csg::bench::detail::fmt_double(*beta) << '\n';
	}
	std::cout << "time_ms: " << csg::bench::detail::fmt_double(time_ms) << '\n';
	if (examined) {
		std::cout << "cs_examined: " << *examined << '\n';
	}
	std::cout << "structure: " << csg::to_string(cs) << '\n';
}

int cmd_solve(const SolveArgs& a)
{
	const auto table = read_instance(a.in);
	const auto solver = csg::bench::parse_solver(a.algo);
	if (solver != csg::bench::Solver::ip) {
		const auto t0 = csg::Clock::now();
		const auto sol = solver == csg::bench::Solver::dp ? csg::dp_solve(table) : csg::brute_force_solve(table);
		const double ms = std::chrono::duration<double, std::milli>(csg::Clock::now() - t0).count();
		print_result(table.n(), a.algo, "optimal", sol.value, std::nullopt, ms,
		             solver == csg::bench::Solver::brute ? std::optional(sol.work) : std::nullopt, sol.cs);
		return 0;
	}

	csg::SearchConfig config;
	config.beta_star = a.beta_star;
	if (a.policy == "max") {
		config.policy = csg::SelectionPolicy::max_upper_bound;
	} else if (a.policy == "smallest") {
		config.policy = csg::SelectionPolicy::smallest_promising;
	} else {
		throw std::invalid_argument("unknown policy '" + a.policy + "' (expected max or smallest)");
	}
	if (a.time_limit_ms) {
		if (*a.time_limit_ms < 0) {
			throw std::invalid_argument("time limit must be non-negative");
		}
		config.time_limit = std::chrono::milliseconds(*a.time_limit_ms);
	}
	config.constraints.parts = a.parts;
	config.constraints.max_part_size = a.max_part;

	const auto t0 = csg::Clock::now();
	const csg::Solution sol = csg::solve(table, config);
	const double ms = std::chrono::duration<double, std::milli>(csg::Clock::now() - t0).count();

	std::optional<double> optimum;
	if (a.r_opt && !config.constraints.active()) {
		if (table.n() > csg::max_dp_agents) {
			std::cerr << "note: r_opt needs n <= " << csg::max_dp_agents << "; column left empty\n";
		} else {
			optimum = csg::dp_solve(table).value;
		}
	}
	const fs::path trace_path = a.trace_out.empty() ? fs::path(a.in).replace_extension(".trace.csv") : fs::path(a.trace_out);
	{
		std::ofstream os(trace_path);
		if (!os) {
			throw std::runtime_error("cannot write " + trace_path.string());
		}
		csg::bench::write_trace_csv(os, csg::bench::trace_rows(sol, optimum));
	}
	print_result(table.n(), "ip", csg::to_string(sol.status), sol.value, sol.beta_final, ms, sol.cs_examined, sol.cs);
	std::cout << "trace: " << trace_path.string() << '\n';
	return sol.status == csg::SolveStatus::time_limited ? exit_time_limited : 0;
}

struct BenchArgs
{
	std::string n;
	std::string dist = "uniform";
	std::string seeds;
	std::string algos = "ip,dp";
	std::string out_dir = ".";
	double beta_star = 1.0;
	std::optional<long> time_limit_ms;
	bool traces = false;
};

int cmd_bench(const BenchArgs& a)
{
	csg::bench::SweepSpec spec;
	for (long long v : csg::bench::parse_range_list(a.n)) {
		if (v < 1 || v > csg::max_agents) {
			throw std::invalid_argument("n must be in 1.." + std::to_string(csg::max_agents));
		}
		spec.agents.push_back(static_cast<int>(v));
	}
	for (const auto& d : csg::bench::split_names(a.dist)) {
		spec.distributions.push_back(csg::parse_distribution(d));
	}
	for (long long v : csg::bench::parse_range_list(a.seeds)) {
		if (v < 0) {
			throw std::invalid_argument("seeds must be non-negative");
		}
		spec.seeds.push_back(static_cast<std::uint64_t>(v));
	}
	for (const auto& s : csg::bench::split_names(a.algos)) {
		spec.solvers.push_back(csg::bench::parse_solver(s));
	}
	if (spec.seeds.empty()) {
		throw std::invalid_argument("seed list is empty");
	}
	if (spec.agents.empty() || spec.distributions.empty() || spec.solvers.empty()) {
		throw std::invalid_argument("sweep needs at least one n, distribution and algorithm");
	}
	spec.ip_config.beta_star = a.beta_star;
	if (a.time_limit_ms) {
		spec.ip_config.time_limit = std::chrono::milliseconds(*a.time_limit_ms);
	}
	csg::validate(spec.ip_config, spec.agents.front());

	const fs::path dir(a.out_dir);
	fs::create_directories(dir);
	if (a.traces) {
		spec.trace_dir = dir / "traces";
		fs::create_directories(*spec.trace_dir);
	}
	const auto rows = csg::bench::run_sweep(spec, csg::bench::sweep_threads());
	{
		std::ofstream os(dir / "runs.csv");
		csg::bench::write_runs_csv(os, rows);
	}
	{
		std::ofstream os(dir / "summary.csv");
		csg::bench::write_summary_csv(os, csg::bench::aggregate(rows));
	}
	std::size_t failures = 0, disagreements = 0;
	for (const auto& r : rows) {
		failures += !r.error.empty();
		disagreements += r.agrees && !*r.agrees;
	}
	std::cout << "runs: " << rows.size() << '\n'
	          << "failures: " << failures << '\n'
	          << "disagreements: " << disagreements << '\n'
	          << "runs_csv: " << (dir / "runs.csv").string() << '\n'
	          << "summary_csv: " << (dir / "summary.csv").string() << '\n';
	return disagreements == 0 ? 0 : exit_error;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Coalition structure generation: instance generator, solvers and benchmarks"};
	app.require_subcommand(1);

	GenArgs gen;
	auto* g = app.add_subcommand("gen", "Write a random instance");
	g->add_option("--n", gen.n, "Number of agents (1..30)")->required();
	g->add_option("--dist", gen.dist, "uniform, normal or ndcs");
	g->add_option("--seed", gen.seed, "RNG seed");
	g->add_option("--out", gen.out, "Output path")->required();
	g->add_flag("--csv", gen.csv, "Write the CSV text form instead of binary");

	SolveArgs solve;
	auto* s = app.add_subcommand("solve", "Solve an instance");
	s->add_option("--in", solve.in, "Instance file (.csv for the text form)")->required();
	s->add_option("--algo", solve.algo, "ip, dp or brute");
	s->add_option("--beta-star", solve.beta_star, "Accept any structure within this factor of optimal");
	s->add_option("--time-limit", solve.time_limit_ms, "Time limit in milliseconds");
	s->add_option("--trace-out", solve.trace_out, "Trace CSV path (ip only)");
	s->add_option("--policy", solve.policy, "Subspace selection: max or smallest");
	s->add_option("--parts", solve.parts, "Only structures with exactly this many coalitions");
	s->add_option("--max-part", solve.max_part, "Only structures whose coalitions have at most this many agents");
	s->add_flag("--r-opt", solve.r_opt, "Fill the trace r_opt column from a dynamic-programming run");

	BenchArgs bench;
	auto* b = app.add_subcommand("bench", "Run a benchmark sweep");
	b->add_option("--n", bench.n, "Agent counts, e.g. 10..14 or 8,12")->required();
	b->add_option("--dist", bench.dist, "Comma-separated distributions");
	b->add_option("--seeds", bench.seeds, "Seeds, e.g. 1..20")->required();
	b->add_option("--algos", bench.algos, "Comma-separated algorithms");
	b->add_option("--out-dir", bench.out_dir, "Directory for runs.csv and summary.csv");
	b->add_option("--beta-star", bench.beta_star, "beta* for ip runs");
	b->add_option("--time-limit", bench.time_limit_ms, "Per-run ip time limit in milliseconds");
	b->add_flag("--traces", bench.traces, "Also write one trace CSV per ip run");

	CLI11_PARSE(app, argc, argv);

	try {
		if (*g) return cmd_gen(gen);
		if (*s) return cmd_solve(solve);
		if (*b) return cmd_bench(bench);
	} catch (const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return exit_error;
	}
	return exit_error;
}
