// Generates an NDCS instance, solves it with the anytime search and prints
// every progress snapshot, then checks the answer with the subset DP.

#include <csg/csg.hpp>

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv)
{
	const int n = argc > 1 ? std::atoi(argv[1]) : 14;
	const auto table = csg::generate(n, {csg::Distribution::ndcs, 7});

	csg::SearchConfig config;
	config.snapshot_cadence = std::chrono::milliseconds(10);
	const auto sol = csg::solve(table, config, [](const csg::AnytimeSnapshot& s) {
		std::printf("%9.3f ms  best %12.4f  ub %12.4f  beta %.6f  examined %llu\n", s.elapsed_ms, s.best_value,
		            s.ub_star, s.beta, static_cast<unsigned long long>(s.cs_examined));
	});
	std::printf("status %s, value %.6f\n%s\n", std::string(csg::to_string(sol.status)).c_str(), sol.value,
	            csg::to_string(sol.cs).c_str());

	if (n <= csg::max_dp_agents) {
		const auto dp = csg::dp_solve(table);
		std::printf("dp value %.6f\n", dp.value);
	}
}
