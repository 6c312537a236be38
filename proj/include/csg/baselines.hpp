#pragma once

// Exact reference solvers: exhaustive set-partition enumeration and the
// subset dynamic program.

#include <csg/combinatorics.hpp>
#include <csg/value_model.hpp>

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace csg {

inline constexpr int max_brute_force_agents = 13;
inline constexpr int max_dp_agents = 22;

struct ExactSolution
{
	CoalitionStructure cs;
	double value = 0.0;
	/// Structures visited (brute force) or splits evaluated (DP).
	std::uint64_t work = 0;
};

/// Calls visit(span<const Coalition>) once for every set partition of n
/// agents, generated as restricted-growth strings.
template <typename Visitor>
void enumerate_all_cs(int n, Visitor&& visit)
{
	if (n < 1 || n > max_brute_force_agents) {
		throw std::length_error("exhaustive enumeration is limited to 1.." +
		                        std::to_string(max_brute_force_agents) + " agents");
	}
	std::array<Coalition, max_brute_force_agents> blocks{};
	int used = 0;
	auto rec = [&](auto&& self, int agent) -> void {
		if (agent > n) {
			visit(std::span<const Coalition>(blocks.data(), static_cast<std::size_t>(used)));
			return;
		}
		const Coalition me = Coalition::singleton(agent);
		for (int b = 0; b < used; ++b) {
			const Coalition saved = blocks[static_cast<std::size_t>(b)];
			blocks[static_cast<std::size_t>(b)] = saved | me;
			self(self, agent + 1);
			blocks[static_cast<std::size_t>(b)] = saved;
		}
		blocks[static_cast<std::size_t>(used++)] = me;
		self(self, agent + 1);
		blocks[static_cast<std::size_t>(--used)] = Coalition();
	};
	rec(rec, 1);
}

/// Optimum over every coalition structure; ties keep the first enumerated.
inline ExactSolution brute_force_solve(const ValueTable& table)
{
	ExactSolution best;
	best.value = -std::numeric_limits<double>::infinity();
	enumerate_all_cs(table.n(), [&](std::span<const Coalition> cs) {
		++best.work;
		double v = 0.0;
		for (Coalition c : cs) {
			v += table[c];
		}
		if (best.value < v) {
			best.value = v;
			best.cs.assign(cs.begin(), cs.end());
		}
	});
	return best;
}

/// Best partition value of every subset and one block of an optimal first
/// split (the subset itself when keeping it whole is optimal).
struct DpTables
{
	int n = 0;
	std::vector<double> best_value;
	std::vector<std::uint32_t> best_split;
	std::uint64_t split_evaluations = 0;

	CoalitionStructure reconstruct(Coalition s) const
	{
		CoalitionStructure out;
		std::vector<std::uint32_t> stack{s.bits()};
		while (!stack.empty()) {
			const std::uint32_t cur = stack.back();
			stack.pop_back();
			const std::uint32_t part = best_split[cur];
			if (part == cur) {
				out.emplace_back(cur);
			} else {
				stack.push_back(part);
				stack.push_back(cur ^ part);
			}
		}
		return out;
	}
};

/// Fills the tables subset-size by subset-size. Each unordered split of S is
/// evaluated once, as the submask holding S's lowest agent plus the rest.
inline DpTables dp_tables(const ValueTable& table)
{
	const int n = table.n();
	if (n > max_dp_agents) {
		throw std::length_error("dynamic programming is limited to " + std::to_string(max_dp_agents) + " agents");
	}
	DpTables t;
	t.n = n;
	const std::size_t full = std::size_t{1} << n;
	t.best_value.assign(full, 0.0);
	t.best_split.assign(full, 0);
	for (int size = 1; size <= n; ++size) {
		// Gosper's hack walks the masks with `size` bits in increasing order.
		std::uint32_t s = (std::uint32_t{1} << size) - 1;
		while (s < full) {
			double best = table[Coalition(s)];
			std::uint32_t split = s;
			const std::uint32_t low = s & (~s + 1);
			const std::uint32_t rest = s ^ low;
			for (std::uint32_t sub = (rest - 1) & rest; rest != 0; sub = (sub - 1) & rest) {
				const std::uint32_t a = low | sub;
				const double v = t.best_value[a] + t.best_value[s ^ a];
				++t.split_evaluations;
				if (best < v) {
					best = v;
					split = a;
				}
				if (sub == 0) {
					break;
				}
			}
			t.best_value[s] = best;
			t.best_split[s] = split;
			const std::uint32_t c = s & (~s + 1);
			const std::uint32_t r = s + c;
			if (r == 0) {
				break;
			}
			s = (((r ^ s) >> 2) / c) | r;
		}
	}
	return t;
}

inline ExactSolution dp_solve(const ValueTable& table)
{
	const DpTables t = dp_tables(table);
	ExactSolution out;
	out.cs = t.reconstruct(table.agents());
	out.value = value_of_cs(table, out.cs);
	out.work = t.split_evaluations;
	return out;
}

} // namespace csg
