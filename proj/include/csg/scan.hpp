#pragma once

// One pass over the input that solves the levels with one, two and n
// coalitions, computes per-size statistics and per-subspace bounds, prunes,
// and establishes the first worst-case bound.

#include <csg/combinatorics.hpp>
#include <csg/value_model.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace csg {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

/// Restricts the search to partitions with an exact number of parts and/or a
/// maximum part size.
struct PartitionConstraints
{
	std::optional<int> parts;
	std::optional<int> max_part_size;

	bool active() const noexcept { return parts.has_value() || max_part_size.has_value(); }

	bool admits(const IntegerPartition& g) const noexcept
	{
		if (parts && g.num_parts() != *parts) {
			return false;
		}
		if (max_part_size && g.largest() > *max_part_size) {
			return false;
		}
		return true;
	}
};

enum class SubspaceState { unsearched, searched, pruned };

struct Bounds
{
	double max = 0.0;
	double avg = 0.0;
	double min = 0.0;
};

struct SubspaceStats
{
	IntegerPartition partition;
	double max_bound = 0.0;
	double avg_bound = 0.0;
	double min_bound = 0.0;
	count_t size = 0;
	SubspaceState state = SubspaceState::unsearched;
	/// Position in canonical partition order; used for deterministic ties.
	std::size_t order = 0;
};

struct Incumbent
{
	CoalitionStructure cs;
	double value = -infinity;
};

struct ScanResult
{
	Incumbent best;
	/// Worst-case ratio V(CS*) / V(best); infinity when unavailable.
	double beta = infinity;
	bool beta_available = false;
	SizeStatsTable stats;
	/// Every admitted partition of n in canonical order. Levels 1, 2 and n
	/// are marked searched.
	std::vector<SubspaceStats> subspaces;
	double ub_star = infinity;
	double lb_star = -infinity;
	/// Table entries read during the pass.
	std::uint64_t values_read = 0;
	/// Coalition structures whose value the pass computed.
	std::uint64_t structures_evaluated = 0;

	std::vector<const SubspaceStats*> remaining() const
	{
		std::vector<const SubspaceStats*> out;
		for (const auto& s : subspaces) {
			if (s.state == SubspaceState::unsearched) {
				out.push_back(&s);
			}
		}
		return out;
	}
};

/// MAX_G, AVG_G and MIN_G from the per-size statistics.
inline Bounds compute_bounds(const IntegerPartition& g, const SizeStatsTable& stats)
{
	Bounds b;
	for (int s : g.distinct_parts()) {
		const double k = g.multiplicity(s);
		b.max += stats[s].max * k;
		b.avg += stats[s].avg * k;
		b.min += stats[s].min * k;
	}
	return b;
}

/// min(n/2, ub/best) for positive best values, infinity otherwise. The n/2
/// cap only holds when levels 1, 2 and n were all searched.
inline double initial_beta(double ub_star, double best_value, int n, bool level_cap = true)
{
	if (!(best_value > 0.0)) {
		return infinity;
	}
	const double ratio = ub_star / best_value;
	return level_cap ? std::min(n / 2.0, ratio) : ratio;
}

struct TwoPartBest
{
	CoalitionStructure cs;
	double value = -infinity;
	std::uint64_t pairs_scanned = 0;
};

namespace detail {

struct PairScan
{
	std::uint64_t best_x = 0;
	double best_value = -infinity;
	std::uint64_t pairs = 0;
};

/// Walks L_s forward and L_{n-s} backward together. When both lists are the
/// same only the first half is walked. Statistics for both sizes are folded
/// into `lo` and `hi` (the same object when s == n - s).
inline PairScan scan_pair(const ValueTable& table, int s, SizeStats& lo, SizeStats& hi, KahanSum& sum_lo,
                          KahanSum& sum_hi, std::uint64_t& reads)
{
	const int n = table.n();
	const Coalition all = table.agents();
	const std::uint64_t len = small_binomial(n, s);
	const std::uint64_t end = (s == n - s) ? len / 2 : len;
	PairScan out;
	std::uint64_t x = 0;
	CombinationCursor cursor(n, s);
	do {
		++x;
		std::uint32_t bits = 0;
		for (int p : cursor.current()) {
			bits |= std::uint32_t{1} << p;
		}
		const Coalition c(bits);
		// The coalition at x in L_s and the one at |L_s| - x + 1 in L_{n-s}
		// are complements, so the mirrored entry is read through the mask.
		const double v = table[c];
		const double v_hat = table[all.without(c)];
		reads += 2;
		if (out.best_value < v + v_hat) {
			out.best_value = v + v_hat;
			out.best_x = x;
		}
		lo.max = std::max(lo.max, v);
		lo.min = std::min(lo.min, v);
		hi.max = std::max(hi.max, v_hat);
		hi.min = std::min(hi.min, v_hat);
		sum_lo.add(v);
		sum_hi.add(v_hat);
	} while (x < end && cursor.advance());
	out.pairs = x;
	return out;
}

inline CoalitionStructure pair_structure(int n, int s, std::uint64_t x)
{
	const Coalition c = index_to_coalition(x, s, n);
	const Coalition c_hat = index_to_coalition(complement_index(x, s, n), n - s, n);
	return {c, c_hat};
}

} // namespace detail

/// Best structure in P_[s, n-s] by pairing L_s entry x with L_{n-s} entry
/// |L_s| - x + 1. Requires 1 <= s <= n/2.
inline TwoPartBest two_part_best(const ValueTable& table, int s)
{
	const int n = table.n();
	if (s < 1 || 2 * s > n) {
		throw std::out_of_range("two_part_best needs 1 <= s <= n/2");
	}
	SizeStats a, b;
	KahanSum sa, sb;
	std::uint64_t reads = 0;
	const auto scan = detail::scan_pair(table, s, a, b, sa, sb, reads);
	return {detail::pair_structure(n, s, scan.best_x), scan.best_value, scan.pairs};
}

/// Runs the scan. With constraints, only admitted partitions contribute
/// candidates, bounds and subspaces.
inline ScanResult scan_and_search(const ValueTable& table, const PartitionConstraints& constraints = {})
{
	const int n = table.n();
	const Coalition all = table.agents();
	ScanResult r;
	r.stats = SizeStatsTable(n);

	// Levels 1 and n.
	const double grand = table[all];
	double singles = 0.0;
	for (int a = 1; a <= n; ++a) {
		singles += table[Coalition::singleton(a)];
	}
	r.values_read += 1 + static_cast<std::uint64_t>(n);
	r.structures_evaluated = n > 1 ? 2 : 1;

	auto consider = [&](const IntegerPartition& g, CoalitionStructure cs, double value) {
		if (constraints.admits(g) && r.best.value < value) {
			r.best = {std::move(cs), value};
		}
	};
	consider(IntegerPartition{n}, {all}, grand);
	if (n > 1) {
		CoalitionStructure singletons;
		for (int a = 1; a <= n; ++a) {
			singletons.push_back(Coalition::singleton(a));
		}
		consider(IntegerPartition(std::vector<int>(static_cast<std::size_t>(n), 1)), std::move(singletons), singles);
	}

	r.stats[n].max = r.stats[n].min = r.stats[n].avg = grand;

	// Level 2 plus statistics for every list below n.
	for (int s = 1; 2 * s <= n; ++s) {
		const int s_hat = n - s;
		KahanSum sum_lo, sum_hi;
		SizeStats& lo = r.stats[s];
		SizeStats& hi = r.stats[s_hat];
		KahanSum& sum_mirror = (s == s_hat) ? sum_lo : sum_hi;
		const auto scan = detail::scan_pair(table, s, lo, hi, sum_lo, sum_mirror, r.values_read);
		r.structures_evaluated += scan.pairs;
		lo.avg = sum_lo.sum / static_cast<double>(small_binomial(n, s));
		hi.avg = sum_mirror.sum / static_cast<double>(small_binomial(n, s_hat));
		if (constraints.admits(IntegerPartition{s, s_hat}) && r.best.value < scan.best_value) {
			r.best = {detail::pair_structure(n, s, scan.best_x), scan.best_value};
		}
	}

	// Bounds for every admitted subspace.
	r.ub_star = r.best.value;
	r.lb_star = r.best.value;
	const auto partitions = enumerate_partitions(n);
	for (std::size_t i = 0; i < partitions.size(); ++i) {
		const auto& g = partitions[i];
		if (!constraints.admits(g)) {
			continue;
		}
		const Bounds b = compute_bounds(g, r.stats);
		const int k = g.num_parts();
		const bool scanned = (k == 1 || k == 2 || k == n);
		r.subspaces.push_back({g, b.max, b.avg, b.min, subspace_size(g),
		                       scanned ? SubspaceState::searched : SubspaceState::unsearched, i});
		if (k != 2) {
			r.ub_star = std::max(r.ub_star, b.max);
			r.lb_star = std::max(r.lb_star, b.avg);
		}
	}

	// Initial prune against LB*. A subspace whose own average attains LB*
	// is the witness for that bound and stays.
	for (auto& sub : r.subspaces) {
		if (sub.state != SubspaceState::unsearched || sub.max_bound > r.lb_star) {
			continue;
		}
		const bool witness = r.lb_star > r.best.value && sub.avg_bound >= r.lb_star;
		if (!witness) {
			sub.state = SubspaceState::pruned;
		}
	}

	r.beta = initial_beta(r.ub_star, r.best.value, n, !constraints.active());
	r.beta_available = r.beta != infinity;
	return r;
}

} // namespace csg
