#pragma once

// Anytime integer-partition search: select a subspace, enumerate it without
// duplicates under branch-and-bound, prune, repeat until the worst-case
// bound is acceptable or nothing is left.

#include <csg/combinatorics.hpp>
#include <csg/scan.hpp>
#include <csg/value_model.hpp>

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace csg {

using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// Searching one subspace
// ---------------------------------------------------------------------------

struct SubspaceSearchOptions
{
	/// Skip prefixes whose optimistic completion cannot beat the incumbent.
	bool branch_and_bound = true;
	/// Stop once the incumbent reaches MAX_G or ub_star / incumbent <= beta_star.
	bool early_exit = true;
	/// Cap the first element of each cursor so that repeated sizes can always
	/// be completed. Duplicate freedom does not depend on it.
	bool first_element_limit = true;
	double ub_star = infinity;
	double beta_star = 1.0;
	std::optional<Clock::time_point> deadline;
	/// Called every few thousand cursor steps.
	std::function<void(std::uint64_t examined)> on_tick;
	/// Called with every coalition structure whose value is fully evaluated.
	std::function<void(std::span<const Coalition>)> on_visit;
};

struct SubspaceSearchResult
{
	std::uint64_t examined = 0;
	bool improved = false;
	bool stopped_early = false;
	bool timed_out = false;
};

namespace detail {

struct CursorLevel
{
	std::array<std::uint32_t, max_agents> agent_bits{}; // A_k, ascending
	std::array<int, max_agents> pos{};                  // M_k, 0-based into A_k
	int remaining = 0;                                  // |A_k|
	int size = 0;                                       // g_k
	int first_max = 0;                                  // upper limit on M_k,1
	double partial = 0.0;                               // V(C_1..C_k)
};

inline bool cursor_advance(CursorLevel& lv) noexcept
{
	const int g = lv.size;
	int i = g - 1;
	while (i >= 0 && lv.pos[static_cast<std::size_t>(i)] == lv.remaining - g + i) {
		--i;
	}
	if (i < 0) {
		return false;
	}
	++lv.pos[static_cast<std::size_t>(i)];
	for (int j = i + 1; j < g; ++j) {
		lv.pos[static_cast<std::size_t>(j)] = lv.pos[static_cast<std::size_t>(j - 1)] + 1;
	}
	return lv.pos[0] <= lv.first_max;
}

} // namespace detail

/// Searches P_G for a structure better than `incumbent`, updating it in place.
///
/// Coalition C_k is drawn as a combination M_k of positions in A_k, the agents
/// not used by C_1..C_{k-1} in ascending order, so every generated structure
/// is valid. When g_k == g_{k-1} the first position of M_k may not precede the
/// first position of M_{k-1}, which yields each structure exactly once.
inline SubspaceSearchResult search_subspace(const IntegerPartition& g, const ValueTable& table,
                                            const SizeStatsTable& stats, Incumbent& incumbent,
                                            const SubspaceSearchOptions& opt = {})
{
	if (g.n() != table.n()) {
		throw std::invalid_argument("partition " + g.to_string() + " does not match the number of agents");
	}
	SubspaceSearchResult result;
	const int parts = g.num_parts();
	const double max_g = compute_bounds(g, stats).max;

	auto should_stop = [&] {
		if (!opt.early_exit) {
			return false;
		}
		if (incumbent.value >= max_g) {
			return true;
		}
		return incumbent.value > 0.0 && opt.ub_star / incumbent.value <= opt.beta_star;
	};
	if (should_stop()) {
		result.stopped_early = true;
		return result;
	}

	// suffix_max[k]: sum of max over sizes g_k..g_last; same_from[k]: number of
	// parts from k on equal to g_k.
	std::array<double, max_agents + 1> suffix_max{};
	std::array<int, max_agents> same_from{};
	for (int k = parts - 1; k >= 0; --k) {
		const int gk = g[static_cast<std::size_t>(k)];
		suffix_max[static_cast<std::size_t>(k)] = suffix_max[static_cast<std::size_t>(k + 1)] + stats[gk].max;
		same_from[static_cast<std::size_t>(k)] =
		    1 + ((k + 1 < parts && g[static_cast<std::size_t>(k + 1)] == gk) ? same_from[static_cast<std::size_t>(k + 1)] : 0);
	}

	std::array<detail::CursorLevel, max_agents> levels;
	std::array<Coalition, max_agents> chosen{};

	// Sets up level k; `alpha` is the first position of M_{k-1}.
	auto start = [&](int k, int alpha) {
		auto& lv = levels[static_cast<std::size_t>(k)];
		lv.size = g[static_cast<std::size_t>(k)];
		const bool repeated = k > 0 && g[static_cast<std::size_t>(k - 1)] == lv.size;
		const int lo = repeated ? alpha : 0;
		lv.first_max = opt.first_element_limit ? lv.remaining - same_from[static_cast<std::size_t>(k)] * lv.size
		                                       : lv.remaining - lv.size;
		if (lo > lv.first_max) {
			return false;
		}
		for (int i = 0; i < lv.size; ++i) {
			lv.pos[static_cast<std::size_t>(i)] = lo + i;
		}
		return true;
	};

	{
		auto& first = levels[0];
		first.remaining = table.n();
		for (int a = 0; a < table.n(); ++a) {
			first.agent_bits[static_cast<std::size_t>(a)] = std::uint32_t{1} << a;
		}
		if (!start(0, 0)) {
			return result;
		}
	}

	std::uint64_t steps = 0;
	int k = 0;
	for (;;) {
		auto& lv = levels[static_cast<std::size_t>(k)];
		std::uint32_t bits = 0;
		for (int i = 0; i < lv.size; ++i) {
			bits |= lv.agent_bits[static_cast<std::size_t>(lv.pos[static_cast<std::size_t>(i)])];
		}
		const Coalition c(bits);
		chosen[static_cast<std::size_t>(k)] = c;
		lv.partial = (k == 0 ? 0.0 : levels[static_cast<std::size_t>(k - 1)].partial) + table[c];

		bool descended = false;
		if (k == parts - 1) {
			++result.examined;
			if (opt.on_visit) {
				opt.on_visit(std::span<const Coalition>(chosen.data(), static_cast<std::size_t>(parts)));
			}
			if (incumbent.value < lv.partial) {
				incumbent.cs.assign(chosen.begin(), chosen.begin() + parts);
				incumbent.value = lv.partial;
				result.improved = true;
				if (should_stop()) {
					result.stopped_early = true;
					return result;
				}
			}
		} else if (!opt.branch_and_bound ||
		           incumbent.value < lv.partial + suffix_max[static_cast<std::size_t>(k + 1)]) {
			auto& next = levels[static_cast<std::size_t>(k + 1)];
			next.remaining = 0;
			for (int i = 0; i < lv.remaining; ++i) {
				const std::uint32_t b = lv.agent_bits[static_cast<std::size_t>(i)];
				if ((b & bits) == 0) {
					next.agent_bits[static_cast<std::size_t>(next.remaining++)] = b;
				}
			}
			if (start(k + 1, lv.pos[0])) {
				++k;
				descended = true;
			}
		}

		if (!descended) {
			while (!detail::cursor_advance(levels[static_cast<std::size_t>(k)])) {
				if (k == 0) {
					return result;
				}
				--k;
			}
		}

		if ((++steps & 0x3ff) == 0) {
			if (opt.deadline && Clock::now() >= *opt.deadline) {
				result.timed_out = true;
				return result;
			}
			if (opt.on_tick) {
				opt.on_tick(result.examined);
			}
		}
	}
}

// ---------------------------------------------------------------------------
// The set of subspaces still to search
// ---------------------------------------------------------------------------

/// Unsearched subspaces ordered by MAX_G descending, then |P_G| ascending,
/// then canonical partition order.
class RemainingSubspaces
{
public:
	struct Order
	{
		bool operator()(const SubspaceStats* a, const SubspaceStats* b) const noexcept
		{
			if (a->max_bound != b->max_bound) {
				return a->max_bound > b->max_bound;
			}
			if (a->size != b->size) {
				return a->size < b->size;
			}
			return a->order < b->order;
		}
	};
	using Set = std::set<const SubspaceStats*, Order>;

	RemainingSubspaces() = default;

	explicit RemainingSubspaces(const std::vector<SubspaceStats>& subspaces)
	{
		for (const auto& s : subspaces) {
			if (s.state == SubspaceState::unsearched) {
				set_.insert(&s);
			}
		}
	}

	bool empty() const noexcept { return set_.empty(); }
	std::size_t size() const noexcept { return set_.size(); }
	Set::const_iterator begin() const noexcept { return set_.begin(); }
	Set::const_iterator end() const noexcept { return set_.end(); }

	/// Largest MAX_G left, -infinity when empty.
	double max_bound() const noexcept { return set_.empty() ? -infinity : (*set_.begin())->max_bound; }

	void insert(const SubspaceStats& s) { set_.insert(&s); }
	void erase(const SubspaceStats& s) { set_.erase(&s); }

	/// Removes every subspace with MAX_G <= threshold and returns them.
	std::vector<const SubspaceStats*> prune(double threshold)
	{
		auto first = std::find_if(set_.begin(), set_.end(),
		                          [&](const SubspaceStats* s) { return s->max_bound <= threshold; });
		std::vector<const SubspaceStats*> removed(first, set_.end());
		set_.erase(first, set_.end());
		return removed;
	}

private:
	Set set_;
};

/// Drops every subspace whose upper bound cannot exceed `threshold`.
inline std::vector<const SubspaceStats*> prune(RemainingSubspaces& remaining, double threshold)
{
	return remaining.prune(threshold);
}

enum class SelectionPolicy {
	/// Highest MAX_G first. Never enters a subspace whose bound is below the
	/// optimum.
	max_upper_bound,
	/// Smallest |P_G| among those with MAX_G >= ub_star / beta_star.
	smallest_promising
};

inline const SubspaceStats& select_next(const RemainingSubspaces& remaining, SelectionPolicy policy,
                                        double ub_star, double beta_star)
{
	if (remaining.empty()) {
		throw std::logic_error("no subspace left to select");
	}
	if (policy == SelectionPolicy::smallest_promising) {
		const double threshold = ub_star / beta_star;
		const SubspaceStats* pick = nullptr;
		for (const SubspaceStats* s : remaining) {
			if (s->max_bound < threshold) {
				break;
			}
			if (pick == nullptr || s->size < pick->size) {
				pick = s;
			}
		}
		if (pick != nullptr) {
			return *pick;
		}
	}
	return **remaining.begin();
}

// ---------------------------------------------------------------------------
// The anytime loop
// ---------------------------------------------------------------------------

struct SearchConfig
{
	double beta_star = 1.0;
	SelectionPolicy policy = SelectionPolicy::max_upper_bound;
	PartitionConstraints constraints;
	std::optional<std::chrono::milliseconds> time_limit;
	std::chrono::milliseconds snapshot_cadence{100};
	bool branch_and_bound = true;
	bool first_element_limit = true;
};

struct AnytimeSnapshot
{
	double elapsed_ms = 0.0;
	double best_value = -infinity;
	double ub_star = infinity;
	double lb_star = -infinity;
	double beta = infinity;
	std::size_t searched = 0;
	std::size_t pruned = 0;
	std::size_t remaining = 0;
	std::uint64_t cs_examined = 0;
};

using ProgressSink = std::function<void(const AnytimeSnapshot&)>;

enum class SolveStatus { optimal, within_beta_star, time_limited };

inline std::string_view to_string(SolveStatus s) noexcept
{
	switch (s) {
	case SolveStatus::optimal: return "optimal";
	case SolveStatus::within_beta_star: return "within_beta_star";
	case SolveStatus::time_limited: return "time_limited";
	}
	return "unknown";
}

struct SubspaceVisit
{
	IntegerPartition partition;
	double max_bound = 0.0;
	std::uint64_t examined = 0;
	bool completed = false;
};

struct Solution
{
	CoalitionStructure cs;
	double value = -infinity;
	double beta_final = infinity;
	SolveStatus status = SolveStatus::optimal;
	std::vector<AnytimeSnapshot> trace;
	/// Subspaces entered after the scan, in order.
	std::vector<SubspaceVisit> visits;
	/// Structures evaluated, including those of the initial scan.
	std::uint64_t cs_examined = 0;
};

inline void validate(const SearchConfig& config, int n)
{
	if (!(config.beta_star >= 1.0)) {
		throw std::invalid_argument("beta_star must be >= 1");
	}
	const auto& c = config.constraints;
	if (c.parts && (*c.parts < 1 || *c.parts > n)) {
		throw std::invalid_argument("part count constraint must be in 1..n");
	}
	if (c.max_part_size && (*c.max_part_size < 1 || *c.max_part_size > n)) {
		throw std::invalid_argument("maximum part size must be in 1..n");
	}
	if (c.parts && c.max_part_size && static_cast<long>(*c.parts) * *c.max_part_size < n) {
		throw std::invalid_argument("no integer partition satisfies the constraints");
	}
}

inline Solution solve(const ValueTable& table, const SearchConfig& config = {}, const ProgressSink& sink = {})
{
	validate(config, table.n());
	const auto t0 = Clock::now();
	const std::optional<Clock::time_point> deadline =
	    config.time_limit ? std::optional(t0 + *config.time_limit) : std::nullopt;

	const ScanResult scan = scan_and_search(table, config.constraints);
	RemainingSubspaces remaining(scan.subspaces);

	Incumbent best = scan.best;
	double ub = scan.ub_star;
	double lb = scan.lb_star;
	double beta = scan.beta;
	std::size_t searched = 0;
	std::size_t pruned = 0;
	for (const auto& s : scan.subspaces) {
		searched += s.state == SubspaceState::searched;
		pruned += s.state == SubspaceState::pruned;
	}

	Solution sol;
	sol.cs_examined = scan.structures_evaluated;
	auto last_emit = t0;
	auto emit = [&] {
		const auto now = Clock::now();
		last_emit = now;
		AnytimeSnapshot snap;
		snap.elapsed_ms = std::chrono::duration<double, std::milli>(now - t0).count();
		snap.best_value = best.value;
		snap.ub_star = ub;
		snap.lb_star = std::max(lb, best.value);
		snap.beta = beta;
		snap.searched = searched;
		snap.pruned = pruned;
		snap.remaining = remaining.size();
		snap.cs_examined = sol.cs_examined;
		sol.trace.push_back(snap);
		if (sink) {
			sink(snap);
		}
	};
	auto refresh_beta = [&] {
		if (remaining.empty()) {
			beta = 1.0;
		} else if (best.value > 0.0) {
			beta = std::min(beta, ub / best.value);
		}
	};
	auto finish = [&](SolveStatus status) {
		sol.cs = best.cs;
		sol.value = best.value;
		sol.beta_final = beta;
		sol.status = status;
		return sol;
	};

	refresh_beta();
	emit();
	if (remaining.empty() || beta <= 1.0) {
		return finish(SolveStatus::optimal);
	}
	if (beta <= config.beta_star) {
		return finish(SolveStatus::within_beta_star);
	}

	SubspaceSearchOptions opt;
	opt.branch_and_bound = config.branch_and_bound;
	opt.first_element_limit = config.first_element_limit;
	opt.beta_star = config.beta_star;
	opt.deadline = deadline;
	std::uint64_t examined_before = 0;
	opt.on_tick = [&](std::uint64_t examined_here) {
		if (Clock::now() - last_emit >= config.snapshot_cadence) {
			sol.cs_examined = examined_before + examined_here;
			refresh_beta();
			emit();
		}
	};

	while (!remaining.empty()) {
		if (deadline && Clock::now() >= *deadline) {
			return finish(SolveStatus::time_limited);
		}
		const SubspaceStats& next = select_next(remaining, config.policy, ub, config.beta_star);
		opt.ub_star = ub;
		examined_before = sol.cs_examined;
		const auto res = search_subspace(next.partition, table, scan.stats, best, opt);
		sol.cs_examined += res.examined;
		sol.visits.push_back({next.partition, next.max_bound, res.examined, !res.timed_out});
		if (res.timed_out) {
			refresh_beta();
			emit();
			return finish(SolveStatus::time_limited);
		}
		remaining.erase(next);
		++searched;
		if (res.improved) {
			pruned += remaining.prune(best.value).size();
		}
		ub = std::min(ub, std::max(best.value, remaining.max_bound()));
		lb = std::max(lb, best.value);
		refresh_beta();
		emit();
		if (beta <= 1.0) {
			return finish(SolveStatus::optimal);
		}
		if (beta <= config.beta_star) {
			return finish(SolveStatus::within_beta_star);
		}
	}
	return finish(SolveStatus::optimal);
}

} // namespace csg
