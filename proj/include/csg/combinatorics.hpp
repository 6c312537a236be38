#pragma once

// Coalitions as bitsets, the canonical lexicographic coalition lists L_s,
// integer partitions of n and exact counting over them.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csg {

/// Largest number of agents the library accepts.
inline constexpr int max_agents = 30;

/// Exact counts (binomials, subspace sizes, Bell numbers).
using count_t = unsigned __int128;

inline std::string to_string(count_t v)
{
	if (v == 0) {
		return "0";
	}
	std::string out;
	while (v != 0) {
		out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
		v /= 10;
	}
	std::reverse(out.begin(), out.end());
	return out;
}

inline count_t checked_mul(count_t a, count_t b)
{
	count_t r;
	if (__builtin_mul_overflow(a, b, &r)) {
		throw std::overflow_error("exact count exceeds 128 bits");
	}
	return r;
}

inline count_t checked_add(count_t a, count_t b)
{
	count_t r;
	if (__builtin_add_overflow(a, b, &r)) {
		throw std::overflow_error("exact count exceeds 128 bits");
	}
	return r;
}

// ---------------------------------------------------------------------------
// Coalition
// ---------------------------------------------------------------------------

/// A set of agents. Agent a_i (1-based) occupies bit i-1.
class Coalition
{
public:
	constexpr Coalition() noexcept = default;
	constexpr explicit Coalition(std::uint32_t bits) noexcept : bits_(bits) {}

	static constexpr Coalition grand(int n) noexcept
	{
		return Coalition(n >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << n) - 1));
	}

	static constexpr Coalition singleton(int agent) noexcept
	{
		return Coalition(std::uint32_t{1} << (agent - 1));
	}

	static Coalition of(std::initializer_list<int> agents)
	{
		Coalition c;
		for (int a : agents) {
			if (a < 1 || a > max_agents) {
				throw std::out_of_range("agent index out of range");
			}
			c.bits_ |= std::uint32_t{1} << (a - 1);
		}
		return c;
	}

	constexpr std::uint32_t bits() const noexcept { return bits_; }
	constexpr int size() const noexcept { return std::popcount(bits_); }
	constexpr bool empty() const noexcept { return bits_ == 0; }
	constexpr bool contains(int agent) const noexcept { return (bits_ >> (agent - 1)) & 1U; }
	constexpr bool overlaps(Coalition o) const noexcept { return (bits_ & o.bits_) != 0; }
	constexpr bool subset_of(Coalition o) const noexcept { return (bits_ & ~o.bits_) == 0; }

	/// Smallest agent index, 0 when empty.
	constexpr int first_agent() const noexcept
	{
		return bits_ == 0 ? 0 : std::countr_zero(bits_) + 1;
	}

	/// Member agent indices in ascending order.
	std::vector<int> agents() const
	{
		std::vector<int> out;
		out.reserve(static_cast<std::size_t>(size()));
		for (std::uint32_t b = bits_; b != 0; b &= b - 1) {
			out.push_back(std::countr_zero(b) + 1);
		}
		return out;
	}

	constexpr Coalition operator|(Coalition o) const noexcept { return Coalition(bits_ | o.bits_); }
	constexpr Coalition operator&(Coalition o) const noexcept { return Coalition(bits_ & o.bits_); }
	constexpr Coalition without(Coalition o) const noexcept { return Coalition(bits_ & ~o.bits_); }

	constexpr bool operator==(const Coalition&) const noexcept = default;
	constexpr auto operator<=>(const Coalition&) const noexcept = default;

	std::string to_string() const
	{
		std::string out = "{";
		bool first = true;
		for (int a : agents()) {
			if (!first) {
				out += ",";
			}
			out += "a" + std::to_string(a);
			first = false;
		}
		return out + "}";
	}

private:
	std::uint32_t bits_ = 0;
};

using CoalitionStructure = std::vector<Coalition>;

inline std::string to_string(const CoalitionStructure& cs)
{
	std::string out = "{";
	for (std::size_t i = 0; i < cs.size(); ++i) {
		if (i != 0) {
			out += ",";
		}
		out += cs[i].to_string();
	}
	return out + "}";
}

// ---------------------------------------------------------------------------
// Binomial coefficients
// ---------------------------------------------------------------------------

/// Exact m choose s; 0 when s > m. Throws std::overflow_error past 128 bits.
inline count_t binomial(std::uint64_t m, std::uint64_t s)
{
	if (s > m) {
		return 0;
	}
	s = std::min(s, m - s);
	count_t r = 1;
	for (std::uint64_t i = 0; i < s; ++i) {
		// r * (m - i) is divisible by (i + 1); cancel the gcd first so the
		// multiplication only overflows when the result itself would.
		count_t num = m - i;
		count_t den = i + 1;
		count_t g = std::gcd(r, den);
		r /= g;
		den /= g;
		num /= den;
		r = checked_mul(r, num);
	}
	return r;
}

namespace detail {

struct BinomialTable
{
	std::array<std::array<std::uint64_t, max_agents + 1>, max_agents + 1> c{};

	constexpr BinomialTable()
	{
		for (int m = 0; m <= max_agents; ++m) {
			c[m][0] = 1;
			for (int s = 1; s <= m; ++s) {
				c[m][s] = c[m - 1][s - 1] + (s <= m - 1 ? c[m - 1][s] : 0);
			}
		}
	}
};

inline constexpr BinomialTable binomials{};

} // namespace detail

/// Table lookup for m, s within the supported agent range.
constexpr std::uint64_t small_binomial(int m, int s) noexcept
{
	if (s < 0 || m < 0 || s > m) {
		return 0;
	}
	return detail::binomials.c[m][s];
}

// ---------------------------------------------------------------------------
// Canonical coalition lists
// ---------------------------------------------------------------------------

/// 1-based position of c inside the lexicographic list of |c|-subsets of
/// universe. c must be a nonempty subset of universe.
inline std::uint64_t coalition_to_index(Coalition c, Coalition universe)
{
	if (c.empty() || !c.subset_of(universe)) {
		throw std::invalid_argument("coalition must be a nonempty subset of the universe");
	}
	const int m = universe.size();
	const int s = c.size();
	std::uint64_t index = 1;
	int chosen = 0;
	int pos = 0;
	for (std::uint32_t b = universe.bits(); b != 0 && chosen < s; b &= b - 1) {
		++pos;
		const std::uint32_t agent_bit = b & (~b + 1);
		if (c.bits() & agent_bit) {
			++chosen;
		} else {
			index += small_binomial(m - pos, s - chosen - 1);
		}
	}
	return index;
}

inline std::uint64_t coalition_to_index(Coalition c, int n)
{
	return coalition_to_index(c, Coalition::grand(n));
}

/// Inverse of coalition_to_index: the x-th (1-based) s-subset of universe.
inline Coalition index_to_coalition(std::uint64_t x, int s, Coalition universe)
{
	const int m = universe.size();
	if (s < 1 || s > m) {
		throw std::out_of_range("coalition size out of range");
	}
	if (x < 1 || x > small_binomial(m, s)) {
		throw std::out_of_range("coalition index out of range");
	}
	std::uint64_t rest = x - 1;
	std::uint32_t bits = 0;
	int chosen = 0;
	int pos = 0;
	for (std::uint32_t b = universe.bits(); b != 0 && chosen < s; b &= b - 1) {
		++pos;
		const std::uint32_t agent_bit = b & (~b + 1);
		const std::uint64_t with_agent = small_binomial(m - pos, s - chosen - 1);
		if (rest < with_agent) {
			bits |= agent_bit;
			++chosen;
		} else {
			rest -= with_agent;
		}
	}
	return Coalition(bits);
}

inline Coalition index_to_coalition(std::uint64_t x, int s, int n)
{
	return index_to_coalition(x, s, Coalition::grand(n));
}

/// Index in L_{n-s} of the complement of the coalition at index x in L_s.
inline std::uint64_t complement_index(std::uint64_t x, int s, int n)
{
	const std::uint64_t len = small_binomial(n, s);
	if (x < 1 || x > len) {
		throw std::out_of_range("coalition index out of range");
	}
	return len - x + 1;
}

/// Lexicographic cursor over the s-subsets of {0..m-1} (0-based positions).
class CombinationCursor
{
public:
	CombinationCursor(int m, int s) : m_(m), s_(s)
	{
		if (s < 0 || s > m || m > 64) {
			throw std::out_of_range("invalid combination cursor");
		}
		for (int i = 0; i < s; ++i) {
			pos_[static_cast<std::size_t>(i)] = i;
		}
	}

	std::span<const int> current() const noexcept
	{
		return {pos_.data(), static_cast<std::size_t>(s_)};
	}

	int first_element() const noexcept { return s_ == 0 ? 0 : pos_[0]; }

	/// Steps to the next combination; false once the list is exhausted.
	bool advance() noexcept
	{
		int i = s_ - 1;
		while (i >= 0 && pos_[static_cast<std::size_t>(i)] == m_ - s_ + i) {
			--i;
		}
		if (i < 0) {
			return false;
		}
		++pos_[static_cast<std::size_t>(i)];
		for (int j = i + 1; j < s_; ++j) {
			pos_[static_cast<std::size_t>(j)] = pos_[static_cast<std::size_t>(j - 1)] + 1;
		}
		return true;
	}

private:
	int m_;
	int s_;
	std::array<int, 64> pos_{};
};

/// Calls f(Coalition) for each s-subset of universe in canonical list order.
template <typename F>
void for_each_coalition(Coalition universe, int s, F&& f)
{
	std::array<std::uint32_t, 32> bit_of{};
	int m = 0;
	for (std::uint32_t b = universe.bits(); b != 0; b &= b - 1) {
		bit_of[static_cast<std::size_t>(m++)] = b & (~b + 1);
	}
	if (s < 1 || s > m) {
		return;
	}
	CombinationCursor cursor(m, s);
	do {
		std::uint32_t bits = 0;
		for (int p : cursor.current()) {
			bits |= bit_of[static_cast<std::size_t>(p)];
		}
		f(Coalition(bits));
	} while (cursor.advance());
}

// ---------------------------------------------------------------------------
// Integer partitions
// ---------------------------------------------------------------------------

/// Multiset of positive parts summing to n, stored non-decreasing.
class IntegerPartition
{
public:
	IntegerPartition() = default;

	explicit IntegerPartition(std::vector<int> parts) : parts_(std::move(parts))
	{
		if (parts_.empty()) {
			throw std::invalid_argument("integer partition needs at least one part");
		}
		std::sort(parts_.begin(), parts_.end());
		if (parts_.front() < 1) {
			throw std::invalid_argument("integer partition parts must be positive");
		}
		n_ = std::accumulate(parts_.begin(), parts_.end(), 0);
	}

	IntegerPartition(std::initializer_list<int> parts) : IntegerPartition(std::vector<int>(parts)) {}

	int n() const noexcept { return n_; }
	int num_parts() const noexcept { return static_cast<int>(parts_.size()); }
	const std::vector<int>& parts() const noexcept { return parts_; }
	int operator[](std::size_t i) const { return parts_[i]; }
	int largest() const noexcept { return parts_.back(); }

	/// G(s): how many times s occurs.
	int multiplicity(int s) const noexcept
	{
		return static_cast<int>(std::count(parts_.begin(), parts_.end(), s));
	}

	/// E(G): the distinct part sizes, ascending.
	std::vector<int> distinct_parts() const
	{
		std::vector<int> out = parts_;
		out.erase(std::unique(out.begin(), out.end()), out.end());
		return out;
	}

	bool operator==(const IntegerPartition&) const = default;

	/// Canonical order: fewer parts first, then lexicographic on parts.
	std::strong_ordering operator<=>(const IntegerPartition& o) const
	{
		if (auto c = num_parts() <=> o.num_parts(); c != 0) {
			return c;
		}
		return parts_ <=> o.parts_;
	}

	std::string to_string() const
	{
		std::string out = "[";
		for (std::size_t i = 0; i < parts_.size(); ++i) {
			if (i != 0) {
				out += ",";
			}
			out += std::to_string(parts_[i]);
		}
		return out + "]";
	}

private:
	std::vector<int> parts_;
	int n_ = 0;
};

namespace detail {

inline void partitions_rec(int remaining, int min_part, std::vector<int>& cur,
                           std::vector<IntegerPartition>& out)
{
	if (remaining == 0) {
		out.emplace_back(cur);
		return;
	}
	for (int p = min_part; p <= remaining; ++p) {
		if (remaining - p != 0 && remaining - p < p) {
			continue;
		}
		cur.push_back(p);
		partitions_rec(remaining - p, p, cur, out);
		cur.pop_back();
	}
}

} // namespace detail

/// Every integer partition of n once, grouped by part count ascending and
/// lexicographic within a group.
inline std::vector<IntegerPartition> enumerate_partitions(int n)
{
	if (n < 1 || n > 128) {
		throw std::out_of_range("partition enumeration supports 1 <= n <= 128");
	}
	std::vector<IntegerPartition> out;
	std::vector<int> cur;
	detail::partitions_rec(n, 1, cur, out);
	std::sort(out.begin(), out.end());
	return out;
}

/// |P_G|: number of coalition structures whose size multiset is G.
inline count_t subspace_size(const IntegerPartition& g)
{
	count_t ordered = 1;
	std::uint64_t left = static_cast<std::uint64_t>(g.n());
	for (int part : g.parts()) {
		ordered = checked_mul(ordered, binomial(left, static_cast<std::uint64_t>(part)));
		left -= static_cast<std::uint64_t>(part);
	}
	count_t symmetry = 1;
	for (int s : g.distinct_parts()) {
		for (int k = 2; k <= g.multiplicity(s); ++k) {
			symmetry = checked_mul(symmetry, static_cast<count_t>(k));
		}
	}
	return ordered / symmetry;
}

/// F(CS): the size multiset of a coalition structure over n agents.
inline IntegerPartition partition_of(std::span<const Coalition> cs, int n)
{
	Coalition covered;
	std::vector<int> sizes;
	sizes.reserve(cs.size());
	for (Coalition c : cs) {
		if (c.empty()) {
			throw std::invalid_argument("coalition structure contains an empty coalition");
		}
		if (c.overlaps(covered)) {
			throw std::invalid_argument("coalitions overlap");
		}
		covered = covered | c;
		sizes.push_back(c.size());
	}
	if (covered != Coalition::grand(n)) {
		throw std::invalid_argument("coalitions do not cover every agent");
	}
	return IntegerPartition(std::move(sizes));
}

} // namespace csg
