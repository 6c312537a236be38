#include <csg/combinatorics.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <vector>

namespace {

using csg::Coalition;
using csg::IntegerPartition;

// Bell numbers from the Bell triangle; independent of any partition code.
std::vector<csg::count_t> bell_triangle(int n_max)
{
	std::vector<csg::count_t> bell{1};
	std::vector<csg::count_t> row{1};
	for (int i = 1; i <= n_max; ++i) {
		std::vector<csg::count_t> next{row.back()};
		for (csg::count_t v : row) {
			next.push_back(next.back() + v);
		}
		bell.push_back(next.front());
		row = std::move(next);
	}
	return bell;
}

// Lexicographic list of s-subsets of {1..n} built by recursion, not by rank.
void lex_subsets(int n, int s, int from, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
	if (static_cast<int>(cur.size()) == s) {
		out.push_back(cur);
		return;
	}
	for (int a = from; a <= n; ++a) {
		cur.push_back(a);
		lex_subsets(n, s, a + 1, cur, out);
		cur.pop_back();
	}
}

// Number of set partitions whose block sizes form `g`, by exhaustive
// restricted-growth enumeration.
std::map<std::vector<int>, std::uint64_t> block_size_histogram(int n)
{
	std::map<std::vector<int>, std::uint64_t> hist;
	std::vector<int> rgs(static_cast<std::size_t>(n), 0);
	auto rec = [&](auto&& self, int i, int blocks) -> void {
		if (i == n) {
			std::vector<int> sizes(static_cast<std::size_t>(blocks), 0);
			for (int b : rgs) {
				++sizes[static_cast<std::size_t>(b)];
			}
			std::sort(sizes.begin(), sizes.end());
			++hist[sizes];
			return;
		}
		for (int b = 0; b <= blocks; ++b) {
			rgs[static_cast<std::size_t>(i)] = b;
			self(self, i + 1, std::max(blocks, b + 1));
		}
	};
	rec(rec, 0, 0);
	return hist;
}

TEST(Coalition, BitLayout)
{
	const auto c = Coalition::of({1, 3, 6});
	EXPECT_EQ(c.bits(), 0b100101U);
	EXPECT_EQ(c.size(), 3);
	EXPECT_TRUE(c.contains(3));
	EXPECT_FALSE(c.contains(2));
	EXPECT_EQ(c.first_agent(), 1);
	EXPECT_EQ(c.agents(), (std::vector<int>{1, 3, 6}));
	EXPECT_EQ(c.to_string(), "{a1,a3,a6}");
	EXPECT_EQ(Coalition::grand(30).size(), 30);
	EXPECT_EQ(Coalition::grand(6).without(c), Coalition::of({2, 4, 5}));
}

TEST(Binomial, MatchesPascal)
{
	std::vector<std::vector<csg::count_t>> pascal(61);
	for (int m = 0; m <= 60; ++m) {
		pascal[m].assign(static_cast<std::size_t>(m + 1), 1);
		for (int s = 1; s < m; ++s) {
			pascal[m][s] = pascal[m - 1][s - 1] + pascal[m - 1][s];
		}
	}
	for (int m = 0; m <= 60; ++m) {
		for (int s = 0; s <= m; ++s) {
			ASSERT_TRUE(csg::binomial(m, s) == pascal[m][s]) << m << " " << s;
			if (m <= 30) {
				ASSERT_EQ(csg::small_binomial(m, s), static_cast<std::uint64_t>(pascal[m][s]));
			}
		}
		EXPECT_TRUE(csg::binomial(m, m + 1) == 0);
	}
}

TEST(ListOrder, SixAgentListsMatchFigure)
{
	// Rows of the six-agent list figure: first, second, last entries.
	EXPECT_EQ(csg::index_to_coalition(1, 3, 6), Coalition::of({1, 2, 3}));
	EXPECT_EQ(csg::index_to_coalition(2, 3, 6), Coalition::of({1, 2, 4}));
	EXPECT_EQ(csg::index_to_coalition(5, 3, 6), Coalition::of({1, 3, 4}));
	EXPECT_EQ(csg::index_to_coalition(20, 3, 6), Coalition::of({4, 5, 6}));
	EXPECT_EQ(csg::index_to_coalition(6, 2, 6), Coalition::of({2, 3}));
	EXPECT_EQ(csg::index_to_coalition(15, 2, 6), Coalition::of({5, 6}));
	EXPECT_EQ(csg::index_to_coalition(4, 4, 6), Coalition::of({1, 2, 4, 5}));
	EXPECT_EQ(csg::index_to_coalition(14, 4, 6), Coalition::of({2, 4, 5, 6}));
	EXPECT_EQ(csg::index_to_coalition(6, 5, 6), Coalition::of({2, 3, 4, 5, 6}));
	EXPECT_EQ(csg::index_to_coalition(1, 6, 6), Coalition::grand(6));
}

TEST(ListOrder, ComplementIndexPairsDiametricEntries)
{
	EXPECT_EQ(csg::complement_index(2, 2, 6), 14U);
	EXPECT_EQ(csg::index_to_coalition(14, 4, 6), Coalition::of({2, 4, 5, 6}));
	// {a1,a2,a3} and {a4,a5,a6} sit at opposite ends of L_3.
	EXPECT_EQ(csg::complement_index(1, 3, 6), 20U);
}

TEST(ListOrder, RankRoundTripAgainstRecursiveList)
{
	for (int n = 1; n <= 12; ++n) {
		for (int s = 1; s <= n; ++s) {
			std::vector<std::vector<int>> list;
			std::vector<int> cur;
			lex_subsets(n, s, 1, cur, list);
			ASSERT_EQ(list.size(), csg::small_binomial(n, s));
			std::uint64_t x = 0;
			csg::for_each_coalition(Coalition::grand(n), s, [&](Coalition c) {
				++x;
				ASSERT_EQ(c.agents(), list[x - 1]);
			});
			ASSERT_EQ(x, list.size());
			for (std::uint64_t i = 1; i <= list.size(); ++i) {
				const Coalition c = csg::index_to_coalition(i, s, n);
				ASSERT_EQ(c.agents(), list[i - 1]);
				ASSERT_EQ(csg::coalition_to_index(c, n), i);
				const Coalition comp = Coalition::grand(n).without(c);
				if (s < n) {
					ASSERT_EQ(csg::index_to_coalition(csg::complement_index(i, s, n), n - s, n), comp);
				}
			}
		}
	}
}

TEST(ListOrder, RankOnSubUniverse)
{
	// Universe {a2,a4,a5,a7}: position 1 of size 2 is {a2,a4}, last is {a5,a7}.
	const auto u = Coalition::of({2, 4, 5, 7});
	EXPECT_EQ(csg::index_to_coalition(1, 2, u), Coalition::of({2, 4}));
	EXPECT_EQ(csg::index_to_coalition(6, 2, u), Coalition::of({5, 7}));
	EXPECT_EQ(csg::coalition_to_index(Coalition::of({4, 7}), u), 5U);
}

TEST(ListOrder, OutOfRangeThrows)
{
	EXPECT_THROW(csg::index_to_coalition(0, 2, 6), std::out_of_range);
	EXPECT_THROW(csg::index_to_coalition(16, 2, 6), std::out_of_range);
	EXPECT_THROW(csg::index_to_coalition(1, 7, 6), std::out_of_range);
}

TEST(CombinationCursor, VisitsAllInOrder)
{
	csg::CombinationCursor cur(5, 3);
	std::vector<std::vector<int>> seen;
	do {
		seen.emplace_back(cur.current().begin(), cur.current().end());
	} while (cur.advance());
	ASSERT_EQ(seen.size(), 10U);
	EXPECT_EQ(seen.front(), (std::vector<int>{0, 1, 2}));
	EXPECT_EQ(seen.back(), (std::vector<int>{2, 3, 4}));
	EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
}

TEST(IntegerPartitions, CountsAndOrder)
{
	// Partition numbers p(n) for n = 1..24.
	const std::vector<std::size_t> p = {1,  2,  3,   5,   7,   11,  15,  22,  30,  42,  56,   77,
	                                    101, 135, 176, 231, 297, 385, 490, 627, 792, 1002, 1255, 1575};
	for (int n = 1; n <= 24; ++n) {
		const auto parts = csg::enumerate_partitions(n);
		ASSERT_EQ(parts.size(), p[static_cast<std::size_t>(n - 1)]) << n;
		EXPECT_TRUE(std::is_sorted(parts.begin(), parts.end()));
		std::set<std::vector<int>> unique;
		for (const auto& g : parts) {
			unique.emplace(g.parts().begin(), g.parts().end());
			int sum = 0;
			for (int v : g.parts()) {
				sum += v;
			}
			ASSERT_EQ(sum, n);
			ASSERT_TRUE(std::is_sorted(g.parts().begin(), g.parts().end()));
		}
		EXPECT_EQ(unique.size(), parts.size());
	}
	const auto four = csg::enumerate_partitions(4);
	EXPECT_EQ(four.front(), IntegerPartition{4});
	EXPECT_EQ(four.back(), (IntegerPartition{1, 1, 1, 1}));
}

TEST(IntegerPartitions, Accessors)
{
	const IntegerPartition g{3, 1, 2, 2};
	EXPECT_EQ(g.to_string(), "[1,2,2,3]");
	EXPECT_EQ(g.n(), 8);
	EXPECT_EQ(g.num_parts(), 4);
	EXPECT_EQ(g.largest(), 3);
	EXPECT_EQ(g.multiplicity(2), 2);
	EXPECT_EQ(g.multiplicity(5), 0);
	EXPECT_EQ(g.distinct_parts(), (std::vector<int>{1, 2, 3}));
	EXPECT_THROW(IntegerPartition(std::vector<int>{}), std::invalid_argument);
	EXPECT_THROW((IntegerPartition{2, 0}), std::invalid_argument);
}

TEST(SubspaceSize, KnownValues)
{
	EXPECT_TRUE(csg::subspace_size(IntegerPartition{1, 1, 2}) == 6);
	EXPECT_TRUE(csg::subspace_size(IntegerPartition{2, 2, 3}) == 105);
	EXPECT_TRUE(csg::subspace_size(IntegerPartition{4}) == 1);
	EXPECT_TRUE(csg::subspace_size(IntegerPartition{1, 1, 1, 1}) == 1);
}

TEST(SubspaceSize, MatchesExhaustiveCount)
{
	for (int n = 1; n <= 10; ++n) {
		const auto hist = block_size_histogram(n);
		const auto parts = csg::enumerate_partitions(n);
		ASSERT_EQ(hist.size(), parts.size());
		for (const auto& g : parts) {
			const std::vector<int> key(g.parts().begin(), g.parts().end());
			ASSERT_TRUE(csg::subspace_size(g) == hist.at(key)) << g.to_string();
		}
	}
}

TEST(SubspaceSize, SumsToBellNumbers)
{
	const auto bell = bell_triangle(24);
	for (int n = 1; n <= 24; ++n) {
		csg::count_t total = 0;
		for (const auto& g : csg::enumerate_partitions(n)) {
			total += csg::subspace_size(g);
		}
		ASSERT_TRUE(total == bell[static_cast<std::size_t>(n)]) << n;
	}
	EXPECT_EQ(csg::to_string(bell[20]), "51724158235372");
}

TEST(SubspaceSize, LargeInstancesStayExact)
{
	csg::count_t total = 0;
	for (const auto& g : csg::enumerate_partitions(30)) {
		total = csg::checked_add(total, csg::subspace_size(g));
	}
	EXPECT_EQ(csg::to_string(total), "846749014511809332450147");
}

TEST(PartitionOf, ValidatesStructures)
{
	const std::vector<Coalition> ok = {Coalition::of({1, 4}), Coalition::of({2}), Coalition::of({3, 5})};
	EXPECT_EQ(csg::partition_of(ok, 5), (IntegerPartition{1, 2, 2}));
	const std::vector<Coalition> overlap = {Coalition::of({1, 2}), Coalition::of({2, 3})};
	EXPECT_THROW(csg::partition_of(overlap, 3), std::invalid_argument);
	const std::vector<Coalition> missing = {Coalition::of({1, 2})};
	EXPECT_THROW(csg::partition_of(missing, 3), std::invalid_argument);
	const std::vector<Coalition> empty_block = {Coalition::of({1, 2, 3}), Coalition()};
	EXPECT_THROW(csg::partition_of(empty_block, 3), std::invalid_argument);
}

TEST(CheckedArithmetic, Overflows)
{
	const csg::count_t big = ~csg::count_t{0};
	EXPECT_THROW(csg::checked_mul(big, 2), std::overflow_error);
	EXPECT_THROW(csg::checked_add(big, 1), std::overflow_error);
	EXPECT_TRUE(csg::checked_mul(big, 1) == big);
}

} // namespace
