#pragma once

// Characteristic function storage, benchmark value distributions and the
// instance file formats.

#include <csg/combinatorics.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace csg {

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// xoshiro256** seeded through splitmix64. Normal deviates use the Marsaglia
/// polar method; the second deviate of each accepted pair is cached.
class Rng
{
public:
	explicit Rng(std::uint64_t seed) noexcept
	{
		std::uint64_t x = seed;
		for (auto& w : state_) {
			x += 0x9e3779b97f4a7c15ULL;
			std::uint64_t z = x;
			z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
			z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
			w = z ^ (z >> 31);
		}
	}

	std::uint64_t next() noexcept
	{
		const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
		const std::uint64_t t = state_[1] << 17;
		state_[2] ^= state_[0];
		state_[3] ^= state_[1];
		state_[1] ^= state_[2];
		state_[0] ^= state_[3];
		state_[2] ^= t;
		state_[3] = std::rotl(state_[3], 45);
		return result;
	}

	/// Uniform on [0, 1) with 53 random bits.
	double uniform01() noexcept
	{
		return static_cast<double>(next() >> 11) * 0x1.0p-53;
	}

	/// Uniform integer on [0, bound) by rejection.
	count_t below(count_t bound)
	{
		if (bound == 0) {
			throw std::invalid_argument("empty range");
		}
		const int bits = 128 - clz128(bound - 1);
		for (;;) {
			count_t r = (static_cast<count_t>(next()) << 64) | next();
			if (bits < 128) {
				r &= (static_cast<count_t>(1) << bits) - 1;
			}
			if (r < bound) {
				return r;
			}
		}
	}

	double standard_normal() noexcept
	{
		if (has_spare_) {
			has_spare_ = false;
			return spare_;
		}
		double u, v, s;
		do {
			u = 2.0 * uniform01() - 1.0;
			v = 2.0 * uniform01() - 1.0;
			s = u * u + v * v;
		} while (s >= 1.0 || s == 0.0);
		const double f = std::sqrt(-2.0 * std::log(s) / s);
		spare_ = v * f;
		has_spare_ = true;
		return u * f;
	}

private:
	static int clz128(count_t v) noexcept
	{
		const auto hi = static_cast<std::uint64_t>(v >> 64);
		if (hi != 0) {
			return std::countl_zero(hi);
		}
		return 64 + std::countl_zero(static_cast<std::uint64_t>(v));
	}

	std::uint64_t state_[4]{};
	double spare_ = 0.0;
	bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

enum class Distribution : std::uint8_t {
	uniform = 0, ///< v(C) = |C| * U(0, 1)
	normal = 1,  ///< v(C) = |C| * N(1, 0.1^2)
	ndcs = 2,    ///< v(C) = N(|C|, |C|)
	custom = 255 ///< hand-built or externally supplied values
};

inline std::string_view to_string(Distribution d) noexcept
{
	switch (d) {
	case Distribution::uniform: return "uniform";
	case Distribution::normal: return "normal";
	case Distribution::ndcs: return "ndcs";
	case Distribution::custom: return "custom";
	}
	return "custom";
}

inline Distribution parse_distribution(std::string_view s)
{
	if (s == "uniform") return Distribution::uniform;
	if (s == "normal") return Distribution::normal;
	if (s == "ndcs") return Distribution::ndcs;
	throw std::invalid_argument("unknown distribution '" + std::string(s) + "'");
}

struct DistributionSpec
{
	Distribution kind = Distribution::custom;
	std::uint64_t seed = 0;

	bool operator==(const DistributionSpec&) const = default;
};

inline double draw_value(Distribution kind, int size, Rng& rng)
{
	const double s = size;
	switch (kind) {
	case Distribution::uniform: return s * rng.uniform01();
	case Distribution::normal: return s * (1.0 + 0.1 * rng.standard_normal());
	case Distribution::ndcs: return s + std::sqrt(s) * rng.standard_normal();
	case Distribution::custom: break;
	}
	throw std::invalid_argument("cannot sample a custom distribution");
}

// ---------------------------------------------------------------------------
// ValueTable
// ---------------------------------------------------------------------------

/// v(C) for every nonempty coalition of n agents.
///
/// Values are stored indexed by coalition bitmask so lookups are O(1). The
/// per-size lists v(L_s) of the input are the same values read in canonical
/// list order; `at(s, x)` and `for_each_coalition` give that view.
class ValueTable
{
public:
	ValueTable() = default;

	explicit ValueTable(int n, DistributionSpec source = {})
	    : n_(check_n(n)), values_(std::size_t{1} << n, 0.0), source_(source)
	{
	}

	int n() const noexcept { return n_; }
	Coalition agents() const noexcept { return Coalition::grand(n_); }
	const DistributionSpec& source() const noexcept { return source_; }
	std::size_t num_coalitions() const noexcept { return values_.size() - 1; }

	/// Unchecked lookup for hot loops.
	double operator[](Coalition c) const noexcept { return values_[c.bits()]; }

	double value(Coalition c) const
	{
		check_coalition(c);
		return values_[c.bits()];
	}

	void set_value(Coalition c, double v)
	{
		check_coalition(c);
		if (!std::isfinite(v)) {
			throw std::invalid_argument("coalition values must be finite");
		}
		values_[c.bits()] = v;
	}

	/// Entry x (1-based) of list s.
	double at(int s, std::uint64_t x) const
	{
		return values_[index_to_coalition(x, s, agents()).bits()];
	}

	/// The list v(L_s) materialised in canonical order.
	std::vector<double> list(int s) const
	{
		std::vector<double> out;
		out.reserve(small_binomial(n_, s));
		for_each_coalition(agents(), s, [&](Coalition c) { out.push_back(values_[c.bits()]); });
		return out;
	}

	bool operator==(const ValueTable&) const = default;

private:
	static int check_n(int n)
	{
		if (n < 1 || n > max_agents) {
			throw std::out_of_range("number of agents must be in 1.." + std::to_string(max_agents));
		}
		return n;
	}

	void check_coalition(Coalition c) const
	{
		if (c.empty()) {
			throw std::invalid_argument("empty coalition has no value");
		}
		if (!c.subset_of(agents())) {
			throw std::out_of_range("coalition contains unknown agents");
		}
	}

	int n_ = 0;
	std::vector<double> values_;
	DistributionSpec source_;
};

/// Draws every coalition value independently, s ascending then canonical
/// index ascending, so a (n, kind, seed) triple always yields the same table.
inline ValueTable generate(int n, DistributionSpec spec)
{
	if (spec.kind == Distribution::custom) {
		throw std::invalid_argument("generate needs uniform, normal or ndcs");
	}
	ValueTable table(n, spec);
	Rng rng(spec.seed);
	for (int s = 1; s <= n; ++s) {
		for_each_coalition(table.agents(), s, [&](Coalition c) {
			table.set_value(c, draw_value(spec.kind, s, rng));
		});
	}
	return table;
}

/// V(CS) = sum of member values. Throws std::invalid_argument unless cs
/// partitions the agents.
inline double value_of_cs(const ValueTable& table, std::span<const Coalition> cs)
{
	(void)partition_of(cs, table.n());
	double total = 0.0;
	for (Coalition c : cs) {
		total += table[c];
	}
	return total;
}

// ---------------------------------------------------------------------------
// Per-size statistics
// ---------------------------------------------------------------------------

struct KahanSum
{
	double sum = 0.0;
	double carry = 0.0;

	void add(double x) noexcept
	{
		const double y = x - carry;
		const double t = sum + y;
		carry = (t - sum) - y;
		sum = t;
	}
};

struct SizeStats
{
	int size = 0;
	double max = -std::numeric_limits<double>::infinity();
	double min = std::numeric_limits<double>::infinity();
	double avg = 0.0;
};

/// max_s, min_s, avg_s indexed by coalition size 1..n.
class SizeStatsTable
{
public:
	SizeStatsTable() = default;
	explicit SizeStatsTable(int n) : stats_(static_cast<std::size_t>(n))
	{
		for (int s = 1; s <= n; ++s) {
			stats_[static_cast<std::size_t>(s - 1)].size = s;
		}
	}

	int n() const noexcept { return static_cast<int>(stats_.size()); }
	const SizeStats& operator[](int s) const { return stats_.at(static_cast<std::size_t>(s - 1)); }
	SizeStats& operator[](int s) { return stats_.at(static_cast<std::size_t>(s - 1)); }

	auto begin() const noexcept { return stats_.begin(); }
	auto end() const noexcept { return stats_.end(); }

private:
	std::vector<SizeStats> stats_;
};

inline SizeStatsTable size_stats(const ValueTable& table)
{
	SizeStatsTable out(table.n());
	for (int s = 1; s <= table.n(); ++s) {
		SizeStats& st = out[s];
		KahanSum sum;
		for_each_coalition(table.agents(), s, [&](Coalition c) {
			const double v = table[c];
			st.max = std::max(st.max, v);
			st.min = std::min(st.min, v);
			sum.add(v);
		});
		st.avg = sum.sum / static_cast<double>(small_binomial(table.n(), s));
	}
	return out;
}

// ---------------------------------------------------------------------------
// Uniform sampling of coalition structures
// ---------------------------------------------------------------------------

/// Draws coalition structures of n agents uniformly: a partition G with
/// probability |P_G| / Bell(n), then a uniform member of P_G.
class StructureSampler
{
public:
	explicit StructureSampler(int n) : n_(n), partitions_(enumerate_partitions(n))
	{
		count_t total = 0;
		for (const auto& g : partitions_) {
			total = checked_add(total, subspace_size(g));
			cumulative_.push_back(total);
		}
	}

	count_t bell() const noexcept { return cumulative_.back(); }

	CoalitionStructure operator()(Rng& rng) const
	{
		const count_t r = rng.below(bell());
		const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
		return sample_in(partitions_[static_cast<std::size_t>(it - cumulative_.begin())], rng);
	}

	/// Uniform member of P_G: cut a uniform permutation of the agents into
	/// consecutive blocks of sizes g_1..g_k. Every structure in P_G arises
	/// from the same number of permutations.
	static CoalitionStructure sample_in(const IntegerPartition& g, Rng& rng)
	{
		std::vector<int> perm(static_cast<std::size_t>(g.n()));
		std::iota(perm.begin(), perm.end(), 1);
		for (std::size_t i = perm.size(); i > 1; --i) {
			const auto j = static_cast<std::size_t>(rng.below(i));
			std::swap(perm[i - 1], perm[j]);
		}
		CoalitionStructure cs;
		std::size_t k = 0;
		for (int part : g.parts()) {
			std::uint32_t bits = 0;
			for (int i = 0; i < part; ++i) {
				bits |= std::uint32_t{1} << (perm[k++] - 1);
			}
			cs.emplace_back(bits);
		}
		return cs;
	}

	int n() const noexcept { return n_; }

private:
	int n_;
	std::vector<IntegerPartition> partitions_;
	std::vector<count_t> cumulative_;
};

// ---------------------------------------------------------------------------
// Instance files
// ---------------------------------------------------------------------------

enum class InstanceErrorKind { io, format, length_mismatch, non_finite };

class instance_error : public std::runtime_error
{
public:
	instance_error(InstanceErrorKind kind, const std::string& what)
	    : std::runtime_error(what), kind_(kind)
	{
	}

	InstanceErrorKind kind() const noexcept { return kind_; }

private:
	InstanceErrorKind kind_;
};

inline constexpr char instance_magic[4] = {'C', 'S', 'G', 'V'};
inline constexpr std::uint16_t instance_version = 1;

namespace detail {

inline void put_le(std::ostream& os, std::uint64_t v, int bytes)
{
	for (int i = 0; i < bytes; ++i) {
		os.put(static_cast<char>((v >> (8 * i)) & 0xff));
	}
}

inline std::uint64_t get_le(std::istream& is, int bytes, const char* what)
{
	std::uint64_t v = 0;
	for (int i = 0; i < bytes; ++i) {
		const int c = is.get();
		if (c == std::char_traits<char>::eof()) {
			throw instance_error(InstanceErrorKind::length_mismatch,
			                     std::string("instance ends inside ") + what);
		}
		v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
	}
	return v;
}

inline Distribution distribution_from_tag(std::uint8_t tag)
{
	switch (tag) {
	case 0: return Distribution::uniform;
	case 1: return Distribution::normal;
	case 2: return Distribution::ndcs;
	case 255: return Distribution::custom;
	default: break;
	}
	throw instance_error(InstanceErrorKind::format, "unknown distribution tag " + std::to_string(tag));
}

} // namespace detail

/// Binary layout, little-endian: "CSGV", u16 version, u16 n, u8 distribution
/// tag, u64 seed, then for s = 1..n the values of L_s as f64 in list order.
inline void save(const ValueTable& table, std::ostream& os)
{
	os.write(instance_magic, 4);
	detail::put_le(os, instance_version, 2);
	detail::put_le(os, static_cast<std::uint64_t>(table.n()), 2);
	detail::put_le(os, static_cast<std::uint8_t>(table.source().kind), 1);
	detail::put_le(os, table.source().seed, 8);
	for (int s = 1; s <= table.n(); ++s) {
		for_each_coalition(table.agents(), s, [&](Coalition c) {
			detail::put_le(os, std::bit_cast<std::uint64_t>(table[c]), 8);
		});
	}
	if (!os) {
		throw instance_error(InstanceErrorKind::io, "failed writing instance");
	}
}

inline ValueTable load(std::istream& is)
{
	char magic[4] = {};
	is.read(magic, 4);
	if (is.gcount() != 4 || std::string_view(magic, 4) != std::string_view(instance_magic, 4)) {
		throw instance_error(InstanceErrorKind::format, "not a CSGV instance (bad magic)");
	}
	const auto version = detail::get_le(is, 2, "header");
	if (version != instance_version) {
		throw instance_error(InstanceErrorKind::format, "unsupported instance version " + std::to_string(version));
	}
	const auto n = static_cast<int>(detail::get_le(is, 2, "header"));
	if (n < 1 || n > max_agents) {
		throw instance_error(InstanceErrorKind::format, "agent count out of range: " + std::to_string(n));
	}
	const auto kind = detail::distribution_from_tag(static_cast<std::uint8_t>(detail::get_le(is, 1, "header")));
	const auto seed = detail::get_le(is, 8, "header");
	ValueTable table(n, {kind, seed});
	for (int s = 1; s <= n; ++s) {
		for_each_coalition(table.agents(), s, [&](Coalition c) {
			const double v = std::bit_cast<double>(detail::get_le(is, 8, "value lists"));
			if (!std::isfinite(v)) {
				throw instance_error(InstanceErrorKind::non_finite, "non-finite value for " + c.to_string());
			}
			table.set_value(c, v);
		});
	}
	if (is.peek() != std::char_traits<char>::eof()) {
		throw instance_error(InstanceErrorKind::length_mismatch, "trailing bytes after value lists");
	}
	return table;
}

inline void save(const ValueTable& table, const std::string& path)
{
	std::ofstream os(path, std::ios::binary);
	if (!os) {
		throw instance_error(InstanceErrorKind::io, "cannot open " + path + " for writing");
	}
	save(table, os);
}

inline ValueTable load(const std::string& path)
{
	std::ifstream is(path, std::ios::binary);
	if (!is) {
		throw instance_error(InstanceErrorKind::io, "cannot open " + path);
	}
	return load(is);
}

/// Text form: a line `n,<n>`, the header `size,index,value`, then one row per
/// coalition in list order.
inline void save_csv(const ValueTable& table, std::ostream& os)
{
	os << "n," << table.n() << "\nsize,index,value\n";
	char buf[64];
	for (int s = 1; s <= table.n(); ++s) {
		std::uint64_t x = 0;
		for_each_coalition(table.agents(), s, [&](Coalition c) {
			std::snprintf(buf, sizeof buf, "%.17g", table[c]);
			os << s << ',' << ++x << ',' << buf << '\n';
		});
	}
	if (!os) {
		throw instance_error(InstanceErrorKind::io, "failed writing instance");
	}
}

inline ValueTable load_csv(std::istream& is)
{
	std::string line;
	if (!std::getline(is, line) || line.rfind("n,", 0) != 0) {
		throw instance_error(InstanceErrorKind::format, "CSV instance must start with 'n,<agents>'");
	}
	int n = 0;
	try {
		n = std::stoi(line.substr(2));
	} catch (const std::exception&) {
		throw instance_error(InstanceErrorKind::format, "bad agent count line: " + line);
	}
	if (n < 1 || n > max_agents) {
		throw instance_error(InstanceErrorKind::format, "agent count out of range: " + std::to_string(n));
	}
	if (!std::getline(is, line) || line != "size,index,value") {
		throw instance_error(InstanceErrorKind::format, "missing 'size,index,value' header");
	}
	ValueTable table(n);
	std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n) + 1);
	for (int s = 1; s <= n; ++s) {
		seen[static_cast<std::size_t>(s)].assign(small_binomial(n, s), false);
	}
	std::size_t rows = 0;
	while (std::getline(is, line)) {
		if (line.empty()) {
			continue;
		}
		std::istringstream fields(line);
		std::string a, b, c;
		if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c)) {
			throw instance_error(InstanceErrorKind::format, "malformed row: " + line);
		}
		int s = 0;
		std::uint64_t x = 0;
		double v = 0.0;
		try {
			s = std::stoi(a);
			x = std::stoull(b);
			v = std::stod(c);
		} catch (const std::out_of_range&) {
			throw instance_error(InstanceErrorKind::non_finite, "value out of range: " + line);
		} catch (const std::exception&) {
			throw instance_error(InstanceErrorKind::format, "malformed row: " + line);
		}
		if (s < 1 || s > n || x < 1 || x > small_binomial(n, s)) {
			throw instance_error(InstanceErrorKind::format, "row outside the coalition lists: " + line);
		}
		if (!std::isfinite(v)) {
			throw instance_error(InstanceErrorKind::non_finite, "non-finite value: " + line);
		}
		auto&& slot = seen[static_cast<std::size_t>(s)][x - 1];
		if (slot) {
			throw instance_error(InstanceErrorKind::format, "duplicate row: " + line);
		}
		slot = true;
		table.set_value(index_to_coalition(x, s, n), v);
		++rows;
	}
	if (rows != table.num_coalitions()) {
		throw instance_error(InstanceErrorKind::length_mismatch,
		                     "expected " + std::to_string(table.num_coalitions()) + " rows, got " +
		                         std::to_string(rows));
	}
	return table;
}

} // namespace csg
