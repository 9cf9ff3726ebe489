#ifndef HHG_BLOCK_OPERATOR_HPP
#define HHG_BLOCK_OPERATOR_HPP

#include <hhg/banded.hpp>
#include <hhg/errors.hpp>

#include <algorithm>
#include <cassert>
#include <complex>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

namespace hhg {

using cvector = std::vector<complex>;

// Operator over the (l, n) product basis stored as banded radial blocks.
// Every block is real; `factor` is a global complex prefactor so that e.g.
// the velocity-gauge coupling -i d/dz stays Hermitian with real storage.
class BandedBlockOperator {
public:
	struct Block {
		int row_l;
		int col_l;
		BandedMatrix matrix;
	};

	BandedBlockOperator() = default;
	BandedBlockOperator(int n_radial, int n_angular, int half_bandwidth, bool hermitian = true, complex factor = 1.0)
		: n_radial_(n_radial), n_angular_(n_angular), kd_(half_bandwidth), hermitian_(hermitian), factor_(factor) {}

	int n_radial() const { return n_radial_; }
	int n_angular() const { return n_angular_; }
	int dimension() const { return n_radial_ * n_angular_; }
	int half_bandwidth() const { return kd_; }
	bool hermitian() const { return hermitian_; }
	complex factor() const { return factor_; }
	std::vector<Block> const& blocks() const { return blocks_; }

	void add_block(int row_l, int col_l, BandedMatrix m) {
		assert(m.size() == n_radial_ && m.half_bandwidth() == kd_);
		assert(row_l >= 0 && row_l < n_angular_ && col_l >= 0 && col_l < n_angular_);
		blocks_.push_back({row_l, col_l, std::move(m)});
	}

	Block const* find(int row_l, int col_l) const {
		auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](Block const& b) { return b.row_l == row_l && b.col_l == col_l; });
		return it == blocks_.end() ? nullptr : &*it;
	}

	// y += alpha * factor * Op x
	void apply_add(std::span<complex const> x, std::span<complex> y, complex alpha = 1.0) const {
		assert(static_cast<int>(x.size()) == dimension() && static_cast<int>(y.size()) == dimension());
		complex const s = alpha * factor_;
		if (s == 0.0) return;
		for (auto const& b : blocks_) {
			b.matrix.multiply_add(x.subspan(static_cast<std::size_t>(b.col_l) * n_radial_, n_radial_),
			                      y.subspan(static_cast<std::size_t>(b.row_l) * n_radial_, n_radial_), s);
		}
	}

	cvector apply(std::span<complex const> x) const {
		cvector y(x.size());
		apply_add(x, y);
		return y;
	}

	// <u|Op|v> with the conjugate-linear first slot.
	complex expectation(std::span<complex const> u, std::span<complex const> v) const {
		cvector w(v.size());
		apply_add(v, w);
		complex s = 0.0;
		for (std::size_t i = 0; i < u.size(); ++i) s += std::conj(u[i]) * w[i];
		return s;
	}

	// max |M - M^dagger| over all stored entries (blocks paired with their mirror).
	double hermiticity_error() const {
		double err = 0.0;
		for (auto const& b : blocks_) {
			auto const* mirror = find(b.col_l, b.row_l);
			for (int i = 0; i < n_radial_; ++i) {
				for (int j = std::max(0, i - kd_); j <= std::min(n_radial_ - 1, i + kd_); ++j) {
					complex const mij = factor_ * b.matrix(i, j);
					complex const mji = mirror ? factor_ * mirror->matrix(j, i) : complex(0.0);
					err = std::max(err, std::abs(mij - std::conj(mji)));
				}
			}
		}
		return err;
	}

	// Versioned self-describing binary blob.
	void write(std::ostream& os) const {
		os.write(magic, sizeof magic);
		put<std::uint32_t>(os, version);
		put<std::int32_t>(os, n_radial_);
		put<std::int32_t>(os, n_angular_);
		put<std::int32_t>(os, kd_);
		put<std::int32_t>(os, hermitian_ ? 1 : 0);
		put<double>(os, factor_.real());
		put<double>(os, factor_.imag());
		put<std::uint64_t>(os, blocks_.size());
		for (auto const& b : blocks_) {
			put<std::int32_t>(os, b.row_l);
			put<std::int32_t>(os, b.col_l);
			auto const& raw = b.matrix.raw();
			os.write(reinterpret_cast<char const*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
		}
		if (!os) throw io_error("operator blob: write failed");
	}

	static BandedBlockOperator read(std::istream& is) {
		char m[sizeof magic];
		is.read(m, sizeof m);
		if (!is || std::memcmp(m, magic, sizeof magic) != 0) throw io_error("operator blob: bad magic");
		if (get<std::uint32_t>(is) != version) throw io_error("operator blob: unsupported version");
		int const nr = get<std::int32_t>(is), na = get<std::int32_t>(is), kd = get<std::int32_t>(is);
		bool const herm = get<std::int32_t>(is) != 0;
		double const re = get<double>(is), im = get<double>(is);
		auto const nb = get<std::uint64_t>(is);
		if (nr <= 0 || na <= 0 || kd < 0 || nb > static_cast<std::uint64_t>(na) * na) throw io_error("operator blob: corrupt header");
		BandedBlockOperator op(nr, na, kd, herm, {re, im});
		for (std::uint64_t i = 0; i < nb; ++i) {
			int const rl = get<std::int32_t>(is), cl = get<std::int32_t>(is);
			if (rl < 0 || rl >= na || cl < 0 || cl >= na) throw io_error("operator blob: block index out of range");
			BandedMatrix mat(nr, kd);
			auto& raw = mat.raw();
			is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
			if (!is) throw io_error("operator blob: truncated block data");
			op.add_block(rl, cl, std::move(mat));
		}
		return op;
	}

private:
	static constexpr char magic[8] = {'H', 'H', 'G', 'B', 'O', 'P', '\0', '\0'};
	static constexpr std::uint32_t version = 1;

	template <typename T>
	static void put(std::ostream& os, T v) { os.write(reinterpret_cast<char const*>(&v), sizeof v); }
	template <typename T>
	static T get(std::istream& is) {
		T v{};
		is.read(reinterpret_cast<char*>(&v), sizeof v);
		if (!is) throw io_error("operator blob: truncated header");
		return v;
	}

	int n_radial_ = 0;
	int n_angular_ = 0;
	int kd_ = 0;
	bool hermitian_ = true;
	complex factor_ = 1.0;
	std::vector<Block> blocks_;
};

// a^H b
inline complex dot(std::span<complex const> a, std::span<complex const> b) {
	double const* ap = reinterpret_cast<double const*>(a.data());
	double const* bp = reinterpret_cast<double const*>(b.data());
	double re = 0.0, im = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) {
		double const ar = ap[2 * i], ai = ap[2 * i + 1], br = bp[2 * i], bi = bp[2 * i + 1];
		re += ar * br + ai * bi;
		im += ar * bi - ai * br;
	}
	return {re, im};
}

} // namespace hhg

#endif
