#ifndef HHG_BANDED_HPP
#define HHG_BANDED_HPP

#include <hhg/errors.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace hhg {

using complex = std::complex<double>;

// Square real matrix with equal lower and upper half-bandwidth `kd`.
// Row-major band storage: entry (i, j) lives at i * (2 kd + 1) + (j - i + kd).
class BandedMatrix {
public:
	BandedMatrix() = default;
	BandedMatrix(int n, int kd) : n_(n), kd_(kd), data_(static_cast<std::size_t>(n) * (2 * kd + 1), 0.0) {}

	int size() const { return n_; }
	int half_bandwidth() const { return kd_; }
	int width() const { return 2 * kd_ + 1; }

	bool in_band(int i, int j) const { return std::abs(i - j) <= kd_ && i >= 0 && j >= 0 && i < n_ && j < n_; }

	double operator()(int i, int j) const {
		assert(i >= 0 && i < n_ && j >= 0 && j < n_);
		if (std::abs(i - j) > kd_) return 0.0;
		return data_[index(i, j)];
	}
	double& at(int i, int j) {
		assert(in_band(i, j));
		return data_[index(i, j)];
	}

	std::vector<double>& raw() { return data_; }
	std::vector<double> const& raw() const { return data_; }

	// y += alpha * A x
	template <typename Scalar, typename Out>
	void multiply_add(std::span<Scalar const> x, std::span<Out> y, Out alpha = Out(1)) const {
		assert(static_cast<int>(x.size()) == n_ && static_cast<int>(y.size()) == n_);
		int const w = width();
		for (int i = 0; i < n_; ++i) {
			int const jlo = std::max(0, i - kd_), jhi = std::min(n_ - 1, i + kd_);
			double const* row = data_.data() + static_cast<std::size_t>(i) * w + (jlo - i + kd_);
			Out acc{};
			for (int j = jlo; j <= jhi; ++j) acc += *row++ * x[j];
			y[i] += alpha * acc;
		}
	}

	// y += alpha * A^T x
	template <typename Scalar, typename Out>
	void multiply_transpose_add(std::span<Scalar const> x, std::span<Out> y, Out alpha = Out(1)) const {
		int const w = width();
		for (int i = 0; i < n_; ++i) {
			int const jlo = std::max(0, i - kd_), jhi = std::min(n_ - 1, i + kd_);
			double const* row = data_.data() + static_cast<std::size_t>(i) * w + (jlo - i + kd_);
			Out const xi = alpha * Out(x[i]);
			for (int j = jlo; j <= jhi; ++j) y[j] += *row++ * xi;
		}
	}

	BandedMatrix& add_scaled(BandedMatrix const& other, double s) {
		assert(other.n_ == n_ && other.kd_ == kd_);
		for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
		return *this;
	}

	BandedMatrix transposed() const {
		BandedMatrix t(n_, kd_);
		for (int i = 0; i < n_; ++i)
			for (int j = std::max(0, i - kd_); j <= std::min(n_ - 1, i + kd_); ++j) t.at(j, i) = (*this)(i, j);
		return t;
	}

	double max_asymmetry() const {
		double m = 0.0;
		for (int i = 0; i < n_; ++i)
			for (int j = i + 1; j <= std::min(n_ - 1, i + kd_); ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
		return m;
	}

private:
	std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * (2 * kd_ + 1) + (j - i + kd_); }

	int n_ = 0;
	int kd_ = 0;
	std::vector<double> data_;
};

// Cholesky factor L (A = L L^T) of a symmetric positive-definite banded matrix.
class BandedCholesky {
public:
	BandedCholesky() = default;

	explicit BandedCholesky(BandedMatrix const& a) : n_(a.size()), kd_(a.half_bandwidth()), l_(static_cast<std::size_t>(n_) * (kd_ + 1), 0.0) {
		// l_[i * (kd+1) + (j - i + kd)] = L(i, j), j in [i - kd, i]
		for (int j = 0; j < n_; ++j) {
			double d = a(j, j);
			for (int m = std::max(0, j - kd_); m < j; ++m) d -= L(j, m) * L(j, m);
			if (!(d > 0.0)) throw convergence_error("banded Cholesky: matrix not positive definite at row " + std::to_string(j));
			double const ljj = std::sqrt(d);
			Lref(j, j) = ljj;
			for (int i = j + 1; i <= std::min(n_ - 1, j + kd_); ++i) {
				double s = a(i, j);
				for (int m = std::max(0, i - kd_); m < j; ++m) s -= L(i, m) * L(j, m);
				Lref(i, j) = s / ljj;
			}
		}
	}

	int size() const { return n_; }

	double L(int i, int j) const { return l_[static_cast<std::size_t>(i) * (kd_ + 1) + (j - i + kd_)]; }

	// In-place solve A x = b.
	template <typename Scalar>
	void solve_in_place(std::span<Scalar> b) const {
		assert(static_cast<int>(b.size()) == n_);
		forward_in_place(b);
		backward_in_place(b);
	}

	// L y = b
	template <typename Scalar>
	void forward_in_place(std::span<Scalar> b) const {
		for (int i = 0; i < n_; ++i) {
			Scalar s = b[i];
			double const* row = l_.data() + static_cast<std::size_t>(i) * (kd_ + 1);
			int const jlo = std::max(0, i - kd_);
			for (int j = jlo; j < i; ++j) s -= row[j - i + kd_] * b[j];
			b[i] = s / row[kd_];
		}
	}

	// L^T x = y
	template <typename Scalar>
	void backward_in_place(std::span<Scalar> b) const {
		for (int i = n_ - 1; i >= 0; --i) {
			b[i] /= L(i, i);
			Scalar const bi = b[i];
			double const* row = l_.data() + static_cast<std::size_t>(i) * (kd_ + 1);
			for (int j = std::max(0, i - kd_); j < i; ++j) b[j] -= row[j - i + kd_] * bi;
		}
	}

private:
	double& Lref(int i, int j) { return l_[static_cast<std::size_t>(i) * (kd_ + 1) + (j - i + kd_)]; }

	int n_ = 0;
	int kd_ = 0;
	std::vector<double> l_;
};

// LU with partial pivoting for general banded matrices (LINPACK/LAPACK gbtrf
// layout: the upper factor widens to 2 kd superdiagonals).
class BandedLU {
public:
	explicit BandedLU(BandedMatrix const& a) : n_(a.size()), kl_(a.half_bandwidth()), ku_(2 * a.half_bandwidth()),
		w_(kl_ + ku_ + 1), lu_(static_cast<std::size_t>(n_) * w_, 0.0), piv_(n_) {
		for (int i = 0; i < n_; ++i)
			for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + kl_); ++j) ref(i, j) = a(i, j);

		for (int k = 0; k < n_; ++k) {
			int const last = std::min(n_ - 1, k + kl_);
			int p = k;
			for (int i = k + 1; i <= last; ++i)
				if (std::abs(ref(i, k)) > std::abs(ref(p, k))) p = i;
			piv_[k] = p;
			if (ref(p, k) == 0.0) throw convergence_error("banded LU: singular matrix at column " + std::to_string(k));
			int const jend = std::min(n_ - 1, k + ku_);
			if (p != k)
				for (int j = k; j <= jend; ++j) std::swap(ref(k, j), ref(p, j));
			double const pivot = ref(k, k);
			for (int i = k + 1; i <= last; ++i) {
				double const m = ref(i, k) / pivot;
				ref(i, k) = m;
				if (m == 0.0) continue;
				for (int j = k + 1; j <= jend; ++j) ref(i, j) -= m * ref(k, j);
			}
		}
	}

	template <typename Scalar>
	void solve_in_place(std::span<Scalar> b) const {
		for (int k = 0; k < n_; ++k) {
			if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
			Scalar const bk = b[k];
			for (int i = k + 1; i <= std::min(n_ - 1, k + kl_); ++i) b[i] -= get(i, k) * bk;
		}
		for (int i = n_ - 1; i >= 0; --i) {
			Scalar s = b[i];
			for (int j = i + 1; j <= std::min(n_ - 1, i + ku_); ++j) s -= get(i, j) * b[j];
			b[i] = s / get(i, i);
		}
	}

private:
	double& ref(int i, int j) { return lu_[static_cast<std::size_t>(i) * w_ + (j - i + kl_)]; }
	double get(int i, int j) const { return lu_[static_cast<std::size_t>(i) * w_ + (j - i + kl_)]; }

	int n_, kl_, ku_, w_;
	std::vector<double> lu_;
	std::vector<int> piv_;
};

} // namespace hhg

#endif
