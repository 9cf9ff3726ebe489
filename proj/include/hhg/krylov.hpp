#ifndef HHG_KRYLOV_HPP
#define HHG_KRYLOV_HPP

#include <hhg/block_operator.hpp>
#include <hhg/errors.hpp>
#include <hhg/operators.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace hhg {

// y = H x (overwrites y).
using HamiltonianApply = std::function<void(std::span<complex const>, std::span<complex>)>;

struct KrylovConfig {
	int krylov_dim = 18;
	double residual_tol = 1e-12;
	int max_halvings = 12;
};

struct KrylovStats {
	long steps = 0;
	long iterations = 0;
	long halvings = 0;
	long breakdowns = 0;
};

namespace detail {

// exp(z Hm) e_1 for the leading m x m block of the Hessenberg matrix, using
// the Hermitian part (Hm is Hermitian up to round-off for Hermitian H).
inline Eigen::VectorXcd small_exp_e1(Eigen::MatrixXcd const& hess, int m, complex z) {
	Eigen::MatrixXcd h = hess.topLeftCorner(m, m);
	Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
	Eigen::VectorXcd coeff = es.eigenvectors().row(0).adjoint();
	for (int i = 0; i < m; ++i) coeff(i) *= std::exp(z * es.eigenvalues()(i));
	return es.eigenvectors() * coeff;
}

// y -= a x, spelled out in real arithmetic
inline void subtract_scaled(std::span<complex> y, std::span<complex const> x, complex a) {
	double* yp = reinterpret_cast<double*>(y.data());
	double const* xp = reinterpret_cast<double const*>(x.data());
	double const ar = a.real(), ai = a.imag();
	for (std::size_t k = 0; k < y.size(); ++k) {
		double const xr = xp[2 * k], xi = xp[2 * k + 1];
		yp[2 * k] -= ar * xr - ai * xi;
		yp[2 * k + 1] -= ar * xi + ai * xr;
	}
}

} // namespace detail

// Krylov approximation of c <- exp(z S^-1 H) c with S-orthonormal Arnoldi
// vectors. z = -i dt for real time, -dtau for imaginary time. The step is
// accepted once the standard a posteriori estimate h_{m+1,m} |[exp(z Hm) e1]_m|
// drops below the tolerance; otherwise the step is split in two halves
// (exact for fixed H) recursively.
class KrylovPropagator {
public:
	KrylovPropagator() = default;
	KrylovPropagator(int dimension, KrylovConfig cfg) : cfg_(cfg), dim_(dimension) {
		if (cfg_.krylov_dim < 1) throw parameter_error("propagator.krylov_dim", "must be positive");
		v_.assign(cfg_.krylov_dim + 1, cvector(dimension));
		sv_.assign(cfg_.krylov_dim + 1, cvector(dimension));
		u_.resize(dimension);
		w_.resize(dimension);
	}

	KrylovConfig const& config() const { return cfg_; }
	KrylovStats const& stats() const { return stats_; }

	void apply(HamiltonianApply const& h, OverlapSolver const& s, std::span<complex> c, complex z) {
		++stats_.steps;
		advance(h, s, c, z, 0);
	}

private:
	void advance(HamiltonianApply const& h, OverlapSolver const& s, std::span<complex> c, complex z, int depth) {
		if (try_step(h, s, c, z)) return;
		if (depth >= cfg_.max_halvings) throw convergence_error("Krylov step did not converge after repeated halving");
		++stats_.halvings;
		advance(h, s, c, 0.5 * z, depth + 1);
		advance(h, s, c, 0.5 * z, depth + 1);
	}

	bool try_step(HamiltonianApply const& h, OverlapSolver const& s, std::span<complex> c, complex z) {
		int const m_max = cfg_.krylov_dim;
		std::size_t const n = c.size();
		for (auto const& x : c)
			if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw convergence_error("non-finite coefficient entering Krylov step");

		s.apply(c, sv_[0]);
		double const beta = std::sqrt(std::max(0.0, dot(c, sv_[0]).real()));
		if (beta == 0.0) return true;
		for (std::size_t i = 0; i < n; ++i) {
			v_[0][i] = c[i] / beta;
			sv_[0][i] /= beta;
		}

		Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m_max + 1, m_max);
		for (int j = 0; j < m_max; ++j) {
			++stats_.iterations;
			h(v_[j], w_);                          // w = H v_j
			std::copy(w_.begin(), w_.end(), u_.begin());
			s.solve_in_place(u_);                  // u = S^-1 H v_j, S u = w
			// classical Gram-Schmidt in the S-inner product, repeated once when
			// the pass cancels most of the vector
			double norm_before = std::sqrt(std::max(0.0, dot(u_, w_).real()));
			double next = 0.0;
			for (int pass = 0; pass < 2; ++pass) {
				coef_.resize(j + 1);
				for (int i = 0; i <= j; ++i) coef_[i] = dot(v_[i], w_);
				for (int i = 0; i <= j; ++i) {
					hess(i, j) += coef_[i];
					detail::subtract_scaled(u_, v_[i], coef_[i]);
					detail::subtract_scaled(w_, sv_[i], coef_[i]);
				}
				next = std::sqrt(std::max(0.0, dot(u_, w_).real()));
				if (next > 0.5 * norm_before) break;
				norm_before = next;
			}
			hess(j + 1, j) = next;

			int const m = j + 1;
			Eigen::VectorXcd f = detail::small_exp_e1(hess, m, z);
			double scale = 0.0;
			for (int i = 0; i < m; ++i) scale = std::max(scale, std::abs(f(i)));
			// below this the next Arnoldi vector is rounding noise in the stiffest modes
			bool const breakdown = next <= 1e-10 * std::max(1.0, hess.topLeftCorner(m, m).cwiseAbs().maxCoeff());
			double const err = next * std::abs(f(m - 1));
			if (breakdown || err <= cfg_.residual_tol * std::max(1.0, scale)) {
				if (breakdown) ++stats_.breakdowns;
				for (std::size_t k = 0; k < n; ++k) {
					complex acc = 0.0;
					for (int i = 0; i < m; ++i) acc += f(i) * v_[i][k];
					c[k] = beta * acc;
				}
				return true;
			}
			for (std::size_t k = 0; k < n; ++k) {
				v_[j + 1][k] = u_[k] / next;
				sv_[j + 1][k] = w_[k] / next;
			}
		}
		return false;
	}

	KrylovConfig cfg_;
	int dim_ = 0;
	std::vector<cvector> v_, sv_;
	cvector u_, w_;
	std::vector<complex> coef_;
	KrylovStats stats_;
};

} // namespace hhg

#endif
