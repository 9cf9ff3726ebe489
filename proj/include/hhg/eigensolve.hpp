#ifndef HHG_EIGENSOLVE_HPP
#define HHG_EIGENSOLVE_HPP

#include <hhg/banded.hpp>
#include <hhg/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace hhg {

struct EigenPair {
	double value = 0.0;
	std::vector<double> vector; // S-normalized
};

namespace detail {

inline double s_dot(BandedMatrix const& s, std::span<double const> a, std::span<double const> b) {
	std::vector<double> sb(b.size(), 0.0);
	s.multiply_add(b, std::span<double>(sb));
	double r = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) r += a[i] * sb[i];
	return r;
}

inline double rayleigh(BandedMatrix const& h, BandedMatrix const& s, std::span<double const> x) {
	std::vector<double> hx(x.size(), 0.0);
	h.multiply_add(x, std::span<double>(hx));
	double num = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) num += x[i] * hx[i];
	return num / s_dot(s, x, x);
}

// max |H x - lambda S x| / max |x|
inline double residual(BandedMatrix const& h, BandedMatrix const& s, std::span<double const> x, double lambda) {
	std::vector<double> r(x.size(), 0.0);
	h.multiply_add(x, std::span<double>(r));
	s.multiply_add(x, std::span<double>(r), -lambda);
	double rm = 0.0, xm = 0.0;
	for (std::size_t i = 0; i < x.size(); ++i) {
		rm = std::max(rm, std::abs(r[i]));
		xm = std::max(xm, std::abs(x[i]));
	}
	return rm / xm;
}

} // namespace detail

// Lowest eigenpair of H x = E S x by shift-invert inverse iteration.
// `lower_bound` must lie below the lowest eigenvalue; once the Rayleigh
// quotient settles the shift is moved up under it to finish quickly.
inline EigenPair lowest_eigenpair(BandedMatrix const& h, BandedMatrix const& s, double lower_bound, double tol = 1e-13, int max_iter = 500) {
	int const n = h.size();
	std::vector<double> x(n, 1.0), y(n);
	double sigma = lower_bound;
	auto factor = [&](double shift) {
		BandedMatrix a = h;
		a.add_scaled(s, -shift);
		return BandedLU(a);
	};
	BandedLU lu = factor(sigma);
	double lambda = detail::rayleigh(h, s, x), prev = lambda;
	bool shifted = false;
	for (int it = 0; it < max_iter; ++it) {
		std::fill(y.begin(), y.end(), 0.0);
		s.multiply_add(std::span<double const>(x), std::span<double>(y));
		lu.solve_in_place(std::span<double>(y));
		double const nrm = std::sqrt(detail::s_dot(s, y, y));
		for (int i = 0; i < n; ++i) x[i] = y[i] / nrm;
		lambda = detail::rayleigh(h, s, x);
		double const change = std::abs(lambda - prev);
		prev = lambda;
		if (!shifted && change < 1e-6 * std::max(1.0, std::abs(lambda))) {
			// gap-independent finish: shift just below the estimate
			sigma = lambda - 1e-4 * std::max(1.0, std::abs(lambda));
			lu = factor(sigma);
			shifted = true;
			continue;
		}
		if (shifted && change < tol * std::max(1.0, std::abs(lambda)) && detail::residual(h, s, x, lambda) < 1e3 * tol) {
			// fix the sign so the largest component is positive
			std::size_t imax = 0;
			for (std::size_t i = 1; i < x.size(); ++i)
				if (std::abs(x[i]) > std::abs(x[imax])) imax = i;
			if (x[imax] < 0.0)
				for (auto& v : x) v = -v;
			return {lambda, x};
		}
	}
	throw convergence_error("shift-invert eigensolve did not converge");
}

// Dense generalized eigen-decomposition of one radial block. Used for bound
// state bookkeeping and as an independent check of the banded solver.
inline std::vector<EigenPair> dense_eigenpairs(BandedMatrix const& h, BandedMatrix const& s, int count) {
	int const n = h.size();
	Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n), S = Eigen::MatrixXd::Zero(n, n);
	for (int i = 0; i < n; ++i)
		for (int j = std::max(0, i - h.half_bandwidth()); j <= std::min(n - 1, i + h.half_bandwidth()); ++j) {
			H(i, j) = h(i, j);
			S(i, j) = s(i, j);
		}
	Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(H, S);
	if (es.info() != Eigen::Success) throw convergence_error("dense generalized eigensolve failed");
	std::vector<EigenPair> out;
	for (int c = 0; c < std::min(count, n); ++c) {
		EigenPair p;
		p.value = es.eigenvalues()(c);
		p.vector.assign(es.eigenvectors().col(c).data(), es.eigenvectors().col(c).data() + n);
		double const nrm = std::sqrt(detail::s_dot(s, p.vector, p.vector));
		for (auto& v : p.vector) v /= nrm;
		out.push_back(std::move(p));
	}
	return out;
}

} // namespace hhg

#endif
