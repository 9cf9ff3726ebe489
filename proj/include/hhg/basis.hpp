#ifndef HHG_BASIS_HPP
#define HHG_BASIS_HPP

#include <hhg/banded.hpp>
#include <hhg/bspline.hpp>
#include <hhg/errors.hpp>
#include <hhg/quadrature.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace hhg {

struct BasisParams {
	double r_max = 120.0;
	int n_splines = 1050;
	int k = 9;
	int l_max = 20;
	KnotDistribution knots = KnotDistribution::sinh;
	double inner_radius = 10.0;
	double inner_fraction = 1.0 / 3.0;
	int quad_points = 0;    // per knot interval; 0 means k
};

// Radial B-spline basis times Legendre (Y_l0) angular functions. Wavefunction
// psi(r, theta) = sum c_{nl} B_n(r)/r Y_l0(theta); the splines nonzero at r = 0
// and r = r_max are dropped, so every represented function vanishes there.
//
// Quadrature nodes are stored interval by interval and the k nonzero spline
// values/derivatives at every node are tabulated once.
class SpectralBasis {
public:
	SpectralBasis() = default;

	explicit SpectralBasis(BasisParams const& params) : params_(params) {
		if (params.k < 3 || params.k > max_spline_order) throw parameter_error("basis.k", "spline order must lie in [3, 16]");
		if (params.n_splines < params.k + 2) throw parameter_error("basis.n_splines", "need at least k + 2 splines");
		if (!(params.r_max > 0.0)) throw parameter_error("basis.r_max", "must be positive");
		if (params.l_max < 0) throw parameter_error("basis.l_max", "must be non-negative");
		int const intervals = params.n_splines - params.k + 1;
		splines_ = BSplineSet(params.k, make_breakpoints(params.r_max, intervals, params.knots, params.inner_radius, params.inner_fraction));
		nq_ = params.quad_points > 0 ? params.quad_points : params.k;
		if (nq_ < params.k) throw parameter_error("basis.quad_points", "need at least k nodes per interval");

		auto const ref = gauss_legendre(nq_);
		int const k = params.k;
		std::size_t const total = static_cast<std::size_t>(intervals) * nq_;
		nodes_.resize(total);
		weights_.resize(total);
		values_.resize(total * k);
		derivs_.resize(total * k);
		auto const& bp = splines_.breakpoints();
		for (int j = 0; j < intervals; ++j) {
			auto const rule = mapped(ref, bp[j], bp[j + 1]);
			for (int q = 0; q < nq_; ++q) {
				std::size_t const idx = static_cast<std::size_t>(j) * nq_ + q;
				nodes_[idx] = rule.nodes[q];
				weights_[idx] = rule.weights[q];
				splines_.evaluate(rule.nodes[q], j, std::span(values_.data() + idx * k, k), std::span(derivs_.data() + idx * k, k));
			}
		}
	}

	BasisParams const& params() const { return params_; }
	BSplineSet const& splines() const { return splines_; }
	int order() const { return params_.k; }
	int l_max() const { return params_.l_max; }
	int n_angular() const { return params_.l_max + 1; }
	double r_max() const { return params_.r_max; }

	// Number of radial functions (boundary splines excluded).
	int n_radial() const { return splines_.size() - 2; }
	int dimension() const { return n_radial() * n_angular(); }
	int half_bandwidth() const { return params_.k - 1; }

	int intervals() const { return splines_.intervals(); }
	int nodes_per_interval() const { return nq_; }
	std::size_t n_nodes() const { return nodes_.size(); }
	std::vector<double> const& nodes() const { return nodes_; }
	std::vector<double> const& weights() const { return weights_; }

	// Active index of the first spline tabulated on `interval` (may be -1: the dropped B_0).
	int first_active(int interval) const { return interval - 1; }

	double value(std::size_t node, int a) const { return values_[node * params_.k + a]; }
	double derivative(std::size_t node, int a) const { return derivs_[node * params_.k + a]; }

	// Banded radial matrix with entries sum_q w_q g(q, a-term, b-term) over all
	// node pairs. The kernel receives (r, Ba, dBa, Bb, dBb).
	template <typename Kernel>
	BandedMatrix assemble(Kernel&& kernel) const {
		int const n = n_radial(), k = params_.k;
		BandedMatrix m(n, k - 1);
		for (int j = 0; j < intervals(); ++j) {
			int const first = first_active(j);
			for (int q = 0; q < nq_; ++q) {
				std::size_t const node = static_cast<std::size_t>(j) * nq_ + q;
				double const r = nodes_[node], w = weights_[node];
				for (int a = 0; a < k; ++a) {
					int const ia = first + a;
					if (ia < 0 || ia >= n) continue;
					for (int b = 0; b < k; ++b) {
						int const ib = first + b;
						if (ib < 0 || ib >= n) continue;
						m.at(ia, ib) += w * kernel(r, value(node, a), derivative(node, a), value(node, b), derivative(node, b));
					}
				}
			}
		}
		return m;
	}

	// int B_a B_b f(r) dr
	BandedMatrix radial_matrix(std::function<double(double)> const& f) const {
		return assemble([&](double r, double va, double, double vb, double) { return va * vb * f(r); });
	}

	// Same with f tabulated at the quadrature nodes.
	BandedMatrix radial_matrix_from_nodes(std::span<double const> f_at_nodes) const {
		int const n = n_radial(), k = params_.k;
		BandedMatrix m(n, k - 1);
		for (int j = 0; j < intervals(); ++j) {
			int const first = first_active(j);
			for (int q = 0; q < nq_; ++q) {
				std::size_t const node = static_cast<std::size_t>(j) * nq_ + q;
				double const wf = weights_[node] * f_at_nodes[node];
				double const* v = values_.data() + node * k;
				for (int a = 0; a < k; ++a) {
					int const ia = first + a;
					if (ia < 0 || ia >= n) continue;
					double const wa = wf * v[a];
					for (int b = 0; b < k; ++b) {
						int const ib = first + b;
						if (ib < 0 || ib >= n) continue;
						m.at(ia, ib) += wa * v[b];
					}
				}
			}
		}
		return m;
	}

	// u(r) = sum_n c_n B_n(r) at every node, for one angular channel.
	template <typename Scalar>
	void radial_values_at_nodes(std::span<Scalar const> coeffs, std::span<Scalar> out) const {
		int const n = n_radial(), k = params_.k;
		for (int j = 0; j < intervals(); ++j) {
			int const first = first_active(j);
			for (int q = 0; q < nq_; ++q) {
				std::size_t const node = static_cast<std::size_t>(j) * nq_ + q;
				Scalar s{};
				for (int a = 0; a < k; ++a) {
					int const ia = first + a;
					if (ia >= 0 && ia < n) s += values_[node * k + a] * coeffs[ia];
				}
				out[node] = s;
			}
		}
	}

	// Projection b_n = sum_q w_q B_n(r_q) f(r_q).
	template <typename Scalar>
	void project_from_nodes(std::span<Scalar const> f, std::span<Scalar> out) const {
		int const n = n_radial(), k = params_.k;
		std::fill(out.begin(), out.end(), Scalar{});
		for (int j = 0; j < intervals(); ++j) {
			int const first = first_active(j);
			for (int q = 0; q < nq_; ++q) {
				std::size_t const node = static_cast<std::size_t>(j) * nq_ + q;
				Scalar const wf = weights_[node] * f[node];
				for (int a = 0; a < k; ++a) {
					int const ia = first + a;
					if (ia >= 0 && ia < n) out[ia] += values_[node * k + a] * wf;
				}
			}
		}
	}

	// u(r) at an arbitrary radius for one channel.
	template <typename Scalar>
	Scalar radial_value(std::span<Scalar const> coeffs, double r) const {
		if (r <= 0.0 || r >= r_max()) return Scalar{};
		int const j = splines_.interval_of(r), k = params_.k, n = n_radial();
		std::array<double, max_spline_order> v{}, d{};
		splines_.evaluate(r, j, std::span(v.data(), k), std::span(d.data(), k));
		Scalar s{};
		for (int a = 0; a < k; ++a) {
			int const ia = first_active(j) + a;
			if (ia >= 0 && ia < n) s += v[a] * coeffs[ia];
		}
		return s;
	}

	int offset(int l) const { return l * n_radial(); }

private:
	BasisParams params_;
	BSplineSet splines_;
	int nq_ = 0;
	std::vector<double> nodes_, weights_, values_, derivs_;
};

inline SpectralBasis build_basis(double r_max, int n_splines, int k, int l_max, KnotDistribution dist) {
	BasisParams p;
	p.r_max = r_max;
	p.n_splines = n_splines;
	p.k = k;
	p.l_max = l_max;
	p.knots = dist;
	return SpectralBasis(p);
}

inline BandedMatrix overlap_radial(SpectralBasis const& basis) {
	return basis.assemble([](double, double va, double, double vb, double) { return va * vb; });
}

// -1/2 d^2/dr^2 + l(l+1)/(2 r^2) + V(r) on reduced radial functions; the
// kinetic part is integrated by parts into 1/2 int B_a' B_b' dr.
inline BandedMatrix radial_hamiltonian_block(SpectralBasis const& basis, int l, std::function<double(double)> const& potential) {
	if (l < 0 || l > basis.l_max()) throw parameter_error("l", "outside [0, l_max]");
	double const cent = 0.5 * l * (l + 1);
	return basis.assemble([&](double r, double va, double da, double vb, double db) {
		double v = 0.0;
		if (potential) v = potential(r);
		return 0.5 * da * db + va * vb * (cent / (r * r) + v);
	});
}

} // namespace hhg

#endif
