#ifndef HHG_OPERATORS_HPP
#define HHG_OPERATORS_HPP

#include <hhg/basis.hpp>
#include <hhg/block_operator.hpp>
#include <hhg/errors.hpp>
#include <hhg/quadrature.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <string_view>

namespace hhg {

enum class Gauge { length, velocity };

inline Gauge parse_gauge(std::string_view s) {
	if (s == "length") return Gauge::length;
	if (s == "velocity") return Gauge::velocity;
	throw parameter_error("gauge", "unknown gauge tag '" + std::string(s) + "'");
}

inline char const* to_string(Gauge g) { return g == Gauge::length ? "length" : "velocity"; }

// <Y_{l+1,0}| cos(theta) |Y_{l,0}>
inline double cos_theta_coupling(int l) {
	return (l + 1.0) / std::sqrt((2.0 * l + 1.0) * (2.0 * l + 3.0));
}

// <Y_{lp,0}| P_L(cos theta) |Y_{l,0}> by Gauss-Legendre in cos(theta).
inline double legendre_coupling(int lp, int L, int l) {
	if ((lp + L + l) % 2 != 0 || L < std::abs(lp - l) || L > lp + l) return 0.0;
	auto const rule = gauss_legendre((lp + L + l) / 2 + 2);
	double s = 0.0;
	for (std::size_t i = 0; i < rule.size(); ++i) {
		double const x = rule.nodes[i];
		s += rule.weights[i] * legendre(lp, x) * legendre(L, x) * legendre(l, x);
	}
	return 0.5 * std::sqrt((2.0 * lp + 1.0) * (2.0 * l + 1.0)) * s;
}

// Same radial block on every angular channel.
inline BandedBlockOperator block_diagonal(SpectralBasis const& basis, BandedMatrix const& radial) {
	BandedBlockOperator op(basis.n_radial(), basis.n_angular(), basis.half_bandwidth());
	for (int l = 0; l <= basis.l_max(); ++l) op.add_block(l, l, radial);
	return op;
}

inline BandedBlockOperator overlap_matrix(SpectralBasis const& basis) {
	return block_diagonal(basis, overlap_radial(basis));
}

// cos(theta) f(r) with f a radial multiplier: blocks only for l' = l +- 1.
inline BandedBlockOperator cos_theta_operator(SpectralBasis const& basis, BandedMatrix const& radial) {
	BandedBlockOperator op(basis.n_radial(), basis.n_angular(), basis.half_bandwidth());
	for (int l = 0; l < basis.l_max(); ++l) {
		double const a = cos_theta_coupling(l);
		BandedMatrix m = radial;
		for (auto& v : m.raw()) v *= a;
		op.add_block(l + 1, l, m);
		op.add_block(l, l + 1, std::move(m));
	}
	return op;
}

// Dipole coupling stored field-free together with its gauge; the propagator
// scales it by E(t) (length) or A(t) (velocity).
struct DipoleCoupling {
	Gauge gauge = Gauge::length;
	BandedBlockOperator op;

	double field_scale(double electric_field, double vector_potential) const {
		return gauge == Gauge::length ? electric_field : vector_potential;
	}
};

// Length gauge: z = r cos(theta). Velocity gauge: p_z = -i d/dz, whose radial
// parts on reduced functions are (d/dr - (l+1)/r) for l -> l+1 and
// (d/dr + l/r) for l -> l-1.
inline DipoleCoupling dipole_coupling(SpectralBasis const& basis, Gauge gauge) {
	if (gauge == Gauge::length) {
		return {gauge, cos_theta_operator(basis, basis.radial_matrix([](double r) { return r; }))};
	}
	BandedBlockOperator op(basis.n_radial(), basis.n_angular(), basis.half_bandwidth(), true, complex(0.0, -1.0));
	for (int l = 0; l < basis.l_max(); ++l) {
		double const c = cos_theta_coupling(l);
		double const lp1 = l + 1.0;
		// <l+1| d/dz |l>
		op.add_block(l + 1, l, basis.assemble([&](double r, double va, double, double vb, double db) {
			return c * va * (db - lp1 * vb / r);
		}));
		// <l| d/dz |l+1>
		op.add_block(l, l + 1, basis.assemble([&](double r, double va, double, double vb, double db) {
			return c * va * (db + lp1 * vb / r);
		}));
	}
	return {gauge, std::move(op)};
}

// Field-free Hamiltonian for a central potential: block diagonal in l.
inline BandedBlockOperator central_hamiltonian(SpectralBasis const& basis, std::function<double(double)> const& potential) {
	BandedBlockOperator op(basis.n_radial(), basis.n_angular(), basis.half_bandwidth());
	for (int l = 0; l <= basis.l_max(); ++l) op.add_block(l, l, radial_hamiltonian_block(basis, l, potential));
	return op;
}

// Cholesky-factored radial overlap shared by all channels: S x and S^-1 x.
class OverlapSolver {
public:
	OverlapSolver() = default;
	explicit OverlapSolver(SpectralBasis const& basis)
		: n_radial_(basis.n_radial()), n_angular_(basis.n_angular()), s_(overlap_radial(basis)), chol_(s_) {}

	int dimension() const { return n_radial_ * n_angular_; }
	BandedMatrix const& radial() const { return s_; }
	BandedCholesky const& cholesky() const { return chol_; }

	void apply(std::span<complex const> x, std::span<complex> y) const {
		std::fill(y.begin(), y.end(), complex(0.0));
		for (int l = 0; l < n_angular_; ++l) s_.multiply_add(x.subspan(offset(l), n_radial_), y.subspan(offset(l), n_radial_));
	}

	void solve_in_place(std::span<complex> x) const {
		for (int l = 0; l < n_angular_; ++l) chol_.solve_in_place(x.subspan(offset(l), n_radial_));
	}

	complex inner(std::span<complex const> a, std::span<complex const> b) const {
		cvector sb(b.size());
		apply(b, sb);
		return dot(a, sb);
	}

	double norm2(std::span<complex const> a) const { return inner(a, a).real(); }

private:
	std::size_t offset(int l) const { return static_cast<std::size_t>(l) * n_radial_; }

	int n_radial_ = 0;
	int n_angular_ = 0;
	BandedMatrix s_;
	BandedCholesky chol_;
};

} // namespace hhg

#endif
