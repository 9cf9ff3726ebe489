#ifndef HHG_ABSORBER_HPP
#define HHG_ABSORBER_HPP

#include <hhg/basis.hpp>
#include <hhg/block_operator.hpp>
#include <hhg/errors.hpp>
#include <hhg/operators.hpp>

#include <cmath>
#include <numbers>
#include <span>

namespace hhg {

// m(r) = cos^(1/n)(pi (r - r0) / (2 (r_max - r0))) beyond r0, 1 inside.
inline double mask_value(double r, double r0, double r_max, double exponent) {
	if (r <= r0) return 1.0;
	if (r >= r_max) return 0.0;
	double const c = std::cos(0.5 * std::numbers::pi * (r - r0) / (r_max - r0));
	return std::pow(std::max(c, 0.0), 1.0 / exponent);
}

// Galerkin form of the mask, c <- S^-1 M c on every angular channel.
class Absorber {
public:
	Absorber() = default;
	Absorber(SpectralBasis const& basis, double start, double exponent)
		: start_(start), exponent_(exponent), n_radial_(basis.n_radial()), n_angular_(basis.n_angular()) {
		if (!(start > 0.0) || !(start < basis.r_max()))
			throw parameter_error("propagator.absorber_start", "must lie inside (0, r_max)");
		if (!(exponent > 0.0)) throw parameter_error("propagator.absorber_exponent", "must be positive");
		double const rmax = basis.r_max();
		mask_ = basis.radial_matrix([=](double r) { return mask_value(r, start, rmax, exponent); });
		// first radial function whose support reaches past r0
		auto const& knots = basis.splines().knots();
		first_touched_ = n_radial_;
		for (int a = 0; a < n_radial_; ++a)
			if (knots[a + 1 + basis.order()] > start) {
				first_touched_ = a;
				break;
			}
	}

	double start() const { return start_; }
	double exponent() const { return exponent_; }
	BandedMatrix const& mask_matrix() const { return mask_; }

	// Applies the mask and returns the S-norm it removed.
	double apply(OverlapSolver const& s, std::span<complex> c) const {
		double const before = s.norm2(c);
		cvector tmp(n_radial_);
		for (int l = 0; l < n_angular_; ++l) {
			auto cl = c.subspan(static_cast<std::size_t>(l) * n_radial_, n_radial_);
			bool touched = false;
			for (int a = first_touched_; a < n_radial_; ++a)
				if (cl[a] != 0.0) {
					touched = true;
					break;
				}
			if (!touched) continue;
			std::fill(tmp.begin(), tmp.end(), complex(0.0));
			mask_.multiply_add(std::span<complex const>(cl), std::span<complex>(tmp));
			s.cholesky().solve_in_place(std::span<complex>(tmp));
			std::copy(tmp.begin(), tmp.end(), cl.begin());
		}
		return before - s.norm2(c);
	}

private:
	double start_ = 0.0;
	double exponent_ = 8.0;
	int n_radial_ = 0;
	int n_angular_ = 0;
	int first_touched_ = 0;
	BandedMatrix mask_;
};

} // namespace hhg

#endif
