#ifndef HHG_SAE_HPP
#define HHG_SAE_HPP

#include <hhg/basis.hpp>
#include <hhg/block_operator.hpp>
#include <hhg/eigensolve.hpp>
#include <hhg/errors.hpp>
#include <hhg/krylov.hpp>
#include <hhg/operators.hpp>
#include <hhg/pulse.hpp>
#include <hhg/spectral_cap.hpp>

#include <cmath>
#include <memory>

namespace hhg {

// Short-range-corrected Coulomb potential for the helium single active electron:
// V(r) = -(Z + a1 exp(-a2 r) + a3 r exp(-a4 r) + a5 exp(-a6 r)) / r
struct ModelPotential {
	double Z = 1.0;
	double a1 = 1.231;
	double a2 = 0.662;
	double a3 = -1.325;
	double a4 = 1.236;
	double a5 = -0.231;
	double a6 = 0.480;

	// -r V(r); tends to Z + a1 + a5 at the origin and Z at infinity
	double effective_charge(double r) const {
		return Z + a1 * std::exp(-a2 * r) + a3 * r * std::exp(-a4 * r) + a5 * std::exp(-a6 * r);
	}

	double operator()(double r) const {
		if (!(r > 0.0)) throw parameter_error("r", "model potential needs r > 0");
		return -effective_charge(r) / r;
	}

	// dV/dr
	double derivative(double r) const {
		double const q = effective_charge(r);
		double const dq = -a1 * a2 * std::exp(-a2 * r) + a3 * (1.0 - a4 * r) * std::exp(-a4 * r) - a5 * a6 * std::exp(-a6 * r);
		return q / (r * r) - dq / r;
	}
};

inline double tong_lin(double r, ModelPotential const& p = {}) { return p(r); }

inline BandedBlockOperator assemble_sae(SpectralBasis const& basis, ModelPotential const& potential) {
	return central_hamiltonian(basis, [&](double r) { return potential(r); });
}

// H(t) = H0 + E(t) z (length) or H0 + A(t) p_z (velocity), evaluated as a
// matrix-free apply; nothing is reassembled per step.
inline HamiltonianApply sae_hamiltonian_at(double t, BandedBlockOperator const& h0, DipoleCoupling const& coupling,
                                           PulseParams const& pulse, Gauge gauge, SpectralCap const* cap = nullptr) {
	if (coupling.gauge != gauge) throw parameter_error("gauge", "coupling operator was built for the other gauge");
	double const scale = coupling.field_scale(electric_field(pulse, t), vector_potential(pulse, t));
	return [&h0, &coupling, scale, cap](std::span<complex const> x, std::span<complex> y) {
		std::fill(y.begin(), y.end(), complex(0.0));
		h0.apply_add(x, y);
		if (cap) cap->apply_add(x, y);
		if (scale != 0.0) coupling.op.apply_add(x, y, scale);
	};
}

// Everything the single-active-electron propagation needs, assembled once.
class SaeModel {
public:
	// energy_cap <= 0 leaves the spline spectrum as is.
	SaeModel(SpectralBasis basis, ModelPotential potential, Gauge gauge, double energy_cap = 0.0)
		: basis_(std::make_shared<SpectralBasis const>(std::move(basis))), potential_(potential), gauge_(gauge),
		  overlap_(*basis_), h0_(assemble_sae(*basis_, potential_)), coupling_(dipole_coupling(*basis_, gauge)),
		  z_(gauge == Gauge::length ? coupling_.op : dipole_coupling(*basis_, Gauge::length).op),
		  force_(cos_theta_operator(*basis_, basis_->radial_matrix([this](double r) { return potential_.derivative(r); }))) {
		if (energy_cap > 0.0) cap_ = std::make_shared<SpectralCap const>(h0_, overlap_.radial(), energy_cap);
	}

	SpectralBasis const& basis() const { return *basis_; }
	ModelPotential const& potential() const { return potential_; }
	Gauge gauge() const { return gauge_; }
	OverlapSolver const& overlap() const { return overlap_; }
	BandedBlockOperator const& h0() const { return h0_; }
	DipoleCoupling const& coupling() const { return coupling_; }
	BandedBlockOperator const& position_z() const { return z_; }
	BandedBlockOperator const& force_z() const { return force_; }
	SpectralCap const* spectral_cap() const { return cap_.get(); }

	// Electrons represented by the orbital (two equivalent 1s electrons).
	static constexpr double occupancy = 2.0;

	// Lowest l = 0 state by banded shift-invert.
	EigenPair ground_state() const {
		auto const* blk = h0_.find(0, 0);
		double const zmax = potential_.Z + std::max(0.0, potential_.a1) + std::max(0.0, potential_.a5);
		return lowest_eigenpair(blk->matrix, overlap_.radial(), -0.5 * zmax * zmax - 1.0);
	}

	cvector ground_state_vector() const { return embed(ground_state().vector, 0); }

	cvector embed(std::vector<double> const& radial, int l) const {
		cvector c(basis_->dimension(), 0.0);
		for (int n = 0; n < basis_->n_radial(); ++n) c[basis_->offset(l) + n] = radial[n];
		return c;
	}

	HamiltonianApply hamiltonian_at(double t, PulseParams const& pulse) const {
		return sae_hamiltonian_at(t, h0_, coupling_, pulse, gauge_, cap_.get());
	}

	// <dV/dz> for the binding potential.
	double force_expectation(std::span<complex const> c) const { return force_.expectation(c, c).real(); }

private:
	std::shared_ptr<SpectralBasis const> basis_;
	ModelPotential potential_;
	Gauge gauge_;
	OverlapSolver overlap_;
	BandedBlockOperator h0_;
	DipoleCoupling coupling_;
	BandedBlockOperator z_;
	BandedBlockOperator force_;
	std::shared_ptr<SpectralCap const> cap_;
};

} // namespace hhg

#endif
