#ifndef HHG_TDDFT_HPP
#define HHG_TDDFT_HPP

#include <hhg/basis.hpp>
#include <hhg/block_operator.hpp>
#include <hhg/eigensolve.hpp>
#include <hhg/errors.hpp>
#include <hhg/krylov.hpp>
#include <hhg/operators.hpp>
#include <hhg/pulse.hpp>
#include <hhg/quadrature.hpp>
#include <hhg/spectral_cap.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace hhg {

enum class Functional { xlda };

// How the single Kohn-Sham orbital is occupied.
//  closed_shell:   n_up = n_down = |psi|^2 (neutral helium)
//  one_polarized:  n_up = |psi|^2, n_down = 0 (one electron, spin polarized)
//  one_unpolarized: n_up = n_down = |psi|^2 / 2 (one electron, spin averaged)
//  bare:           no Hartree or exchange at all (hydrogenic)
enum class Occupation { closed_shell, one_polarized, one_unpolarized, bare };

inline double electron_count(Occupation o) { return o == Occupation::closed_shell ? 2.0 : 1.0; }

inline constexpr double xlda_potential_prefactor = 1.2407009817988; // (6/pi)^(1/3)
inline constexpr double xlda_energy_prefactor = 0.9305257363491;    // (3/2) (3/(4 pi))^(1/3)

struct XldaResult {
	double potential = 0.0;
	bool clamped = false; // density below -1e-12 was seen
};

// Exchange-only LDA potential for one spin channel of density n_sigma.
inline XldaResult xlda(double n_sigma) {
	XldaResult r;
	if (n_sigma < -1e-12) r.clamped = true;
	if (n_sigma <= 0.0) return r;
	r.potential = -xlda_potential_prefactor * std::cbrt(n_sigma);
	return r;
}

inline double xlda_energy_density(double n_sigma) {
	if (n_sigma <= 0.0) return 0.0;
	return -xlda_energy_prefactor * n_sigma * std::cbrt(n_sigma);
}

// Density on the (radial node x angular node) product grid plus its Legendre
// multipoles n(r, theta) = sum_L n_L(r) P_L(cos theta).
struct DensityField {
	std::size_t n_radial_nodes = 0;
	int n_angular_nodes = 0;
	std::vector<double> values;                // [q * n_angular_nodes + j]
	std::vector<std::vector<double>> multipoles; // [L][q]
	double electrons = 0.0;                      // integral of n
	long clamped_points = 0;

	double at(std::size_t q, int j) const { return values[q * n_angular_nodes + j]; }
};

// Multipole components of the Hartree + exchange potential at the radial nodes.
struct KsPotential {
	std::vector<std::vector<double>> multipoles; // [L][q]
	std::vector<bool> active;                    // multipole L is non-negligible
	double hartree_energy = 0.0;                 // 1/2 int V_H n
	double exchange_energy = 0.0;

	static KsPotential average(KsPotential const& a, KsPotential const& b) {
		KsPotential r = a;
		for (std::size_t L = 0; L < r.multipoles.size(); ++L) {
			r.active[L] = a.active[L] || b.active[L];
			for (std::size_t q = 0; q < r.multipoles[L].size(); ++q) r.multipoles[L][q] = 0.5 * (a.multipoles[L][q] + b.multipoles[L][q]);
		}
		r.hartree_energy = 0.5 * (a.hartree_energy + b.hartree_energy);
		r.exchange_energy = 0.5 * (a.exchange_energy + b.exchange_energy);
		return r;
	}
};

// Galerkin matrices M_L = int B_a B_b v_L(r) dr of a multipole potential,
// applied through the angular couplings <Y_l'| P_L |Y_l>.
class MultipoleOperator {
public:
	MultipoleOperator() = default;
	MultipoleOperator(SpectralBasis const& basis, KsPotential const& pot, std::vector<std::vector<double>> const* couplings)
		: n_radial_(basis.n_radial()), n_angular_(basis.n_angular()), couplings_(couplings) {
		for (std::size_t L = 0; L < pot.multipoles.size(); ++L) {
			if (!pot.active[L]) continue;
			orders_.push_back(static_cast<int>(L));
			matrices_.push_back(basis.radial_matrix_from_nodes(pot.multipoles[L]));
		}
	}

	// y += M x
	void apply_add(std::span<complex const> x, std::span<complex> y) const {
		cvector tmp(n_radial_);
		int const na = n_angular_;
		for (std::size_t i = 0; i < orders_.size(); ++i) {
			int const L = orders_[i];
			auto const& g = (*couplings_)[L]; // g[lp * na + l]
			for (int l = 0; l < na; ++l) {
				bool any = false;
				for (int lp = std::max(0, l - L); lp <= std::min(na - 1, l + L); lp += 1)
					if (g[lp * na + l] != 0.0) { any = true; break; }
				if (!any) continue;
				std::fill(tmp.begin(), tmp.end(), complex(0.0));
				matrices_[i].multiply_add(x.subspan(static_cast<std::size_t>(l) * n_radial_, n_radial_), std::span<complex>(tmp));
				for (int lp = std::max(0, l - L); lp <= std::min(na - 1, l + L); ++lp) {
					double const c = g[lp * na + l];
					if (c == 0.0) continue;
					complex* yl = y.data() + static_cast<std::size_t>(lp) * n_radial_;
					for (int n = 0; n < n_radial_; ++n) yl[n] += c * tmp[n];
				}
			}
		}
	}

	// Explicit block form (for inspection and tests).
	BandedBlockOperator as_block_operator(int half_bandwidth) const {
		BandedBlockOperator op(n_radial_, n_angular_, half_bandwidth);
		int const na = n_angular_;
		for (int lp = 0; lp < na; ++lp)
			for (int l = 0; l < na; ++l) {
				BandedMatrix m(n_radial_, half_bandwidth);
				bool any = false;
				for (std::size_t i = 0; i < orders_.size(); ++i) {
					double const c = (*couplings_)[orders_[i]][lp * na + l];
					if (c == 0.0) continue;
					m.add_scaled(matrices_[i], c);
					any = true;
				}
				if (any) op.add_block(lp, l, std::move(m));
			}
		return op;
	}

private:
	int n_radial_ = 0;
	int n_angular_ = 0;
	std::vector<std::vector<double>> const* couplings_ = nullptr;
	std::vector<int> orders_;
	std::vector<BandedMatrix> matrices_;
};

struct KsGroundState {
	cvector orbital;
	double total_energy = 0.0;
	double orbital_energy = 0.0;
	int iterations = 0;
	std::vector<double> energy_trace;
};

struct ImaginaryTimeConfig {
	double dtau = 0.2;
	double energy_tol = 1e-10;
	int max_steps = 5000;
	KrylovConfig krylov{30, 1e-10, 20};
};

// Time-dependent Kohn-Sham model for helium in the exchange-only LDA,
// discretized on the same B-spline x Legendre basis as the SAE model.
// Hartree from the multipole expansion of 1/|r - r'| truncated at L_H.
class KsModel {
public:
	KsModel(SpectralBasis basis, Gauge gauge, double nuclear_charge = 2.0, Occupation occupation = Occupation::closed_shell,
	        int hartree_lmax = -1, double energy_cap = 0.0)
		: basis_(std::make_shared<SpectralBasis const>(std::move(basis))), gauge_(gauge), charge_(nuclear_charge),
		  occupation_(occupation), overlap_(*basis_) {
		int const lmax = basis_->l_max();
		lh_ = hartree_lmax >= 0 ? hartree_lmax : std::min(2 * lmax, 8);
		h_core_ = central_hamiltonian(*basis_, [z = charge_](double r) { return -z / r; });
		if (energy_cap > 0.0) cap_ = std::make_shared<SpectralCap const>(h_core_, overlap_.radial(), energy_cap);
		coupling_ = dipole_coupling(*basis_, gauge);
		z_ = gauge == Gauge::length ? coupling_.op : dipole_coupling(*basis_, Gauge::length).op;
		force_ = cos_theta_operator(*basis_, basis_->radial_matrix([z = charge_](double r) { return z / (r * r); }));

		int const na = lmax + 1;
		angular_ = gauss_legendre(std::max(lmax + lh_ / 2 + 1, 2 * lmax + 2));
		int const nt = static_cast<int>(angular_.size());
		ylm_.assign(static_cast<std::size_t>(na) * nt, 0.0);
		for (int l = 0; l < na; ++l)
			for (int j = 0; j < nt; ++j)
				ylm_[l * nt + j] = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) * legendre(l, angular_.nodes[j]);
		pl_.assign(static_cast<std::size_t>(lh_ + 1) * nt, 0.0);
		for (int L = 0; L <= lh_; ++L)
			for (int j = 0; j < nt; ++j) pl_[L * nt + j] = legendre(L, angular_.nodes[j]);
		couplings_.assign(lh_ + 1, std::vector<double>(static_cast<std::size_t>(na) * na, 0.0));
		for (int L = 0; L <= lh_; ++L)
			for (int lp = 0; lp < na; ++lp)
				for (int l = 0; l < na; ++l) couplings_[L][lp * na + l] = legendre_coupling(lp, L, l);

		// radial Poisson operators: 2 x (kinetic + centrifugal) for each multipole
		for (int L = 0; L <= lh_; ++L) {
			BandedMatrix k = basis_->assemble([](double, double, double da, double, double db) { return da * db; });
			BandedMatrix c = basis_->radial_matrix([L](double r) { return L * (L + 1.0) / (r * r); });
			k.add_scaled(c, 1.0);
			poisson_.emplace_back(k);
		}
	}

	SpectralBasis const& basis() const { return *basis_; }
	Gauge gauge() const { return gauge_; }
	double nuclear_charge() const { return charge_; }
	Occupation occupation() const { return occupation_; }
	double occupancy() const { return electron_count(occupation_); }
	int hartree_lmax() const { return lh_; }
	OverlapSolver const& overlap() const { return overlap_; }
	BandedBlockOperator const& h_core() const { return h_core_; }
	DipoleCoupling const& coupling() const { return coupling_; }
	BandedBlockOperator const& position_z() const { return z_; }
	BandedBlockOperator const& force_z() const { return force_; }
	QuadratureRule const& angular_rule() const { return angular_; }
	SpectralCap const* spectral_cap() const { return cap_.get(); }

	// psi(r_q, x_j) on the product grid.
	std::vector<complex> orbital_on_grid(std::span<complex const> c) const {
		int const na = basis_->n_angular(), nt = static_cast<int>(angular_.size());
		std::size_t const nq = basis_->n_nodes();
		std::vector<complex> psi(nq * nt, 0.0);
		cvector u(nq);
		auto const& r = basis_->nodes();
		for (int l = 0; l < na; ++l) {
			auto const cl = c.subspan(basis_->offset(l), basis_->n_radial());
			bool nonzero = false;
			for (auto const& v : cl)
				if (v != 0.0) { nonzero = true; break; }
			if (!nonzero) continue;
			basis_->radial_values_at_nodes(cl, std::span<complex>(u));
			double const* y = ylm_.data() + static_cast<std::size_t>(l) * nt;
			for (std::size_t q = 0; q < nq; ++q) {
				complex const uq = u[q] / r[q];
				complex* row = psi.data() + q * nt;
				for (int j = 0; j < nt; ++j) row[j] += uq * y[j];
			}
		}
		return psi;
	}

	DensityField density(std::span<complex const> c) const {
		int const nt = static_cast<int>(angular_.size());
		std::size_t const nq = basis_->n_nodes();
		auto const psi = orbital_on_grid(c);
		DensityField d;
		d.n_radial_nodes = nq;
		d.n_angular_nodes = nt;
		d.values.resize(nq * nt);
		double const occ = occupancy();
		for (std::size_t i = 0; i < psi.size(); ++i) d.values[i] = occ * std::norm(psi[i]);
		d.multipoles.assign(lh_ + 1, std::vector<double>(nq, 0.0));
		auto const& r = basis_->nodes();
		auto const& w = basis_->weights();
		double total = 0.0;
		for (std::size_t q = 0; q < nq; ++q) {
			double const* row = d.values.data() + q * nt;
			for (int L = 0; L <= lh_; ++L) {
				double s = 0.0;
				double const* p = pl_.data() + static_cast<std::size_t>(L) * nt;
				for (int j = 0; j < nt; ++j) s += angular_.weights[j] * row[j] * p[j];
				d.multipoles[L][q] = 0.5 * (2.0 * L + 1.0) * s;
			}
			total += w[q] * r[q] * r[q] * 4.0 * std::numbers::pi * d.multipoles[0][q];
		}
		d.electrons = total;
		return d;
	}

	// Hartree multipoles v_L(r_q). Solves u'' - L(L+1)/r^2 u = -4 pi r n_L for
	// u = r v_L in the spline basis, plus the homogeneous r^(L+1) piece that
	// carries the exterior multipole moment at r_max.
	std::vector<std::vector<double>> hartree(DensityField const& d) const {
		std::size_t const nq = basis_->n_nodes();
		auto const& r = basis_->nodes();
		auto const& w = basis_->weights();
		double const rmax = basis_->r_max();
		std::vector<std::vector<double>> v(lh_ + 1, std::vector<double>(nq, 0.0));
		std::vector<double> src(nq), rhs(basis_->n_radial()), u(nq);
		for (int L = 0; L <= lh_; ++L) {
			auto const& nl = d.multipoles[L];
			double peak = 0.0, moment = 0.0;
			for (std::size_t q = 0; q < nq; ++q) {
				peak = std::max(peak, std::abs(nl[q]));
				moment += w[q] * nl[q] * std::pow(r[q], L + 2);
				src[q] = 4.0 * std::numbers::pi * r[q] * nl[q];
			}
			if (peak == 0.0) continue;
			basis_->project_from_nodes(std::span<double const>(src), std::span<double>(rhs));
			poisson_[L].solve_in_place(std::span<double>(rhs));
			basis_->radial_values_at_nodes(std::span<double const>(rhs), std::span<double>(u));
			double const u_edge = 4.0 * std::numbers::pi / (2.0 * L + 1.0) * moment * std::pow(rmax, -L);
			double const beta = u_edge / std::pow(rmax, L + 1);
			for (std::size_t q = 0; q < nq; ++q) v[L][q] = (u[q] + beta * std::pow(r[q], L + 1)) / r[q];
		}
		return v;
	}

	KsPotential potential(std::span<complex const> c) const { return potential(density(c)); }

	KsPotential potential(DensityField const& d) const {
		int const nt = static_cast<int>(angular_.size());
		std::size_t const nq = basis_->n_nodes();
		auto const& r = basis_->nodes();
		auto const& w = basis_->weights();
		KsPotential pot;
		pot.multipoles.assign(lh_ + 1, std::vector<double>(nq, 0.0));
		pot.active.assign(lh_ + 1, false);
		if (occupation_ == Occupation::bare) return pot;

		auto const vh = hartree(d);
		double eh = 0.0, ex = 0.0;
		std::vector<double> vx(nt);
		for (std::size_t q = 0; q < nq; ++q) {
			double const* n = d.values.data() + q * nt;
			double const radial_w = w[q] * r[q] * r[q] * 2.0 * std::numbers::pi;
			for (int j = 0; j < nt; ++j) {
				double vhj = 0.0;
				for (int L = 0; L <= lh_; ++L) vhj += vh[L][q] * pl_[static_cast<std::size_t>(L) * nt + j];
				double v_x = 0.0, e_x = 0.0;
				switch (occupation_) {
				case Occupation::closed_shell:
					v_x = xlda(0.5 * n[j]).potential;
					e_x = 2.0 * xlda_energy_density(0.5 * n[j]);
					break;
				case Occupation::one_polarized:
					v_x = xlda(n[j]).potential;
					e_x = xlda_energy_density(n[j]);
					break;
				case Occupation::one_unpolarized:
					v_x = xlda(0.5 * n[j]).potential;
					e_x = 2.0 * xlda_energy_density(0.5 * n[j]);
					break;
				case Occupation::bare:
					break;
				}
				vx[j] = v_x;
				eh += radial_w * angular_.weights[j] * 0.5 * vhj * n[j];
				ex += radial_w * angular_.weights[j] * e_x;
			}
			for (int L = 0; L <= lh_; ++L) {
				double s = 0.0;
				double const* p = pl_.data() + static_cast<std::size_t>(L) * nt;
				for (int j = 0; j < nt; ++j) s += angular_.weights[j] * vx[j] * p[j];
				pot.multipoles[L][q] = vh[L][q] + 0.5 * (2.0 * L + 1.0) * s;
			}
		}
		double scale = 0.0;
		for (auto v : pot.multipoles[0]) scale = std::max(scale, std::abs(v));
		for (int L = 0; L <= lh_; ++L) {
			double m = 0.0;
			for (auto v : pot.multipoles[L]) m = std::max(m, std::abs(v));
			pot.active[L] = m > 1e-13 * std::max(scale, 1e-300);
		}
		pot.hartree_energy = eh;
		pot.exchange_energy = ex;
		return pot;
	}

	MultipoleOperator potential_operator(KsPotential const& pot) const { return MultipoleOperator(*basis_, pot, &couplings_); }

	// H_KS = h_core + V_H + V_x (+ field scale x coupling, + static_field z).
	HamiltonianApply hamiltonian(std::shared_ptr<MultipoleOperator const> vop, double field_scale, double static_field = 0.0) const {
		return [this, vop = std::move(vop), field_scale, static_field](std::span<complex const> x, std::span<complex> y) {
			std::fill(y.begin(), y.end(), complex(0.0));
			h_core_.apply_add(x, y);
			if (cap_) cap_->apply_add(x, y);
			vop->apply_add(x, y);
			if (field_scale != 0.0) coupling_.op.apply_add(x, y, field_scale);
			if (static_field != 0.0) z_.apply_add(x, y, static_field);
		};
	}

	HamiltonianApply hamiltonian_at(double t, KsPotential const& pot, PulseParams const& pulse) const {
		auto vop = std::make_shared<MultipoleOperator const>(potential_operator(pot));
		return hamiltonian(std::move(vop), coupling_.field_scale(electric_field(pulse, t), vector_potential(pulse, t)));
	}

	// occ <psi|T + V_ion|psi> + E_H + E_x (+ occ * static_field <z>) for a normalized orbital.
	double total_energy(std::span<complex const> c, KsPotential const& pot, double static_field = 0.0) const {
		double e = occupancy() * h_core_.expectation(c, c).real();
		if (static_field != 0.0) e += occupancy() * static_field * z_.expectation(c, c).real();
		return e + pot.hartree_energy + pot.exchange_energy;
	}

	double dipole(std::span<complex const> c) const { return -occupancy() * z_.expectation(c, c).real(); }

	// Ionic force Z <cos(theta)/r^2>. Hartree and exchange self-forces integrate
	// to zero for a local functional (zero-force theorem) and are left out.
	double force_expectation(std::span<complex const> c) const { return force_.expectation(c, c).real(); }

	// Spherical start: lowest l = 0 eigenvector of h_core.
	cvector hydrogenic_guess() const {
		auto const* blk = h_core_.find(0, 0);
		auto const gs = lowest_eigenpair(blk->matrix, overlap_.radial(), -0.5 * charge_ * charge_ - 1.0);
		cvector c(basis_->dimension(), 0.0);
		for (int n = 0; n < basis_->n_radial(); ++n) c[n] = gs.vector[n];
		return c;
	}

	void normalize(std::span<complex> c) const {
		double const nrm = std::sqrt(overlap_.norm2(c));
		for (auto& v : c) v /= nrm;
	}

	// Imaginary-time relaxation with the density rebuilt every step.
	KsGroundState ground_state(ImaginaryTimeConfig const& cfg = {}, double static_field = 0.0, cvector start = {}) const {
		KsGroundState gs;
		gs.orbital = start.empty() ? hydrogenic_guess() : std::move(start);
		normalize(gs.orbital);
		KrylovPropagator krylov(basis_->dimension(), cfg.krylov);
		auto pot = potential(gs.orbital);
		double energy = total_energy(gs.orbital, pot, static_field);
		gs.energy_trace.push_back(energy);
		for (int step = 1; step <= cfg.max_steps; ++step) {
			auto h = hamiltonian(std::make_shared<MultipoleOperator const>(potential_operator(pot)), 0.0, static_field);
			krylov.apply(h, overlap_, gs.orbital, complex(-cfg.dtau, 0.0));
			normalize(gs.orbital);
			pot = potential(gs.orbital);
			double const next = total_energy(gs.orbital, pot, static_field);
			gs.energy_trace.push_back(next);
			double const change = std::abs(next - energy);
			energy = next;
			gs.iterations = step;
			if (change < cfg.energy_tol) {
				gs.total_energy = energy;
				auto hfinal = hamiltonian(std::make_shared<MultipoleOperator const>(potential_operator(pot)), 0.0, static_field);
				cvector hc(gs.orbital.size());
				hfinal(gs.orbital, hc);
				gs.orbital_energy = dot(gs.orbital, hc).real();
				return gs;
			}
		}
		throw convergence_error("Kohn-Sham imaginary-time relaxation did not converge; last energy " + std::to_string(energy));
	}

private:
	std::shared_ptr<SpectralBasis const> basis_;
	Gauge gauge_;
	double charge_;
	Occupation occupation_;
	int lh_ = 0;
	OverlapSolver overlap_;
	BandedBlockOperator h_core_;
	DipoleCoupling coupling_;
	BandedBlockOperator z_;
	BandedBlockOperator force_;
	QuadratureRule angular_;
	std::vector<double> ylm_;
	std::vector<double> pl_;
	std::vector<std::vector<double>> couplings_;
	std::vector<BandedCholesky> poisson_;
	std::shared_ptr<SpectralCap const> cap_;
};

} // namespace hhg

#endif
