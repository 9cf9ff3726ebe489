#ifndef HHG_OBSERVABLES_HPP
#define HHG_OBSERVABLES_HPP

#include <hhg/block_operator.hpp>
#include <hhg/eigensolve.hpp>
#include <hhg/errors.hpp>
#include <hhg/krylov.hpp>
#include <hhg/operators.hpp>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace hhg {

struct EvolutionRecord {
	std::vector<double> times;
	std::vector<double> field;
	std::vector<double> dipole;
	std::vector<double> acceleration;
	std::vector<double> norm;
	std::vector<double> absorbed;

	std::size_t size() const { return times.size(); }

	void push(double t, double e, double d, double dd, double n, double a) {
		times.push_back(t);
		field.push_back(e);
		dipole.push_back(d);
		acceleration.push_back(dd);
		norm.push_back(n);
		absorbed.push_back(a);
	}

	void truncate(std::size_t n) {
		for (auto* v : {&times, &field, &dipole, &acceleration, &norm, &absorbed}) v->resize(std::min(n, v->size()));
	}

	// Uniform spacing; throws when the grid is not uniform to 1e-9 relative.
	double spacing() const {
		if (times.size() < 2) throw parameter_error("record.times", "need at least two samples");
		double const dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
		if (!(dt > 0.0)) throw parameter_error("record.times", "times must increase");
		for (std::size_t i = 1; i < times.size(); ++i)
			if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, dt) * static_cast<double>(times.size()))
				throw parameter_error("record.times", "time grid is not uniform");
		return dt;
	}
};

// d = -occupancy <psi| z |psi>
inline double dipole_moment(BandedBlockOperator const& z, std::span<complex const> c, double occupancy) {
	return -occupancy * z.expectation(c, c).real();
}

// Ehrenfest form: d'' = occupancy (<dV/dz> + E(t)), consistent with
// d = -occupancy <z> and a length-gauge coupling + E(t) z.
inline double ehrenfest_acceleration(double force_expectation, double electric_field, double occupancy) {
	return occupancy * (force_expectation + electric_field);
}

// Exact second time derivative of d = -occ c^H Z c for S c' = -i H c with H
// frozen (length gauge, where dH/dt commutes with Z):
//   d'' = 2 occ Im(a^H q),  a = S^-1 H c,  q = i (H S^-1 Z c - Z S^-1 H c).
inline double commutator_acceleration(HamiltonianApply const& h, BandedBlockOperator const& z, OverlapSolver const& s,
                                      std::span<complex const> c, double occupancy) {
	std::size_t const n = c.size();
	cvector a(n), hb(n), za(n, 0.0);
	h(c, a);
	s.solve_in_place(a);
	cvector b = z.apply(c);
	s.solve_in_place(b);
	h(b, hb);
	z.apply_add(a, za);
	complex acc = 0.0;
	for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * (complex(0.0, 1.0) * (hb[i] - za[i]));
	return 2.0 * occupancy * acc.imag();
}

// Central second difference of a uniformly sampled series (interior points;
// end points copied from their neighbours).
inline std::vector<double> second_difference(std::span<double const> y, double dt) {
	std::vector<double> out(y.size(), 0.0);
	if (y.size() < 3) return out;
	for (std::size_t i = 1; i + 1 < y.size(); ++i) out[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (dt * dt);
	out.front() = out[1];
	out.back() = out[y.size() - 2];
	return out;
}

// Field-free bound states used for the projection ionization measure.
struct BoundState {
	int l = 0;
	double energy = 0.0;
	std::vector<double> radial;
};

// Lowest `count` negative-energy eigenstates of a block-diagonal field-free
// Hamiltonian, gathered over angular channels.
inline std::vector<BoundState> lowest_bound_states(BandedBlockOperator const& h0, BandedMatrix const& s, int count) {
	std::vector<BoundState> all;
	int const lmax = std::min(h0.n_angular() - 1, count - 1);
	for (int l = 0; l <= lmax; ++l) {
		auto const* blk = h0.find(l, l);
		if (!blk) continue;
		for (auto& p : dense_eigenpairs(blk->matrix, s, count)) {
			if (p.value >= 0.0) break;
			all.push_back({l, p.value, std::move(p.vector)});
		}
	}
	std::sort(all.begin(), all.end(), [](auto const& a, auto const& b) { return a.energy < b.energy; });
	if (static_cast<int>(all.size()) > count) all.resize(count);
	return all;
}

// 1 - sum_k |<phi_k|S|c>|^2 over the given bound states.
inline double unbound_fraction(std::vector<BoundState> const& states, OverlapSolver const& s, std::span<complex const> c) {
	int const nr = s.radial().size();
	cvector sc(c.size());
	s.apply(c, sc);
	double bound = 0.0;
	for (auto const& st : states) {
		complex p = 0.0;
		std::size_t const off = static_cast<std::size_t>(st.l) * nr;
		for (int n = 0; n < nr; ++n) p += st.radial[n] * sc[off + n];
		bound += std::norm(p);
	}
	return 1.0 - bound;
}

} // namespace hhg

#endif
