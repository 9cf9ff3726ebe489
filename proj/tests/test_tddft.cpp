#include <hhg/tddft.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SpectralBasis small_basis(int l_max, double r_max = 30.0, int n = 90) {
	return build_basis(r_max, n, 7, l_max, KnotDistribution::linear);
}

// graded knots for the compact Z = 2 orbital
SpectralBasis graded_basis(int l_max) {
	BasisParams p;
	p.r_max = 30.0;
	p.n_splines = 120;
	p.k = 7;
	p.l_max = l_max;
	p.knots = KnotDistribution::sinh;
	p.inner_radius = 3.0;
	return SpectralBasis(p);
}

// Exchange energy of two electrons in a hydrogenic 1s orbital of charge Z:
// -2 C int (Z^3/pi)^(4/3) exp(-8 Z r / 3) 4 pi r^2 dr.
double hydrogenic_exchange(double z) {
	double const a = 8.0 * z / 3.0;
	return -2.0 * xlda_energy_prefactor * std::pow(z * z * z / std::numbers::pi, 4.0 / 3.0) * 4.0 * std::numbers::pi * 2.0 / (a * a * a);
}

} // namespace

TEST_CASE("exchange-only LDA closed forms") {
	CHECK_THAT(xlda_potential_prefactor, WithinRel(std::cbrt(6.0 / std::numbers::pi), 1e-12));
	CHECK_THAT(xlda_energy_prefactor, WithinRel(1.5 * std::cbrt(3.0 / (4.0 * std::numbers::pi)), 1e-12));
	for (double n : {1e-8, 1e-3, 0.2, 3.0}) {
		CHECK_THAT(xlda(n).potential, WithinRel(-std::cbrt(6.0 * n / std::numbers::pi), 1e-12));
		// v = d e / d n
		double const h = 1e-6 * n;
		double const de = (xlda_energy_density(n + h) - xlda_energy_density(n - h)) / (2 * h);
		CHECK_THAT(xlda(n).potential, WithinRel(de, 1e-7));
	}
	CHECK(xlda(0.0).potential == 0.0);
	CHECK(xlda(-1e-9).clamped);
	CHECK_FALSE(xlda(-1e-14).clamped);
	CHECK(xlda_energy_density(-1.0) == 0.0);
}

TEST_CASE("density, Hartree and exchange of a hydrogenic 1s pair") {
	double const z = 2.0;
	KsModel const m(graded_basis(2), Gauge::length, z, Occupation::closed_shell);
	auto const c = m.hydrogenic_guess();
	auto const d = m.density(c);
	CHECK_THAT(d.electrons, WithinAbs(2.0, 1e-9));
	auto const& r = m.basis().nodes();
	for (std::size_t q = 0; q < r.size(); q += 23) {
		double const n = 2.0 * z * z * z / std::numbers::pi * std::exp(-2.0 * z * r[q]);
		CHECK_THAT(d.multipoles[0][q], WithinAbs(n, 1e-7 * (1.0 + n)));
		for (std::size_t L = 1; L < d.multipoles.size(); ++L) CHECK(std::abs(d.multipoles[L][q]) < 1e-12);
	}
	// V_H(r) = N (1/r - (Z + 1/r) exp(-2 Z r))
	auto const vh = m.hartree(d);
	for (std::size_t q = 0; q < r.size(); q += 11) {
		double const x = r[q];
		double const exact = 2.0 * (1.0 / x - (z + 1.0 / x) * std::exp(-2.0 * z * x));
		CHECK_THAT(vh[0][q], WithinAbs(exact, 1e-7 * (1.0 + exact)));
	}
	auto const pot = m.potential(d);
	CHECK_THAT(pot.hartree_energy, WithinAbs(5.0 * z / 4.0, 1e-8));
	CHECK_THAT(pot.exchange_energy, WithinRel(hydrogenic_exchange(z), 1e-8));
	CHECK(pot.active[0]);
	for (std::size_t L = 1; L < pot.active.size(); ++L) CHECK_FALSE(pot.active[L]);
}

TEST_CASE("Hartree multipoles outside the charge follow the exterior moments") {
	KsModel const m(small_basis(3, 40.0, 120), Gauge::length, 1.0, Occupation::closed_shell, 4);
	// compact s + p0 + d0 mixture, negligible charge beyond r = 30
	auto const& b = m.basis();
	cvector c(b.dimension(), 0.0);
	std::vector<double> f(b.n_nodes()), proj(b.n_radial());
	auto const& r = b.nodes();
	OverlapSolver const& s = m.overlap();
	for (int l = 0; l <= 2; ++l) {
		for (std::size_t q = 0; q < r.size(); ++q) f[q] = std::pow(r[q], l + 1) * std::exp(-r[q]);
		b.project_from_nodes(std::span<double const>(f), std::span<double>(proj));
		s.cholesky().solve_in_place(std::span<double>(proj));
		for (int n = 0; n < b.n_radial(); ++n) c[b.offset(l) + n] = proj[n] * (l == 1 ? 0.4 : 0.7);
	}
	m.normalize(c);
	auto const d = m.density(c);
	auto const vh = m.hartree(d);
	auto const& w = b.weights();
	for (int L = 1; L <= 4; ++L) {
		double moment = 0.0;
		for (std::size_t q = 0; q < r.size(); ++q) moment += w[q] * d.multipoles[L][q] * std::pow(r[q], L + 2);
		REQUIRE(std::abs(moment) > 1e-3);
		for (double x : {36.0, 39.0}) {
			std::size_t q = 0;
			while (r[q] < x) ++q;
			double const exact = 4.0 * std::numbers::pi / (2.0 * L + 1.0) * moment / std::pow(r[q], L + 1);
			CHECK_THAT(vh[L][q], WithinRel(exact, 1e-6));
		}
	}
}

TEST_CASE("multipole operator matches its explicit block form and is Hermitian") {
	KsModel const m(small_basis(3), Gauge::length, 2.0, Occupation::closed_shell, 4);
	auto const& b = m.basis();
	std::mt19937 rng(2);
	std::normal_distribution<double> g;
	cvector c(b.dimension());
	for (auto& v : c) v = {g(rng) * 0.1, g(rng) * 0.1};
	auto const guess = m.hydrogenic_guess();
	for (std::size_t i = 0; i < c.size(); ++i) c[i] += guess[i];
	m.normalize(c);
	auto const pot = m.potential(c);
	auto const op = m.potential_operator(pot);
	auto const blocks = op.as_block_operator(b.half_bandwidth());
	CHECK(blocks.hermiticity_error() < 1e-12);
	cvector x(b.dimension()), y1(b.dimension(), 0.0);
	for (auto& v : x) v = {g(rng), g(rng)};
	op.apply_add(x, y1);
	auto const y2 = blocks.apply(x);
	for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-11 * (1.0 + std::abs(y2[i])));
}

TEST_CASE("potential averaging is the midpoint") {
	KsModel const m(small_basis(1), Gauge::length);
	auto const c = m.hydrogenic_guess();
	auto const a = m.potential(c);
	KsPotential b = a;
	for (auto& v : b.multipoles[0]) v *= 3.0;
	b.exchange_energy *= 3.0;
	auto const avg = KsPotential::average(a, b);
	for (std::size_t q = 0; q < avg.multipoles[0].size(); q += 31) CHECK_THAT(avg.multipoles[0][q], WithinAbs(2.0 * a.multipoles[0][q], 1e-14));
	CHECK_THAT(avg.exchange_energy, WithinRel(2.0 * a.exchange_energy, 1e-14));
}

TEST_CASE("imaginary-time relaxation lowers the energy monotonically") {
	KsModel const m(small_basis(1), Gauge::length);
	auto const gs = m.ground_state();
	REQUIRE(gs.energy_trace.size() > 3);
	for (std::size_t i = 1; i < gs.energy_trace.size(); ++i) CHECK(gs.energy_trace[i] <= gs.energy_trace[i - 1] + 1e-12);
	CHECK_THAT(gs.total_energy, WithinAbs(-2.7236, 2e-3));
	CHECK(gs.orbital_energy < 0.0);
	CHECK_THAT(m.overlap().norm2(gs.orbital), WithinAbs(1.0, 1e-12));
}

TEST_CASE("bare nucleus reduces to the hydrogenic ion") {
	KsModel const m(small_basis(1), Gauge::length, 2.0, Occupation::bare);
	auto const gs = m.ground_state();
	CHECK_THAT(gs.total_energy, WithinAbs(-2.0, 1e-6));
	CHECK_THAT(gs.orbital_energy, WithinAbs(-2.0, 1e-6));
}

TEST_CASE("static equilibrium: ionic force balances the applied field") {
	// d'' = occ (<dV/dz> + F) vanishes in the stationary state; only the ionic
	// part of the force enters, the Hartree and exchange self-forces cancel.
	double const f = 0.01;
	for (auto occ : {Occupation::bare, Occupation::closed_shell}) {
		KsModel const m(small_basis(4, 30.0, 120), Gauge::length, 2.0, occ, 4);
		auto const gs = m.ground_state({}, f);
		CHECK_THAT(m.force_expectation(gs.orbital), WithinRel(-f, 0.02));
		CHECK(m.dipole(gs.orbital) > 0.0);
	}
}
