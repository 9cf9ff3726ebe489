#include <hhg/observables.hpp>
#include <hhg/sae.hpp>

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <random>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelPotential coulomb(double z) { return {z, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }

BasisParams desk_basis(int l_max = 1) {
	BasisParams p;
	p.r_max = 120.0;
	p.n_splines = 400;
	p.k = 7;
	p.l_max = l_max;
	p.knots = KnotDistribution::linear;
	return p;
}

cvector random_state(int n, unsigned seed) {
	std::mt19937 rng(seed);
	std::normal_distribution<double> g;
	cvector c(n);
	for (auto& v : c) v = {g(rng), g(rng)};
	return c;
}

} // namespace

TEST_CASE("model potential limits and derivative") {
	ModelPotential const v;
	// charge 2 at the nucleus, 1 asymptotically
	CHECK_THAT(v.effective_charge(0.0), WithinAbs(2.0, 1e-12));
	CHECK_THAT(v.effective_charge(200.0), WithinAbs(1.0, 1e-12));
	for (double r : {0.05, 0.7, 2.0, 9.0}) {
		double const h = 1e-6;
		CHECK_THAT(v.derivative(r), WithinRel((v(r + h) - v(r - h)) / (2 * h), 1e-7));
		CHECK(tong_lin(r) == v(r));
	}
	CHECK_THROWS_AS(v(0.0), parameter_error);
}

TEST_CASE("hydrogen 1s and 2p energies") {
	SaeModel const m(SpectralBasis(desk_basis(1)), coulomb(1.0), Gauge::length);
	auto const gs = m.ground_state();
	CHECK_THAT(gs.value, WithinAbs(-0.5, 1e-6));
	auto const p = dense_eigenpairs(m.h0().find(1, 1)->matrix, m.overlap().radial(), 2);
	CHECK_THAT(p[0].value, WithinAbs(-0.125, 1e-6));
	CHECK_THAT(p[1].value, WithinAbs(-1.0 / 18.0, 1e-6));
}

TEST_CASE("hydrogenic ion scales as Z^2") {
	BasisParams bp = desk_basis(0);
	bp.r_max = 40.0;
	bp.n_splines = 200;
	SaeModel const m(SpectralBasis(bp), coulomb(2.0), Gauge::length);
	CHECK_THAT(m.ground_state().value, WithinAbs(-2.0, 1e-6));
}

TEST_CASE("single-active-electron helium ground state") {
	SaeModel const m(SpectralBasis(desk_basis(1)), ModelPotential{}, Gauge::length);
	auto const gs = m.ground_state();
	// ionization potential reported for this potential: 0.9034 a.u.
	CHECK_THAT(gs.value, WithinAbs(-0.9034, 5e-4));
	// S-normalized
	auto const c = m.ground_state_vector();
	CHECK_THAT(m.overlap().norm2(c), WithinAbs(1.0, 1e-12));
	// spherical state: no dipole, no force
	CHECK_THAT(dipole_moment(m.position_z(), c, SaeModel::occupancy), WithinAbs(0.0, 1e-14));
	CHECK_THAT(m.force_expectation(c), WithinAbs(0.0, 1e-14));
}

TEST_CASE("shift-invert and dense eigensolvers agree") {
	auto const b = build_basis(30.0, 60, 7, 0, KnotDistribution::linear);
	SaeModel const m(b, ModelPotential{}, Gauge::length);
	auto const blk = m.h0().find(0, 0)->matrix;
	auto const dense = dense_eigenpairs(blk, m.overlap().radial(), 3);
	auto const lo = lowest_eigenpair(blk, m.overlap().radial(), -3.0);
	CHECK_THAT(lo.value, WithinAbs(dense[0].value, 1e-10));
	CHECK(dense[0].value < dense[1].value);
	CHECK(dense[1].value < dense[2].value);
}

TEST_CASE("spectral cap moves only the eigenvalues above the cap") {
	auto const b = build_basis(30.0, 60, 7, 2, KnotDistribution::linear);
	double const cap = 40.0;
	SaeModel const m(b, ModelPotential{}, Gauge::length, cap);
	REQUIRE(m.spectral_cap() != nullptr);
	CHECK(m.spectral_cap()->size() > 0);
	int const n = b.n_radial();
	for (int l = 0; l <= 2; ++l) {
		auto const before = dense_eigenpairs(m.h0().find(l, l)->matrix, m.overlap().radial(), n);
		// dense form of the capped block
		Eigen::MatrixXcd h(n, n);
		for (int j = 0; j < n; ++j) {
			cvector x(b.dimension(), 0.0), y(b.dimension(), 0.0);
			x[b.offset(l) + j] = 1.0;
			m.h0().apply_add(x, y);
			m.spectral_cap()->apply_add(x, y);
			for (int i = 0; i < n; ++i) h(i, j) = y[b.offset(l) + i];
		}
		Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j)
				if (m.overlap().radial().in_band(i, j)) s(i, j) = m.overlap().radial()(i, j);
		Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real(), s);
		auto const after = es.eigenvalues();
		for (int i = 0; i < n; ++i) {
			double const expected = std::min(before[i].value, cap);
			CHECK_THAT(after(i), WithinAbs(expected, 1e-8 * std::max(1.0, std::abs(expected))));
		}
	}
}

TEST_CASE("time-dependent SAE Hamiltonian is Hermitian in both gauges") {
	auto const b = build_basis(30.0, 50, 7, 4, KnotDistribution::linear);
	auto const pulse = make_pulse(390.0, 1e14, 5.0, 0.0);
	for (auto g : {Gauge::length, Gauge::velocity}) {
		SaeModel const m(b, ModelPotential{}, g, 50.0);
		auto const h = m.hamiltonian_at(0.37 * pulse.T, pulse);
		auto const x = random_state(b.dimension(), 1), y = random_state(b.dimension(), 2);
		cvector hx(x.size()), hy(y.size());
		h(x, hx);
		h(y, hy);
		auto const a = dot(y, hx), c = dot(x, hy);
		CHECK(std::abs(a - std::conj(c)) < 1e-10 * std::abs(a));
	}
}

TEST_CASE("bound states of the field-free Hamiltonian") {
	SaeModel const m(SpectralBasis(desk_basis(3)), ModelPotential{}, Gauge::length);
	auto const states = lowest_bound_states(m.h0(), m.overlap().radial(), 6);
	REQUIRE(states.size() == 6);
	CHECK(states[0].l == 0);
	CHECK_THAT(states[0].energy, WithinAbs(m.ground_state().value, 1e-10));
	for (std::size_t i = 1; i < states.size(); ++i) CHECK(states[i].energy >= states[i - 1].energy);
	// the ground state is fully bound, a mixed state is partially unbound
	auto const c = m.ground_state_vector();
	CHECK_THAT(unbound_fraction(states, m.overlap(), c), WithinAbs(0.0, 1e-10));
	cvector half = c;
	for (auto& v : half) v *= std::sqrt(0.5);
	CHECK_THAT(unbound_fraction(states, m.overlap(), half), WithinAbs(0.5, 1e-10));
}
