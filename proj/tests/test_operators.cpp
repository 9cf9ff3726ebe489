#include <hhg/eigensolve.hpp>
#include <hhg/operators.hpp>

#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SpectralBasis hydrogen_basis(int l_max = 3) { return build_basis(60.0, 120, 7, l_max, KnotDistribution::linear); }

double radial_product(BandedMatrix const& m, std::vector<double> const& a, std::vector<double> const& b) {
	std::vector<double> mb(b.size(), 0.0);
	m.multiply_add(std::span<double const>(b), std::span<double>(mb));
	double s = 0.0;
	for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * mb[i];
	return s;
}

cvector random_state(int n, unsigned seed) {
	std::mt19937 rng(seed);
	std::normal_distribution<double> g;
	cvector c(n);
	for (auto& v : c) v = {g(rng), g(rng)};
	return c;
}

} // namespace

TEST_CASE("angular couplings") {
	// <l+1|cos|l> is the L = 1 Legendre coupling
	for (int l = 0; l < 8; ++l) CHECK_THAT(legendre_coupling(l + 1, 1, l), WithinAbs(cos_theta_coupling(l), 1e-14));
	CHECK_THAT(cos_theta_coupling(0), WithinAbs(1.0 / std::sqrt(3.0), 1e-15));
	// L = 0 is the identity, parity and triangle rules zero the rest
	for (int l = 0; l < 6; ++l)
		for (int lp = 0; lp < 6; ++lp) CHECK_THAT(legendre_coupling(lp, 0, l), WithinAbs(lp == l ? 1.0 : 0.0, 1e-14));
	CHECK(legendre_coupling(2, 1, 0) == 0.0);
	CHECK(legendre_coupling(5, 2, 1) == 0.0);
	// symmetric in the outer indices
	CHECK_THAT(legendre_coupling(3, 2, 1), WithinAbs(legendre_coupling(1, 2, 3), 1e-15));
	// <Y_00|P_2|Y_20> = 1/sqrt(5)
	CHECK_THAT(legendre_coupling(0, 2, 2), WithinAbs(1.0 / std::sqrt(5.0), 1e-14));
}

TEST_CASE("dipole operators are Hermitian and couple only l to l +- 1") {
	auto const b = hydrogen_basis(5);
	for (auto g : {Gauge::length, Gauge::velocity}) {
		auto const d = dipole_coupling(b, g);
		CHECK(d.gauge == g);
		CHECK(d.op.hermiticity_error() < 1e-12);
		for (auto const& blk : d.op.blocks()) CHECK(std::abs(blk.row_l - blk.col_l) == 1);
		CHECK(d.op.blocks().size() == 2u * 5u);
		// <x|D|y> = conj(<y|D|x>)
		auto const x = random_state(b.dimension(), 1), y = random_state(b.dimension(), 2);
		auto const xy = d.op.expectation(x, y), yx = d.op.expectation(y, x);
		CHECK(std::abs(xy - std::conj(yx)) < 1e-10 * std::abs(xy));
	}
	auto const h = central_hamiltonian(b, [](double r) { return -1.0 / r; });
	CHECK(h.hermiticity_error() < 1e-12);
	for (auto const& blk : h.blocks()) CHECK(blk.row_l == blk.col_l);
}

TEST_CASE("hydrogen 1s-2p dipole matrix elements in both gauges") {
	auto const b = hydrogen_basis(1);
	OverlapSolver const s(b);
	auto const h = central_hamiltonian(b, [](double r) { return -1.0 / r; });
	auto const s1 = dense_eigenpairs(h.find(0, 0)->matrix, s.radial(), 1).front();
	auto const p2 = dense_eigenpairs(h.find(1, 1)->matrix, s.radial(), 1).front();
	CHECK_THAT(s1.value, WithinAbs(-0.5, 1e-8));
	CHECK_THAT(p2.value, WithinAbs(-0.125, 1e-8));

	auto const z = dipole_coupling(b, Gauge::length);
	double const zfi = radial_product(z.op.find(1, 0)->matrix, p2.vector, s1.vector);
	CHECK_THAT(std::abs(zfi), WithinRel(128.0 * std::sqrt(2.0) / 243.0, 1e-7));

	// <f|d/dz|i> = (E_i - E_f) <f|z|i>
	auto const v = dipole_coupling(b, Gauge::velocity);
	double const dfi = radial_product(v.op.find(1, 0)->matrix, p2.vector, s1.vector);
	CHECK_THAT(dfi, WithinRel((s1.value - p2.value) * zfi, 1e-6));
}

TEST_CASE("overlap solver inverts the block-diagonal overlap") {
	auto const b = hydrogen_basis(2);
	OverlapSolver const s(b);
	auto const x = random_state(b.dimension(), 9);
	cvector y(x.size());
	s.apply(x, y);
	s.solve_in_place(y);
	for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] - x[i]) < 1e-9);
	CHECK(s.norm2(x) > 0.0);
	CHECK_THAT(s.inner(x, x).imag(), WithinAbs(0.0, 1e-10 * s.norm2(x)));
}

TEST_CASE("block operator binary round trip") {
	auto const b = build_basis(20.0, 30, 6, 3, KnotDistribution::linear);
	auto const v = dipole_coupling(b, Gauge::velocity).op;
	std::stringstream ss;
	v.write(ss);
	auto const w = BandedBlockOperator::read(ss);
	CHECK(w.factor() == v.factor());
	CHECK(w.blocks().size() == v.blocks().size());
	auto const x = random_state(b.dimension(), 4);
	auto const a = v.apply(x), c = w.apply(x);
	for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == c[i]);

	std::stringstream bad("not an operator");
	CHECK_THROWS_AS(BandedBlockOperator::read(bad), io_error);
}

TEST_CASE("gauge names") {
	CHECK(parse_gauge("length") == Gauge::length);
	CHECK(parse_gauge("velocity") == Gauge::velocity);
	CHECK(std::string(to_string(Gauge::velocity)) == "velocity");
	CHECK_THROWS_AS(parse_gauge("coulomb"), parameter_error);
}
