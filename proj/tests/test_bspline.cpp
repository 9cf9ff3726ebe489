#include <hhg/bspline.hpp>
#include <hhg/quadrature.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
	for (int n : {1, 2, 5, 9, 16}) {
		auto const r = gauss_legendre(n);
		REQUIRE(r.size() == static_cast<std::size_t>(n));
		for (int p = 0; p <= 2 * n - 1; ++p) {
			double s = 0.0;
			for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
			double const exact = p % 2 == 1 ? 0.0 : 2.0 / (p + 1.0);
			CHECK_THAT(s, WithinAbs(exact, 1e-14));
		}
	}
}

TEST_CASE("mapped rule integrates on [a, b]") {
	auto const r = mapped(gauss_legendre(6), 1.0, 4.0);
	double s = 0.0;
	for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::exp(r.nodes[i]);
	CHECK_THAT(s, WithinRel(std::exp(4.0) - std::exp(1.0), 1e-9));
}

TEST_CASE("Legendre polynomials match closed forms") {
	for (double x : {-0.9, -0.2, 0.0, 0.35, 0.8}) {
		CHECK_THAT(legendre(2, x), WithinAbs(0.5 * (3 * x * x - 1), 1e-15));
		CHECK_THAT(legendre(3, x), WithinAbs(0.5 * (5 * x * x * x - 3 * x), 1e-15));
		double v = 0.0, d = 0.0;
		legendre_with_derivative(4, x, v, d);
		CHECK_THAT(v, WithinAbs((35 * std::pow(x, 4) - 30 * x * x + 3) / 8.0, 1e-14));
		CHECK_THAT(d, WithinAbs((140 * x * x * x - 60 * x) / 8.0, 1e-12));
	}
}

TEST_CASE("breakpoint distributions") {
	auto const lin = make_breakpoints(120.0, 60, KnotDistribution::linear);
	REQUIRE(lin.size() == 61);
	CHECK(lin.front() == 0.0);
	CHECK(lin.back() == 120.0);
	CHECK_THAT(lin[1], WithinRel(2.0, 1e-14));

	auto const sh = make_breakpoints(120.0, 90, KnotDistribution::sinh, 10.0, 1.0 / 3.0);
	REQUIRE(sh.size() == 91);
	for (std::size_t i = 1; i < sh.size(); ++i) CHECK(sh[i] > sh[i - 1]);
	// a third of the intervals inside 10 a.u.
	CHECK_THAT(sh[30], WithinRel(10.0, 1e-9));
	// spacing grows outward
	CHECK(sh[2] - sh[1] < sh[90] - sh[89]);
}

TEST_CASE("B-splines form a non-negative partition of unity") {
	for (auto dist : {KnotDistribution::linear, KnotDistribution::sinh}) {
		BSplineSet const b(7, make_breakpoints(50.0, 40, dist));
		CHECK(b.size() == 40 + 7 - 1);
		std::mt19937 rng(3);
		std::uniform_real_distribution<double> u(0.0, 50.0);
		std::vector<double> v(7), d(7);
		for (int i = 0; i < 200; ++i) {
			double const x = u(rng);
			int const j = b.interval_of(x);
			b.evaluate(x, j, v, d);
			double sum = 0.0, dsum = 0.0;
			for (int a = 0; a < 7; ++a) {
				CHECK(v[a] >= -1e-15);
				sum += v[a];
				dsum += d[a];
			}
			CHECK_THAT(sum, WithinAbs(1.0, 1e-13));
			CHECK_THAT(dsum, WithinAbs(0.0, 1e-10));
		}
	}
}

TEST_CASE("B-spline derivatives agree with finite differences") {
	BSplineSet const b(9, make_breakpoints(30.0, 25, KnotDistribution::sinh, 5.0, 0.4));
	std::vector<double> v(9), d(9), vp(9), dp(9), vm(9), dm(9);
	for (double x : {0.3, 2.7, 11.1, 24.4}) {
		int const j = b.interval_of(x);
		double const h = 1e-6;
		b.evaluate(x, j, v, d);
		b.evaluate(x + h, j, vp, dp);
		b.evaluate(x - h, j, vm, dm);
		for (int a = 0; a < 9; ++a) CHECK_THAT(d[a], WithinAbs((vp[a] - vm[a]) / (2 * h), 1e-6 * (1.0 + std::abs(d[a]))));
	}
}

TEST_CASE("single spline value matches the local evaluation") {
	BSplineSet const b(5, make_breakpoints(10.0, 8, KnotDistribution::linear));
	std::vector<double> v(5), d(5);
	double const x = 3.3;
	int const j = b.interval_of(x);
	b.evaluate(x, j, v, d);
	for (int a = 0; a < 5; ++a) CHECK_THAT(b.value(b.first_nonzero(j) + a, x), WithinAbs(v[a], 1e-14));
	CHECK(b.value(0, 9.0) == 0.0);
}

TEST_CASE("invalid spline parameters are rejected") {
	CHECK_THROWS_AS(make_breakpoints(-1.0, 10, KnotDistribution::linear), parameter_error);
	CHECK_THROWS_AS(make_breakpoints(10.0, 0, KnotDistribution::linear), parameter_error);
	CHECK_THROWS_AS(BSplineSet(1, make_breakpoints(10.0, 5, KnotDistribution::linear)), parameter_error);
}
