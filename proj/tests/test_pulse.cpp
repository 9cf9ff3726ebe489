#include <hhg/pulse.hpp>

#include <catch_amalgamated.hpp>

#include <random>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("carrier frequency and peak field from laboratory units") {
	auto const p = make_pulse(390.0, 1e14, 5.0, 0.0);
	// omega = 2 pi c / lambda with lambda in bohr
	double const omega = 2.0 * units::pi * units::speed_of_light / (390.0 / units::bohr_nm);
	CHECK_THAT(p.omega_L, WithinRel(omega, 1e-14));
	CHECK_THAT(p.omega_L, WithinAbs(0.11683, 1e-5));
	CHECK_THAT(p.E0, WithinRel(std::sqrt(1e14 / 3.50944758e16), 1e-14));
	CHECK_THAT(p.A0, WithinRel(p.E0 / p.omega_L, 1e-14));
	CHECK_THAT(p.T, WithinRel(5.0 * 2.0 * units::pi / omega, 1e-14));
	CHECK_THAT(p.duration_fs(), WithinAbs(6.5045, 1e-3));
}

TEST_CASE("electric field is minus the derivative of the vector potential") {
	std::mt19937 rng(7);
	for (double cep : {0.0, units::pi / 2, 1.3}) {
		auto const p = make_pulse(390.0, 5e14, 5.0, cep);
		std::uniform_real_distribution<double> t(0.01 * p.T, 0.99 * p.T);
		for (int i = 0; i < 50; ++i) {
			double const s = t(rng), h = 1e-4;
			double const fd = -(vector_potential(p, s + h) - vector_potential(p, s - h)) / (2.0 * h);
			CHECK_THAT(electric_field(p, s), WithinAbs(fd, 1e-9));
		}
	}
}

TEST_CASE("field and vector potential vanish at and beyond the pulse edges") {
	auto const p = make_pulse(390.0, 1e14, 5.0, 0.7);
	for (double t : {-1.0, 0.0, p.T, p.T + 3.0}) {
		CHECK_THAT(vector_potential(p, t), WithinAbs(0.0, 1e-15));
		CHECK_THAT(electric_field(p, t), WithinAbs(0.0, 1e-15));
	}
	CHECK(envelope(p, 0.5 * p.T) == 1.0);
}

TEST_CASE("net field area is zero") {
	auto const p = make_pulse(390.0, 1e14, 5.0, units::pi / 2);
	int const n = 20000;
	double const h = p.T / n;
	double area = 0.0;
	for (int i = 0; i <= n; ++i) area += (i == 0 || i == n ? 0.5 : 1.0) * electric_field(p, i * h);
	CHECK_THAT(area * h, WithinAbs(0.0, 1e-9));
}

TEST_CASE("ponderomotive energy and recollision cutoff") {
	auto const p = make_pulse(390.0, 1e14, 5.0, 0.0);
	double const up = p.E0 * p.E0 / (4.0 * p.omega_L * p.omega_L);
	CHECK_THAT(ponderomotive_energy(p), WithinRel(up, 1e-14));
	auto const c = classical_cutoff(p, 0.9034);
	CHECK_THAT(c.omega, WithinRel(0.9034 + 3.2 * up, 1e-14));
	// markers near the 9th and 15th harmonic at 1e14 and 5e14 W/cm^2
	CHECK_THAT(c.order, WithinAbs(9.0, 0.5));
	CHECK_THAT(classical_cutoff(make_pulse(390.0, 5e14, 5.0, 0.0), 0.9034).order, WithinAbs(15.0, 0.5));
}

TEST_CASE("switched-off pulse keeps the timing") {
	auto const p = make_pulse(390.0, 1e14, 5.0, 0.0);
	auto const q = switched_off(p);
	CHECK(q.T == p.T);
	CHECK(q.omega_L == p.omega_L);
	CHECK(electric_field(q, 0.3 * p.T) == 0.0);
}

TEST_CASE("invalid pulse parameters name the offending key") {
	auto key_of = [](auto f) {
		try {
			f();
		} catch (parameter_error const& e) {
			return e.key();
		}
		return std::string("none");
	};
	CHECK(key_of([] { make_pulse(-390.0, 1e14, 5, 0); }) == "pulse.wavelength_nm");
	CHECK(key_of([] { make_pulse(390.0, -1.0, 5, 0); }) == "pulse.intensity");
	CHECK(key_of([] { make_pulse(390.0, 1e14, 0.5, 0); }) == "pulse.n_cycles");
	CHECK(key_of([] { make_pulse(390.0, 1e14, 5, std::nan("")); }) == "pulse.cep");
	CHECK(key_of([] { classical_cutoff(make_pulse(390.0, 1e14, 5, 0), 0.0); }) == "ionization_potential");
}
