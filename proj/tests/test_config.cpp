#include <hhg/config.hpp>

#include <catch_amalgamated.hpp>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::string error_key(std::string const& text) {
	try {
		parse_config(text);
	} catch (parameter_error const& e) {
		return e.key();
	}
	return "";
}

} // namespace

TEST_CASE("an empty document yields valid defaults") {
	auto const c = parse_config("");
	CHECK(c.model == Model::sae);
	CHECK(c.gauge == Gauge::length);
	CHECK(c.wavelength_nm == 390.0);
	CHECK(c.intensity == 1e14);
	CHECK(c.n_cycles == 5.0);
	CHECK(c.basis.r_max == 120.0);
	CHECK(c.basis.n_splines == 1050);
	CHECK(c.basis.k == 9);
	CHECK(c.basis.l_max == 20);
	CHECK(c.basis.knots == KnotDistribution::sinh);
	CHECK(c.propagator.dt == 0.01);
	CHECK(c.observables.spectrum_range == SpectrumRange::pulse);
	CHECK_NOTHROW(validate(c));
	// empty sections are harmless
	CHECK(config_hash(parse_config("[pulse]\n[basis]\n")) == config_hash(c));
}

TEST_CASE("values are parsed and validated per key") {
	auto const c = parse_config("[run]\nmodel = tddft\ngauge = velocity\n[pulse]\nintensity = 5e14\ncep = pi/2\n"
	                            "[basis]\nl_max = 3\nknots = linear\n[propagator]\nabsorb = false\n");
	CHECK(c.model == Model::tddft);
	CHECK(c.gauge == Gauge::velocity);
	CHECK(c.intensity == 5e14);
	CHECK_THAT(c.cep, WithinAbs(std::numbers::pi / 2.0, 1e-15));
	CHECK(c.basis.l_max == 3);
	CHECK_FALSE(c.propagator.absorb);

	CHECK(error_key("[pulse]\nintensity = -1\n") == "pulse.intensity");
	CHECK(error_key("[pulse]\nintensity = bright\n") == "pulse.intensity");
	CHECK(error_key("[basis]\nl_max = 2.5\n") == "basis.l_max");
	CHECK(error_key("[basis]\nfoo = 1\n") == "basis.foo");
	CHECK(error_key("[run]\nmodel = hartree\n") == "run.model");
	CHECK(error_key("[propagator]\ndt = 0\n") == "propagator.dt");
	CHECK(error_key("[propagator]\nabsorber_start = 500\n") == "propagator.absorber_start");
	CHECK(error_key("[run]\nmodel = tddft\n[basis]\nl_max = 0\n") == "basis.l_max");
	CHECK(error_key("intensity = 1e14\n") == "intensity");
	CHECK(error_key("[observables]\nstft_alignment = left\n") == "observables.stft_alignment");
	CHECK(error_key("[pulse\n") == "config");
}

TEST_CASE("phase expressions") {
	CHECK_THAT(detail::parse_double("k", "pi"), WithinAbs(std::numbers::pi, 1e-15));
	CHECK_THAT(detail::parse_double("k", "-3*pi/4"), WithinAbs(-0.75 * std::numbers::pi, 1e-15));
	CHECK_THAT(detail::parse_double("k", "0.5pi"), WithinAbs(0.5 * std::numbers::pi, 1e-15));
	CHECK_THAT(detail::parse_double("k", " 1.25 "), WithinAbs(1.25, 0.0));
	CHECK_THROWS_AS(detail::parse_double("k", "pi/0"), parameter_error);
	CHECK_THROWS_AS(detail::parse_double("k", ""), parameter_error);
}

TEST_CASE("serialization round trip preserves the hash") {
	RunConfig c = desk_config(Model::tddft, 5e14, 0.123456789012345678, Gauge::velocity);
	c.output_root = "/somewhere";
	c.observables.apodization = Apodization::hann;
	auto const text = serialize(c);
	auto const back = parse_config(text);
	CHECK(serialize(back) == text);
	CHECK(config_hash(back) == config_hash(c));
	CHECK(back.cep == c.cep);
	CHECK(back.output_root == "/somewhere");
	CHECK(hash_hex(config_hash(c)).size() == 16u);
}

TEST_CASE("hash ignores the output root and tracks every hashed key") {
	RunConfig a;
	RunConfig b = a;
	b.output_root = "elsewhere";
	CHECK(config_hash(a) == config_hash(b));
	CHECK(serialize(a, false).find("output_root") == std::string::npos);
	for (auto const& [key, value] : std::vector<std::pair<std::string, std::string>>{
	         {"pulse.cep", "pi/2"}, {"run.gauge", "velocity"}, {"propagator.dt", "0.02"}, {"observables.stft_stride", "5"}, {"basis.k", "8"}}) {
		RunConfig c = a;
		set_value(c, key, value);
		CHECK(config_hash(c) != config_hash(a));
	}
	// FNV-1a reference values
	CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
	CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("assignments and the key registry") {
	RunConfig c;
	apply_assignment(c, "pulse.intensity=3e14");
	CHECK(c.intensity == 3e14);
	apply_assignment(c, "observables.stft = no");
	CHECK_FALSE(c.observables.stft);
	CHECK_THROWS_AS(apply_assignment(c, "pulse.intensity"), parameter_error);
	CHECK_THROWS_AS(apply_assignment(c, "nothing.here=1"), parameter_error);
	REQUIRE(find_key("run.output_root") != nullptr);
	CHECK_FALSE(find_key("run.output_root")->hashed);
	CHECK(find_key("pulse.cep")->hashed);
	for (auto const& k : config_keys()) {
		CHECK(k.path.find('.') != std::string::npos);
		CHECK_FALSE(k.help.empty());
	}
}

TEST_CASE("step counts follow the pulse and tail") {
	auto const c = desk_config(Model::tddft, 1e14);
	auto const p = c.pulse();
	CHECK(c.pulse_steps() == std::lround(p.T / 0.02));
	CHECK(c.total_steps() == std::lround((p.T + 2.0 * p.period()) / 0.02));
	CHECK(c.total_steps() == 18823);
	CHECK(desk_config(Model::sae, 1e14).basis.l_max == 16);
}
