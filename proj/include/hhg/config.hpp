#ifndef HHG_CONFIG_HPP
#define HHG_CONFIG_HPP

#include <hhg/basis.hpp>
#include <hhg/errors.hpp>
#include <hhg/operators.hpp>
#include <hhg/propagate.hpp>
#include <hhg/pulse.hpp>
#include <hhg/spectrum.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hhg {

enum class Model { sae, tddft };

inline Model parse_model(std::string_view s) {
	if (s == "sae") return Model::sae;
	if (s == "tddft") return Model::tddft;
	throw parameter_error("run.model", "unknown model '" + std::string(s) + "' (expected sae or tddft)");
}

inline char const* to_string(Model m) { return m == Model::sae ? "sae" : "tddft"; }

inline KnotDistribution parse_knots(std::string_view s) {
	if (s == "linear") return KnotDistribution::linear;
	if (s == "sinh") return KnotDistribution::sinh;
	throw parameter_error("basis.knots", "unknown knot distribution '" + std::string(s) + "'");
}

inline char const* to_string(KnotDistribution k) { return k == KnotDistribution::linear ? "linear" : "sinh"; }

inline Functional parse_functional(std::string_view s) {
	if (s == "xlda") return Functional::xlda;
	throw parameter_error("tddft.functional", "unknown functional '" + std::string(s) + "'");
}

enum class SpectrumRange { pulse, record };

inline SpectrumRange parse_spectrum_range(std::string_view s) {
	if (s == "pulse") return SpectrumRange::pulse;
	if (s == "record") return SpectrumRange::record;
	throw parameter_error("observables.spectrum_range", "unknown range '" + std::string(s) + "' (expected pulse or record)");
}

inline char const* to_string(SpectrumRange r) { return r == SpectrumRange::pulse ? "pulse" : "record"; }

struct TddftOptions {
	Functional functional = Functional::xlda;
	int hartree_lmax = -1; // -1: min(2 l_max, 8)
	double ground_dtau = 0.2;
	double ground_tol = 1e-10;
	double polarizability_field = 0.005;
};

struct ObservableOptions {
	Apodization apodization = Apodization::none;
	SpectrumRange spectrum_range = SpectrumRange::pulse;
	int spectrum_pad = 4;
	bool stft = true;
	double stft_window_cycles = 1.0;
	int stft_stride = 10;
	WindowAlignment stft_alignment = WindowAlignment::start;
	double stft_max_order = 40.0;
};

struct RunConfig {
	Model model = Model::sae;
	Gauge gauge = Gauge::length;
	double tail_cycles = 2.0;
	std::string output_root; // not part of the hash

	double wavelength_nm = 390.0;
	double intensity = 1e14;
	double n_cycles = 5.0;
	double cep = 0.0;

	BasisParams basis{120.0, 1050, 9, 20, KnotDistribution::sinh, 10.0, 1.0 / 3.0, 0};
	PropagatorConfig propagator{};
	double energy_cap = 200.0; // <= 0 disables
	long checkpoint_every = 0;

	TddftOptions tddft{};
	ObservableOptions observables{};

	PulseParams pulse() const { return make_pulse(wavelength_nm, intensity, n_cycles, cep); }

	long pulse_steps() const { return std::lround(pulse().T / propagator.dt); }
	long total_steps() const { return std::lround((pulse().T + tail_cycles * pulse().period()) / propagator.dt); }
};

// ---- value formatting / parsing --------------------------------------------

namespace detail {

inline std::string format_double(double v) {
	char buf[64];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline std::string trim(std::string_view s) {
	auto const b = s.find_first_not_of(" \t\r\n");
	if (b == std::string_view::npos) return {};
	auto const e = s.find_last_not_of(" \t\r\n");
	return std::string(s.substr(b, e - b + 1));
}

inline bool parse_plain_double(std::string const& s, double& out) {
	if (s.empty()) return false;
	char const* first = s.data();
	char const* last = s.data() + s.size();
	if (*first == '+') ++first;
	auto [p, ec] = std::from_chars(first, last, out);
	return ec == std::errc() && p == last;
}

// Accepts plain numbers and multiples of pi: "pi", "pi/2", "0.5pi", "3*pi/4".
inline double parse_double(std::string const& key, std::string const& raw) {
	std::string s = trim(raw);
	double v = 0.0;
	if (parse_plain_double(s, v)) return v;
	auto const at = s.find("pi");
	if (at != std::string::npos) {
		std::string pre = trim(s.substr(0, at));
		std::string post = trim(s.substr(at + 2));
		double mul = 1.0, div = 1.0;
		if (!pre.empty() && pre.back() == '*') pre = trim(pre.substr(0, pre.size() - 1));
		bool ok = true;
		if (!pre.empty()) ok = pre == "-" ? (mul = -1.0, true) : parse_plain_double(pre, mul);
		if (ok && !post.empty()) ok = post.front() == '/' && parse_plain_double(trim(post.substr(1)), div) && div != 0.0;
		if (ok) return mul * std::numbers::pi / div;
	}
	throw parameter_error(key, "expected a number, got '" + raw + "'");
}

inline long parse_integer(std::string const& key, std::string const& raw) {
	std::string const s = trim(raw);
	long v = 0;
	auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
	if (s.empty() || ec != std::errc() || p != s.data() + s.size()) throw parameter_error(key, "expected an integer, got '" + raw + "'");
	return v;
}

inline bool parse_bool(std::string const& key, std::string const& raw) {
	std::string const s = trim(raw);
	if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
	if (s == "false" || s == "no" || s == "off" || s == "0") return false;
	throw parameter_error(key, "expected a boolean, got '" + raw + "'");
}

} // namespace detail

// Every recognised key with its reader and writer; the order here is the
// canonical serialization order.
struct ConfigKey {
	std::string path;
	std::string help;
	std::function<void(RunConfig&, std::string const&)> set;
	std::function<std::string(RunConfig const&)> get;
	bool hashed = true;
};

inline std::vector<ConfigKey> const& config_keys() {
	using namespace detail;
	auto dbl = [](std::string path, std::string help, auto member) {
		return ConfigKey{path, help, [=](RunConfig& c, std::string const& v) { member(c) = parse_double(path, v); },
		                 [=](RunConfig const& c) { return format_double(member(const_cast<RunConfig&>(c))); }};
	};
	auto integer = [](std::string path, std::string help, auto member) {
		return ConfigKey{path, help,
		                 [=](RunConfig& c, std::string const& v) { member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(parse_integer(path, v)); },
		                 [=](RunConfig const& c) { return std::to_string(member(const_cast<RunConfig&>(c))); }};
	};
	auto boolean = [](std::string path, std::string help, auto member) {
		return ConfigKey{path, help, [=](RunConfig& c, std::string const& v) { member(c) = parse_bool(path, v); },
		                 [=](RunConfig const& c) { return std::string(member(const_cast<RunConfig&>(c)) ? "true" : "false"); }};
	};
	static std::vector<ConfigKey> const keys = [&] {
		std::vector<ConfigKey> k;
		k.push_back({"run.model", "sae or tddft", [](RunConfig& c, std::string const& v) { c.model = parse_model(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.model)); }});
		k.push_back({"run.gauge", "length or velocity", [](RunConfig& c, std::string const& v) { c.gauge = parse_gauge(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.gauge)); }});
		k.push_back(dbl("run.tail_cycles", "field-free optical cycles appended after the pulse", [](RunConfig& c) -> double& { return c.tail_cycles; }));
		k.push_back({"run.output_root", "directory holding one sub-directory per config hash",
		             [](RunConfig& c, std::string const& v) { c.output_root = trim(v); }, [](RunConfig const& c) { return c.output_root; }, false});

		k.push_back(dbl("pulse.wavelength_nm", "carrier wavelength (nm)", [](RunConfig& c) -> double& { return c.wavelength_nm; }));
		k.push_back(dbl("pulse.intensity", "peak cycle-averaged intensity (W/cm^2)", [](RunConfig& c) -> double& { return c.intensity; }));
		k.push_back(dbl("pulse.n_cycles", "optical cycles under the sin^2 envelope", [](RunConfig& c) -> double& { return c.n_cycles; }));
		k.push_back(dbl("pulse.cep", "carrier-envelope phase (rad; 'pi/2' accepted)", [](RunConfig& c) -> double& { return c.cep; }));

		k.push_back(dbl("basis.r_max", "radial box (a.u.)", [](RunConfig& c) -> double& { return c.basis.r_max; }));
		k.push_back(integer("basis.n_splines", "B-splines including the two dropped boundary splines", [](RunConfig& c) -> int& { return c.basis.n_splines; }));
		k.push_back(integer("basis.k", "spline order", [](RunConfig& c) -> int& { return c.basis.k; }));
		k.push_back(integer("basis.l_max", "largest angular momentum", [](RunConfig& c) -> int& { return c.basis.l_max; }));
		k.push_back({"basis.knots", "linear or sinh", [](RunConfig& c, std::string const& v) { c.basis.knots = parse_knots(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.basis.knots)); }});
		k.push_back(dbl("basis.inner_radius", "sinh knots: radius holding inner_fraction of the intervals", [](RunConfig& c) -> double& { return c.basis.inner_radius; }));
		k.push_back(dbl("basis.inner_fraction", "sinh knots: fraction of intervals inside inner_radius", [](RunConfig& c) -> double& { return c.basis.inner_fraction; }));
		k.push_back(integer("basis.quad_points", "Gauss-Legendre nodes per interval (0: k)", [](RunConfig& c) -> int& { return c.basis.quad_points; }));

		k.push_back(dbl("propagator.dt", "time step (a.u.)", [](RunConfig& c) -> double& { return c.propagator.dt; }));
		k.push_back(integer("propagator.krylov_dim", "largest Krylov subspace", [](RunConfig& c) -> int& { return c.propagator.krylov_dim; }));
		k.push_back(dbl("propagator.residual_tol", "Krylov acceptance tolerance", [](RunConfig& c) -> double& { return c.propagator.residual_tol; }));
		k.push_back(boolean("propagator.absorb", "apply the radial mask every step", [](RunConfig& c) -> bool& { return c.propagator.absorb; }));
		k.push_back(dbl("propagator.absorber_start", "mask onset radius (a.u.)", [](RunConfig& c) -> double& { return c.propagator.absorber_start; }));
		k.push_back(dbl("propagator.absorber_exponent", "n in cos^(1/n)", [](RunConfig& c) -> double& { return c.propagator.absorber_exponent; }));
		k.push_back(dbl("propagator.energy_cap", "field-free eigenvalues above this are capped (a.u.; <= 0 disables)", [](RunConfig& c) -> double& { return c.energy_cap; }));
		k.push_back(integer("propagator.checkpoint_every", "steps between checkpoints (0: only on abort)", [](RunConfig& c) -> long& { return c.checkpoint_every; }));

		k.push_back({"tddft.functional", "exchange-correlation functional (xlda)",
		             [](RunConfig& c, std::string const& v) { c.tddft.functional = parse_functional(trim(v)); },
		             [](RunConfig const&) { return std::string("xlda"); }});
		k.push_back(integer("tddft.hartree_lmax", "Hartree multipole cut (-1: min(2 l_max, 8))", [](RunConfig& c) -> int& { return c.tddft.hartree_lmax; }));
		k.push_back(dbl("tddft.ground_dtau", "imaginary-time step", [](RunConfig& c) -> double& { return c.tddft.ground_dtau; }));
		k.push_back(dbl("tddft.ground_tol", "total-energy change per step at convergence", [](RunConfig& c) -> double& { return c.tddft.ground_tol; }));
		k.push_back(dbl("tddft.polarizability_field", "finite-field step for the static polarizability", [](RunConfig& c) -> double& { return c.tddft.polarizability_field; }));

		k.push_back({"observables.apodization", "none or hann (whole-record window on the spectrum)",
		             [](RunConfig& c, std::string const& v) { c.observables.apodization = parse_apodization(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.observables.apodization)); }});
		k.push_back({"observables.spectrum_range", "pulse ([0, T]) or record (including the tail)",
		             [](RunConfig& c, std::string const& v) { c.observables.spectrum_range = parse_spectrum_range(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.observables.spectrum_range)); }});
		k.push_back(integer("observables.spectrum_pad", "zero-padding factor", [](RunConfig& c) -> int& { return c.observables.spectrum_pad; }));
		k.push_back(boolean("observables.stft", "write the spectrogram", [](RunConfig& c) -> bool& { return c.observables.stft; }));
		k.push_back(dbl("observables.stft_window_cycles", "Hann window length in optical periods", [](RunConfig& c) -> double& { return c.observables.stft_window_cycles; }));
		k.push_back(integer("observables.stft_stride", "samples between window positions", [](RunConfig& c) -> int& { return c.observables.stft_stride; }));
		k.push_back({"observables.stft_alignment", "start (window on [tau, tau + T_W]) or centered",
		             [](RunConfig& c, std::string const& v) { c.observables.stft_alignment = parse_alignment(trim(v)); },
		             [](RunConfig const& c) { return std::string(to_string(c.observables.stft_alignment)); }});
		k.push_back(dbl("observables.stft_max_order", "highest harmonic order written to the spectrogram", [](RunConfig& c) -> double& { return c.observables.stft_max_order; }));
		return k;
	}();
	return keys;
}

inline ConfigKey const* find_key(std::string_view path) {
	for (auto const& k : config_keys())
		if (k.path == path) return &k;
	return nullptr;
}

// Constraint checks beyond what the individual parsers enforce.
inline void validate(RunConfig const& c) {
	(void)c.pulse(); // pulse.* checks
	if (!(c.tail_cycles >= 0.0)) throw parameter_error("run.tail_cycles", "must be non-negative");
	auto const& b = c.basis;
	if (!(b.r_max > 0.0)) throw parameter_error("basis.r_max", "must be positive");
	if (b.k < 3 || b.k > max_spline_order) throw parameter_error("basis.k", "spline order must lie in [3, 16]");
	if (b.n_splines < b.k + 2) throw parameter_error("basis.n_splines", "need at least k + 2 splines");
	if (b.l_max < 0) throw parameter_error("basis.l_max", "must be non-negative");
	if (c.model == Model::tddft && b.l_max < 1) throw parameter_error("basis.l_max", "the Kohn-Sham model needs l_max >= 1");
	if (!(b.inner_radius > 0.0) || !(b.inner_radius < b.r_max)) throw parameter_error("basis.inner_radius", "must lie inside (0, r_max)");
	if (!(b.inner_fraction > 0.0) || !(b.inner_fraction < 1.0)) throw parameter_error("basis.inner_fraction", "must lie inside (0, 1)");
	if (b.quad_points != 0 && b.quad_points < b.k) throw parameter_error("basis.quad_points", "need at least k nodes per interval");
	c.propagator.validate(b.r_max);
	if (c.checkpoint_every < 0) throw parameter_error("propagator.checkpoint_every", "must be non-negative");
	if (c.tddft.hartree_lmax < -1) throw parameter_error("tddft.hartree_lmax", "must be -1 or non-negative");
	if (!(c.tddft.ground_dtau > 0.0)) throw parameter_error("tddft.ground_dtau", "must be positive");
	if (!(c.tddft.ground_tol > 0.0)) throw parameter_error("tddft.ground_tol", "must be positive");
	if (!(c.tddft.polarizability_field > 0.0)) throw parameter_error("tddft.polarizability_field", "must be positive");
	auto const& o = c.observables;
	if (o.spectrum_pad < 1) throw parameter_error("observables.spectrum_pad", "must be at least 1");
	if (!(o.stft_window_cycles > 0.0)) throw parameter_error("observables.stft_window_cycles", "must be positive");
	if (o.stft_stride < 1) throw parameter_error("observables.stft_stride", "must be positive");
	if (!(o.stft_max_order > 0.0)) throw parameter_error("observables.stft_max_order", "must be positive");
}

inline void set_value(RunConfig& c, std::string const& path, std::string const& value) {
	auto const* k = find_key(path);
	if (!k) throw parameter_error(path, "unknown configuration key");
	k->set(c, value);
}

// "section.key=value"
inline void apply_assignment(RunConfig& c, std::string const& assignment) {
	auto const eq = assignment.find('=');
	if (eq == std::string::npos) throw parameter_error(assignment, "expected key=value");
	set_value(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

// INI-style document: [section] headers, key = value lines, '#' or ';' comments.
inline RunConfig parse_config(std::string const& text, RunConfig base = {}) {
	namespace pt = boost::property_tree;
	pt::ptree tree;
	std::istringstream is(text);
	try {
		pt::ini_parser::read_ini(is, tree);
	} catch (pt::ini_parser_error const& e) {
		throw parameter_error("config", "line " + std::to_string(e.line()) + ": " + e.message());
	}
	for (auto const& [section, body] : tree) {
		if (body.empty()) {
			bool const known = std::any_of(config_keys().begin(), config_keys().end(),
			                               [&](ConfigKey const& k) { return k.path.starts_with(section + "."); });
			if (!known || !body.data().empty()) throw parameter_error(section, "key outside any section (expected [section] header)");
		}
		for (auto const& [key, value] : body) set_value(base, section + "." + key, value.get_value<std::string>());
	}
	validate(base);
	return base;
}

inline std::string serialize(RunConfig const& c, bool include_unhashed = true) {
	std::ostringstream os;
	std::string section;
	for (auto const& k : config_keys()) {
		if (!include_unhashed && !k.hashed) continue;
		auto const dot = k.path.find('.');
		std::string const s = k.path.substr(0, dot);
		if (s != section) {
			if (!section.empty()) os << '\n';
			os << '[' << s << "]\n";
			section = s;
		}
		os << k.path.substr(dot + 1) << " = " << k.get(c) << '\n';
	}
	return os.str();
}

inline std::uint64_t fnv1a64(std::string_view s) {
	std::uint64_t h = 0xcbf29ce484222325ull;
	for (unsigned char ch : s) {
		h ^= ch;
		h *= 0x100000001b3ull;
	}
	return h;
}

inline std::uint64_t config_hash(RunConfig const& c) { return fnv1a64(serialize(c, false)); }

inline std::string hash_hex(std::uint64_t h) {
	char buf[17];
	std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
	return buf;
}

// Scaled-down settings used by the test suite and the README examples.
inline RunConfig desk_config(Model model, double intensity, double cep = 0.0, Gauge gauge = Gauge::length) {
	RunConfig c;
	c.model = model;
	c.gauge = gauge;
	c.intensity = intensity;
	c.cep = cep;
	c.basis.k = 7;
	c.basis.knots = KnotDistribution::linear;
	if (model == Model::sae) {
		c.basis.r_max = 120.0;
		c.basis.n_splines = 400;
		c.basis.l_max = 16;
		c.propagator.absorber_start = 90.0;
	} else {
		c.basis.r_max = 100.0;
		c.basis.n_splines = 300;
		c.basis.l_max = 12;
		c.propagator.absorber_start = 75.0;
	}
	c.propagator.dt = 0.02;
	return c;
}

} // namespace hhg

#endif
