#ifndef HHG_RUNNER_HPP
#define HHG_RUNNER_HPP

#include <hhg/config.hpp>
#include <hhg/observables.hpp>
#include <hhg/propagate.hpp>
#include <hhg/sae.hpp>
#include <hhg/spectrum.hpp>
#include <hhg/tddft.hpp>
#include <hhg/units.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hhg {

inline constexpr char code_version[] = "1.0.0";

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- files ------------------------------------------------------------------

inline void write_text_atomic(fs::path const& path, std::string const& text) {
	auto const tmp = fs::path(path.string() + ".tmp");
	{
		std::ofstream os(tmp, std::ios::trunc);
		if (!os) throw io_error("cannot open " + tmp.string());
		os << text;
		if (!os) throw io_error("write failed for " + tmp.string());
	}
	std::error_code ec;
	fs::rename(tmp, path, ec);
	if (ec) throw io_error("cannot move " + tmp.string() + " into place: " + ec.message());
}

inline std::string read_text(fs::path const& path) {
	std::ifstream is(path);
	if (!is) throw io_error("cannot open " + path.string());
	std::ostringstream ss;
	ss << is.rdbuf();
	return ss.str();
}

inline json read_json(fs::path const& path) {
	try {
		return json::parse(read_text(path));
	} catch (json::exception const& e) {
		throw io_error(path.string() + ": " + e.what());
	}
}

inline void write_json(fs::path const& path, json const& j) { write_text_atomic(path, j.dump(2) + "\n"); }

// Columns: t, E(t), d(t), d''(t), <c|S|c>, cumulative absorbed norm.
inline void write_record(fs::path const& path, EvolutionRecord const& r) {
	std::ostringstream os;
	os << "# t\tfield\tdipole\tacceleration\tnorm\tabsorbed\n" << std::setprecision(17);
	for (std::size_t i = 0; i < r.size(); ++i)
		os << r.times[i] << '\t' << r.field[i] << '\t' << r.dipole[i] << '\t' << r.acceleration[i] << '\t' << r.norm[i] << '\t' << r.absorbed[i]
		   << '\n';
	write_text_atomic(path, os.str());
}

inline EvolutionRecord read_record(fs::path const& path) {
	std::ifstream is(path);
	if (!is) throw io_error("cannot open " + path.string());
	EvolutionRecord r;
	std::string line;
	long lineno = 0;
	while (std::getline(is, line)) {
		++lineno;
		if (line.empty() || line.front() == '#') continue;
		std::istringstream ls(line);
		double v[6];
		for (double& x : v)
			if (!(ls >> x)) throw io_error(path.string() + ":" + std::to_string(lineno) + ": expected 6 columns");
		r.push(v[0], v[1], v[2], v[3], v[4], v[5]);
	}
	return r;
}

inline void write_spectrum(fs::path const& path, Spectrum const& s) {
	std::ostringstream os;
	os << "# omega\torder\tS\n" << std::setprecision(12);
	for (std::size_t k = 0; k < s.omega.size(); ++k) os << s.omega[k] << '\t' << s.order(k) << '\t' << s.density[k] << '\n';
	write_text_atomic(path, os.str());
}

inline void write_spectrogram(fs::path const& path, Spectrogram const& sg) {
	std::ostringstream os;
	os << "# tau\tomega\tF\n" << std::setprecision(10);
	for (std::size_t i = 0; i < sg.tau.size(); ++i) {
		for (std::size_t k = 0; k < sg.omega.size(); ++k) os << sg.tau[i] << '\t' << sg.omega[k] << '\t' << sg.at(i, k) << '\n';
		os << '\n';
	}
	write_text_atomic(path, os.str());
}

// ---- layout -----------------------------------------------------------------

inline fs::path output_root(RunConfig const& c) {
	if (!c.output_root.empty()) return c.output_root;
	if (char const* env = std::getenv("HHG_OUTPUT_ROOT"); env && *env) return env;
	return "hhg_runs";
}

inline fs::path run_directory(RunConfig const& c) { return output_root(c) / hash_hex(config_hash(c)); }

namespace files {
inline constexpr char config[] = "config.ini";
inline constexpr char manifest[] = "manifest.json";
inline constexpr char record[] = "dipole.tsv";
inline constexpr char spectrum[] = "spectrum.tsv";
inline constexpr char spectrogram[] = "spectrogram.tsv";
inline constexpr char checkpoint[] = "checkpoint.bin";
} // namespace files

// ---- models -----------------------------------------------------------------

inline SaeModel make_sae(RunConfig const& c) { return SaeModel(SpectralBasis(c.basis), ModelPotential{}, c.gauge, c.energy_cap); }

inline KsModel make_ks(RunConfig const& c, Occupation occupation = Occupation::closed_shell) {
	return KsModel(SpectralBasis(c.basis), c.gauge, 2.0, occupation, c.tddft.hartree_lmax, c.energy_cap);
}

inline ImaginaryTimeConfig imaginary_time(RunConfig const& c) {
	ImaginaryTimeConfig g;
	g.dtau = c.tddft.ground_dtau;
	g.energy_tol = c.tddft.ground_tol;
	return g;
}

inline json bound_state_table(std::vector<BoundState> const& states) {
	json t = json::array();
	for (auto const& s : states) t.push_back({{"l", s.l}, {"energy", s.energy}});
	return t;
}

// Field-free Kohn-Sham Hamiltonian (core + frozen ground-state potential),
// diagonal blocks only: the ground-state density is spherical.
inline BandedBlockOperator frozen_ks_hamiltonian(KsModel const& m, KsPotential const& pot) {
	auto const& hc = m.h_core();
	int const kd = hc.find(0, 0)->matrix.half_bandwidth();
	auto const v = m.potential_operator(pot).as_block_operator(kd);
	BandedBlockOperator h(m.basis().n_radial(), m.basis().n_angular(), kd);
	for (int l = 0; l < m.basis().n_angular(); ++l) {
		BandedMatrix blk = hc.find(l, l)->matrix;
		if (auto const* vb = v.find(l, l)) blk.add_scaled(vb->matrix, 1.0);
		h.add_block(l, l, std::move(blk));
	}
	return h;
}

struct GroundStateSummary {
	json report;
	double ionization_potential = 0.0;
	cvector orbital;
	std::vector<BoundState> bound;
};

inline GroundStateSummary sae_ground_state(SaeModel const& m, int bound_count = 10) {
	GroundStateSummary g;
	auto const gs = m.ground_state();
	g.orbital = m.embed(gs.vector, 0);
	g.ionization_potential = -gs.value;
	g.bound = lowest_bound_states(m.h0(), m.overlap().radial(), bound_count);
	g.report = {{"model", "sae"},
	            {"orbital_energy", gs.value},
	            {"ionization_potential", g.ionization_potential},
	            {"bound_states", bound_state_table(g.bound)}};
	return g;
}

inline GroundStateSummary ks_ground_state(KsModel const& m, RunConfig const& c, int bound_count = 10) {
	GroundStateSummary g;
	auto const it = imaginary_time(c);
	auto const gs = m.ground_state(it);
	auto const ion = make_ks(c, Occupation::one_unpolarized).ground_state(it);
	g.orbital = gs.orbital;
	g.ionization_potential = ion.total_energy - gs.total_energy;
	g.bound = lowest_bound_states(frozen_ks_hamiltonian(m, m.potential(gs.orbital)), m.overlap().radial(), bound_count);
	g.report = {{"model", "tddft"},
	            {"total_energy", gs.total_energy},
	            {"orbital_energy", gs.orbital_energy},
	            {"iterations", gs.iterations},
	            {"ion_energy", ion.total_energy},
	            {"ionization_potential", g.ionization_potential},
	            {"bound_states", bound_state_table(g.bound)}};
	return g;
}

struct Polarizability {
	double field = 0.0;
	double alpha = 0.0;        // central difference at +-field
	double alpha_double = 0.0; // central difference at +-2 field
	double extrapolated = 0.0; // Richardson, removes the field^2 term
};

// alpha = (d(+F) - d(-F)) / 2F with the static field entering H as + F z.
inline Polarizability static_polarizability(KsModel const& m, ImaginaryTimeConfig const& it, double field, cvector const& start) {
	auto dipole_at = [&](double f) { return m.dipole(m.ground_state(it, f, start).orbital); };
	Polarizability p;
	p.field = field;
	p.alpha = (dipole_at(field) - dipole_at(-field)) / (2.0 * field);
	p.alpha_double = (dipole_at(2.0 * field) - dipole_at(-2.0 * field)) / (4.0 * field);
	p.extrapolated = (4.0 * p.alpha - p.alpha_double) / 3.0;
	return p;
}

inline json ground_state_report(RunConfig const& c, bool polarizability = false) {
	validate(c);
	if (c.model == Model::sae) return sae_ground_state(make_sae(c)).report;
	auto const m = make_ks(c);
	auto g = ks_ground_state(m, c);
	if (polarizability) {
		auto const p = static_polarizability(m, imaginary_time(c), c.tddft.polarizability_field, g.orbital);
		g.report["polarizability"] = {{"field", p.field}, {"alpha", p.alpha}, {"alpha_double_field", p.alpha_double}, {"extrapolated", p.extrapolated}};
	}
	return g.report;
}

// ---- analysis ---------------------------------------------------------------

struct Analysis {
	Spectrum spectrum;
	std::optional<Spectrogram> spectrogram;
	json summary;
};

// Samples used for the spectrum: the pulse interval [0, T] or the whole record.
inline std::size_t spectrum_samples(RunConfig const& c, EvolutionRecord const& r) {
	if (c.observables.spectrum_range == SpectrumRange::record) return r.size();
	double const T = c.pulse().T;
	std::size_t n = 0;
	while (n < r.size() && r.times[n] <= T + 1e-9 * T) ++n;
	return n;
}

inline Spectrum record_spectrum(RunConfig const& c, EvolutionRecord const& r) {
	double const dt = r.spacing();
	std::span<double const> a(r.acceleration.data(), spectrum_samples(c, r));
	return spectral_density(a, dt, c.pulse().omega_L, c.observables.apodization, c.observables.spectrum_pad);
}

inline double density_at(Spectrum const& s, double order) {
	auto const k = static_cast<std::size_t>(std::lround(order * s.omega_L / s.d_omega));
	if (k >= s.density.size()) throw parameter_error("spectrum.grid", "harmonic order " + std::to_string(order) + " not covered");
	return s.density[k];
}

inline json features_json(SpectralFeatures const& f) {
	return {{"fundamental", f.fundamental},
	        {"dip", f.dip},
	        {"secondary_maximum", f.secondary_maximum},
	        {"drop_off", f.drop_off},
	        {"cutoff_order", f.cutoff_order}};
}

// Times of the local extrema of d(t).
inline std::vector<double> turning_points(EvolutionRecord const& r) {
	std::vector<double> t;
	for (std::size_t i = 1; i + 1 < r.size(); ++i) {
		double const a = r.dipole[i] - r.dipole[i - 1], b = r.dipole[i + 1] - r.dipole[i];
		if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) t.push_back(r.times[i]);
	}
	return t;
}

// Lower edge (harmonic order) of the band used to locate emission bursts.
inline constexpr double burst_band_order = 5.0;

inline json burst_summary(Spectrogram const& sg, EvolutionRecord const& r, PulseParams const& pulse) {
	json out;
	double const hi = sg.omega.back() / sg.omega_L;
	auto const power = band_power(sg, burst_band_order, hi);
	double const shift = sg.alignment == WindowAlignment::start ? 0.5 * sg.window_length : 0.0;
	std::size_t best = 0;
	for (std::size_t i = 0; i < power.size(); ++i)
		if (power[i] > power[best]) best = i;
	double const tau = sg.tau[best];
	double nearest = std::numeric_limits<double>::quiet_NaN();
	for (double t : turning_points(r))
		if (!(std::abs(t - tau) >= std::abs(nearest - tau))) nearest = t;
	out["dominant"] = {{"band_orders", {burst_band_order, hi}},
	                   {"tau", tau},
	                   {"tau_fs", units::au_to_fs(tau)},
	                   {"window_center_fs", units::au_to_fs(tau + shift)},
	                   {"nearest_turning_point_fs", std::isfinite(nearest) ? json(units::au_to_fs(nearest)) : json(nullptr)}};

	// Line emitted after the pulse: windows lying wholly in the field-free tail.
	double const t_end = r.times.back();
	double const lead = sg.alignment == WindowAlignment::start ? 0.0 : 0.5 * sg.window_length;
	std::vector<double> mean(sg.omega.size(), 0.0);
	int count = 0;
	for (std::size_t i = 0; i < sg.tau.size(); ++i) {
		double const begin = sg.tau[i] - lead;
		if (begin < pulse.T || begin + sg.window_length > t_end + 1e-9) continue;
		for (std::size_t k = 0; k < sg.omega.size(); ++k) mean[k] += sg.at(i, k);
		++count;
	}
	if (count > 0) {
		std::size_t peak = 0;
		for (std::size_t k = 0; k < mean.size(); ++k)
			if (sg.omega[k] >= 1.5 * sg.omega_L && (peak == 0 || mean[k] > mean[peak])) peak = k;
		out["post_pulse_line"] = {{"windows", count}, {"omega", sg.omega[peak]}, {"order", sg.omega[peak] / sg.omega_L}};
	} else {
		out["post_pulse_line"] = nullptr;
	}
	return out;
}

inline Analysis analyze_record(RunConfig const& c, EvolutionRecord const& r, double ionization_potential) {
	Analysis a;
	auto const pulse = c.pulse();
	double const dt = r.spacing();
	a.spectrum = record_spectrum(c, r);
	auto const cutoff = classical_cutoff(pulse, ionization_potential);
	json& s = a.summary;
	s["spectrum"] = {{"range", to_string(c.observables.spectrum_range)},
	                 {"samples", spectrum_samples(c, r)},
	                 {"d_omega", a.spectrum.d_omega},
	                 {"transform_length", a.spectrum.transform_length}};
	s["cutoff"] = {{"omega", cutoff.omega}, {"order", cutoff.order}, {"ponderomotive_energy", ponderomotive_energy(pulse)}};
	try {
		s["features"] = features_json(locate_features(a.spectrum, cutoff));
	} catch (parameter_error const& e) {
		s["features"] = nullptr;
		s["notes"].push_back(std::string("features unavailable: ") + e.what());
	}
	int const max_q = static_cast<int>(std::floor(std::min(max_order(a.spectrum) - 0.5, 2.0 * cutoff.order + 10.0)));
	json peaks = json::array();
	for (int q = 1; q <= max_q; ++q) peaks.push_back({{"order", q}, {"peak", peak_height(a.spectrum, q)}, {"at_order", density_at(a.spectrum, q)}});
	s["peaks"] = std::move(peaks);

	// Ehrenfest acceleration against the second difference of d(t), over the pulse.
	auto const fd = second_difference(r.dipole, dt);
	std::size_t const n = spectrum_samples(c, r);
	double num = 0.0, den = 0.0;
	for (std::size_t i = 1; i + 1 < n; ++i) {
		num += (fd[i] - r.acceleration[i]) * (fd[i] - r.acceleration[i]);
		den += r.acceleration[i] * r.acceleration[i];
	}
	s["ehrenfest_vs_fd"] = den > 0.0 ? std::sqrt(num / den) : 0.0;

	if (c.observables.stft) {
		double const tw = c.observables.stft_window_cycles * pulse.period();
		a.spectrogram = stft(r.acceleration, dt, r.times.front(), pulse.omega_L, tw, c.observables.stft_stride,
		                     c.observables.stft_max_order * pulse.omega_L, c.observables.stft_alignment, c.observables.spectrum_pad);
		s["stft"] = {{"window_length", tw}, {"alignment", to_string(c.observables.stft_alignment)}};
		s["stft"]["bursts"] = burst_summary(*a.spectrogram, r, pulse);
	}
	return a;
}

inline void write_analysis(fs::path const& dir, Analysis const& a) {
	write_spectrum(dir / files::spectrum, a.spectrum);
	if (a.spectrogram) write_spectrogram(dir / files::spectrogram, *a.spectrogram);
	else fs::remove(dir / files::spectrogram);
}

// ---- run --------------------------------------------------------------------

using Logger = std::function<void(std::string const&)>;

struct RunOptions {
	bool force = false;     // recompute even when a complete manifest exists
	long stop_after = -1;   // checkpoint and stop after this many steps
	long progress_every = 2000;
	Logger log;
};

struct RunOutcome {
	fs::path directory;
	json manifest;
	bool skipped = false;
};

inline bool manifest_complete(json const& m, std::uint64_t hash) {
	return m.value("status", "") == "complete" && m.value("config_hash", "") == hash_hex(hash) && m.value("code_version", "") == code_version;
}

namespace detail {

inline json manifest_header(RunConfig const& c, std::uint64_t hash) {
	auto const p = c.pulse();
	return {{"config_hash", hash_hex(hash)},
	        {"code_version", code_version},
	        {"model", to_string(c.model)},
	        {"gauge", to_string(c.gauge)},
	        {"status", "running"},
	        {"pulse",
	         {{"omega_L", p.omega_L},
	          {"E0", p.E0},
	          {"duration", p.T},
	          {"duration_fs", p.duration_fs()},
	          {"cep", p.cep},
	          {"intensity", p.intensity}}},
	        {"steps", {{"dt", c.propagator.dt}, {"pulse", c.pulse_steps()}, {"total", c.total_steps()}}},
	        {"notes", json::array()}};
}

template <class Stepper>
void execute(Stepper& stepper, GroundStateSummary const& gs, RunConfig const& c, fs::path const& dir, std::uint64_t hash, RunOptions const& opt,
             json& m, std::chrono::steady_clock::time_point started) {
	auto const elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
	auto const ckpath = dir / files::checkpoint;
	WaveState state;
	state.coefficients = gs.orbital;
	state.gauge = c.gauge;
	EvolutionRecord record;
	if (!opt.force && fs::exists(ckpath)) {
		auto ck = read_checkpoint(ckpath, hash);
		if (ck.state.coefficients.size() != state.coefficients.size()) throw io_error("checkpoint: dimension does not match the basis");
		state = std::move(ck.state);
		record = std::move(ck.record);
		m["resumed_from_step"] = state.step;
		if (opt.log) opt.log("resuming at step " + std::to_string(state.step));
	}
	long const total = c.total_steps();
	Observer observer = [&](WaveState const& s, EvolutionRecord const& r) {
		if (!std::isfinite(r.norm.back()) || !std::isfinite(r.acceleration.back()))
			throw convergence_error("state became non-finite at step " + std::to_string(s.step));
		if (opt.log && opt.progress_every > 0 && s.step % opt.progress_every == 0) {
			std::ostringstream os;
			os << "step " << s.step << "/" << total << "  t=" << std::fixed << std::setprecision(2) << s.t << "  norm=" << std::setprecision(8)
			   << r.norm.back() << "  " << std::setprecision(1) << elapsed() << " s";
			opt.log(os.str());
		}
	};
	CheckpointOptions const ck{ckpath, c.checkpoint_every, hash, opt.stop_after};

	auto const stats = [&] {
		auto const& k = stepper.stats();
		return json{{"steps", k.steps}, {"iterations", k.iterations}, {"halvings", k.halvings}, {"breakdowns", k.breakdowns}};
	};
	try {
		record = propagate(stepper, state, c.propagator, total, std::move(record), observer, ck);
	} catch (convergence_error const& e) {
		m["status"] = "incomplete";
		m["notes"].push_back(std::string("propagation aborted: ") + e.what());
		m["checkpoint_step"] = state.step;
		m["krylov"] = stats();
		m["wall_time_s"] = elapsed();
		write_json(dir / files::manifest, m);
		throw;
	}
	m["krylov"] = stats();
	if (state.step < total) {
		m["status"] = "checkpointed";
		m["checkpoint_step"] = state.step;
		m["wall_time_s"] = elapsed();
		write_json(dir / files::manifest, m);
		return;
	}

	write_checkpoint(ckpath, {hash, state, record});
	write_record(dir / files::record, record);
	double const unbound = unbound_fraction(gs.bound, stepper.overlap(), state.coefficients);
	m["ionization"] = {{"absorbed", state.cumulative_absorbed},
	                   {"final_norm", record.norm.back()},
	                   {"unbound", unbound},
	                   {"bound_states_used", gs.bound.size()}};
	auto const a = analyze_record(c, record, gs.ionization_potential);
	write_analysis(dir, a);
	m["analysis"] = a.summary;
	m["status"] = "complete";
	m["wall_time_s"] = elapsed();
	write_json(dir / files::manifest, m);
}

} // namespace detail

// Ground state, propagation, observables and manifest for one configuration.
// A complete manifest with the same hash and code version is reused.
inline RunOutcome run(RunConfig const& c, RunOptions const& opt = {}) {
	validate(c);
	auto const hash = config_hash(c);
	RunOutcome out;
	out.directory = run_directory(c);
	auto const manifest_path = out.directory / files::manifest;
	if (!opt.force && fs::exists(manifest_path)) {
		auto m = read_json(manifest_path);
		if (manifest_complete(m, hash)) {
			out.manifest = std::move(m);
			out.skipped = true;
			return out;
		}
	}
	std::error_code ec;
	fs::create_directories(out.directory, ec);
	if (ec) throw io_error("cannot create " + out.directory.string() + ": " + ec.message());
	if (opt.force)
		for (char const* f : {files::manifest, files::record, files::spectrum, files::spectrogram, files::checkpoint}) fs::remove(out.directory / f);
	write_text_atomic(out.directory / files::config, serialize(c, false));

	auto const started = std::chrono::steady_clock::now();
	json m = detail::manifest_header(c, hash);
	auto const pulse = c.pulse();
	if (opt.log) opt.log(std::string("ground state (") + to_string(c.model) + ")");
	if (c.model == Model::sae) {
		auto const model = make_sae(c);
		auto const gs = sae_ground_state(model);
		m["ground_state"] = gs.report;
		m["spectral_cap_modes"] = model.spectral_cap() ? model.spectral_cap()->size() : 0;
		SaeStepper stepper(model, pulse, c.propagator.krylov());
		detail::execute(stepper, gs, c, out.directory, hash, opt, m, started);
	} else {
		auto const model = make_ks(c);
		auto const gs = ks_ground_state(model, c);
		m["ground_state"] = gs.report;
		m["spectral_cap_modes"] = model.spectral_cap() ? model.spectral_cap()->size() : 0;
		KsStepper stepper(model, pulse, c.propagator.krylov());
		detail::execute(stepper, gs, c, out.directory, hash, opt, m, started);
	}
	out.manifest = std::move(m);
	return out;
}

// ---- existing runs ------------------------------------------------------------

struct StoredRun {
	fs::path directory;
	RunConfig config;
	json manifest;
	EvolutionRecord record;
};

inline StoredRun load_run(fs::path const& dir) {
	StoredRun s;
	s.directory = dir;
	s.config = parse_config(read_text(dir / files::config));
	s.config.output_root = dir.parent_path().string();
	s.manifest = read_json(dir / files::manifest);
	if (s.manifest.value("status", "") != "complete") throw io_error(dir.string() + ": run is not complete");
	if (s.manifest.value("config_hash", "") != hash_hex(config_hash(s.config)))
		throw io_error(dir.string() + ": manifest hash does not match the config snapshot");
	s.record = read_record(dir / files::record);
	return s;
}

// Recomputes the observables of a finished run. Overrides may only touch
// observables.* keys. Unchanged settings rewrite the run's own files; changed
// settings get a sub-directory keyed by the new hash.
inline fs::path analyze(fs::path const& dir, std::vector<std::string> const& overrides = {}) {
	auto s = load_run(dir);
	RunConfig c = s.config;
	for (auto const& o : overrides) {
		if (o.rfind("observables.", 0) != 0) throw parameter_error(o.substr(0, o.find('=')), "analyze only accepts observables.* overrides");
		apply_assignment(c, o);
	}
	validate(c);
	double const ip = s.manifest.at("ground_state").at("ionization_potential").get<double>();
	auto const a = analyze_record(c, s.record, ip);
	auto const hash = config_hash(c);
	if (hash == config_hash(s.config)) {
		write_analysis(dir, a);
		s.manifest["analysis"] = a.summary;
		write_json(dir / files::manifest, s.manifest);
		return dir;
	}
	auto const sub = dir / ("analysis-" + hash_hex(hash));
	fs::create_directories(sub);
	write_text_atomic(sub / files::config, serialize(c, false));
	write_analysis(sub, a);
	json m = s.manifest;
	m["config_hash"] = hash_hex(hash);
	m["source_run"] = hash_hex(config_hash(s.config));
	m["analysis"] = a.summary;
	write_json(sub / files::manifest, m);
	return sub;
}

inline std::vector<double> odd_peaks(Spectrum const& s, int max_order_q) {
	std::vector<double> p;
	for (int q = 1; q <= max_order_q; q += 2) p.push_back(peak_height(s, q));
	return p;
}

// Side-by-side feature table of two finished runs.
inline json compare(fs::path const& a_dir, fs::path const& b_dir) {
	auto const a = load_run(a_dir), b = load_run(b_dir);
	auto const sa = record_spectrum(a.config, a.record), sb = record_spectrum(b.config, b.record);
	json out;
	out["runs"] = {a.manifest.at("config_hash"), b.manifest.at("config_hash")};
	out["features"] = {a.manifest.at("analysis").value("features", json(nullptr)), b.manifest.at("analysis").value("features", json(nullptr))};
	out["ionization"] = {a.manifest.at("ionization"), b.manifest.at("ionization")};
	int const qmax = static_cast<int>(std::floor(std::min(max_order(sa), max_order(sb)) - 0.5));
	int const limit = std::min(qmax, 2 * static_cast<int>(std::max(a.config.observables.stft_max_order, 1.0)));
	json rows = json::array();
	for (int q = 1; q <= limit; q += 2) {
		double const pa = peak_height(sa, q), pb = peak_height(sb, q);
		rows.push_back({{"order", q}, {"a", pa}, {"b", pb}, {"log10_ratio", pa > 0.0 && pb > 0.0 ? std::log10(pa / pb) : 0.0}});
	}
	out["odd_peaks"] = std::move(rows);
	return out;
}

// Band for the CEP modulation-depth contrast: from just above the secondary
// maximum to a few orders beyond the classical marker.
inline std::pair<int, int> cep_band(SpectralFeatures const& f, Spectrum const& s) {
	int const lo = f.secondary_maximum + 1;
	int const hi = std::min(static_cast<int>(std::floor(f.cutoff_order)) + 8, static_cast<int>(std::floor(max_order(s) - 1.5)));
	return {lo, hi};
}

enum class SweepAxis { cep, intensity, gauge, model };

inline SweepAxis parse_axis(std::string_view s) {
	if (s == "cep") return SweepAxis::cep;
	if (s == "intensity") return SweepAxis::intensity;
	if (s == "gauge") return SweepAxis::gauge;
	if (s == "model") return SweepAxis::model;
	throw parameter_error("sweep.axis", "unknown axis '" + std::string(s) + "' (expected cep, intensity, gauge or model)");
}

inline char const* axis_key(SweepAxis a) {
	switch (a) {
	case SweepAxis::cep: return "pulse.cep";
	case SweepAxis::intensity: return "pulse.intensity";
	case SweepAxis::gauge: return "run.gauge";
	case SweepAxis::model: return "run.model";
	}
	return "";
}

struct SweepOutcome {
	fs::path directory;
	json table;
	int failures = 0;
};

// Runs every point along one axis (sequentially; each run is independent and
// content-addressed), then writes sweep.json and sweep.tsv.
inline SweepOutcome sweep(RunConfig const& base, SweepAxis axis, std::vector<std::string> const& values, RunOptions const& opt = {}) {
	if (values.empty()) throw parameter_error("sweep.values", "need at least one value");
	validate(base);
	std::string key_material = serialize(base, false) + "\n" + axis_key(axis);
	for (auto const& v : values) key_material += "\n" + v;
	SweepOutcome out;
	out.directory = output_root(base) / ("sweep-" + hash_hex(fnv1a64(key_material)));
	fs::create_directories(out.directory);

	json points = json::array();
	std::vector<std::optional<Spectrum>> spectra;
	std::vector<std::optional<SpectralFeatures>> features;
	for (auto const& v : values) {
		json p = {{"value", v}};
		spectra.emplace_back();
		features.emplace_back();
		try {
			RunConfig c = base;
			set_value(c, axis_key(axis), v);
			validate(c);
			if (opt.log) opt.log(std::string(axis_key(axis)) + " = " + v);
			auto const r = run(c, opt);
			p["hash"] = r.manifest.at("config_hash");
			p["status"] = r.manifest.at("status");
			p["skipped"] = r.skipped;
			if (r.manifest.at("status") == "complete") {
				auto const ip = r.manifest.at("ground_state").at("ionization_potential").get<double>();
				p["ionization_potential"] = ip;
				p["ionization"] = r.manifest.at("ionization").at("unbound");
				p["features"] = r.manifest.at("analysis").value("features", json(nullptr));
				auto const stored = load_run(r.directory);
				spectra.back() = record_spectrum(c, stored.record);
				try {
					features.back() = locate_features(*spectra.back(), classical_cutoff(c.pulse(), ip));
				} catch (parameter_error const&) {
				}
			} else {
				++out.failures;
			}
		} catch (std::exception const& e) {
			p["status"] = "failed";
			p["error"] = e.what();
			++out.failures;
		}
		points.push_back(std::move(p));
	}
	json& t = out.table;
	t["axis"] = axis_key(axis);
	t["base_hash"] = hash_hex(config_hash(base));
	t["points"] = points;

	// Contrast of every point against the first one.
	if (spectra.front() && (axis == SweepAxis::cep || axis == SweepAxis::gauge)) {
		json contrasts = json::array();
		for (std::size_t i = 1; i < spectra.size(); ++i) {
			if (!spectra[i]) continue;
			json row = {{"reference", values.front()}, {"value", values[i]}};
			if (axis == SweepAxis::cep && features.front()) {
				try {
					auto const [lo, hi] = cep_band(*features.front(), *spectra.front());
					auto const cc = cep_contrast(*spectra.front(), *spectra[i], lo, hi);
					row["band"] = {cc.band_lo, cc.band_hi};
					row["depth_reference_db"] = cc.depth_a;
					row["depth_db"] = cc.depth_b;
					row["difference_db"] = cc.difference;
				} catch (parameter_error const& e) {
					row["error"] = e.what();
				}
			}
			if (axis == SweepAxis::gauge) {
				auto const pa = odd_peaks(*spectra.front(), 13), pb = odd_peaks(*spectra[i], 13);
				double worst = 0.0;
				for (std::size_t k = 0; k < pa.size(); ++k) worst = std::max(worst, std::abs(pb[k] - pa[k]) / pa[k]);
				row["max_relative_peak_difference_1_13"] = worst;
			}
			contrasts.push_back(std::move(row));
		}
		t["contrast"] = std::move(contrasts);
	}
	write_json(out.directory / "sweep.json", t);

	std::ostringstream os;
	os << "# value\thash\tstatus\tIp\tionization\tdip\tsecondary_maximum\tdrop_off\tcutoff_order\n";
	for (auto const& p : points) {
		auto const f = p.value("features", json(nullptr));
		auto field = [&](char const* k) { return f.is_object() ? f.at(k).dump() : std::string("-"); };
		os << p.at("value").get<std::string>() << '\t' << p.value("hash", "-") << '\t' << p.at("status").get<std::string>() << '\t'
		   << (p.contains("ionization_potential") ? p.at("ionization_potential").dump() : "-") << '\t'
		   << (p.contains("ionization") ? p.at("ionization").dump() : "-") << '\t' << field("dip") << '\t' << field("secondary_maximum") << '\t'
		   << field("drop_off") << '\t' << field("cutoff_order") << '\n';
	}
	write_text_atomic(out.directory / "sweep.tsv", os.str());
	return out;
}

} // namespace hhg

#endif
