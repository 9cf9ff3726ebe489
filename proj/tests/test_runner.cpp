#include <hhg/runner.hpp>

#include <catch_amalgamated.hpp>

using namespace hhg;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

fs::path test_root() {
	char const* env = std::getenv("HHG_OUTPUT_ROOT");
	fs::path const p = env && *env ? fs::path(env) : fs::temp_directory_path() / "hhg_test_runs";
	fs::create_directories(p);
	return p;
}

RunConfig tiny(Model model = Model::sae) {
	auto c = desk_config(model, 1e14);
	c.basis.r_max = 30.0;
	c.basis.n_splines = 60;
	c.basis.l_max = model == Model::sae ? 4 : 2;
	c.propagator.dt = 0.05;
	c.propagator.absorber_start = 22.0;
	c.n_cycles = 3.0;
	c.tail_cycles = 1.0;
	c.energy_cap = 60.0;
	c.output_root = test_root().string();
	return c;
}

RunOutcome fresh(RunConfig const& c, long stop_after = -1) {
	RunOptions o;
	o.force = stop_after < 0 ? true : false;
	o.stop_after = stop_after;
	if (stop_after >= 0) fs::remove_all(run_directory(c));
	return run(c, o);
}

} // namespace

TEST_CASE("a run writes a complete, content-addressed directory") {
	auto const c = tiny();
	auto const r = fresh(c);
	CHECK_FALSE(r.skipped);
	CHECK(r.directory == fs::path(c.output_root) / hash_hex(config_hash(c)));
	for (char const* f : {files::config, files::manifest, files::record, files::spectrum, files::spectrogram, files::checkpoint})
		CHECK(fs::exists(r.directory / f));
	auto const m = read_json(r.directory / files::manifest);
	CHECK(m.at("status") == "complete");
	CHECK(m.at("code_version") == code_version);
	CHECK(m.at("steps").at("total") == c.total_steps());
	// the snapshot reproduces the directory name
	auto const snap = parse_config(read_text(r.directory / files::config));
	CHECK(hash_hex(config_hash(snap)) == r.directory.filename().string());
	CHECK(m.at("config_hash") == r.directory.filename().string());

	auto const rec = read_record(r.directory / files::record);
	CHECK(rec.size() == static_cast<std::size_t>(c.total_steps() + 1));
	CHECK_THAT(rec.spacing(), WithinRel(c.propagator.dt, 1e-12));
	auto const& ion = m.at("ionization");
	CHECK_THAT(ion.at("final_norm").get<double>() + ion.at("absorbed").get<double>(), WithinAbs(1.0, 1e-9));
	CHECK(ion.at("unbound").get<double>() >= -1e-12);
	auto const& gs = m.at("ground_state");
	CHECK(gs.at("ionization_potential").get<double>() > 0.8);
	auto const& a = m.at("analysis");
	CHECK(a.contains("cutoff"));
	CHECK(a.at("ehrenfest_vs_fd").get<double>() < 0.1);
}

TEST_CASE("a finished run is reused, not recomputed") {
	auto const c = tiny();
	auto const first = run(c);
	auto const before = read_text(first.directory / files::manifest);
	auto const again = run(c);
	CHECK(again.skipped);
	CHECK(read_text(again.directory / files::manifest) == before);
	CHECK(again.manifest == first.manifest);
}

TEST_CASE("stopping and resuming reproduces the uninterrupted record") {
	auto c = tiny();
	c.tail_cycles = 0.5;
	auto const whole = fresh(c);
	auto const reference = read_text(whole.directory / files::record);

	auto const stopped = fresh(c, 900);
	CHECK(stopped.manifest.at("status") == "checkpointed");
	CHECK(stopped.manifest.at("checkpoint_step") == 900);
	CHECK_FALSE(fs::exists(stopped.directory / files::record));
	auto const resumed = run(c);
	CHECK_FALSE(resumed.skipped);
	CHECK(resumed.manifest.at("resumed_from_step") == 900);
	CHECK(resumed.manifest.at("status") == "complete");
	CHECK(read_text(resumed.directory / files::record) == reference);
}

TEST_CASE("re-analysis with new observables settings") {
	auto const c = tiny();
	auto const r = run(c);
	auto const same = analyze(r.directory);
	CHECK(same == r.directory);
	auto const sub = analyze(r.directory, {"observables.stft_alignment=centered", "observables.apodization=hann"});
	CHECK(sub.parent_path() == r.directory);
	auto const m = read_json(sub / files::manifest);
	CHECK(m.at("source_run") == r.directory.filename().string());
	RunConfig changed = c;
	set_value(changed, "observables.stft_alignment", "centered");
	set_value(changed, "observables.apodization", "hann");
	CHECK(sub.filename().string() == "analysis-" + hash_hex(config_hash(changed)));
	CHECK(m.at("config_hash") == hash_hex(config_hash(changed)));
	CHECK(fs::exists(sub / files::spectrum));
	CHECK_THROWS_AS(analyze(r.directory, {"pulse.cep=1"}), parameter_error);
	CHECK_THROWS_AS(analyze(r.directory / "nope"), io_error);
}

TEST_CASE("comparison of two runs") {
	auto const a = tiny();
	auto b = a;
	b.cep = std::numbers::pi / 2.0;
	auto const ra = run(a), rb = run(b);
	auto const cmp = compare(ra.directory, rb.directory);
	CHECK(cmp.at("runs").size() == 2u);
	REQUIRE(cmp.at("odd_peaks").size() > 3u);
	auto const& row = cmp.at("odd_peaks").at(0);
	CHECK(row.at("order") == 1);
	CHECK_THAT(row.at("log10_ratio").get<double>(), WithinAbs(std::log10(row.at("a").get<double>() / row.at("b").get<double>()), 1e-12));
	// identical runs compare flat
	auto const self = compare(ra.directory, ra.directory);
	for (auto const& r : self.at("odd_peaks")) CHECK(r.at("log10_ratio").get<double>() == 0.0);
}

TEST_CASE("a CEP sweep records every point and the contrast") {
	auto const base = tiny();
	auto const s = sweep(base, SweepAxis::cep, {"0", "pi/2", "phase"});
	CHECK(s.failures == 1);
	auto const& pts = s.table.at("points");
	REQUIRE(pts.size() == 3u);
	CHECK(pts.at(0).at("status") == "complete");
	CHECK(pts.at(1).at("status") == "complete");
	CHECK(pts.at(2).at("status") == "failed");
	CHECK(pts.at(2).at("error").get<std::string>().find("pulse.cep") != std::string::npos);
	REQUIRE(s.table.contains("contrast"));
	CHECK(s.table.at("contrast").size() == 1u);
	CHECK(fs::exists(s.directory / "sweep.json"));
	CHECK(fs::exists(s.directory / "sweep.tsv"));
	CHECK(s.directory.filename().string().rfind("sweep-", 0) == 0);
	CHECK_THROWS_AS(parse_axis("wavelength"), parameter_error);
}

TEST_CASE("a Kohn-Sham run completes") {
	auto const c = tiny(Model::tddft);
	auto const r = run(c);
	CHECK(r.manifest.at("status") == "complete");
	auto const& gs = r.manifest.at("ground_state");
	CHECK(gs.at("total_energy").get<double>() < -2.5);
	CHECK(gs.at("ionization_potential").get<double>() > 0.5);
	CHECK(fs::exists(r.directory / files::record));
}

TEST_CASE("invalid configurations fail before any output") {
	auto c = tiny();
	c.propagator.absorber_start = 50.0;
	CHECK_THROWS_AS(run(c), parameter_error);
	CHECK_FALSE(fs::exists(run_directory(c)));
}
