// hhg: ground-state, run, sweep, analyze and compare for the helium HHG models.

#include <hhg/runner.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

enum exit_code : int { ok = 0, other = 1, validation = 2, convergence = 3, io = 4 };

// Configuration assembled from a preset, an optional INI file, --set
// assignments and one flag per configuration key, applied in that order.
struct ConfigSource {
	std::string preset = "full";
	std::string file;
	std::vector<std::string> assignments;
	std::map<std::string, std::string> flags;

	void attach(CLI::App& app) {
		app.add_option("--preset", preset, "starting point: full, desk-sae or desk-tddft")
		    ->check(CLI::IsMember({"full", "desk-sae", "desk-tddft"}));
		app.add_option("-c,--config", file, "INI configuration file")->check(CLI::ExistingFile);
		app.add_option("--set", assignments, "section.key=value (repeatable)");
		for (auto const& k : hhg::config_keys()) {
			auto* opt = app.add_option_function<std::string>(
			    "--" + k.path, [this, path = k.path](std::string const& v) { flags[path] = v; }, k.help);
			opt->group("Configuration keys");
		}
	}

	hhg::RunConfig build() const {
		hhg::RunConfig c;
		if (preset == "desk-sae") c = hhg::desk_config(hhg::Model::sae, 1e14);
		if (preset == "desk-tddft") c = hhg::desk_config(hhg::Model::tddft, 1e14);
		if (!file.empty()) c = hhg::parse_config(hhg::read_text(file), c);
		for (auto const& a : assignments) hhg::apply_assignment(c, a);
		for (auto const& [path, value] : flags) hhg::set_value(c, path, value);
		hhg::validate(c);
		return c;
	}
};

void log_line(std::string const& s) { std::cerr << "[hhg] " << s << std::endl; }

void print_run(hhg::RunOutcome const& r) {
	hhg::json out = {{"directory", r.directory.string()}, {"skipped", r.skipped}, {"status", r.manifest.value("status", "")}};
	for (char const* k : {"ground_state", "ionization", "wall_time_s"})
		if (r.manifest.contains(k)) out[k] = r.manifest.at(k);
	if (r.manifest.contains("analysis")) out["features"] = r.manifest.at("analysis").value("features", hhg::json(nullptr));
	std::cout << out.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
	CLI::App app{"Strong-field helium: SAE and TDKS propagation, harmonic spectra and spectrograms"};
	app.require_subcommand(1);

	ConfigSource gs_src, run_src, sweep_src;
	bool polarizability = false, force = false, print_config = false;
	long stop_after = -1, progress = 2000;
	std::string axis;
	std::vector<std::string> values;
	std::string analyze_dir;
	std::vector<std::string> analyze_set;
	std::string compare_a, compare_b, compare_out;

	auto* gs = app.add_subcommand("ground-state", "field-free ground state energies (printed as JSON)");
	gs_src.attach(*gs);
	gs->add_flag("--polarizability", polarizability, "tddft: also compute the static polarizability by finite field");

	auto* run = app.add_subcommand("run", "ground state, propagation and observables for one configuration");
	run_src.attach(*run);
	run->add_flag("--force", force, "recompute even if a complete run exists");
	run->add_option("--stop-after", stop_after, "checkpoint and stop after this many steps");
	run->add_option("--progress", progress, "steps between progress lines (0: quiet)");
	run->add_flag("--print-config", print_config, "print the resolved configuration and exit");

	auto* sw = app.add_subcommand("sweep", "run a series of configurations along one axis");
	sweep_src.attach(*sw);
	sw->add_option("--axis", axis, "cep, intensity, gauge or model")->required()->check(CLI::IsMember({"cep", "intensity", "gauge", "model"}));
	sw->add_option("--values", values, "axis values (e.g. 0,pi/2)")->required()->delimiter(',');
	sw->add_flag("--force", force, "recompute runs even if complete");
	sw->add_option("--progress", progress, "steps between progress lines (0: quiet)");

	auto* an = app.add_subcommand("analyze", "recompute observables from a finished run's dipole record");
	an->add_option("run_dir", analyze_dir, "run directory")->required()->check(CLI::ExistingDirectory);
	an->add_option("--set", analyze_set, "observables.key=value (repeatable)");

	auto* cmp = app.add_subcommand("compare", "overlay the feature tables of two finished runs");
	cmp->add_option("run_a", compare_a, "first run directory")->required()->check(CLI::ExistingDirectory);
	cmp->add_option("run_b", compare_b, "second run directory")->required()->check(CLI::ExistingDirectory);
	cmp->add_option("-o,--output", compare_out, "also write the comparison to this file");

	try {
		app.parse(argc, argv);
	} catch (CLI::ParseError const& e) {
		int const code = app.exit(e);
		return code == 0 ? exit_code::ok : exit_code::validation;
	}

	try {
		hhg::RunOptions opt;
		opt.force = force;
		opt.stop_after = stop_after;
		opt.progress_every = progress;
		opt.log = log_line;

		if (gs->parsed()) {
			std::cout << hhg::ground_state_report(gs_src.build(), polarizability).dump(2) << '\n';
		} else if (run->parsed()) {
			auto const c = run_src.build();
			if (print_config) {
				std::cout << hhg::serialize(c) << "# hash " << hhg::hash_hex(hhg::config_hash(c)) << '\n';
				return exit_code::ok;
			}
			auto const r = hhg::run(c, opt);
			print_run(r);
			if (r.manifest.value("status", "") != "complete" && r.manifest.value("status", "") != "checkpointed") return exit_code::convergence;
		} else if (sw->parsed()) {
			auto const r = hhg::sweep(sweep_src.build(), hhg::parse_axis(axis), values, opt);
			std::cout << r.table.dump(2) << '\n' << "written to " << r.directory.string() << '\n';
			if (r.failures > 0) return exit_code::other;
		} else if (an->parsed()) {
			std::cout << hhg::analyze(analyze_dir, analyze_set).string() << '\n';
		} else if (cmp->parsed()) {
			auto const t = hhg::compare(compare_a, compare_b);
			if (!compare_out.empty()) hhg::write_json(compare_out, t);
			std::cout << t.dump(2) << '\n';
		}
	} catch (hhg::parameter_error const& e) {
		std::cerr << "hhg: invalid input: " << e.what() << '\n';
		return exit_code::validation;
	} catch (hhg::convergence_error const& e) {
		std::cerr << "hhg: did not converge: " << e.what() << '\n';
		return exit_code::convergence;
	} catch (hhg::io_error const& e) {
		std::cerr << "hhg: i/o error: " << e.what() << '\n';
		return exit_code::io;
	} catch (std::filesystem::filesystem_error const& e) {
		std::cerr << "hhg: i/o error: " << e.what() << '\n';
		return exit_code::io;
	} catch (std::exception const& e) {
		std::cerr << "hhg: " << e.what() << '\n';
		return exit_code::other;
	}
	return exit_code::ok;
}
