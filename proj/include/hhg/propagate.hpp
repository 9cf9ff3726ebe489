#ifndef HHG_PROPAGATE_HPP
#define HHG_PROPAGATE_HPP

#include <hhg/absorber.hpp>
#include <hhg/errors.hpp>
#include <hhg/krylov.hpp>
#include <hhg/observables.hpp>
#include <hhg/operators.hpp>
#include <hhg/pulse.hpp>
#include <hhg/sae.hpp>
#include <hhg/tddft.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <system_error>

namespace hhg {

struct PropagatorConfig {
	double dt = 0.01;
	int krylov_dim = 18;
	double residual_tol = 1e-12;
	bool absorb = true;
	double absorber_start = 90.0;
	double absorber_exponent = 8.0;

	void validate(double r_max) const {
		if (!(dt > 0.0) || !std::isfinite(dt)) throw parameter_error("propagator.dt", "must be positive");
		if (krylov_dim < 4) throw parameter_error("propagator.krylov_dim", "must be at least 4");
		if (!(residual_tol > 0.0)) throw parameter_error("propagator.residual_tol", "must be positive");
		if (absorb && (!(absorber_start > 0.0) || !(absorber_start < r_max)))
			throw parameter_error("propagator.absorber_start", "must lie inside (0, r_max)");
		if (!(absorber_exponent > 0.0)) throw parameter_error("propagator.absorber_exponent", "must be positive");
	}

	KrylovConfig krylov() const { return {krylov_dim, residual_tol, 12}; }
};

struct WaveState {
	cvector coefficients;
	double t = 0.0;
	Gauge gauge = Gauge::length;
	double cumulative_absorbed = 0.0;
	long step = 0;
};

// Applies exp(-dtau S^-1 H) and S-renormalizes; returns the Rayleigh quotient
// of the result.
inline double imaginary_time_step(KrylovPropagator& krylov, HamiltonianApply const& h, OverlapSolver const& s, std::span<complex> c,
                                  double dtau) {
	krylov.apply(h, s, c, complex(-dtau, 0.0));
	double const nrm = std::sqrt(s.norm2(c));
	if (!(nrm > 0.0) || !std::isfinite(nrm)) throw convergence_error("imaginary-time step lost the state");
	for (auto& v : c) v /= nrm;
	cvector hc(c.size());
	h(c, hc);
	return dot(c, hc).real();
}

struct Sample {
	double dipole = 0.0;
	double acceleration = 0.0;
};

// One SAE step: exponential midpoint rule, H frozen at t + dt/2.
class SaeStepper {
public:
	SaeStepper(SaeModel const& model, PulseParams pulse, KrylovConfig cfg)
		: model_(&model), pulse_(pulse), krylov_(model.basis().dimension(), cfg) {}

	OverlapSolver const& overlap() const { return model_->overlap(); }
	SpectralBasis const& basis() const { return model_->basis(); }
	PulseParams const& pulse() const { return pulse_; }
	KrylovStats const& stats() const { return krylov_.stats(); }
	double occupancy() const { return SaeModel::occupancy; }

	void reset() {}

	void step(std::span<complex> c, double t, double dt) {
		krylov_.apply(model_->hamiltonian_at(t + 0.5 * dt, pulse_), model_->overlap(), c, complex(0.0, -dt));
	}

	Sample observe(std::span<complex const> c, double t) const {
		return {dipole_moment(model_->position_z(), c, occupancy()),
		        ehrenfest_acceleration(model_->force_expectation(c), electric_field(pulse_, t), occupancy())};
	}

	HamiltonianApply hamiltonian_at(std::span<complex const>, double t) const { return model_->hamiltonian_at(t, pulse_); }
	BandedBlockOperator const& position_z() const { return model_->position_z(); }

private:
	SaeModel const* model_;
	PulseParams pulse_;
	KrylovPropagator krylov_;
};

// One TDKS step with one predictor-corrector pass on the density:
// propagate with V[n(t)], rebuild n at t + dt, re-propagate from t with the
// averaged potential. Field at t + dt/2 in both passes.
class KsStepper {
public:
	KsStepper(KsModel const& model, PulseParams pulse, KrylovConfig cfg)
		: model_(&model), pulse_(pulse), krylov_(model.basis().dimension(), cfg) {}

	OverlapSolver const& overlap() const { return model_->overlap(); }
	SpectralBasis const& basis() const { return model_->basis(); }
	PulseParams const& pulse() const { return pulse_; }
	KrylovStats const& stats() const { return krylov_.stats(); }
	double occupancy() const { return model_->occupancy(); }

	void reset() {}

	// The potential is rebuilt from c on entry, so edits between steps (the
	// absorber, a restart) are always seen.
	void step(std::span<complex> c, double t, double dt) {
		auto const current = model_->potential(c);
		double const tm = t + 0.5 * dt;
		double const scale = model_->coupling().field_scale(electric_field(pulse_, tm), vector_potential(pulse_, tm));
		cvector predicted(c.begin(), c.end());
		krylov_.apply(hamiltonian(current, scale), model_->overlap(), predicted, complex(0.0, -dt));
		auto const averaged = KsPotential::average(current, model_->potential(predicted));
		krylov_.apply(hamiltonian(averaged, scale), model_->overlap(), c, complex(0.0, -dt));
	}

	Sample observe(std::span<complex const> c, double t) const {
		return {model_->dipole(c), ehrenfest_acceleration(model_->force_expectation(c), electric_field(pulse_, t), occupancy())};
	}

	HamiltonianApply hamiltonian_at(std::span<complex const> c, double t) const {
		return model_->hamiltonian_at(t, model_->potential(c), pulse_);
	}
	BandedBlockOperator const& position_z() const { return model_->position_z(); }

private:
	HamiltonianApply hamiltonian(KsPotential const& pot, double scale) const {
		return model_->hamiltonian(std::make_shared<MultipoleOperator const>(model_->potential_operator(pot)), scale);
	}

	KsModel const* model_;
	PulseParams pulse_;
	KrylovPropagator krylov_;
};

// ---- checkpoints ---------------------------------------------------------

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
	os.write(reinterpret_cast<char const*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
	T v{};
	is.read(reinterpret_cast<char*>(&v), sizeof v);
	if (!is) throw io_error("checkpoint: truncated");
	return v;
}

inline void put_series(std::ostream& os, std::vector<double> const& v) {
	put<std::uint64_t>(os, v.size());
	os.write(reinterpret_cast<char const*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline std::vector<double> get_series(std::istream& is, std::uint64_t limit) {
	auto const n = get<std::uint64_t>(is);
	if (n > limit) throw io_error("checkpoint: series length out of range");
	std::vector<double> v(n);
	is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
	if (!is) throw io_error("checkpoint: truncated series");
	return v;
}

inline constexpr char checkpoint_magic[8] = {'H', 'H', 'G', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t checkpoint_version = 1;

} // namespace detail

struct Checkpoint {
	std::uint64_t config_hash = 0;
	WaveState state;
	EvolutionRecord record;
};

inline void write_checkpoint(std::filesystem::path const& path, Checkpoint const& ck) {
	using namespace detail;
	auto const tmp = std::filesystem::path(path.string() + ".tmp");
	{
		std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
		if (!os) throw io_error("checkpoint: cannot open " + tmp.string());
		os.write(checkpoint_magic, sizeof checkpoint_magic);
		put<std::uint32_t>(os, checkpoint_version);
		put<std::uint64_t>(os, ck.config_hash);
		put<double>(os, ck.state.t);
		put<std::int64_t>(os, ck.state.step);
		put<std::int32_t>(os, ck.state.gauge == Gauge::length ? 0 : 1);
		put<double>(os, ck.state.cumulative_absorbed);
		put<std::uint64_t>(os, ck.state.coefficients.size());
		os.write(reinterpret_cast<char const*>(ck.state.coefficients.data()),
		         static_cast<std::streamsize>(ck.state.coefficients.size() * sizeof(complex)));
		auto const& r = ck.record;
		for (auto const* s : {&r.times, &r.field, &r.dipole, &r.acceleration, &r.norm, &r.absorbed}) put_series(os, *s);
		if (!os) throw io_error("checkpoint: write failed for " + tmp.string());
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if (ec) throw io_error("checkpoint: cannot move into place: " + ec.message());
}

inline Checkpoint read_checkpoint(std::filesystem::path const& path, std::optional<std::uint64_t> expected_hash = {}) {
	using namespace detail;
	std::ifstream is(path, std::ios::binary);
	if (!is) throw io_error("checkpoint: cannot open " + path.string());
	char m[sizeof checkpoint_magic];
	is.read(m, sizeof m);
	if (!is || std::memcmp(m, checkpoint_magic, sizeof m) != 0) throw io_error("checkpoint: bad magic in " + path.string());
	if (get<std::uint32_t>(is) != checkpoint_version) throw io_error("checkpoint: unsupported version");
	Checkpoint ck;
	ck.config_hash = get<std::uint64_t>(is);
	if (expected_hash && *expected_hash != ck.config_hash) throw io_error("checkpoint: config hash mismatch");
	ck.state.t = get<double>(is);
	ck.state.step = static_cast<long>(get<std::int64_t>(is));
	ck.state.gauge = get<std::int32_t>(is) == 0 ? Gauge::length : Gauge::velocity;
	ck.state.cumulative_absorbed = get<double>(is);
	auto const n = get<std::uint64_t>(is);
	if (n > (std::uint64_t{1} << 32)) throw io_error("checkpoint: coefficient count out of range");
	ck.state.coefficients.resize(n);
	is.read(reinterpret_cast<char*>(ck.state.coefficients.data()), static_cast<std::streamsize>(n * sizeof(complex)));
	if (!is) throw io_error("checkpoint: truncated coefficients");
	auto& r = ck.record;
	for (auto* s : {&r.times, &r.field, &r.dipole, &r.acceleration, &r.norm, &r.absorbed}) *s = get_series(is, std::uint64_t{1} << 32);
	return ck;
}

// ---- driver --------------------------------------------------------------

struct CheckpointOptions {
	std::filesystem::path path; // empty: no checkpoints
	long every = 0;             // steps between periodic checkpoints (0: only on abort)
	std::uint64_t config_hash = 0;
	long stop_after = -1;       // stop cleanly after this many total steps (testing restarts)
};

using Observer = std::function<void(WaveState const&, EvolutionRecord const&)>;

// Advances `state` to total_steps * dt, appending one sample per step to
// `record` (plus the initial sample if the record is empty). Time is
// computed as step * dt so a restarted run sees identical arguments.
template <class Stepper>
EvolutionRecord propagate(Stepper& stepper, WaveState& state, PropagatorConfig const& cfg, long total_steps, EvolutionRecord record = {},
                          Observer const& observer = {}, CheckpointOptions const& ck = {}) {
	cfg.validate(stepper.basis().r_max());
	std::optional<Absorber> absorber;
	if (cfg.absorb) absorber.emplace(stepper.basis(), cfg.absorber_start, cfg.absorber_exponent);
	auto const& s = stepper.overlap();
	auto const& pulse = stepper.pulse();

	auto sample = [&] {
		auto const obs = stepper.observe(state.coefficients, state.t);
		record.push(state.t, electric_field(pulse, state.t), obs.dipole, obs.acceleration, s.norm2(state.coefficients),
		            state.cumulative_absorbed);
	};
	auto dump = [&] {
		if (!ck.path.empty()) write_checkpoint(ck.path, {ck.config_hash, state, record});
	};

	stepper.reset();
	if (record.size() == 0) sample();
	while (state.step < total_steps) {
		if (ck.stop_after >= 0 && state.step >= ck.stop_after) {
			dump();
			return record;
		}
		try {
			stepper.step(state.coefficients, static_cast<double>(state.step) * cfg.dt, cfg.dt);
		} catch (convergence_error const&) {
			dump();
			throw;
		}
		++state.step;
		state.t = static_cast<double>(state.step) * cfg.dt;
		if (absorber) state.cumulative_absorbed += absorber->apply(s, state.coefficients);
		sample();
		if (observer) {
			try {
				observer(state, record);
			} catch (...) {
				dump();
				throw;
			}
		}
		if (ck.every > 0 && state.step % ck.every == 0) dump();
	}
	return record;
}

} // namespace hhg

#endif
