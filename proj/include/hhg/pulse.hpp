#ifndef HHG_PULSE_HPP
#define HHG_PULSE_HPP

#include <hhg/errors.hpp>
#include <hhg/units.hpp>

#include <cmath>

namespace hhg {

// Linearly polarized sin^2 pulse. The vector potential is the primary
// quantity; the electric field is its exact negative time derivative.
struct PulseParams {
	double wavelength_nm = 390.0;
	double intensity = 1e14;      // cycle-averaged, W/cm^2
	double n_cycles = 5.0;
	double cep = 0.0;             // rad

	double omega_L = 0.0;         // a.u.
	double E0 = 0.0;
	double A0 = 0.0;
	double T = 0.0;               // total duration, a.u.

	double duration_fs() const { return units::au_to_fs(T); }
	double period() const { return 2.0 * units::pi / omega_L; }
};

inline PulseParams make_pulse(double wavelength_nm, double intensity_Wcm2, double n_cycles, double cep) {
	if (!(wavelength_nm > 0.0)) throw parameter_error("pulse.wavelength_nm", "must be positive");
	if (!(intensity_Wcm2 > 0.0)) throw parameter_error("pulse.intensity", "must be positive");
	if (!(n_cycles >= 1.0)) throw parameter_error("pulse.n_cycles", "must be at least 1");
	if (!std::isfinite(cep)) throw parameter_error("pulse.cep", "must be finite");

	PulseParams p;
	p.wavelength_nm = wavelength_nm;
	p.intensity = intensity_Wcm2;
	p.n_cycles = n_cycles;
	p.cep = cep;
	p.omega_L = units::wavelength_to_omega(wavelength_nm);
	p.E0 = std::sqrt(intensity_Wcm2 / units::intensity_au_Wcm2);
	p.A0 = p.E0 / p.omega_L;
	p.T = n_cycles * 2.0 * units::pi / p.omega_L;
	return p;
}

// Same timing, zero amplitude. Used for field-free reference propagation.
inline PulseParams switched_off(PulseParams p) {
	p.E0 = 0.0;
	p.A0 = 0.0;
	return p;
}

inline double envelope(PulseParams const& p, double t) {
	if (t < 0.0 || t > p.T) return 0.0;
	double const s = std::sin(units::pi * t / p.T);
	return s * s;
}

inline double envelope_derivative(PulseParams const& p, double t) {
	if (t < 0.0 || t > p.T) return 0.0;
	return units::pi / p.T * std::sin(2.0 * units::pi * t / p.T);
}

inline double vector_potential(PulseParams const& p, double t) {
	return p.A0 * envelope(p, t) * std::cos(p.omega_L * t + p.cep);
}

inline double electric_field(PulseParams const& p, double t) {
	double const phase = p.omega_L * t + p.cep;
	return p.E0 * envelope(p, t) * std::sin(phase)
	     - p.E0 / p.omega_L * envelope_derivative(p, t) * std::cos(phase);
}

inline double ponderomotive_energy(PulseParams const& p) {
	return p.E0 * p.E0 / (4.0 * p.omega_L * p.omega_L);
}

struct Cutoff {
	double omega = 0.0;   // a.u.
	double order = 0.0;   // omega / omega_L
};

// Recollision estimate Ip + 3.2 Up.
inline Cutoff classical_cutoff(PulseParams const& p, double ionization_potential) {
	if (!(ionization_potential > 0.0)) throw parameter_error("ionization_potential", "must be positive");
	Cutoff c;
	c.omega = ionization_potential + 3.2 * ponderomotive_energy(p);
	c.order = c.omega / p.omega_L;
	return c;
}

} // namespace hhg

#endif
