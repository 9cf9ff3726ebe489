#ifndef HHG_UNITS_HPP
#define HHG_UNITS_HPP

#include <numbers>

// Atomic-unit conversions. Everything past the pulse setup works in a.u.
namespace hhg::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double speed_of_light = 137.035999084;        // c in a.u.
inline constexpr double bohr_nm = 0.0529177210903;             // a0 in nm
inline constexpr double intensity_au_Wcm2 = 3.50944758e16;     // I such that E0 = 1 a.u. (cycle averaged)
inline constexpr double time_au_as = 24.188843265857;          // attoseconds per a.u. of time
inline constexpr double time_au_fs = time_au_as * 1e-3;
inline constexpr double hartree_eV = 27.211386245988;

inline constexpr double wavelength_to_omega(double wavelength_nm) {
	return 2.0 * pi * speed_of_light * bohr_nm / wavelength_nm;
}

inline constexpr double fs_to_au(double fs) { return fs / time_au_fs; }
inline constexpr double au_to_fs(double t) { return t * time_au_fs; }

} // namespace hhg::units

#endif
