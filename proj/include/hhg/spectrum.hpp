#ifndef HHG_SPECTRUM_HPP
#define HHG_SPECTRUM_HPP

#include <hhg/errors.hpp>
#include <hhg/pulse.hpp>

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hhg {

enum class Apodization { none, hann };
enum class WindowAlignment { start, centered };

inline Apodization parse_apodization(std::string_view s) {
	if (s == "none") return Apodization::none;
	if (s == "hann") return Apodization::hann;
	throw parameter_error("observables.apodization", "unknown apodization '" + std::string(s) + "'");
}

inline WindowAlignment parse_alignment(std::string_view s) {
	if (s == "start") return WindowAlignment::start;
	if (s == "centered") return WindowAlignment::centered;
	throw parameter_error("observables.stft_alignment", "unknown window alignment '" + std::string(s) + "'");
}

inline char const* to_string(Apodization a) { return a == Apodization::none ? "none" : "hann"; }
inline char const* to_string(WindowAlignment a) { return a == WindowAlignment::start ? "start" : "centered"; }

// Real-to-complex FFT of fixed length with its own buffers.
class RealFft {
public:
	explicit RealFft(std::size_t n) : n_(n) {
		in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
		out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
		if (!in_ || !out_) throw std::bad_alloc();
		plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
	}
	RealFft(RealFft const&) = delete;
	RealFft& operator=(RealFft const&) = delete;
	~RealFft() {
		fftw_destroy_plan(plan_);
		fftw_free(in_);
		fftw_free(out_);
	}

	std::size_t size() const { return n_; }
	std::span<double> input() { return {in_, n_}; }
	void execute() { fftw_execute(plan_); }
	double power(std::size_t k) const { return out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1]; }

private:
	std::size_t n_;
	double* in_ = nullptr;
	fftw_complex* out_ = nullptr;
	fftw_plan plan_ = nullptr;
};

// Hann window value at fraction x of its length (x in [0, 1]).
inline double hann(double x) {
	if (x < 0.0 || x > 1.0) return 0.0;
	return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
}

struct Spectrum {
	double omega_L = 1.0;
	double d_omega = 0.0;
	std::vector<double> omega;   // k d_omega, k = 0 .. N/2
	std::vector<double> density; // dt^2 |sum a_n e^{i w t_n}|^2
	std::size_t transform_length = 0;

	double order(std::size_t k) const { return omega[k] / omega_L; }
};

// S(w) = |int a(t) e^{iwt} dt|^2 over the sampled record, zero padded by
// `pad` (>= 1) for peak interpolation.
inline Spectrum spectral_density(std::span<double const> a, double dt, double omega_L, Apodization apod = Apodization::none, int pad = 4) {
	if (a.size() < 2) throw parameter_error("spectrum.record", "need at least two samples");
	if (!(dt > 0.0)) throw parameter_error("spectrum.dt", "time step must be positive");
	if (pad < 1) throw parameter_error("spectrum.pad", "padding factor must be at least 1");
	std::size_t const n = a.size(), nfft = n * static_cast<std::size_t>(pad);
	RealFft fft(nfft);
	auto in = fft.input();
	std::fill(in.begin(), in.end(), 0.0);
	for (std::size_t i = 0; i < n; ++i) {
		double const w = apod == Apodization::hann ? hann(static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
		in[i] = a[i] * w;
	}
	fft.execute();
	Spectrum s;
	s.omega_L = omega_L;
	s.transform_length = nfft;
	s.d_omega = 2.0 * std::numbers::pi / (static_cast<double>(nfft) * dt);
	s.omega.resize(nfft / 2 + 1);
	s.density.resize(nfft / 2 + 1);
	for (std::size_t k = 0; k <= nfft / 2; ++k) {
		s.omega[k] = static_cast<double>(k) * s.d_omega;
		s.density[k] = dt * dt * fft.power(k);
	}
	return s;
}

// int S(w) dw over the full (two-sided) frequency grid.
inline double integrated_density(Spectrum const& s) {
	std::size_t const n = s.transform_length;
	double sum = 0.0;
	for (std::size_t k = 0; k < s.density.size(); ++k) {
		bool const single = k == 0 || (n % 2 == 0 && k == n / 2);
		sum += (single ? 1.0 : 2.0) * s.density[k];
	}
	return sum * s.d_omega;
}

// Largest S within +-halfwidth harmonic orders of `order`.
inline double peak_height(Spectrum const& s, double order, double halfwidth = 0.3) {
	double best = 0.0;
	bool any = false;
	for (std::size_t k = 0; k < s.omega.size(); ++k) {
		double const q = s.order(k);
		if (q < order - halfwidth || q > order + halfwidth) continue;
		best = std::max(best, s.density[k]);
		any = true;
	}
	if (!any) throw parameter_error("spectrum.grid", "harmonic order " + std::to_string(order) + " not covered");
	return best;
}

// Smallest S within +-halfwidth of `order`.
inline double valley_height(Spectrum const& s, double order, double halfwidth = 0.5) {
	double best = std::numeric_limits<double>::infinity();
	for (std::size_t k = 0; k < s.omega.size(); ++k) {
		double const q = s.order(k);
		if (q >= order - halfwidth && q <= order + halfwidth) best = std::min(best, s.density[k]);
	}
	if (!std::isfinite(best)) throw parameter_error("spectrum.grid", "harmonic order " + std::to_string(order) + " not covered");
	return best;
}

inline double max_order(Spectrum const& s) { return s.omega.empty() ? 0.0 : s.order(s.omega.size() - 1); }

struct Spectrogram {
	double omega_L = 1.0;
	double window_length = 0.0;
	WindowAlignment alignment = WindowAlignment::start;
	std::vector<double> tau;
	std::vector<double> omega;
	std::vector<double> values; // [i_tau * omega.size() + k]

	double at(std::size_t i, std::size_t k) const { return values[i * omega.size() + k]; }
};

// F(w, tau) = |int a(t) h(t - tau) e^{iwt} dt|^2 with a Hann window of length
// T_W. With `start` alignment h is supported on [tau, tau + T_W] as written
// in the usual STFT convention; `centered` puts tau in the middle. The record
// is taken as zero outside its support; tau runs over the record in steps of
// `stride` samples.
inline Spectrogram stft(std::span<double const> a, double dt, double t0, double omega_L, double window_length, int stride = 10,
                        double omega_max = 0.0, WindowAlignment align = WindowAlignment::start, int pad = 4) {
	if (!(window_length > 0.0)) throw parameter_error("observables.stft_window", "window length must be positive");
	if (!(dt > 0.0)) throw parameter_error("spectrum.dt", "time step must be positive");
	double const record = dt * static_cast<double>(a.size() - 1);
	if (a.size() < 2 || window_length > record) throw parameter_error("observables.stft_window", "window longer than the record");
	if (stride < 1) throw parameter_error("observables.stft_stride", "stride must be positive");
	long const nw = std::lround(window_length / dt);
	std::size_t const nfft = static_cast<std::size_t>(nw + 1) * static_cast<std::size_t>(std::max(pad, 1));
	RealFft fft(nfft);
	Spectrogram sg;
	sg.omega_L = omega_L;
	sg.window_length = window_length;
	sg.alignment = align;
	double const dw = 2.0 * std::numbers::pi / (static_cast<double>(nfft) * dt);
	std::size_t kmax = nfft / 2;
	if (omega_max > 0.0) kmax = std::min(kmax, static_cast<std::size_t>(omega_max / dw) + 1);
	for (std::size_t k = 0; k <= kmax; ++k) sg.omega.push_back(static_cast<double>(k) * dw);
	long const shift = align == WindowAlignment::start ? 0 : nw / 2;
	long const n = static_cast<long>(a.size());
	for (long i = 0; i < n; i += stride) {
		auto in = fft.input();
		std::fill(in.begin(), in.end(), 0.0);
		long const first = i - shift; // sample at window position 0
		for (long m = 0; m <= nw; ++m) {
			long const idx = first + m;
			if (idx < 0 || idx >= n) continue;
			in[static_cast<std::size_t>(m)] = a[static_cast<std::size_t>(idx)] * hann(static_cast<double>(m) / static_cast<double>(nw));
		}
		fft.execute();
		sg.tau.push_back(t0 + static_cast<double>(i) * dt);
		for (std::size_t k = 0; k <= kmax; ++k) sg.values.push_back(dt * dt * fft.power(k));
	}
	return sg;
}

// Sum of F over the frequency band [lo, hi] (harmonic orders) for every tau.
inline std::vector<double> band_power(Spectrogram const& sg, double lo_order, double hi_order) {
	std::vector<double> out(sg.tau.size(), 0.0);
	for (std::size_t i = 0; i < sg.tau.size(); ++i)
		for (std::size_t k = 0; k < sg.omega.size(); ++k) {
			double const q = sg.omega[k] / sg.omega_L;
			if (q >= lo_order && q <= hi_order) out[i] += sg.at(i, k);
		}
	return out;
}

struct SpectralFeatures {
	double fundamental = 0.0;       // harmonic order of the peak near 1
	int dip = 0;                    // odd order of the first envelope minimum
	int secondary_maximum = 0;      // odd order of the highest peak above the dip
	int drop_off = 0;               // first odd order 20 dB below the secondary maximum (0: none found)
	double cutoff_order = 0.0;      // classical marker
	std::vector<int> odd_orders;
	std::vector<double> odd_peaks;
};

// Odd-harmonic comb features. Peaks are maxima within +-0.3 orders of each
// odd integer up to `max_q`.
inline SpectralFeatures locate_features(Spectrum const& s, Cutoff const& cutoff, int max_q = 0) {
	if (max_q <= 0) max_q = static_cast<int>(std::floor(std::min(max_order(s) - 0.3, 2.0 * cutoff.order + 10.0)));
	if (max_q < 5) throw parameter_error("spectrum.grid", "spectrum does not reach the 5th harmonic");
	SpectralFeatures f;
	f.cutoff_order = cutoff.order;
	double best = -1.0;
	for (std::size_t k = 0; k < s.omega.size(); ++k) {
		double const q = s.order(k);
		if (q >= 0.7 && q <= 1.3 && s.density[k] > best) {
			best = s.density[k];
			f.fundamental = q;
		}
	}
	for (int q = 1; q <= max_q; q += 2) {
		f.odd_orders.push_back(q);
		f.odd_peaks.push_back(peak_height(s, q));
	}
	auto const& p = f.odd_peaks;
	std::size_t const np = p.size();
	if (np < 3 || !(p[0] > 0.0)) throw parameter_error("spectrum.comb", "no identifiable odd-harmonic comb");
	std::size_t dip = 0;
	for (std::size_t i = 1; i + 1 < np; ++i)
		if (p[i] < p[i - 1] && p[i] < p[i + 1]) {
			dip = i;
			break;
		}
	if (dip == 0) throw parameter_error("spectrum.comb", "odd-harmonic envelope has no dip");
	f.dip = f.odd_orders[dip];
	std::size_t sec = dip + 1;
	for (std::size_t i = dip + 1; i < np; ++i)
		if (p[i] > p[sec]) sec = i;
	f.secondary_maximum = f.odd_orders[sec];
	for (std::size_t i = sec + 1; i < np; ++i)
		if (p[i] < 0.01 * p[sec]) {
			f.drop_off = f.odd_orders[i];
			break;
		}
	return f;
}

// Peak-to-valley depth (dB) of the harmonic comb over [lo, hi]: for each even
// order e in the band, 10 log10 of the smaller neighbouring odd peak over the
// minimum of S within +-0.5 of e; averaged over the band.
inline double modulation_depth(Spectrum const& s, int lo, int hi) {
	double sum = 0.0;
	int count = 0;
	for (int e = lo + (lo % 2); e <= hi; e += 2) {
		if (e < 2) continue;
		double const peak = std::min(peak_height(s, e - 1), peak_height(s, e + 1));
		double const valley = std::max(valley_height(s, e), std::numeric_limits<double>::min());
		sum += 10.0 * std::log10(peak / valley);
		++count;
	}
	if (count == 0) throw parameter_error("cep.band", "band contains no even order");
	return sum / count;
}

struct CepContrast {
	int band_lo = 0;
	int band_hi = 0;
	double depth_a = 0.0; // dB
	double depth_b = 0.0;
	double difference = 0.0; // depth_a - depth_b
};

inline CepContrast cep_contrast(Spectrum const& a, Spectrum const& b, int band_lo, int band_hi) {
	if (a.omega.size() != b.omega.size() || std::abs(a.d_omega - b.d_omega) > 1e-12 * a.d_omega)
		throw parameter_error("cep.grid", "spectra are on different frequency grids");
	if (band_hi <= band_lo) throw parameter_error("cep.band", "empty band");
	CepContrast c;
	c.band_lo = band_lo;
	c.band_hi = band_hi;
	c.depth_a = modulation_depth(a, band_lo, band_hi);
	c.depth_b = modulation_depth(b, band_lo, band_hi);
	c.difference = c.depth_a - c.depth_b;
	return c;
}

} // namespace hhg

#endif
