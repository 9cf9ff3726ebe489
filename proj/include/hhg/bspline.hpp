#ifndef HHG_BSPLINE_HPP
#define HHG_BSPLINE_HPP

#include <hhg/errors.hpp>

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <span>
#include <vector>

namespace hhg {

enum class KnotDistribution { linear, sinh };

inline constexpr int max_spline_order = 16;

// Full B-spline set of order k (degree k-1) on a clamped knot vector:
// k-fold knots at both ends, simple interior knots.
class BSplineSet {
public:
	BSplineSet() = default;

	BSplineSet(int order, std::vector<double> breakpoints) : order_(order), breakpoints_(std::move(breakpoints)) {
		if (order_ < 2 || order_ > max_spline_order) throw parameter_error("basis.k", "spline order out of range");
		if (breakpoints_.size() < 2) throw parameter_error("basis.n_splines", "need at least one knot interval");
		for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
			if (!(breakpoints_[i] > breakpoints_[i - 1])) throw parameter_error("basis.knots", "breakpoints must increase strictly");
		}
		knots_.reserve(breakpoints_.size() + 2 * (order_ - 1));
		knots_.insert(knots_.end(), order_ - 1, breakpoints_.front());
		knots_.insert(knots_.end(), breakpoints_.begin(), breakpoints_.end());
		knots_.insert(knots_.end(), order_ - 1, breakpoints_.back());
	}

	int order() const { return order_; }
	int size() const { return static_cast<int>(knots_.size()) - order_; }
	int intervals() const { return static_cast<int>(breakpoints_.size()) - 1; }
	std::vector<double> const& knots() const { return knots_; }
	std::vector<double> const& breakpoints() const { return breakpoints_; }
	double left() const { return breakpoints_.front(); }
	double right() const { return breakpoints_.back(); }

	// Index of the first nonzero spline on interval `interval` (0-based);
	// the nonzero splines there are first .. first + k - 1.
	int first_nonzero(int interval) const { return interval; }

	int interval_of(double x) const {
		auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
		int j = static_cast<int>(it - breakpoints_.begin()) - 1;
		return std::clamp(j, 0, intervals() - 1);
	}

	// Values and first derivatives of the k splines nonzero on `interval`, at x.
	void evaluate(double x, int interval, std::span<double> values, std::span<double> derivs) const {
		int const p = order_ - 1;
		int const span = interval + p; // knot index with knots_[span] <= x < knots_[span+1]
		std::array<double, max_spline_order> N{}, left{}, right{}, Nlow{};
		N[0] = 1.0;
		for (int j = 1; j <= p; ++j) {
			if (j == p) std::copy(N.begin(), N.begin() + p, Nlow.begin());
			left[j] = x - knots_[span + 1 - j];
			right[j] = knots_[span + j] - x;
			double saved = 0.0;
			for (int r = 0; r < j; ++r) {
				double const temp = N[r] / (right[r + 1] + left[j - r]);
				N[r] = saved + right[r + 1] * temp;
				saved = left[j - r] * temp;
			}
			N[j] = saved;
		}
		if (p == 0) Nlow[0] = 0.0;
		for (int r = 0; r <= p; ++r) values[r] = N[r];
		if (derivs.empty()) return;
		// Nlow[r] holds degree p-1 spline (span - p + 1 + r)
		for (int r = 0; r <= p; ++r) {
			int const i = span - p + r;
			double d = 0.0;
			if (r >= 1) {
				double const den = knots_[i + p] - knots_[i];
				if (den > 0.0) d += Nlow[r - 1] / den;
			}
			if (r <= p - 1) {
				double const den = knots_[i + p + 1] - knots_[i + 1];
				if (den > 0.0) d -= Nlow[r] / den;
			}
			derivs[r] = p * d;
		}
	}

	// Value of spline `index` at x (convenience, not for hot loops).
	double value(int index, double x) const {
		int const j = interval_of(x);
		if (index < j || index > j + order_ - 1) return 0.0;
		std::array<double, max_spline_order> v{}, d{};
		evaluate(x, j, std::span(v.data(), order_), std::span(d.data(), order_));
		return v[index - j];
	}

private:
	int order_ = 0;
	std::vector<double> breakpoints_;
	std::vector<double> knots_;
};

// Breakpoints on [0, r_max] with `intervals` intervals. The sinh map puts
// `inner_fraction` of the intervals inside `inner_radius`.
inline std::vector<double> make_breakpoints(double r_max, int intervals, KnotDistribution dist,
                                            double inner_radius = 10.0, double inner_fraction = 1.0 / 3.0) {
	if (!(r_max > 0.0)) throw parameter_error("basis.r_max", "must be positive");
	if (intervals < 1) throw parameter_error("basis.n_splines", "too few splines for the spline order");
	std::vector<double> x(intervals + 1);
	if (dist == KnotDistribution::linear || inner_radius >= r_max) {
		for (int i = 0; i <= intervals; ++i) x[i] = r_max * i / intervals;
		return x;
	}
	if (!(inner_radius > 0.0)) throw parameter_error("basis.inner_radius", "must be positive");
	if (!(inner_fraction > 0.0 && inner_fraction < 1.0)) throw parameter_error("basis.inner_fraction", "must lie in (0, 1)");
	// solve sinh(b f)/sinh(b) = inner_radius / r_max for b; the ratio decreases in b
	double const target = inner_radius / r_max;
	if (target >= inner_fraction) {
		// linear spacing already puts enough intervals inside
		for (int i = 0; i <= intervals; ++i) x[i] = r_max * i / intervals;
		return x;
	}
	auto ratio = [&](double b) { return std::sinh(b * inner_fraction) / std::sinh(b); };
	double lo = 1e-6, hi = 1.0;
	while (ratio(hi) > target) hi *= 2.0;
	for (int it = 0; it < 200; ++it) {
		double const mid = 0.5 * (lo + hi);
		(ratio(mid) > target ? lo : hi) = mid;
	}
	double const b = 0.5 * (lo + hi);
	for (int i = 0; i <= intervals; ++i) x[i] = r_max * std::sinh(b * i / intervals) / std::sinh(b);
	x.front() = 0.0;
	x.back() = r_max;
	return x;
}

} // namespace hhg

#endif
