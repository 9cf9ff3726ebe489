#ifndef HHG_QUADRATURE_HPP
#define HHG_QUADRATURE_HPP

#include <cassert>
#include <cmath>
#include <numbers>
#include <vector>

namespace hhg {

struct QuadratureRule {
	std::vector<double> nodes;
	std::vector<double> weights;

	std::size_t size() const { return nodes.size(); }
};

// Legendre polynomial P_n(x) and its derivative by the three-term recurrence.
inline void legendre_with_derivative(int n, double x, double& value, double& derivative) {
	double p0 = 1.0, p1 = x;
	if (n == 0) {
		value = 1.0;
		derivative = 0.0;
		return;
	}
	for (int j = 2; j <= n; ++j) {
		double const p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
		p0 = p1;
		p1 = p2;
	}
	value = p1;
	derivative = n * (x * p1 - p0) / (x * x - 1.0);
}

inline double legendre(int n, double x) {
	double p0 = 1.0, p1 = x;
	if (n == 0) return 1.0;
	for (int j = 2; j <= n; ++j) {
		double const p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
		p0 = p1;
		p1 = p2;
	}
	return p1;
}

// n-point Gauss-Legendre rule on [-1, 1], nodes ascending. Exact for degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
	assert(n >= 1);
	QuadratureRule rule;
	rule.nodes.resize(n);
	rule.weights.resize(n);
	for (int i = 0; i < (n + 1) / 2; ++i) {
		double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
		double p = 0.0, dp = 1.0;
		for (int it = 0; it < 100; ++it) {
			legendre_with_derivative(n, x, p, dp);
			double const dx = p / dp;
			x -= dx;
			if (std::abs(dx) < 1e-16) break;
		}
		legendre_with_derivative(n, x, p, dp);
		double const w = 2.0 / ((1.0 - x * x) * dp * dp);
		rule.nodes[i] = -x;
		rule.nodes[n - 1 - i] = x;
		rule.weights[i] = w;
		rule.weights[n - 1 - i] = w;
	}
	if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
	return rule;
}

// Affine map of a rule on [-1, 1] to [a, b].
inline QuadratureRule mapped(QuadratureRule const& ref, double a, double b) {
	QuadratureRule out;
	out.nodes.resize(ref.size());
	out.weights.resize(ref.size());
	double const half = 0.5 * (b - a), mid = 0.5 * (a + b);
	for (std::size_t i = 0; i < ref.size(); ++i) {
		out.nodes[i] = mid + half * ref.nodes[i];
		out.weights[i] = half * ref.weights[i];
	}
	return out;
}

} // namespace hhg

#endif
