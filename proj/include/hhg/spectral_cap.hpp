#ifndef HHG_SPECTRAL_CAP_HPP
#define HHG_SPECTRAL_CAP_HPP

#include <hhg/block_operator.hpp>
#include <hhg/eigensolve.hpp>
#include <hhg/errors.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace hhg {

// Moves the field-free eigenvalues above `cap` down to `cap`:
//   H -> H + sum_i (cap - E_i) S phi_i phi_i^T S
// over the S-normalized eigenvectors phi_i of each diagonal block with E_i > cap.
// B-spline bases carry a few outlier states with energies far above anything
// the dynamics reaches (near-origin splines, high centrifugal barriers); left
// alone they make every Krylov step stiff. States below the cap are untouched.
class SpectralCap {
public:
	SpectralCap() = default;

	SpectralCap(BandedBlockOperator const& h0, BandedMatrix const& s, double cap) : cap_(cap), n_radial_(h0.n_radial()) {
		if (!(cap > 0.0)) throw parameter_error("propagator.energy_cap", "must be positive");
		int const n = n_radial_;
		Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
		for (int i = 0; i < n; ++i)
			for (int j = std::max(0, i - s.half_bandwidth()); j <= std::min(n - 1, i + s.half_bandwidth()); ++j) S(i, j) = s(i, j);
		for (int l = 0; l < h0.n_angular(); ++l) {
			auto const* blk = h0.find(l, l);
			if (!blk) continue;
			auto const pairs = dense_eigenpairs(blk->matrix, s, n);
			for (auto const& p : pairs) {
				if (p.value <= cap) continue;
				Eigen::Map<Eigen::VectorXd const> phi(p.vector.data(), n);
				Eigen::VectorXd w = S * phi;
				modes_.push_back({l, cap - p.value, std::vector<double>(w.data(), w.data() + n)});
			}
		}
	}

	double cap() const { return cap_; }
	std::size_t size() const { return modes_.size(); }
	bool empty() const { return modes_.empty(); }

	// y += sum_i delta_i w_i (w_i^T x)
	void apply_add(std::span<complex const> x, std::span<complex> y) const {
		for (auto const& m : modes_) {
			std::size_t const off = static_cast<std::size_t>(m.l) * n_radial_;
			complex p = 0.0;
			for (int k = 0; k < n_radial_; ++k) p += m.w[k] * x[off + k];
			p *= m.delta;
			for (int k = 0; k < n_radial_; ++k) y[off + k] += p * m.w[k];
		}
	}

private:
	struct Mode {
		int l;
		double delta;
		std::vector<double> w;
	};

	double cap_ = 0.0;
	int n_radial_ = 0;
	std::vector<Mode> modes_;
};

} // namespace hhg

#endif
