#ifndef HHG_ERRORS_HPP
#define HHG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hhg {

// Invalid input: bad configuration value, infeasible basis, wrong gauge tag.
// `key` names the offending parameter (e.g. "pulse.intensity").
class parameter_error : public std::invalid_argument {
public:
	parameter_error(std::string key, std::string const& what)
		: std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

	std::string const& key() const noexcept { return key_; }

private:
	std::string key_;
};

// A numerical procedure did not converge (eigensolve, SCF, Krylov step).
class convergence_error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

// File system or serialization failure.
class io_error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

} // namespace hhg

#endif
