#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wangdev {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt3 = 1.7320508075688772935274463415059;
inline constexpr cplx I{0.0, 1.0};

/// omega = exp(2 pi i / 3)
inline const cplx omega{-0.5, sqrt3 / 2.0};

enum class errc {
	invalid_argument,
	pole_evaluation,
	unsupported_order,
	unmasked_pole,
	barrier_failure,
	non_convergence,
	complexity_leak,
	step_underflow,
	insufficient_samples,
	precondition,
	degenerate,
	outside_domain,
	internal,
};

inline const char* errc_name(errc c) {
	switch (c) {
	case errc::invalid_argument: return "invalid-argument";
	case errc::pole_evaluation: return "pole-evaluation";
	case errc::unsupported_order: return "unsupported-order";
	case errc::unmasked_pole: return "unmasked-pole";
	case errc::barrier_failure: return "barrier-failure";
	case errc::non_convergence: return "non-convergence";
	case errc::complexity_leak: return "complexity-leak";
	case errc::step_underflow: return "step-underflow";
	case errc::insufficient_samples: return "insufficient-samples";
	case errc::precondition: return "precondition";
	case errc::degenerate: return "degenerate";
	case errc::outside_domain: return "outside-domain";
	case errc::internal: return "internal";
	}
	return "unknown";
}

class error : public std::runtime_error {
  public:
	error(errc code, const std::string& what) : std::runtime_error(what), m_code(code) {}
	errc code() const noexcept { return m_code; }

  private:
	errc m_code;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

/// Angle reduced to [0, 2 pi).
inline double wrap_2pi(double a) {
	double r = std::fmod(a, 2.0 * pi);
	if (r < 0) r += 2.0 * pi;
	if (r >= 2.0 * pi) r = 0.0;
	return r;
}

} // namespace wangdev
