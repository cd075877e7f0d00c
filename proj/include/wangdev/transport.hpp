#pragma once

#include "cubicdiff.hpp"
#include "grid.hpp"
#include "sl3.hpp"

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace wangdev {

struct BaseChange {
	CMat3 B, Binv;
};

inline const BaseChange& base_change() {
	static const BaseChange bc = [] {
		const cplx w = omega, w2 = omega * omega;
		BaseChange r;
		r.B << 1.0, w, w2, 1.0, w2, w, 1.0, 1.0, 1.0;
		r.Binv << 1.0, 1.0, 1.0, w2, w, 1.0, w, w2, 1.0;
		r.Binv /= 3.0;
		return r;
	}();
	return bc;
}

///
/// \brief Local data of the connection at a point of the working coordinate
///
/// z mode: w = log h and its derivative w_z, together with b(z).
/// zeta mode: the coordinate has b = 2 dzeta^3; w holds u and wz holds u_zeta.
///
struct LocalData {
	double w = 0.0;
	cplx wz = 0.0;
	cplx b = 2.0;
};

class ConnectionSampler {
  public:
	virtual ~ConnectionSampler() = default;
	virtual bool zeta_mode() const = 0;
	virtual LocalData at(cplx p) const = 0;
	/// Density of the natural length |b/2|^{1/3} |dp|.
	virtual double density(cplx p) const { return zeta_mode() ? 1.0 : std::cbrt(std::abs(at(p).b) / 2.0); }
	/// True when u vanishes identically in zeta mode.
	virtual bool is_flat() const { return false; }
};

/// u = 0 in a coordinate with b = 2 dzeta^3.
class FlatSampler final : public ConnectionSampler {
  public:
	bool zeta_mode() const override { return true; }
	LocalData at(cplx) const override { return {}; }
	bool is_flat() const override { return true; }
};

/// Closed-form data given by callables.
class AnalyticSampler final : public ConnectionSampler {
  public:
	using Fn = std::function<LocalData(cplx)>;
	AnalyticSampler(bool zeta, Fn f) : m_zeta(zeta), m_f(std::move(f)) {}
	bool zeta_mode() const override { return m_zeta; }
	LocalData at(cplx p) const override { return m_f(p); }

  private:
	bool m_zeta;
	Fn m_f;
};

/// Exact metric 2^{1/3}|R|^{2/3}|z|^{-2}|dz|^2 for R z^{-3} dz^3 on the punctured plane, in z.
inline std::shared_ptr<ConnectionSampler> exact_cstar_sampler(cplx R) {
	if (R == cplx(0.0)) fail(errc::invalid_argument, "residue must be nonzero");
	double c = std::log(std::cbrt(2.0)) + (2.0 / 3.0) * std::log(std::abs(R));
	return std::make_shared<AnalyticSampler>(false, [R, c](cplx z) {
		double r = std::abs(z);
		if (r == 0.0) fail(errc::outside_domain, "exact punctured-plane sampler evaluated at 0");
		return LocalData{c - 2.0 * std::log(r), -1.0 / z, R / (z * z * z)};
	});
}

/// Bicubic sampling of a solved field in the raw z coordinate.
///
/// With a u field, points farther than near_radius from the zeros of b use w = w0 + u with the
/// exact w0 = log(2^{1/3}|b|^{2/3}); the remaining points interpolate w.
class GridSampler final : public ConnectionSampler {
  public:
	GridSampler(CubicDifferential b, const ScalarField& w) : m_b(std::move(b)), m_ip(w) {}
	GridSampler(CubicDifferential b, const ScalarField& w, const ScalarField& u, double near_radius = 1.0)
		: m_b(std::move(b)), m_ip(w), m_uip(u), m_zeros(m_b.zeros()), m_near(near_radius), m_has_u(true) {}
	bool zeta_mode() const override { return false; }
	LocalData at(cplx z) const override {
		if (!m_ip.cell_ok(z)) fail(errc::outside_domain, "path leaves the unmasked grid");
		cplx bz = m_b.evaluate(z);
		if (m_has_u && far_from_zeros(z)) {
			auto s = m_uip.eval(z);
			if (std::isfinite(s.f) && std::isfinite(s.fx) && std::isfinite(s.fy)) {
				double w0 = std::log(std::cbrt(2.0)) + (2.0 / 3.0) * std::log(std::abs(bz));
				return {w0 + s.f, m_b.log_derivative(z) / 3.0 + 0.5 * cplx(s.fx, -s.fy), bz};
			}
		}
		auto s = m_ip.eval(z);
		return {s.f, 0.5 * cplx(s.fx, -s.fy), bz};
	}
	const BicubicInterpolant& interpolant() const { return m_ip; }

  private:
	bool far_from_zeros(cplx z) const {
		for (auto z0 : m_zeros)
			if (std::abs(z - z0) < m_near) return false;
		return true;
	}
	CubicDifferential m_b;
	BicubicInterpolant m_ip, m_uip;
	std::vector<cplx> m_zeros;
	double m_near = 1.0;
	bool m_has_u = false;
};

/// Solved u field of a z^d dz^3 read in its natural coordinate zeta on one branch.
class NaturalGridSampler final : public ConnectionSampler {
  public:
	NaturalGridSampler(NaturalBranch br, const ScalarField& u) : m_br(br), m_ip(u) {}
	bool zeta_mode() const override { return true; }
	LocalData at(cplx zeta) const override {
		cplx z = m_br.z_of_zeta(zeta);
		if (z == cplx(0.0) || !m_ip.cell_ok(z)) fail(errc::outside_domain, "natural-coordinate path leaves the grid");
		auto s = m_ip.eval(z);
		if (!std::isfinite(s.f) || !std::isfinite(s.fx) || !std::isfinite(s.fy))
			fail(errc::outside_domain, "natural-coordinate path too close to the zero of b");
		return {s.f, 0.5 * cplx(s.fx, -s.fy) * m_br.dz_dzeta(zeta), 2.0};
	}
	const NaturalBranch& branch() const { return m_br; }

  private:
	NaturalBranch m_br;
	BicubicInterpolant m_ip;
};

namespace detail {

inline Mat3 real_part_checked(const CMat3& a) {
	double im = a.imag().cwiseAbs().maxCoeff();
	double sc = std::max(1.0, a.real().cwiseAbs().maxCoeff());
	if (im > 1e-8 * sc) fail(errc::complexity_leak, "connection matrix has a non-negligible imaginary part");
	return a.real();
}

inline Mat3 traceless(Mat3 a) {
	double t = a.trace() / 3.0;
	a.diagonal().array() -= t;
	return a;
}

} // namespace detail

/// A(dir) in the equilateral frame, made traceless.
inline Mat3 connection_matrix(const LocalData& d, bool zeta_mode, cplx v) {
	const auto& bc = base_change();
	cplx vb = std::conj(v);
	CMat3 M;
	if (zeta_mode) {
		double eu = std::exp(d.w), emu = std::exp(-d.w);
		M << d.wz * v, emu * vb, v, emu * v, std::conj(d.wz) * vb, vb, eu * vb, eu * v, 0.0;
	} else {
		double ew = std::exp(d.w), emw = std::exp(-d.w);
		M << d.wz * v, std::conj(d.b) * emw * vb, v, d.b * emw * v, std::conj(d.wz) * vb, vb, 0.5 * ew * vb,
			0.5 * ew * v, 0.0;
	}
	return detail::traceless(detail::real_part_checked(bc.Binv * M * bc.B));
}

inline Mat3 connection_matrix(const ConnectionSampler& s, cplx p, cplx dir) {
	return connection_matrix(s.at(p), s.zeta_mode(), dir);
}

/// A(dir) - A0(dir) in zeta mode, computed from u without cancellation.
inline Mat3 connection_difference(const LocalData& d, cplx v) {
	const auto& bc = base_change();
	cplx vb = std::conj(v);
	double a = std::expm1(-d.w), c = std::expm1(d.w);
	CMat3 M;
	M << d.wz * v, a * vb, 0.0, a * v, std::conj(d.wz) * vb, 0.0, c * vb, c * v, 0.0;
	return detail::traceless(detail::real_part_checked(bc.Binv * M * bc.B));
}

///
/// \brief Piecewise-linear path in the working coordinate
///
struct PathSpec {
	std::vector<cplx> vertices;
	bool arc_length = true;  ///< parameter is natural length rather than coordinate length
	double hmax = 0.005;     ///< max step in the parameter
	double c = 0.05;         ///< max step times |A|_F
	int fixed_steps = 0;     ///< if > 0, uniform steps per segment

	static PathSpec segment(cplx a, cplx b) { return {{a, b}}; }
	static PathSpec polyline(std::vector<cplx> v) { return {std::move(v)}; }
	/// Closed polygon through N points of the circle |p - c| = r, clockwise when cw.
	static PathSpec circle(cplx c, double r, int N, bool cw, double phase = 0.0) {
		PathSpec p;
		for (int k = 0; k <= N; ++k) {
			double a = phase + (cw ? -1.0 : 1.0) * 2.0 * pi * (k % N) / N;
			p.vertices.push_back(c + std::polar(r, a));
		}
		return p;
	}
	PathSpec reversed() const {
		PathSpec p = *this;
		std::reverse(p.vertices.begin(), p.vertices.end());
		return p;
	}
	PathSpec then(const PathSpec& o) const {
		PathSpec p = *this;
		if (!o.vertices.empty()) p.vertices.insert(p.vertices.end(), o.vertices.begin() + 1, o.vertices.end());
		return p;
	}
	cplx start() const { return vertices.front(); }
	cplx end() const { return vertices.back(); }
};

enum class Side { left, right };

///
/// \brief RK4 integration of T' = -A T (left) or S' = S A (right) along a path
///
/// The observer receives the parameter and the state after every step.
/// Left gives the transport along the path; right gives the transport along the reversed partial path.
///
template <typename Obs>
SL3 integrate(const ConnectionSampler& s, const PathSpec& path, Side side, Obs&& observe) {
	for (std::size_t i = 1; i < path.vertices.size(); ++i)
		if (path.vertices[i] == path.vertices[i - 1]) fail(errc::invalid_argument, "consecutive path vertices must differ");
	if (!(path.hmax > 0.0) || !(path.c > 0.0)) fail(errc::invalid_argument, "step controls must be positive");
	SL3 X = SL3::identity();
	double t = 0.0;
	observe(t, X);
	for (std::size_t i = 1; i < path.vertices.size(); ++i) {
		cplx p0 = path.vertices[i - 1], d = path.vertices[i] - p0;
		double len = std::abs(d);
		double sigma = 0.0;
		auto A = [&](double sg) { return connection_matrix(s, p0 + sg * d, d); };
		auto dens = [&](double sg) { return path.arc_length ? s.density(p0 + sg * d) : 1.0; };
		Mat3 A0 = A(0.0);
		while (sigma < 1.0) {
			double ds;
			if (path.fixed_steps > 0) ds = 1.0 / path.fixed_steps;
			else {
				double rho = std::max(dens(sigma) * len, 1e-300);
				ds = std::min(path.hmax / rho, path.c / std::max(A0.norm(), 1e-300));
			}
			if (ds < 1e-12) fail(errc::step_underflow, "transport step fell below 1e-12");
			if (sigma + ds > 1.0 - 1e-13) ds = 1.0 - sigma;
			Mat3 Am = A(sigma + 0.5 * ds), A1 = A(sigma + ds);
			Mat3 k1, k2, k3, k4;
			const Mat3& Y = X.m;
			if (side == Side::left) {
				k1 = -A0 * Y;
				k2 = -Am * (Y + 0.5 * ds * k1);
				k3 = -Am * (Y + 0.5 * ds * k2);
				k4 = -A1 * (Y + ds * k3);
			} else {
				k1 = Y * A0;
				k2 = (Y + 0.5 * ds * k1) * Am;
				k3 = (Y + 0.5 * ds * k2) * Am;
				k4 = (Y + ds * k3) * A1;
			}
			X.m = Y + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
			X.renormalize();
			t += ds * len * (path.arc_length ? dens(sigma + 0.5 * ds) : 1.0);
			sigma += ds;
			A0 = A1;
			observe(t, X);
		}
	}
	return X;
}

/// T(path): transport from the start fiber to the end fiber.
inline SL3 parallel_transport(const ConnectionSampler& s, const PathSpec& path) {
	if (path.vertices.size() < 2) return SL3::identity();
	return integrate(s, path, Side::left, [](double, const SL3&) {});
}

/// T(path^{-1}) integrated forward along the path.
inline SL3 reverse_transport(const ConnectionSampler& s, const PathSpec& path) {
	if (path.vertices.size() < 2) return SL3::identity();
	return integrate(s, path, Side::right, [](double, const SL3&) {});
}

///
/// \brief Two-pointed transport of the flat model: diag(e^{2Re zeta}, e^{2Re(w^2 zeta)}, e^{2Re(w zeta)})
///
inline Vec3 titeica_exponents(cplx zeta) {
	return {2.0 * zeta.real(), 2.0 * (omega * omega * zeta).real(), 2.0 * (omega * zeta).real()};
}

inline SL3 titeica_transport(cplx zeta) { return SL3::diagonal_log(titeica_exponents(zeta)); }

inline double varpi(int i, int j, double theta) {
	if (i < 1 || i > 3 || j < 1 || j > 3) fail(errc::invalid_argument, "varpi indices must lie in 1..3");
	if (i == j) fail(errc::invalid_argument, "varpi needs i != j");
	cplx e = std::polar(1.0, theta);
	auto wp = [](int k) { return std::pow(omega, ((1 - k) % 3 + 3) % 3); };
	return 2.0 * (wp(i) * e - wp(j) * e).real();
}

struct VarpiMax {
	double value;
	std::vector<std::pair<int, int>> argmax;
};

inline VarpiMax varpi_max(double theta, double tie_tol = 1e-12) {
	VarpiMax out{-1e300, {}};
	std::array<double, 9> v{};
	for (int i = 1; i <= 3; ++i)
		for (int j = 1; j <= 3; ++j)
			if (i != j) {
				v[std::size_t((i - 1) * 3 + j - 1)] = varpi(i, j, theta);
				out.value = std::max(out.value, varpi(i, j, theta));
			}
	for (int i = 1; i <= 3; ++i)
		for (int j = 1; j <= 3; ++j)
			if (i != j && v[std::size_t((i - 1) * 3 + j - 1)] >= out.value - tie_tol) out.argmax.emplace_back(i, j);
	return out;
}

} // namespace wangdev
