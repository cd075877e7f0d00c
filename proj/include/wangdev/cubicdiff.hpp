#pragma once

#include "common.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace wangdev {

enum class Domain { plane, punctured_plane };

struct Pole {
	cplx at;
	int mult = 1;
};

namespace detail {

inline cplx poly_eval(const std::vector<cplx>& a, cplx z) {
	cplx r = 0.0;
	for (auto it = a.rbegin(); it != a.rend(); ++it) r = r * z + *it;
	return r;
}

inline cplx poly_deriv_eval(const std::vector<cplx>& a, cplx z) {
	cplx r = 0.0;
	for (std::size_t j = a.size(); j-- > 1;) r = r * z + double(j) * a[j];
	return r;
}

/// Quotient of a(z) by (z - p), remainder dropped.
inline std::vector<cplx> poly_deflate(const std::vector<cplx>& a, cplx p) {
	if (a.size() <= 1) return {};
	std::vector<cplx> q(a.size() - 1);
	cplx carry = 0.0;
	for (std::size_t j = a.size(); j-- > 1;) {
		carry = a[j] + carry * p;
		q[j - 1] = carry;
	}
	return q;
}

inline double poly_scale(const std::vector<cplx>& a, cplx z) {
	double s = 0.0, zp = 1.0;
	for (const auto& c : a) {
		s += std::abs(c) * zp;
		zp *= std::abs(z);
	}
	return s;
}

} // namespace detail

///
/// \brief Rational cubic differential b(z) dz^3 = num(z) / prod (z - p)^m dz^3
///
class CubicDifferential {
  public:
	CubicDifferential() : m_num{cplx(2.0)} {}
	CubicDifferential(std::vector<cplx> numerator, std::vector<Pole> poles, Domain domain)
		: m_num(std::move(numerator)), m_poles(std::move(poles)), m_domain(domain) {
		while (!m_num.empty() && m_num.back() == cplx(0.0)) m_num.pop_back();
		if (m_num.empty()) fail(errc::invalid_argument, "cubic differential numerator is identically zero");
		for (std::size_t i = 0; i < m_poles.size(); ++i) {
			if (m_poles[i].mult < 1) fail(errc::invalid_argument, "pole multiplicity must be >= 1");
			for (std::size_t j = 0; j < i; ++j)
				if (std::abs(m_poles[i].at - m_poles[j].at) <= 1e-14 * std::max(1.0, std::abs(m_poles[i].at)))
					fail(errc::invalid_argument, "pole locations must be pairwise distinct");
		}
	}

	static CubicDifferential polynomial(std::vector<cplx> coeffs) { return {std::move(coeffs), {}, Domain::plane}; }
	/// a z^d dz^3 on the plane
	static CubicDifferential monomial(cplx a, int d) {
		std::vector<cplx> c(std::size_t(d) + 1, 0.0);
		c[std::size_t(d)] = a;
		return polynomial(std::move(c));
	}
	/// R z^-m dz^3 on the punctured plane
	static CubicDifferential inverse_power(cplx R, int m) { return {{R}, {{0.0, m}}, Domain::punctured_plane}; }

	const std::vector<cplx>& numerator() const { return m_num; }
	const std::vector<Pole>& poles() const { return m_poles; }
	Domain domain() const { return m_domain; }
	int numerator_degree() const { return int(m_num.size()) - 1; }
	int denominator_degree() const {
		int s = 0;
		for (const auto& p : m_poles) s += p.mult;
		return s;
	}

	std::optional<std::size_t> pole_index(cplx z, double tol = 1e-14) const {
		for (std::size_t i = 0; i < m_poles.size(); ++i)
			if (std::abs(z - m_poles[i].at) <= tol * std::max(1.0, std::abs(m_poles[i].at))) return i;
		return std::nullopt;
	}

	cplx evaluate(cplx z) const {
		if (pole_index(z)) fail(errc::pole_evaluation, "evaluation at a pole of the cubic differential");
		cplx r = detail::poly_eval(m_num, z);
		for (const auto& p : m_poles) r /= std::pow(z - p.at, p.mult);
		return r;
	}

	/// b'(z) / b(z)
	cplx log_derivative(cplx z) const {
		if (pole_index(z)) fail(errc::pole_evaluation, "evaluation at a pole of the cubic differential");
		cplx r = detail::poly_deriv_eval(m_num, z) / detail::poly_eval(m_num, z);
		for (const auto& p : m_poles) r -= double(p.mult) / (z - p.at);
		return r;
	}

	/// Roots of the numerator.
	std::vector<cplx> zeros() const {
		std::vector<cplx> out;
		std::vector<cplx> a = m_num;
		while (a.size() > 1 && a.front() == cplx(0.0)) {
			out.push_back(0.0);
			a.erase(a.begin());
		}
		int d = int(a.size()) - 1;
		if (d <= 0) return out;
		Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
		for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
		for (int i = 0; i < d; ++i) C(i, d - 1) = -a[std::size_t(i)] / a[std::size_t(d)];
		Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C);
		for (int i = 0; i < d; ++i) out.push_back(es.eigenvalues()(i));
		return out;
	}

	/// Pullback under z -> c z: b(cz) c^3 dz^3.
	CubicDifferential dilate(cplx c) const {
		if (c == cplx(0.0)) fail(errc::invalid_argument, "dilation factor must be nonzero");
		std::vector<cplx> num(m_num.size());
		cplx cden = std::pow(c, denominator_degree());
		for (std::size_t j = 0; j < m_num.size(); ++j) num[j] = m_num[j] * std::pow(c, int(j) + 3) / cden;
		std::vector<Pole> poles;
		for (const auto& p : m_poles) poles.push_back({p.at / c, p.mult});
		return {std::move(num), std::move(poles), m_domain};
	}

  private:
	std::vector<cplx> m_num;
	std::vector<Pole> m_poles;
	Domain m_domain = Domain::plane;
};

struct PoleAnalysis {
	std::optional<cplx> location; ///< empty means infinity
	int order = 0;
	std::optional<cplx> residue;
	std::optional<int> n;
};

inline PoleAnalysis classify_pole(const CubicDifferential& b, std::optional<cplx> p) {
	PoleAnalysis out;
	out.location = p;
	const auto& num = b.numerator();
	if (!p) {
		int ord = b.numerator_degree() - b.denominator_degree() + 6;
		out.order = std::max(0, ord);
		if (out.order == 3) out.residue = -num.back();
	} else {
		auto idx = b.pole_index(*p);
		int m = idx ? b.poles()[*idx].mult : 0;
		std::vector<cplx> a = num;
		int k = 0;
		while (!a.empty() && std::abs(detail::poly_eval(a, *p)) <= 1e-12 * detail::poly_scale(a, *p)) {
			a = detail::poly_deflate(a, *p);
			++k;
		}
		out.order = std::max(0, m - k);
		if (out.order == 3) {
			cplx g = detail::poly_eval(a, *p);
			for (std::size_t i = 0; i < b.poles().size(); ++i)
				if (!idx || i != *idx) g /= std::pow(*p - b.poles()[i].at, b.poles()[i].mult);
			out.residue = g;
		}
	}
	if (out.order >= 4) out.n = out.order - 3;
	return out;
}

///
/// \brief Sector geometry at a pole of order n + 3
///
struct AngleInterval {
	double lo, hi; ///< lo in [0, 2 pi), hi = lo + width
	bool contains(double theta) const {
		double t = wrap_2pi(theta - lo);
		return t > 0.0 && t < hi - lo;
	}
	double mid() const { return wrap_2pi(0.5 * (lo + hi)); }
};

struct SectorDecomposition {
	int n = 0;
	std::vector<double> edge_rays;      ///< C_{k,k+1}, k = 1..n
	std::vector<double> unstable_minus; ///< U_k^-, k = 1..n
	std::vector<double> unstable_plus;  ///< U_k^+, k = 1..n
	std::vector<AngleInterval> stable;      ///< S_k
	std::vector<AngleInterval> stable_edge; ///< S_{k,k+1}

	std::vector<double> unstable_rays() const {
		std::vector<double> r = unstable_minus;
		r.insert(r.end(), unstable_plus.begin(), unstable_plus.end());
		std::sort(r.begin(), r.end());
		return r;
	}
};

inline SectorDecomposition special_sectors(int n) {
	if (n <= 0) fail(errc::invalid_argument, "special sectors need n >= 1");
	SectorDecomposition s;
	s.n = n;
	for (int k = 1; k <= n; ++k) {
		s.edge_rays.push_back(wrap_2pi(2.0 * pi * k / n));
		double um = (4.0 * k - 3.0) * pi / (2.0 * n), up = (4.0 * k - 1.0) * pi / (2.0 * n);
		s.unstable_minus.push_back(wrap_2pi(um));
		s.unstable_plus.push_back(wrap_2pi(up));
		s.stable.push_back({wrap_2pi(um), wrap_2pi(um) + pi / n});
		s.stable_edge.push_back({wrap_2pi(up), wrap_2pi(up) + pi / n});
	}
	return s;
}

struct SectorLabel {
	enum class Kind { edge_ray, stable, stable_edge, unstable_minus, unstable_plus };
	Kind kind;
	long k;

	bool operator==(const SectorLabel&) const = default;
	std::string str() const {
		auto ks = std::to_string(k);
		switch (kind) {
		case Kind::edge_ray: return "C_{" + ks + "," + std::to_string(k + 1) + "}";
		case Kind::stable: return "S_" + ks;
		case Kind::stable_edge: return "S_{" + ks + "," + std::to_string(k + 1) + "}";
		case Kind::unstable_minus: return "U_" + ks + "^-";
		case Kind::unstable_plus: return "U_" + ks + "^+";
		}
		return "?";
	}
};

namespace detail {
inline long floor_div(long a, long b) {
	long q = a / b;
	if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
	return q;
}
inline long floor_mod(long a, long b) { return a - b * floor_div(a, b); }
} // namespace detail

/// Label of a winding angle; k is not reduced modulo n.
inline SectorLabel winding_sector_label(double vartheta, int n) {
	if (n <= 0) fail(errc::invalid_argument, "winding label needs n >= 1");
	using K = SectorLabel::Kind;
	double x = vartheta * 2.0 * n / pi;
	double m = std::round(x);
	long mi = long(m);
	if (std::abs(x - m) <= 1e-12 * std::max(1.0, std::abs(x))) {
		switch (detail::floor_mod(mi, 4)) {
		case 0: return {K::edge_ray, mi / 4};
		case 1: return {K::unstable_minus, (mi + 3) / 4};
		case 3: return {K::unstable_plus, (mi + 1) / 4};
		default: return {K::stable, (mi + 2) / 4};
		}
	}
	long j = long(std::floor(x));
	long y = detail::floor_mod(j, 4);
	if (y == 1 || y == 2) return {K::stable, detail::floor_div(j + 3, 4)};
	return {K::stable_edge, detail::floor_div(j + 1, 4)};
}

/// Label of a direction in [0, 2 pi) with k reduced to 1..n.
inline SectorLabel sector_label(double theta, int n) {
	SectorLabel l = winding_sector_label(wrap_2pi(theta), n);
	l.k = detail::floor_mod(l.k - 1, n) + 1;
	return l;
}

///
/// \brief Natural half-plane chart at a pole of order n + 3 in normal form z^-(n+3) dz^3
///
struct HalfPlaneChart {
	int k = 1;
	double B = 1.0;
	double prefactor = 1.0;
	int order = 4;
	int n = 1;

	cplx map(cplx zeta) const {
		return prefactor * std::exp(-(3.0 / n) * std::log(zeta + B) + I * ((2.0 * k + 1.0) * pi / n));
	}
	cplx derivative(cplx zeta) const { return -(3.0 / n) * map(zeta) / (zeta + B); }
};

inline HalfPlaneChart half_plane_chart(const PoleAnalysis& analysis, int k, double B) {
	if (analysis.order < 4 || !analysis.n)
		fail(errc::unsupported_order, "half-plane chart needs a pole of order >= 4");
	int n = *analysis.n;
	if (n % 3 == 0) fail(errc::unsupported_order, "half-plane chart with 3 | n is not supported");
	if (!(B > 0.0)) fail(errc::invalid_argument, "chart shift B must be positive");
	HalfPlaneChart c;
	c.k = k;
	c.B = B;
	c.n = n;
	c.order = analysis.order;
	c.prefactor = std::pow(std::cbrt(2.0) * n / 3.0, -3.0 / n);
	return c;
}

inline cplx chart_pullback_residual(const HalfPlaneChart& chart, const CubicDifferential& b, cplx zeta) {
	double h = 1e-4 * std::max(1.0, std::abs(zeta));
	cplx d = (chart.map(zeta + h) - chart.map(zeta - h)) / (2.0 * h);
	return b.evaluate(chart.map(zeta)) * d * d * d - 2.0;
}

inline cplx chart_pullback_residual_exact(const HalfPlaneChart& chart, const CubicDifferential& b, cplx zeta) {
	cplx d = chart.derivative(zeta);
	return b.evaluate(chart.map(zeta)) * d * d * d - 2.0;
}

///
/// \brief Natural coordinate zeta = (3/n) (a/2)^(1/3) z^(n/3) of a z^d dz^3, n = d + 3, on a branch
///
/// The branch of z^(n/3) is continuous around arg z = phi_ref.
///
struct NaturalBranch {
	cplx a = 2.0;
	int d = 0;
	double phi_ref = 0.0;

	int n() const { return d + 3; }
	cplx scale() const { return (3.0 / n()) * std::pow(a / 2.0, 1.0 / 3.0); }
	double psi_ref() const { return phi_ref * n() / 3.0; }

	cplx zeta_of_z(cplx z) const {
		double r = std::abs(z);
		if (r == 0.0) return 0.0;
		double ang = phi_ref + std::arg(z * std::polar(1.0, -phi_ref));
		return scale() * std::polar(std::pow(r, n() / 3.0), ang * n() / 3.0);
	}
	cplx z_of_zeta(cplx zeta) const {
		cplx y = zeta / scale();
		double r = std::abs(y);
		if (r == 0.0) return 0.0;
		double psi = psi_ref() + std::arg(y * std::polar(1.0, -psi_ref()));
		return std::polar(std::pow(r, 3.0 / n()), psi * 3.0 / n());
	}
	/// dz / dzeta at the point with natural coordinate zeta
	cplx dz_dzeta(cplx zeta) const { return 3.0 * z_of_zeta(zeta) / (double(n()) * zeta); }
};

} // namespace wangdev
