#pragma once

#include "cubicdiff.hpp"
#include "grid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

namespace wangdev {

struct SolverConfig {
	double tolerance = 1e-10;     ///< max-norm residual target
	int max_iterations = 80;      ///< Newton iterations
	double damping = 1.0;         ///< initial step fraction
	double linear_tolerance = 1e-11;
	int max_linear_iterations = 50000;
	/// Subtract the discrete Laplacian of log(2^(1/3)|b|^(2/3)) away from zeros of b.
	bool balanced = true;
	double balance_cutoff = 1.0;  ///< distance to zeros of b below which no correction is applied
	double lower_clamp_slack = 1e-2;
	int refine_sweeps = 0;        ///< pointwise Newton sweeps after convergence
};

struct BarrierPair {
	ScalarField w_minus, w_plus;
	double lambda = 1.0;
	double R = 0.0;          ///< parameter of the hyperbolic comparison metric (0 when unused)
	std::string kind;        ///< disk | punctured-disk | punctured-infinity | annulus
	bool verified = false;
};

struct SolveDiagnostics {
	int iterations = 0;
	long linear_iterations = 0;
	double residual = std::numeric_limits<double>::infinity();
	double lambda = 1.0;
	bool converged = false;
	std::vector<double> history;
};

struct SolveResult {
	ScalarField w;
	ScalarField u; ///< carried separately at full relative precision where u is tiny
	SolveDiagnostics diag;
	BarrierPair barriers;
};

namespace detail {

/// Per-node |b|^2 and log(2^(1/3)|b|^(2/3)); NaN at poles.
struct NodeCoefficients {
	std::vector<double> b2, w0;
};

inline NodeCoefficients node_coefficients(const CubicDifferential& b, const Grid2D& g) {
	NodeCoefficients c;
	c.b2.resize(g.size());
	c.w0.resize(g.size());
	const double nan = std::numeric_limits<double>::quiet_NaN();
	for (std::size_t k = 0; k < g.size(); ++k) {
		cplx z = g.node(k);
		if (b.pole_index(z, 1e-12)) {
			c.b2[k] = nan;
			c.w0[k] = nan;
			continue;
		}
		double ab = std::abs(b.evaluate(z));
		c.b2[k] = ab * ab;
		c.w0[k] = ab > 0.0 ? std::log(std::cbrt(2.0)) + (2.0 / 3.0) * std::log(ab)
						   : -std::numeric_limits<double>::infinity();
	}
	return c;
}

inline double lap(const std::vector<double>& w, const Grid2D& g, int i, int j) {
	double c = w[g.idx(i, j)];
	return (w[g.idx(i + 1, j)] + w[g.idx(i - 1, j)] - 2 * c) / (g.hx * g.hx) +
		   (w[g.idx(i, j + 1)] + w[g.idx(i, j - 1)] - 2 * c) / (g.hy * g.hy);
}

/// Interior nodes carrying the balanced equation: finite w0 on the stencil and away from zeros of b.
inline std::vector<std::uint8_t> balanced_nodes(const CubicDifferential& b, const Grid2D& g, const NodeCoefficients& nc,
												double cutoff) {
	std::vector<std::uint8_t> out(g.size(), 0);
	auto zs = b.zeros();
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i) {
			if (g.masked(i, j)) continue;
			cplx z = g.node(i, j);
			bool near = false;
			for (auto z0 : zs)
				if (std::abs(z - z0) < cutoff) near = true;
			if (near) continue;
			if (std::isfinite(lap(nc.w0, g, i, j))) out[g.idx(i, j)] = 1;
		}
	return out;
}

inline void check_poles_masked(const CubicDifferential& b, const Grid2D& g) {
	double rad = 3.0 * g.h();
	for (const auto& p : b.poles()) {
		cplx lo = g.origin, hi = g.hi();
		if (p.at.real() < lo.real() - rad || p.at.real() > hi.real() + rad || p.at.imag() < lo.imag() - rad ||
			p.at.imag() > hi.imag() + rad)
			continue;
		for (int j = 0; j < g.ny; ++j)
			for (int i = 0; i < g.nx; ++i)
				if (std::abs(g.node(i, j) - p.at) <= rad && !g.fixed(i, j))
					fail(errc::unmasked_pole, "grid must mask a disk of at least 3 cells around each pole");
	}
}

} // namespace detail

///
/// \brief Discrete Wang operator on a fixed grid and differential
///
/// The state stores u = w - log(2^{1/3}|b|^{2/3}) at balanced nodes and w elsewhere, so that
/// exponentially small u keeps its relative precision. At balanced nodes the equation is
/// Lap_h(w) - Lap_h(w0) = 2 e^{w0} (e^u - e^{-2u}), evaluated directly in u.
///
class WangOperator {
  public:
	WangOperator(const CubicDifferential& b, std::shared_ptr<const Grid2D> grid, const SolverConfig& cfg = {})
		: m_grid(std::move(grid)), m_nc(detail::node_coefficients(b, *m_grid)) {
		if (cfg.balanced) m_isu = detail::balanced_nodes(b, *m_grid, m_nc, cfg.balance_cutoff);
		else m_isu.assign(m_grid->size(), 0);
	}

	const Grid2D& grid() const { return *m_grid; }
	const std::vector<double>& b2() const { return m_nc.b2; }
	const std::vector<double>& w0() const { return m_nc.w0; }
	bool u_form(std::size_t k) const { return m_isu[k] != 0; }

	std::vector<double> to_state(const std::vector<double>& w) const {
		std::vector<double> v = w;
		for (std::size_t k = 0; k < v.size(); ++k)
			if (m_isu[k]) v[k] -= m_nc.w0[k];
		return v;
	}
	std::vector<double> to_w(const std::vector<double>& v) const {
		std::vector<double> w = v;
		for (std::size_t k = 0; k < w.size(); ++k)
			if (m_isu[k]) w[k] += m_nc.w0[k];
		return w;
	}
	/// u per node; NaN where w0 is not finite.
	std::vector<double> to_u(const std::vector<double>& v) const {
		std::vector<double> u(v.size());
		for (std::size_t k = 0; k < v.size(); ++k) {
			if (m_isu[k]) u[k] = v[k];
			else u[k] = std::isfinite(m_nc.w0[k]) ? v[k] - m_nc.w0[k] : std::numeric_limits<double>::quiet_NaN();
		}
		return u;
	}

	/// Residual at one interior node; argument in state form.
	double node_residual(const std::vector<double>& v, std::size_t k) const {
		const Grid2D& g = *m_grid;
		const double ax = 1.0 / (g.hx * g.hx), ay = 1.0 / (g.hy * g.hy);
		const std::size_t nx = std::size_t(g.nx);
		const bool U = m_isu[k];
		auto nb = [&](std::size_t q) {
			if (U == bool(m_isu[q])) return v[q];
			return U ? v[q] - m_nc.w0[q] : v[q] + m_nc.w0[q];
		};
		double c = v[k];
		double L = ax * (nb(k + 1) + nb(k - 1) - 2 * c) + ay * (nb(k + nx) + nb(k - nx) - 2 * c);
		if (U) return L - 2.0 * std::exp(m_nc.w0[k]) * (std::expm1(c) - std::expm1(-2.0 * c));
		return L - 2.0 * std::exp(c) + 4.0 * m_nc.b2[k] * std::exp(-2.0 * c);
	}

	double node_shift(const std::vector<double>& v, std::size_t k) const {
		if (m_isu[k]) return 2.0 * std::exp(m_nc.w0[k]) * (std::exp(v[k]) + 2.0 * std::exp(-2.0 * v[k]));
		return 2.0 * std::exp(v[k]) + 8.0 * m_nc.b2[k] * std::exp(-2.0 * v[k]);
	}

	/// Residual at interior nodes, zero at fixed nodes; argument in state form.
	void residual_state(const std::vector<double>& v, std::vector<double>& out) const {
		const Grid2D& g = *m_grid;
		out.assign(g.size(), 0.0);
		for (int j = 1; j < g.ny - 1; ++j)
			for (int i = 1; i < g.nx - 1; ++i)
				if (!g.masked(i, j)) out[g.idx(i, j)] = node_residual(v, g.idx(i, j));
	}

	/// Red-black pointwise Newton sweeps; resolves exponentially small u to relative precision.
	void relax_state(std::vector<double>& v, int sweeps) const {
		const Grid2D& g = *m_grid;
		const double d0 = 2.0 / (g.hx * g.hx) + 2.0 / (g.hy * g.hy);
		for (int s = 0; s < sweeps; ++s)
			for (int color = 0; color < 2; ++color)
				for (int j = 1; j < g.ny - 1; ++j)
					for (int i = 1 + ((j + 1 + color) & 1); i < g.nx - 1; i += 2) {
						if (g.masked(i, j)) continue;
						std::size_t k = g.idx(i, j);
						v[k] += node_residual(v, k) / (d0 + node_shift(v, k));
					}
	}

	void residual(const std::vector<double>& w, std::vector<double>& out) const { residual_state(to_state(w), out); }

	double residual_norm_state(const std::vector<double>& v) const {
		std::vector<double> r;
		residual_state(v, r);
		double m = 0.0;
		for (double x : r) m = std::max(m, std::abs(x));
		return m;
	}

	/// Newton shift 2 e^w + 8 |b|^2 e^{-2w} at interior nodes; argument in state form.
	void shift_state(const std::vector<double>& v, std::vector<double>& c) const {
		c.assign(v.size(), 0.0);
		for (std::size_t k = 0; k < v.size(); ++k)
			if (std::isfinite(m_nc.b2[k])) c[k] = node_shift(v, k);
	}

  private:
	std::shared_ptr<const Grid2D> m_grid;
	detail::NodeCoefficients m_nc;
	std::vector<std::uint8_t> m_isu;
};

namespace detail {

/// (-Lap + c) x on interior nodes; x vanishes on fixed nodes.
inline void apply_shifted(const Grid2D& g, const std::vector<double>& c, const std::vector<double>& x,
						  std::vector<double>& y) {
	double ax = 1.0 / (g.hx * g.hx), ay = 1.0 / (g.hy * g.hy);
	y.assign(g.size(), 0.0);
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i) {
			if (g.masked(i, j)) continue;
			std::size_t k = g.idx(i, j);
			y[k] = (2 * ax + 2 * ay + c[k]) * x[k] - ax * (x[k + 1] + x[k - 1]) -
				   ay * (x[k + std::size_t(g.nx)] + x[k - std::size_t(g.nx)]);
		}
}

/// Symmetric red-black Gauss-Seidel sweep (red, black, red) from zero.
inline void sgs_precondition(const Grid2D& g, const std::vector<double>& c, const std::vector<double>& r,
							 std::vector<double>& z) {
	double ax = 1.0 / (g.hx * g.hx), ay = 1.0 / (g.hy * g.hy);
	z.assign(g.size(), 0.0);
	auto sweep = [&](int color) {
		for (int j = 1; j < g.ny - 1; ++j)
			for (int i = 1 + ((j + 1 + color) & 1); i < g.nx - 1; i += 2) {
				if (g.masked(i, j)) continue;
				std::size_t k = g.idx(i, j);
				double rhs = r[k] + ax * (z[k + 1] + z[k - 1]) + ay * (z[k + std::size_t(g.nx)] + z[k - std::size_t(g.nx)]);
				z[k] = rhs / (2 * ax + 2 * ay + c[k]);
			}
	};
	sweep(0);
	sweep(1);
	sweep(0);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
	double s = 0.0;
	for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
	return s;
}

/// Preconditioned CG for (-Lap + c) x = r; returns iterations used.
inline int pcg(const Grid2D& g, const std::vector<double>& c, const std::vector<double>& r, std::vector<double>& x,
			   double rtol, int maxit) {
	x.assign(g.size(), 0.0);
	std::vector<double> res = r, z, p, q;
	sgs_precondition(g, c, res, z);
	p = z;
	double rz = dot(res, z);
	double r0 = std::sqrt(dot(res, res));
	if (r0 == 0.0) return 0;
	for (int it = 1; it <= maxit; ++it) {
		apply_shifted(g, c, p, q);
		double alpha = rz / dot(p, q);
		for (std::size_t k = 0; k < x.size(); ++k) {
			x[k] += alpha * p[k];
			res[k] -= alpha * q[k];
		}
		if (std::sqrt(dot(res, res)) <= rtol * r0) return it;
		sgs_precondition(g, c, res, z);
		double rz1 = dot(res, z);
		double beta = rz1 / rz;
		rz = rz1;
		for (std::size_t k = 0; k < x.size(); ++k) p[k] = z[k] + beta * p[k];
	}
	return maxit;
}

} // namespace detail

inline ScalarField wang_residual(const ScalarField& w, const CubicDifferential& b, const SolverConfig& cfg = {}) {
	WangOperator op(b, w.grid, cfg);
	ScalarField r(w.grid, FieldRole::other);
	op.residual(w.v, r.v);
	return r;
}

/// log of the complete hyperbolic comparison metric; -inf outside its domain.
struct HyperbolicComparison {
	std::string kind;
	double R = 0.0;

	double log_metric(cplx z) const {
		double r = std::abs(z);
		const double ninf = -std::numeric_limits<double>::infinity();
		if (kind == "disk") {
			if (r * r >= R) return ninf;
			return std::log(4.0 * R * R) - 2.0 * std::log(R * R - r * r);
		}
		if (kind == "punctured-disk") {
			if (r == 0.0 || r * r >= R) return ninf;
			double l = std::log(r / R);
			return -2.0 * std::log(r) - 2.0 * std::log(std::abs(l));
		}
		if (kind == "punctured-infinity") {
			if (r == 0.0 || r * r * R <= 1.0) return ninf;
			double l = std::log(r * R);
			return -2.0 * std::log(r) - 2.0 * std::log(std::abs(l));
		}
		if (kind == "annulus") {
			if (r * r >= R || r * r * R <= 1.0) return ninf;
			double lr = std::log(R);
			double c = std::cos(0.5 * pi * std::log(r) / lr);
			return 2.0 * std::log(0.5 * pi) - 2.0 * std::log(lr) - 2.0 * std::log(r) - 2.0 * std::log(c);
		}
		return ninf;
	}

	std::vector<double> check_radii() const {
		if (kind == "annulus") return {std::sqrt(R), 1.0 / std::sqrt(R)};
		if (kind == "punctured-infinity") return {1.0 / std::sqrt(R)};
		return {std::sqrt(R)};
	}
};

inline HyperbolicComparison hyperbolic_comparison(const CubicDifferential& b) {
	HyperbolicComparison h;
	if (b.domain() == Domain::plane) h.kind = "disk";
	else {
		int o0 = classify_pole(b, cplx(0.0)).order;
		int oi = classify_pole(b, std::nullopt).order;
		if (o0 >= 3 && oi >= 3) h.kind = "annulus";
		else if (o0 <= 2) h.kind = "punctured-disk";
		else h.kind = "punctured-infinity";
	}
	auto flat = [&](cplx z) { return std::log(std::cbrt(2.0)) + (2.0 / 3.0) * std::log(std::abs(b.evaluate(z))); };
	for (double R = 2.0; R <= 1e12; R *= 2.0) {
		h.R = R;
		bool ok = true;
		for (double rad : h.check_radii()) {
			for (int m = 0; m < 360 && ok; ++m) {
				cplx z = std::polar(rad, 2.0 * pi * (m + 0.5) / 360.0);
				if (b.pole_index(z, 1e-9)) continue;
				double hyp = h.log_metric(z * (1.0 - 1e-12));
				if (!(hyp <= flat(z))) ok = false;
			}
		}
		if (ok) return h;
	}
	fail(errc::barrier_failure, "no hyperbolic comparison radius found");
}

namespace detail {

inline bool supersolution_ok(const WangOperator& op, const std::vector<double>& wp, const std::vector<double>* boundary) {
	const Grid2D& g = op.grid();
	std::vector<double> W = wp;
	if (boundary)
		for (int j = 0; j < g.ny; ++j)
			for (int i = 0; i < g.nx; ++i)
				if (g.fixed(i, j)) W[g.idx(i, j)] = (*boundary)[g.idx(i, j)];
	std::vector<double> r;
	op.residual(W, r);
	for (double x : r)
		if (!(x <= 0.0)) return false;
	return true;
}

} // namespace detail

inline BarrierPair barriers(const CubicDifferential& b, std::shared_ptr<const Grid2D> grid,
							const ScalarField* boundary = nullptr, const SolverConfig& cfg = {}) {
	const Grid2D& g = *grid;
	WangOperator op(b, grid, cfg);
	HyperbolicComparison hyp = hyperbolic_comparison(b);
	BarrierPair bp;
	bp.kind = hyp.kind;
	bp.R = hyp.R;
	bp.w_minus = ScalarField(grid, FieldRole::w);
	for (std::size_t k = 0; k < g.size(); ++k) {
		double w0 = op.w0()[k];
		double wh = hyp.log_metric(g.node(k));
		double v = std::max(std::isnan(w0) ? -std::numeric_limits<double>::infinity() : w0, wh);
		if (!std::isfinite(v)) v = boundary ? boundary->v[k] : 0.0;
		bp.w_minus.v[k] = v;
	}
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i)
			if (!g.masked(i, j) && !std::isfinite(bp.w_minus(i, j)))
				fail(errc::barrier_failure, "lower barrier is not finite at an interior node");
	const std::vector<double>* bd = boundary ? &boundary->v : nullptr;
	for (double lam = 2.0; lam <= 1e6; lam *= 2.0) {
		std::vector<double> wp = bp.w_minus.v;
		for (auto& x : wp) x += std::log(lam);
		if (detail::supersolution_ok(op, wp, bd)) {
			bp.lambda = lam;
			bp.w_plus = ScalarField(grid, FieldRole::w);
			bp.w_plus.v = std::move(wp);
			bp.verified = true;
			return bp;
		}
	}
	fail(errc::barrier_failure, "no lambda <= 1e6 verifies the discrete supersolution inequality");
}

/// Default Dirichlet data u = 0, i.e. w = log(2^(1/3)|b|^(2/3)), on fixed nodes.
inline ScalarField flat_boundary(const CubicDifferential& b, std::shared_ptr<const Grid2D> grid) {
	auto nc = detail::node_coefficients(b, *grid);
	ScalarField s(grid, FieldRole::w);
	const Grid2D& g = *grid;
	auto touches_free = [&](int i, int j) {
		const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
		for (int a = 0; a < 4; ++a) {
			int ii = i + di[a], jj = j + dj[a];
			if (ii >= 0 && jj >= 0 && ii < g.nx && jj < g.ny && !g.fixed(ii, jj)) return true;
		}
		return false;
	};
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			double v = nc.w0[g.idx(i, j)];
			// values at masked nodes without free neighbors never enter the stencil
			if (g.fixed(i, j) && !std::isfinite(v) && touches_free(i, j))
				fail(errc::invalid_argument, "default boundary data undefined at a fixed node (pole or zero of b)");
			s(i, j) = std::isfinite(v) ? v : 0.0;
		}
	return s;
}

inline SolveResult solve(const CubicDifferential& b, std::shared_ptr<const Grid2D> grid, const ScalarField& boundary,
						 const SolverConfig& cfg = {}) {
	if (!(cfg.tolerance > 0.0)) fail(errc::invalid_argument, "solver tolerance must be positive");
	if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) fail(errc::invalid_argument, "damping must lie in (0, 1]");
	const Grid2D& g = *grid;
	detail::check_poles_masked(b, g);
	for (std::size_t k = 0; k < g.size(); ++k)
		if (g.fixed(int(k % std::size_t(g.nx)), int(k / std::size_t(g.nx))) && !std::isfinite(boundary.v[k]))
			fail(errc::invalid_argument, "boundary data must be finite on fixed nodes");

	SolveResult out;
	out.barriers = barriers(b, grid, &boundary, cfg);
	WangOperator op(b, grid, cfg);
	const auto& wm = out.barriers.w_minus.v;
	const auto& wp = out.barriers.w_plus.v;

	std::vector<double> w = wp;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (g.fixed(i, j)) w[g.idx(i, j)] = boundary(i, j);
	std::vector<double> v = op.to_state(w), lo = wm, hi = op.to_state(wp);
	for (auto& x : lo) x -= cfg.lower_clamp_slack;
	lo = op.to_state(lo);

	std::vector<double> r, c, d, trial;
	op.residual_state(v, r);
	double rn = 0.0;
	for (double x : r) rn = std::max(rn, std::abs(x));
	out.diag.history.push_back(rn);
	out.diag.lambda = out.barriers.lambda;
	for (int it = 0; it < cfg.max_iterations && rn >= cfg.tolerance; ++it) {
		op.shift_state(v, c);
		out.diag.linear_iterations += detail::pcg(g, c, r, d, cfg.linear_tolerance, cfg.max_linear_iterations);
		double alpha = cfg.damping;
		bool accepted = false;
		for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
			trial = v;
			for (int j = 1; j < g.ny - 1; ++j)
				for (int i = 1; i < g.nx - 1; ++i) {
					if (g.masked(i, j)) continue;
					std::size_t k = g.idx(i, j);
					trial[k] = std::clamp(v[k] + alpha * d[k], lo[k], hi[k]);
				}
			double tn = op.residual_norm_state(trial);
			if (tn < rn) {
				v.swap(trial);
				rn = tn;
				accepted = true;
				break;
			}
		}
		out.diag.iterations = it + 1;
		if (!accepted) break;
		op.residual_state(v, r);
		out.diag.history.push_back(rn);
	}
	if (cfg.refine_sweeps > 0) {
		op.relax_state(v, cfg.refine_sweeps);
		rn = op.residual_norm_state(v);
	}
	out.diag.residual = rn;
	out.diag.converged = rn < cfg.tolerance;
	out.w = ScalarField(grid, FieldRole::w);
	out.w.v = op.to_w(v);
	out.u = ScalarField(grid, FieldRole::u);
	out.u.v = op.to_u(v);
	return out;
}

inline ScalarField u_field(const ScalarField& w, const CubicDifferential& b) {
	auto nc = detail::node_coefficients(b, *w.grid);
	ScalarField u(w.grid, FieldRole::u);
	for (std::size_t k = 0; k < u.v.size(); ++k) {
		double w0 = nc.w0[k];
		u.v[k] = std::isfinite(w0) ? w.v[k] - w0 : std::numeric_limits<double>::quiet_NaN();
	}
	return u;
}

struct DecayFit {
	double rate = 0.0;
	double amplitude = 0.0;
	double r2 = 0.0;
	int samples = 0;
};

/// Least squares fit of log(y) + p log(x) = a - rate x over samples with y above 1e-14.
inline DecayFit fit_decay(const std::vector<double>& xs, const std::vector<double>& ys, double p = 0.5) {
	std::vector<double> X, Y;
	for (std::size_t i = 0; i < xs.size(); ++i)
		if (ys[i] > 1e-14 && std::isfinite(ys[i]) && xs[i] > 0.0) {
			X.push_back(xs[i]);
			Y.push_back(std::log(ys[i]) + p * std::log(xs[i]));
		}
	if (X.size() < 3) fail(errc::insufficient_samples, "decay fit needs at least 3 usable samples");
	double n = double(X.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
	for (std::size_t i = 0; i < X.size(); ++i) {
		sx += X[i];
		sy += Y[i];
		sxx += X[i] * X[i];
		sxy += X[i] * Y[i];
	}
	double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
	double icpt = (sy - slope * sx) / n;
	double ym = sy / n, ss = 0, sr = 0;
	for (std::size_t i = 0; i < X.size(); ++i) {
		double f = icpt + slope * X[i];
		ss += (Y[i] - ym) * (Y[i] - ym);
		sr += (Y[i] - f) * (Y[i] - f);
	}
	DecayFit d;
	d.rate = -slope;
	d.amplitude = std::exp(icpt);
	d.r2 = ss > 0 ? 1.0 - sr / ss : 1.0;
	d.samples = int(X.size());
	return d;
}

/// Fit of max over circles |zeta - center| = r of u against r.
inline DecayFit decay_fit(const ScalarField& u, cplx center, const std::vector<double>& radii, double p = 0.5) {
	BicubicInterpolant ip(u);
	std::vector<double> ys;
	for (double r : radii) {
		double m = -std::numeric_limits<double>::infinity();
		for (int k = 0; k < 720; ++k) {
			cplx z = center + std::polar(r, 2.0 * pi * k / 720.0);
			if (!u.grid->inside_box(z)) continue;
			m = std::max(m, ip.eval(z).f);
		}
		ys.push_back(m);
	}
	return fit_decay(radii, ys, p);
}

/// e^{-x} I_0(x) from (1/pi) int_0^pi e^{x cos t} dt by adaptive Gauss-Kronrod quadrature.
inline double bessel_i0_scaled(double x) {
	x = std::abs(x);
	auto f = [x](double t) { return std::exp(x * (std::cos(t) - 1.0)); };
	double err = 0.0;
	double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, pi, 12, 1e-13, &err);
	return v / pi;
}

inline double bessel_i0(double x) { return bessel_i0_scaled(x) * std::exp(std::abs(x)); }

inline double bessel_supersolution(double r, cplx zeta) {
	double a = std::abs(zeta);
	if (a > r * (1.0 + 1e-12)) fail(errc::invalid_argument, "bessel supersolution is defined on the closed disk only");
	double x = 2.0 * sqrt3 * a, y = 2.0 * sqrt3 * r;
	double h = std::exp(std::log(bessel_i0_scaled(x)) - std::log(bessel_i0_scaled(y)) + x - y);
	return h - 0.5 * h * h;
}

inline double loglambda_bound(double lambda, double r) {
	return std::log((lambda * lambda * lambda - 1.0) * r * r / (4.0 * lambda) + lambda);
}

/// u(center) <= log(lambda) on a solved disk; throws when the hypothesis bound fails.
inline bool disk_center_check(const ScalarField& u, double lambda, double r, cplx center = 0.0, double slack = 1e-8) {
	if (!(lambda > 1.0)) fail(errc::invalid_argument, "lambda must exceed 1");
	double bound = loglambda_bound(lambda, r);
	const Grid2D& g = *u.grid;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (std::abs(g.node(i, j) - center) <= r) {
				double x = u(i, j);
				if (!(x >= -slack && x <= bound + slack))
					fail(errc::precondition, "u violates the hypothesis bound 0 <= u <= log((lambda^3-1) r^2/(4 lambda) + lambda)");
			}
	BicubicInterpolant ip(u);
	return ip.eval(center).f <= std::log(lambda) + slack;
}

namespace detail {

/// Calibrated constant kappa with |d_z u(0)| <= kappa (osc/r + r sup|Lap u|) on harmonic samples, times 2.
inline double calibrate_gradient_constant() {
	static const double kappa = [] {
		double best = 0.0;
		for (int k = 1; k <= 4; ++k)
			for (int a = 0; a < 8; ++a) {
				cplx c = std::polar(1.0, a * pi / 8.0);
				for (double shift : {0.0, 0.3, 0.6}) {
					auto u = [&](cplx z) { return std::real(c * std::pow(z + shift, k)); };
					double mx = -1e300, mn = 1e300;
					for (int m = 0; m < 720; ++m) {
						double v = u(std::polar(1.0, 2.0 * pi * m / 720.0));
						mx = std::max(mx, v);
						mn = std::min(mn, v);
					}
					double grad = std::abs(0.5 * double(k) * c * std::pow(cplx(shift), k - 1));
					if (mx > mn) best = std::max(best, grad / (mx - mn));
				}
			}
		return std::max(2.0 * best, 0.5);
	}();
	return kappa;
}

} // namespace detail

struct GradientCheck {
	bool ok = false;
	double lhs = 0.0, rhs = 0.0;
};

inline GradientCheck gradient_bound_check(const ScalarField& u, cplx z0, double r) {
	const Grid2D& g = *u.grid;
	for (double a : {0.0, pi / 2, pi, 1.5 * pi})
		if (!g.inside_box(z0 + std::polar(r, a))) fail(errc::invalid_argument, "gradient check disk leaves the grid");
	BicubicInterpolant ip(u);
	double ux = (ip.eval(z0 + g.hx).f - ip.eval(z0 - g.hx).f) / (2 * g.hx);
	double uy = (ip.eval(z0 + I * g.hy).f - ip.eval(z0 - I * g.hy).f) / (2 * g.hy);
	GradientCheck out;
	out.lhs = 0.5 * std::hypot(ux, uy);
	double mx = -1e300, mn = 1e300;
	for (int m = 0; m < 720; ++m) {
		double v = ip.eval(z0 + std::polar(r, 2.0 * pi * m / 720.0)).f;
		mx = std::max(mx, v);
		mn = std::min(mn, v);
	}
	double lapmax = 0.0;
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i)
			if (std::abs(g.node(i, j) - z0) <= r) lapmax = std::max(lapmax, std::abs(detail::lap(u.v, g, i, j)));
	double kappa = detail::calibrate_gradient_constant();
	out.rhs = kappa * ((mx - mn) / r + r * lapmax);
	out.ok = out.lhs <= out.rhs;
	return out;
}

} // namespace wangdev
