#pragma once

#include "common.hpp"
#include "grid.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace wangdev {

///
/// \brief Bounded convex domain in an affine chart: a counter-clockwise polygon or a round disk
///
struct ConvexDomain {
	enum class Kind { polygon, disk };

	Kind kind = Kind::disk;
	std::vector<cplx> vertices;
	cplx center = 0.0;
	double radius = 1.0;

	static ConvexDomain disk(cplx c, double r) {
		if (!(r > 0.0) || !std::isfinite(r)) fail(errc::invalid_argument, "disk radius must be positive");
		ConvexDomain d;
		d.kind = Kind::disk;
		d.center = c;
		d.radius = r;
		return d;
	}

	static ConvexDomain polygon(std::vector<cplx> v) {
		const std::size_t n = v.size();
		if (n < 3) fail(errc::invalid_argument, "polygon needs at least 3 vertices");
		for (std::size_t k = 0; k < n; ++k) {
			cplx a = v[(k + 1) % n] - v[k], b = v[(k + 2) % n] - v[(k + 1) % n];
			if (!(cross(a, b) > 0.0))
				fail(errc::invalid_argument, "polygon vertices are not in strictly convex counter-clockwise position");
		}
		ConvexDomain d;
		d.kind = Kind::polygon;
		d.vertices = std::move(v);
		return d;
	}

	static double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
	static double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

	/// Outward unit normal and offset of edge k: inside means dot(n, x) < c.
	std::pair<cplx, double> edge(std::size_t k) const {
		cplx a = vertices[k], b = vertices[(k + 1) % vertices.size()];
		cplx t = (b - a) / std::abs(b - a);
		cplx n(t.imag(), -t.real());
		return {n, dot(n, a)};
	}

	/// Signed distance to the boundary, positive inside.
	double boundary_distance(cplx x) const {
		if (kind == Kind::disk) return radius - std::abs(x - center);
		double d = std::numeric_limits<double>::infinity();
		for (std::size_t k = 0; k < vertices.size(); ++k) {
			auto [n, c] = edge(k);
			d = std::min(d, c - dot(n, x));
		}
		return d;
	}

	bool contains(cplx x) const { return boundary_distance(x) > 0.0; }

	/// Smallest t > 0 with x + t dir on the boundary; x must be inside or on the boundary.
	double ray_exit(cplx x, cplx dir) const {
		if (kind == Kind::disk) {
			cplx p = x - center;
			double a = std::norm(dir), b = dot(p, dir), c = std::norm(p) - radius * radius;
			double disc = b * b - a * c;
			if (disc < 0.0) disc = 0.0;
			return (-b + std::sqrt(disc)) / a;
		}
		double t = std::numeric_limits<double>::infinity();
		for (std::size_t k = 0; k < vertices.size(); ++k) {
			auto [n, c] = edge(k);
			double nd = dot(n, dir);
			if (nd > 0.0) t = std::min(t, (c - dot(n, x)) / nd);
		}
		return std::max(t, 0.0);
	}

	/// Center and radius of a largest inscribed disk.
	std::pair<cplx, double> inscribed_disk() const {
		if (kind == Kind::disk) return {center, radius};
		const std::size_t m = vertices.size();
		std::vector<std::pair<cplx, double>> E;
		for (std::size_t k = 0; k < m; ++k) E.push_back(edge(k));
		cplx best = 0.0;
		double rbest = -1.0;
		// the Chebyshev LP optimum sits where three edge constraints are active
		for (std::size_t a = 0; a < m; ++a)
			for (std::size_t b = a + 1; b < m; ++b)
				for (std::size_t c = b + 1; c < m; ++c) {
					Eigen::Matrix3d A;
					Eigen::Vector3d rhs;
					const std::size_t ids[3] = {a, b, c};
					for (int r = 0; r < 3; ++r) {
						A(r, 0) = E[ids[r]].first.real();
						A(r, 1) = E[ids[r]].first.imag();
						A(r, 2) = 1.0;
						rhs(r) = E[ids[r]].second;
					}
					if (std::abs(A.determinant()) < 1e-14) continue;
					Eigen::Vector3d s = A.partialPivLu().solve(rhs);
					cplx x(s(0), s(1));
					if (s(2) <= rbest) continue;
					if (boundary_distance(x) < s(2) - 1e-12 * (1.0 + std::abs(s(2)))) continue;
					best = x;
					rbest = s(2);
				}
		if (!(rbest > 0.0)) fail(errc::degenerate, "polygon has no interior");
		return {best, rbest};
	}

	/// Center and radius of the smallest disk about the inscribed center containing the domain.
	std::pair<cplx, double> circumscribed_disk() const {
		if (kind == Kind::disk) return {center, radius};
		cplx c = inscribed_disk().first;
		double r = 0.0;
		for (cplx v : vertices) r = std::max(r, std::abs(v - c));
		return {c, r};
	}

	/// Bounding box corners.
	std::pair<cplx, cplx> bounds() const {
		if (kind == Kind::disk) return {center - cplx(radius, radius), center + cplx(radius, radius)};
		double x0 = vertices[0].real(), x1 = x0, y0 = vertices[0].imag(), y1 = y0;
		for (cplx v : vertices) {
			x0 = std::min(x0, v.real());
			x1 = std::max(x1, v.real());
			y0 = std::min(y0, v.imag());
			y1 = std::max(y1, v.imag());
		}
		return {cplx(x0, y0), cplx(x1, y1)};
	}

	/// Image under x -> A x + t with det A != 0; orientation is restored for polygons.
	ConvexDomain affine_image(const Eigen::Matrix2d& A, cplx t) const {
		auto map = [&](cplx x) {
			Eigen::Vector2d y = A * Eigen::Vector2d(x.real(), x.imag());
			return cplx(y(0), y(1)) + t;
		};
		if (kind == Kind::disk) {
			Eigen::Matrix2d Q = A.transpose() * A;
			if (std::abs(Q(0, 1)) > 1e-12 * Q.norm() || std::abs(Q(0, 0) - Q(1, 1)) > 1e-12 * Q.norm())
				fail(errc::invalid_argument, "affine image of a disk must be a similarity");
			return disk(map(center), radius * std::sqrt(Q(0, 0)));
		}
		std::vector<cplx> v;
		for (cplx x : vertices) v.push_back(map(x));
		if (A.determinant() < 0.0) std::reverse(v.begin(), v.end());
		return polygon(std::move(v));
	}
};

/// Exact support function of the disk: -R^{-1/3} sqrt(R^2 - |x - c|^2).
inline double disk_support(cplx c, double R, cplx x) {
	double s = R * R - std::norm(x - c);
	return -std::pow(R, -1.0 / 3.0) * std::sqrt(std::max(s, 0.0));
}

struct SupportConfig {
	int n = 129;
	double tolerance = 1e-10;
	int max_iterations = 60;
	double eigen_floor = 1e-10;
	/// reporting collar in units of h
	double collar = 3.0;
	/// nodes closer than snap * h to the boundary carry the boundary value
	double snap = 1e-2;
	/// v = (-u)^exponent is the unknown; 0 picks 2 for disks and 3 for polygons
	double exponent = 0.0;
	double damping = 1.0;
	/// multiplies the initial guess; each restart deepens it by 1.5
	double initial_scale = 1.0;
	int restarts = 3;
};

struct SupportDiagnostics {
	int iterations = 0;
	int restarts = 0;
	double residual = 0.0;
	/// max |det(Hess_h u) u^4 - 1| with the plain nine-point stencil at nodes >= collar * h inside
	double consistency = 0.0;
	double min_hessian_eigenvalue = 0.0;
	bool converged = false;
	std::vector<double> history;
};

struct SupportField {
	ConvexDomain domain;
	ScalarField u;
	/// v = (-u)^exponent, the solved unknown
	ScalarField v;
	double exponent = 2.0;
	/// 1 at unknown nodes, 0 at boundary and exterior nodes
	std::vector<std::uint8_t> interior;
	SupportDiagnostics diag;

	const Grid2D& grid() const { return *u.grid; }
	bool is_interior(int i, int j) const { return interior[grid().idx(i, j)] != 0; }
};

namespace detail {

/// Shortley-Weller second and first difference along one direction; f, b index unknowns or -1 for 0.
struct ArmStencil {
	double cf, cb, c0;
	double gf, gb, g0;
	long f, b;
};

inline double apply_arm(const ArmStencil& s, const std::vector<double>& x, double x0, bool first) {
	double v = (first ? s.g0 : s.c0) * x0;
	if (s.f >= 0) v += (first ? s.gf : s.cf) * x[std::size_t(s.f)];
	if (s.b >= 0) v += (first ? s.gb : s.cb) * x[std::size_t(s.b)];
	return v;
}

/// Eigenvalues of the symmetric matrix [[a, c], [c, b]].
inline std::pair<double, double> sym_eigen(double a, double b, double c) {
	double m = 0.5 * (a + b), d = std::hypot(0.5 * (a - b), c);
	return {m - d, m + d};
}

/// Local difference quotients of v at one node.
struct LocalJet {
	double v, a, b, c, gx, gy;
};

} // namespace detail

///
/// \brief Support function: det(Hess u) = u^{-4} in the domain, u = 0 on the boundary
///
/// The unknown is v = (-u)^p, p = 2 for disks and 3 for polygons, so that v vanishes linearly at
/// the boundary. With q = 1/p the equation becomes
///   v det(Hess v) + (q - 1) grad v^T adj(Hess v) grad v = v^{3 - 6q} / q^2,
/// discretized by Shortley-Weller arms along the axes and both diagonals and solved by damped Newton
/// with a sparse LU factorization of the Jacobian.
///
inline SupportField support_solve(const ConvexDomain& dom, SupportConfig cfg = {}) {
	if (cfg.n < 9) fail(errc::invalid_argument, "support grid needs at least 9 nodes per side");
	const double p = cfg.exponent > 0.0 ? cfg.exponent : (dom.kind == ConvexDomain::Kind::disk ? 2.0 : 3.0);
	const double q = 1.0 / p, rhs_pow = 3.0 - 6.0 * q, rhs_c = 1.0 / (q * q);
	auto [lo, hi] = dom.bounds();
	cplx mid = 0.5 * (lo + hi);
	double half = 0.5 * std::max(hi.real() - lo.real(), hi.imag() - lo.imag());
	auto grid = std::make_shared<Grid2D>(Grid2D::square(mid, half, cfg.n));
	const Grid2D& g = *grid;
	const double h = g.h();

	SupportField out;
	out.domain = dom;
	out.u = ScalarField(grid, FieldRole::support, 0.0);
	out.v = ScalarField(grid, FieldRole::other, 0.0);
	out.exponent = p;
	out.interior.assign(g.size(), 0);

	std::vector<long> id(g.size(), -1);
	std::vector<std::size_t> nodes;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (!g.frame(i, j) && dom.boundary_distance(g.node(i, j)) > cfg.snap * h) {
				id[g.idx(i, j)] = long(nodes.size());
				nodes.push_back(g.idx(i, j));
				out.interior[g.idx(i, j)] = 1;
			}
	const std::size_t N = nodes.size();
	if (N == 0) fail(errc::invalid_argument, "grid has no interior nodes");

	const int di[4] = {1, 0, 1, 1}, dj[4] = {0, 1, 1, -1};
	std::vector<std::array<detail::ArmStencil, 4>> st(N);
	for (std::size_t k = 0; k < N; ++k) {
		int i = int(nodes[k] % std::size_t(g.nx)), j = int(nodes[k] / std::size_t(g.nx));
		cplx pt = g.node(i, j);
		for (int d = 0; d < 4; ++d) {
			double s = h * std::hypot(double(di[d]), double(dj[d]));
			cplx e = cplx(di[d], dj[d]) / std::abs(cplx(di[d], dj[d]));
			auto arm = [&](int sg, long& nb) {
				long m = id[g.idx(i + sg * di[d], j + sg * dj[d])];
				nb = m;
				return m >= 0 ? s : std::min(s, dom.ray_exit(pt, double(sg) * e));
			};
			detail::ArmStencil& A = st[k][std::size_t(d)];
			double af = arm(1, A.f), ab = arm(-1, A.b);
			A.cf = 2.0 / (af * (af + ab));
			A.cb = 2.0 / (ab * (af + ab));
			A.c0 = -A.cf - A.cb;
			A.gf = ab / (af * (af + ab));
			A.gb = -af / (ab * (af + ab));
			A.g0 = -A.gf - A.gb;
		}
	}

	auto jet = [&](const std::vector<double>& x, std::size_t k) {
		const auto& S = st[k];
		double v = x[k];
		return detail::LocalJet{v,
								detail::apply_arm(S[0], x, v, false),
								detail::apply_arm(S[1], x, v, false),
								0.5 * (detail::apply_arm(S[2], x, v, false) - detail::apply_arm(S[3], x, v, false)),
								detail::apply_arm(S[0], x, v, true),
								detail::apply_arm(S[1], x, v, true)};
	};
	auto equation = [&](const detail::LocalJet& J) {
		return J.v * (J.a * J.b - J.c * J.c) + (q - 1.0) * (J.gx * J.gx * J.b + J.gy * J.gy * J.a - 2.0 * J.gx * J.gy * J.c) -
			   rhs_c * std::pow(J.v, rhs_pow);
	};
	auto residual = [&](const std::vector<double>& x, std::vector<double>& F) {
		F.resize(N);
		for (std::size_t k = 0; k < N; ++k) F[k] = equation(jet(x, k));
	};
	auto norm2 = [](const std::vector<double>& v) {
		double s = 0.0;
		for (double t : v) s += t * t;
		return std::sqrt(s / double(v.size()));
	};
	auto normInf = [](const std::vector<double>& v) {
		double s = 0.0;
		for (double t : v) s = std::max(s, std::abs(t));
		return s;
	};

	// initial guess: circumscribed-disk level in the gauge of the domain, deepened on stalls
	auto [c_in, r_in] = dom.inscribed_disk();
	const double r_out = dom.circumscribed_disk().second;
	auto guess_u = [&](cplx pt) {
		if (dom.kind == ConvexDomain::Kind::disk) return disk_support(dom.center, dom.radius, pt);
		// harmonic mean of edge distances: linear at every edge, smooth inside
		auto hm = [&](cplx z) {
			double s = 0.0;
			for (std::size_t e = 0; e < dom.vertices.size(); ++e) {
				auto [n, c] = dom.edge(e);
				s += 1.0 / std::max(c - ConvexDomain::dot(n, z), 1e-300);
			}
			return 1.0 / s;
		};
		return -std::pow(r_out, 2.0 / 3.0) * std::pow(hm(pt) / hm(c_in), q);
	};

	std::vector<double> x(N), F, Ft, xt(N);
	SupportDiagnostics& dg = out.diag;
	Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
	bool patterned = false;
	std::vector<Eigen::Triplet<double>> trip;
	const Eigen::Index dim = Eigen::Index(N);
	double scale = cfg.initial_scale;
	for (int attempt = 0; attempt <= cfg.restarts; ++attempt, scale *= 1.5) {
		for (std::size_t k = 0; k < N; ++k) x[k] = std::pow(-scale * guess_u(g.node(nodes[k])), p);
		residual(x, F);
		double merit = norm2(F);
		dg.history.assign(1, normInf(F));
		for (int it = 0; it < cfg.max_iterations && normInf(F) > cfg.tolerance; ++it) {
			trip.clear();
			trip.reserve(N * 9);
			for (std::size_t k = 0; k < N; ++k) {
				detail::LocalJet J = jet(x, k);
				double Fv = J.a * J.b - J.c * J.c - rhs_c * rhs_pow * std::pow(J.v, rhs_pow - 1.0);
				double Fa = J.v * J.b + (q - 1.0) * J.gy * J.gy;
				double Fb = J.v * J.a + (q - 1.0) * J.gx * J.gx;
				double Fc = -2.0 * J.v * J.c - 2.0 * (q - 1.0) * J.gx * J.gy;
				double Fgx = 2.0 * (q - 1.0) * (J.gx * J.b - J.gy * J.c);
				double Fgy = 2.0 * (q - 1.0) * (J.gy * J.a - J.gx * J.c);
				const auto& S = st[k];
				// weights on second (w2) and first (w1) differences per direction
				const double w2[4] = {Fa, Fb, 0.5 * Fc, -0.5 * Fc}, w1[4] = {Fgx, Fgy, 0.0, 0.0};
				double diag = Fv;
				for (int d = 0; d < 4; ++d) {
					const auto& A = S[std::size_t(d)];
					diag += w2[d] * A.c0 + w1[d] * A.g0;
					if (A.f >= 0) trip.emplace_back(int(k), int(A.f), w2[d] * A.cf + w1[d] * A.gf);
					if (A.b >= 0) trip.emplace_back(int(k), int(A.b), w2[d] * A.cb + w1[d] * A.gb);
				}
				trip.emplace_back(int(k), int(k), diag);
			}
			Eigen::SparseMatrix<double> Jm(dim, dim);
			Jm.setFromTriplets(trip.begin(), trip.end());
			if (!patterned) {
				lu.analyzePattern(Jm);
				patterned = true;
			}
			lu.factorize(Jm);
			if (lu.info() != Eigen::Success) fail(errc::non_convergence, "support Jacobian factorization failed");
			Eigen::VectorXd rhs(dim);
			for (std::size_t k = 0; k < N; ++k) rhs(Eigen::Index(k)) = -F[k];
			Eigen::VectorXd dx = lu.solve(rhs);
			double step = cfg.damping;
			bool accepted = false;
			for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
				bool positive = true;
				for (std::size_t k = 0; k < N; ++k) {
					xt[k] = x[k] + step * dx(Eigen::Index(k));
					if (!(xt[k] > 0.0)) positive = false;
				}
				if (!positive) continue;
				residual(xt, Ft);
				double mt = norm2(Ft);
				if (std::isfinite(mt) && mt < (1.0 - 1e-4 * step) * merit) {
					accepted = true;
					break;
				}
			}
			dg.iterations = it + 1;
			if (!accepted) break;
			x.swap(xt);
			F.swap(Ft);
			merit = norm2(F);
			dg.history.push_back(normInf(F));
		}
		dg.residual = normInf(F);
		dg.converged = dg.residual <= cfg.tolerance;
		dg.restarts = attempt;
		if (dg.converged) break;
	}
	if (!dg.converged)
		fail(errc::non_convergence, "support Newton stalled at residual " + std::to_string(dg.residual));

	// Hess u = -q v^{q-2} (v Hess v + (q - 1) grad v grad v^T): convex iff the bracket is negative definite
	dg.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
	for (std::size_t k = 0; k < N; ++k) {
		detail::LocalJet J = jet(x, k);
		double ma = J.v * J.a + (q - 1.0) * J.gx * J.gx, mb = J.v * J.b + (q - 1.0) * J.gy * J.gy;
		double mc = J.v * J.c + (q - 1.0) * J.gx * J.gy;
		auto [l0, l1] = detail::sym_eigen(-ma, -mb, -mc);
		dg.min_hessian_eigenvalue = std::min(dg.min_hessian_eigenvalue, l0 / std::max(l1, 1e-300));
		if (!(l0 > 0.0)) {
			int i = int(nodes[k] % std::size_t(g.nx)), j = int(nodes[k] / std::size_t(g.nx));
			fail(errc::degenerate,
				 "discrete convexity lost at node (" + std::to_string(i) + ", " + std::to_string(j) + ")");
		}
		out.u.v[nodes[k]] = -std::pow(x[k], q);
		out.v.v[nodes[k]] = x[k];
	}
	// plain nine-point form det(Hess_h u) u^4 - 1 on the collar interior
	const ScalarField& u = out.u;
	for (std::size_t k = 0; k < N; ++k) {
		int i = int(nodes[k] % std::size_t(g.nx)), j = int(nodes[k] / std::size_t(g.nx));
		if (dom.boundary_distance(g.node(i, j)) < cfg.collar * h) continue;
		double uxx = (u(i + 1, j) - 2 * u(i, j) + u(i - 1, j)) / (h * h);
		double uyy = (u(i, j + 1) - 2 * u(i, j) + u(i, j - 1)) / (h * h);
		double uxy = (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1)) / (4 * h * h);
		double u4 = std::pow(u(i, j), 4.0);
		dg.consistency = std::max(dg.consistency, std::abs((uxx * uyy - uxy * uxy) * u4 - 1.0));
	}
	return out;
}

///
/// \brief Blaschke metric g = -(1/u) Hess u with its Gauss curvature and f = kappa + 1
///
struct MetricField {
	std::shared_ptr<const Grid2D> grid;
	std::vector<double> g11, g12, g22, kappa, f, volume;
	/// 1 where g is positive definite on the full stencil, 2 where kappa is also available
	std::vector<std::uint8_t> valid;

	bool has_metric(int i, int j) const { return valid[grid->idx(i, j)] >= 1; }
	bool has_curvature(int i, int j) const { return valid[grid->idx(i, j)] >= 2; }
};

inline MetricField blaschke_metric(const SupportField& s) {
	const Grid2D& g = s.grid();
	const double h = g.h(), h2 = h * h, q = 1.0 / s.exponent;
	MetricField m;
	m.grid = s.u.grid;
	const std::size_t n = g.size();
	const double nan = std::numeric_limits<double>::quiet_NaN();
	m.g11.assign(n, nan);
	m.g12.assign(n, nan);
	m.g22.assign(n, nan);
	m.kappa.assign(n, nan);
	m.f.assign(n, nan);
	m.volume.assign(n, nan);
	m.valid.assign(n, 0);
	const ScalarField& v = s.v;
	auto block_ok = [&](int i, int j, int r, auto&& pred) {
		for (int b = -r; b <= r; ++b)
			for (int a = -r; a <= r; ++a) {
				int ii = i + a, jj = j + b;
				if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny || !pred(ii, jj)) return false;
			}
		return true;
	};
	auto interior = [&](int i, int j) { return s.is_interior(i, j); };
	// g = -Hess u / u = -q (Hess v / v + (q - 1) grad v grad v^T / v^2)
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i) {
			if (!block_ok(i, j, 1, interior)) continue;
			double vv = v(i, j);
			double vx = (v(i + 1, j) - v(i - 1, j)) / (2 * h), vy = (v(i, j + 1) - v(i, j - 1)) / (2 * h);
			double vxx = (v(i + 1, j) - 2 * vv + v(i - 1, j)) / h2;
			double vyy = (v(i, j + 1) - 2 * vv + v(i, j - 1)) / h2;
			double vxy = (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1)) / (4 * h2);
			double E = -q * (vxx / vv + (q - 1.0) * vx * vx / (vv * vv));
			double F = -q * (vxy / vv + (q - 1.0) * vx * vy / (vv * vv));
			double G = -q * (vyy / vv + (q - 1.0) * vy * vy / (vv * vv));
			if (!(E > 0.0 && E * G - F * F > 0.0)) continue;
			std::size_t k = g.idx(i, j);
			m.g11[k] = E;
			m.g12[k] = F;
			m.g22[k] = G;
			m.volume[k] = std::sqrt(E * G - F * F);
			m.valid[k] = 1;
		}
	auto metric = [&](int i, int j) { return m.valid[g.idx(i, j)] >= 1; };
	for (int j = 1; j < g.ny - 1; ++j)
		for (int i = 1; i < g.nx - 1; ++i) {
			std::size_t k = g.idx(i, j);
			if (!m.valid[k] || !block_ok(i, j, 1, metric)) continue;
			const bool wide = block_ok(i, j, 2, metric);
			auto at = [&](const std::vector<double>& f, int a, int b) { return f[g.idx(i + a, j + b)]; };
			// first and second differences along one axis, fourth order when the wide stencil is available
			auto d1 = [&](const std::vector<double>& f, int ax, int ay) {
				if (wide)
					return (-at(f, 2 * ax, 2 * ay) + 8 * at(f, ax, ay) - 8 * at(f, -ax, -ay) + at(f, -2 * ax, -2 * ay)) /
						   (12 * h);
				return (at(f, ax, ay) - at(f, -ax, -ay)) / (2 * h);
			};
			auto d2 = [&](const std::vector<double>& f, int ax, int ay) {
				if (wide)
					return (-at(f, 2 * ax, 2 * ay) + 16 * at(f, ax, ay) - 30 * at(f, 0, 0) + 16 * at(f, -ax, -ay) -
							at(f, -2 * ax, -2 * ay)) /
						   (12 * h2);
				return (at(f, ax, ay) - 2 * at(f, 0, 0) + at(f, -ax, -ay)) / h2;
			};
			auto dxy = [&](const std::vector<double>& f) {
				auto c = [&](int a, int b) { return at(f, a, b) - at(f, a, -b) - at(f, -a, b) + at(f, -a, -b); };
				if (wide) return (64 * c(1, 1) - 8 * c(1, 2) - 8 * c(2, 1) + c(2, 2)) / (144 * h2);
				return c(1, 1) / (4 * h2);
			};
			double E = m.g11[k], F = m.g12[k], G = m.g22[k];
			double Eu = d1(m.g11, 1, 0), Ev = d1(m.g11, 0, 1), Fu = d1(m.g12, 1, 0), Fv = d1(m.g12, 0, 1);
			double Gu = d1(m.g22, 1, 0), Gv = d1(m.g22, 0, 1);
			double Evv = d2(m.g11, 0, 1), Guu = d2(m.g22, 1, 0), Fuv = dxy(m.g12);
			// Brioschi formula
			Eigen::Matrix3d M1, M2;
			M1 << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev, Fv - 0.5 * Gu, E, F, 0.5 * Gv, F, G;
			M2 << 0.0, 0.5 * Ev, 0.5 * Gu, 0.5 * Ev, E, F, 0.5 * Gu, F, G;
			double W = E * G - F * F;
			m.kappa[k] = (M1.determinant() - M2.determinant()) / (W * W);
			m.f[k] = m.kappa[k] + 1.0;
			m.valid[k] = 2;
		}
	return m;
}

/// Hilbert metric norm of v at x: (1/|x - a| + 1/|x - b|) |v| with a, b the chord endpoints.
inline double hilbert_norm(const ConvexDomain& dom, cplx x, cplx v) {
	if (!(std::abs(v) > 0.0)) fail(errc::invalid_argument, "tangent vector must be nonzero");
	if (!(dom.boundary_distance(x) > 0.0)) fail(errc::outside_domain, "point is not strictly inside the domain");
	cplx e = v / std::abs(v);
	double tp = dom.ray_exit(x, e), tm = dom.ray_exit(x, -e);
	return (1.0 / tp + 1.0 / tm) * std::abs(v);
}

/// Busemann density of the Hilbert metric at x: pi / area of its unit ball.
inline double hilbert_volume_density(const ConvexDomain& dom, cplx x, int samples = 720) {
	double area = 0.0;
	for (int k = 0; k < samples; ++k) {
		double F = hilbert_norm(dom, x, std::polar(1.0, 2.0 * pi * k / samples));
		area += 0.5 / (F * F);
	}
	area *= 2.0 * pi / samples;
	return pi / area;
}

/// Ratio of Hilbert to Blaschke volume densities at node (i, j); NaN where the metric is masked.
inline double volume_ratio(const ConvexDomain& dom, const MetricField& m, int i, int j) {
	if (!m.has_metric(i, j)) return std::numeric_limits<double>::quiet_NaN();
	return hilbert_volume_density(dom, m.grid->node(i, j)) / m.volume[m.grid->idx(i, j)];
}

struct MetricSummary {
	std::size_t count = 0;
	double f_min = 0.0, f_max = 0.0, f_mean = 0.0;
};

/// Statistics of f over curvature nodes inside the disk |x - c| <= r.
inline MetricSummary summarize_f(const MetricField& m, cplx c, double r) {
	MetricSummary s;
	s.f_min = std::numeric_limits<double>::infinity();
	s.f_max = -std::numeric_limits<double>::infinity();
	const Grid2D& g = *m.grid;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			if (!m.has_curvature(i, j) || std::abs(g.node(i, j) - c) > r) continue;
			double f = m.f[g.idx(i, j)];
			s.f_min = std::min(s.f_min, f);
			s.f_max = std::max(s.f_max, f);
			s.f_mean += f;
			++s.count;
		}
	if (s.count) s.f_mean /= double(s.count);
	return s;
}

} // namespace wangdev
