#pragma once

#include "cubicdiff.hpp"
#include "transport.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace wangdev {

///
/// \brief Point of RP^2 as a unit 3-vector with first nonzero entry positive
///
struct ProjPoint {
	Vec3 v{1.0, 0.0, 0.0};

	ProjPoint() = default;
	explicit ProjPoint(Vec3 x) {
		double n = x.norm();
		if (!(n > 0.0) || !std::isfinite(n)) fail(errc::degenerate, "cannot projectivize a zero or non-finite vector");
		x /= n;
		for (int i = 0; i < 3; ++i)
			if (x[i] != 0.0) {
				if (x[i] < 0.0) x = -x;
				break;
			}
		v = x;
	}
	static ProjPoint of(double a, double b, double c) { return ProjPoint(Vec3(a, b, c)); }
};

inline double chordal(const ProjPoint& p, const ProjPoint& q) { return std::min((p.v - q.v).norm(), (p.v + q.v).norm()); }

/// [e^{x_1} : e^{x_2} : e^{x_3}] without overflow
inline ProjPoint proj_exp(const Vec3& x) { return ProjPoint((x.array() - x.maxCoeff()).exp().matrix()); }

///
/// \brief Developed path: projectivized T(beta_[0,t]^{-1}) (1,1,1)
///
struct DevPath {
	std::vector<double> t;
	std::vector<ProjPoint> points;
	std::vector<double> logScale;
	std::vector<double> steps; ///< chordal distance between consecutive samples
};

/// Samples are recorded whenever the parameter advanced by at least sample_dt.
inline DevPath develop_path(const ConnectionSampler& s, const PathSpec& path, cplx base, double sample_dt = 0.02) {
	if (path.vertices.size() < 2) fail(errc::invalid_argument, "path needs at least two vertices");
	if (std::abs(path.start() - base) > 1e-12 * std::max(1.0, std::abs(base)))
		fail(errc::invalid_argument, "path must start at the base point");
	DevPath dp;
	const Vec3 one(1.0, 1.0, 1.0);
	double last = 0.0, final_t = 0.0;
	SL3 final;
	auto push = [&](double t, const SL3& S) {
		ProjPoint p(S.apply(one));
		if (!dp.points.empty()) dp.steps.push_back(chordal(dp.points.back(), p));
		dp.t.push_back(t);
		dp.points.push_back(p);
		dp.logScale.push_back(S.logScale);
		last = t;
	};
	integrate(s, path, Side::right, [&](double t, const SL3& S) {
		final = S;
		final_t = t;
		if (dp.t.empty() || t - last >= sample_dt) push(t, S);
	});
	if (final_t > last) push(final_t, final);
	return dp;
}

struct DevLimit {
	ProjPoint limit;
	bool converged = false;
	double tail = 0.0;                 ///< summed chordal steps over the last quarter
	std::optional<Vec3> direction;     ///< unit tangent at the limit, orthogonal to it
};

inline DevLimit dev_limit(const DevPath& dp, double tol, double fraction = 0.25) {
	if (dp.points.size() < 10) fail(errc::insufficient_samples, "developing limit needs at least 10 samples");
	std::size_t N = dp.points.size();
	std::size_t k0 = N - std::max<std::size_t>(2, std::size_t(std::ceil(fraction * double(N))));
	DevLimit out;
	out.limit = dp.points.back();
	for (std::size_t i = k0; i + 1 < N; ++i) out.tail += dp.steps[i];
	out.converged = out.tail < tol;
	Vec3 L = out.limit.v, q = dp.points[k0].v;
	if (q.dot(L) < 0.0) q = -q;
	Vec3 d = L - q;
	d -= d.dot(L) * L;
	if (d.norm() > 1e-14) out.direction = d / d.norm();
	return out;
}

///
/// \brief P(t) = T(beta_[0,t]^{-1}) T0(beta_[0,t]) sampled along a path
///
struct ComparisonRecord {
	std::vector<double> t;
	std::vector<SL3> P;
	std::vector<double> tail; ///< sup_{j,k >= i} |P_j - P_k|_F
	std::string route;

	/// First parameter from which the tail stays below tol; negative if never.
	double settles_below(double tol) const {
		for (std::size_t i = 0; i < t.size(); ++i)
			if (tail[i] < tol) return t[i];
		return -1.0;
	}
	/// Decay rate of |P(t + block) - P(t)|_F fitted between two fractions of the range; 0 with fewer than 3 blocks.
	double increment_rate(double from = 0.5, double to = 0.9, double block = 1.0) const {
		if (t.size() < 2) return 0.0;
		double t_lo = t.front() + from * (t.back() - t.front()), t_hi = t.front() + to * (t.back() - t.front());
		std::vector<double> xs, ys;
		std::size_t i = 0;
		for (double a = t_lo; a + block <= t_hi + 1e-12; a += block) {
			while (i + 1 < t.size() && t[i] < a) ++i;
			std::size_t j = i;
			while (j + 1 < t.size() && t[j] < a + block) ++j;
			double d = (P[j].matrix() - P[i].matrix()).norm();
			if (d > 0.0) {
				xs.push_back(0.5 * (t[i] + t[j]));
				ys.push_back(std::log(d));
			}
		}
		if (xs.size() < 3) return 0.0;
		double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
		for (std::size_t k = 0; k < xs.size(); ++k) {
			sx += xs[k];
			sy += ys[k];
			sxx += xs[k] * xs[k];
			sxy += xs[k] * ys[k];
		}
		return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
	}
	/// Increments over the later half of the range decay geometrically at least at min_rate.
	bool cauchy(double min_rate = 0.35) const { return increment_rate() >= min_rate; }
};

inline ComparisonRecord comparison_transform(const ConnectionSampler& s, const ConnectionSampler& flat,
											 const PathSpec& path, double sample_dt = 0.05) {
	if (path.vertices.size() < 2) fail(errc::invalid_argument, "path needs at least two vertices");
	if (s.zeta_mode() != flat.zeta_mode()) fail(errc::invalid_argument, "samplers must share the working coordinate");
	ComparisonRecord rec;
	double last = -1e300;
	auto keep = [&](double t, const SL3& P) {
		if (t - last < sample_dt && t != 0.0) return;
		last = t;
		rec.t.push_back(t);
		rec.P.push_back(P);
	};
	if (s.zeta_mode() && flat.is_flat()) {
		// P' = P Ad_{S0}(A - A0) with S0 = diag transport of the flat model
		rec.route = "conjugated-difference";
		const cplx z0 = path.start();
		SL3 P = SL3::identity();
		double t = 0.0;
		keep(t, P);
		for (std::size_t i = 1; i < path.vertices.size(); ++i) {
			cplx p0 = path.vertices[i - 1], d = path.vertices[i] - p0;
			double len = std::abs(d);
			auto N = [&](double sg) {
				cplx p = p0 + sg * d;
				Mat3 D = connection_difference(s.at(p), d);
				Vec3 e = titeica_exponents(p - z0);
				for (int a = 0; a < 3; ++a)
					for (int b = 0; b < 3; ++b)
						if (a != b) D(a, b) *= std::exp(e[a] - e[b]);
				return D;
			};
			double sigma = 0.0;
			Mat3 N0 = N(0.0);
			while (sigma < 1.0) {
				double ds = path.fixed_steps > 0 ? 1.0 / path.fixed_steps
												 : std::min(path.hmax / len, path.c / std::max(N0.norm() + 1.0, 1.0));
				if (sigma + ds > 1.0 - 1e-13) ds = 1.0 - sigma;
				Mat3 Nm = N(sigma + 0.5 * ds), N1 = N(sigma + ds);
				const Mat3& Y = P.m;
				Mat3 k1 = Y * N0, k2 = (Y + 0.5 * ds * k1) * Nm, k3 = (Y + 0.5 * ds * k2) * Nm, k4 = (Y + ds * k3) * N1;
				P.m = Y + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
				P.renormalize();
				sigma += ds;
				t += ds * len;
				N0 = N1;
				keep(t, P);
			}
		}
	} else {
		rec.route = "product";
		PathSpec fx = path;
		if (fx.fixed_steps <= 0) {
			double longest = 0.0;
			for (std::size_t i = 1; i < path.vertices.size(); ++i)
				longest = std::max(longest, std::abs(path.vertices[i] - path.vertices[i - 1]) * s.density(path.vertices[i - 1]));
			fx.fixed_steps = std::max(4, int(std::ceil(longest / path.hmax)));
		}
		std::vector<double> ts;
		std::vector<SL3> Ss, Ts;
		integrate(s, fx, Side::right, [&](double t, const SL3& X) {
			ts.push_back(t);
			Ss.push_back(X);
		});
		integrate(flat, fx, Side::left, [&](double, const SL3& X) { Ts.push_back(X); });
		for (std::size_t i = 0; i < ts.size(); ++i) keep(ts[i], Ss[i] * Ts[i]);
	}
	std::size_t n = rec.P.size();
	std::vector<Mat3> M(n);
	for (std::size_t i = 0; i < n; ++i) M[i] = rec.P[i].matrix();
	rec.tail.assign(n, 0.0);
	for (std::size_t i = n; i-- > 0;) {
		double m = i + 1 < n ? rec.tail[i + 1] : 0.0;
		for (std::size_t k = i + 1; k < n; ++k) m = std::max(m, (M[i] - M[k]).norm());
		rec.tail[i] = m;
	}
	return rec;
}

///
/// \brief Holonomy and spectra
///
inline SL3 holonomy_loop(const ConnectionSampler& s, const PathSpec& loop, double close_tol) {
	if (loop.vertices.size() < 3) fail(errc::invalid_argument, "loop needs at least three vertices");
	if (std::abs(loop.end() - loop.start()) > close_tol) fail(errc::invalid_argument, "loop endpoints do not match");
	PathSpec l = loop;
	l.vertices.back() = l.vertices.front();
	return parallel_transport(s, l);
}

/// Eigenvalues of the represented matrix in descending modulus, as logs of moduli plus the complex values of entries.
struct Spectrum {
	std::array<cplx, 3> mu;   ///< eigenvalues of the normalized entries
	double logScale = 0.0;
};

inline Spectrum spectrum(const SL3& M) {
	Eigen::EigenSolver<Mat3> es(M.m);
	Spectrum s;
	for (int i = 0; i < 3; ++i) s.mu[std::size_t(i)] = es.eigenvalues()(i);
	std::sort(s.mu.begin(), s.mu.end(), [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
	s.logScale = M.logScale;
	return s;
}

/// Three real eigenvalues, descending, from the loop transport and the reversed loop transport.
inline std::array<double, 3> holonomy_eigenvalues(const ConnectionSampler& s, const PathSpec& loop, double close_tol) {
	SL3 F = holonomy_loop(s, loop, close_tol);
	SL3 Rv = holonomy_loop(s, loop.reversed(), close_tol);
	auto top = [](const SL3& M) {
		Spectrum sp = spectrum(M);
		double a = std::abs(sp.mu[0]), b = std::abs(sp.mu[1]);
		double l = std::log(a);
		if (std::abs(a - b) <= 1e-3 * a) l = std::log(0.5 * (std::abs(sp.mu[0] + sp.mu[1])));
		return l + sp.logScale;
	};
	double l1 = top(F), l3 = -top(Rv);
	return {std::exp(l1), std::exp(-l1 - l3), std::exp(l3)};
}

inline std::array<double, 3> holonomy_eigen_from_residue(cplx R) {
	if (R == cplx(0.0)) fail(errc::invalid_argument, "residue must be nonzero");
	cplx r = std::pow(R / 2.0, 1.0 / 3.0);
	std::array<double, 3> out;
	for (int j = 0; j < 3; ++j) out[std::size_t(j)] = std::exp(-4.0 * pi * (r * std::pow(omega, j)).imag());
	std::sort(out.begin(), out.end(), std::greater<>());
	return out;
}

enum class MatrixClass { hyperbolic, quasi_hyperbolic, planar, parabolic, elliptic_or_other };

inline const char* class_name(MatrixClass c) {
	switch (c) {
	case MatrixClass::hyperbolic: return "hyperbolic";
	case MatrixClass::quasi_hyperbolic: return "quasi-hyperbolic";
	case MatrixClass::planar: return "planar";
	case MatrixClass::parabolic: return "parabolic";
	case MatrixClass::elliptic_or_other: return "elliptic-or-other";
	}
	return "elliptic-or-other";
}

inline MatrixClass classify_sl3(const SL3& M, double tol = 1e-5, double rank_tol = 1e-7) {
	Spectrum sp = spectrum(M);
	for (auto m : sp.mu)
		if (std::abs(m.imag()) > 1e-9 * std::abs(m) || !(m.real() > 0.0)) return MatrixClass::elliptic_or_other;
	std::array<double, 3> l{sp.mu[0].real(), sp.mu[1].real(), sp.mu[2].real()};
	auto close = [&](double a, double b) { return std::abs(a - b) <= tol * std::max(a, b); };
	bool c01 = close(l[0], l[1]), c12 = close(l[1], l[2]);
	if (!c01 && !c12) return MatrixClass::hyperbolic;
	auto rank_at = [&](double lam) {
		Mat3 X = M.m - lam * Mat3::Identity();
		Eigen::JacobiSVD<Mat3> svd(X);
		int r = 0;
		for (int i = 0; i < 3; ++i)
			if (svd.singularValues()(i) > rank_tol) ++r;
		return r;
	};
	if (c01 && c12) {
		double lam = (l[0] + l[1] + l[2]) / 3.0;
		bool one = std::abs(std::log(lam) + M.logScale) <= tol;
		if (one && rank_at(lam) == 2) return MatrixClass::parabolic;
		return MatrixClass::elliptic_or_other;
	}
	double lam = c01 ? 0.5 * (l[0] + l[1]) : 0.5 * (l[1] + l[2]);
	return rank_at(lam) >= 2 ? MatrixClass::quasi_hyperbolic : MatrixClass::planar;
}

struct EndType {
	std::string label;                     ///< V-end | geodesic-end
	std::vector<MatrixClass> expected;     ///< admissible holonomy classes
	bool ambiguous = false;
	std::string limit_set;
};

inline EndType classify_end_order3(cplx R, double tol = 1e-8) {
	if (R == cplx(0.0)) fail(errc::invalid_argument, "residue must be nonzero");
	EndType e;
	e.ambiguous = std::abs(R.real()) < tol * std::abs(R);
	if (e.ambiguous) {
		e.label = "geodesic-end";
		e.expected = {MatrixClass::quasi_hyperbolic, MatrixClass::planar};
		e.limit_set = "double fixed point of the holonomy";
	} else if (R.real() < 0.0) {
		e.label = "V-end";
		e.expected = {MatrixClass::hyperbolic};
		e.limit_set = "attracting fixed point of the holonomy";
	} else {
		e.label = "geodesic-end";
		e.expected = {MatrixClass::hyperbolic};
		e.limit_set = "open principal segment";
	}
	return e;
}

inline bool end_type_agrees(const EndType& e, MatrixClass c) {
	return std::find(e.expected.begin(), e.expected.end(), c) != e.expected.end();
}

///
/// \brief Convex position in the affine chart normal to a reference direction
///
namespace detail {

inline std::vector<Eigen::Vector2d> affine_chart(const std::vector<ProjPoint>& pts, const Vec3& interior, Vec3& normal) {
	Vec3 m = Vec3::Zero();
	for (const auto& p : pts) m += p.v.dot(interior) >= 0 ? p.v : Vec3(-p.v);
	normal = m.normalized();
	Vec3 e1 = (std::abs(normal[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
	e1 = (e1 - e1.dot(normal) * normal).normalized();
	Vec3 e2 = normal.cross(e1);
	std::vector<Eigen::Vector2d> out;
	for (const auto& p : pts) {
		double s = p.v.dot(normal);
		if (std::abs(s) < 1e-12) fail(errc::degenerate, "point at infinity of the affine chart");
		Vec3 q = p.v / s;
		out.emplace_back(q.dot(e1), q.dot(e2));
	}
	return out;
}

inline double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
	long double x1 = (long double)b.x() - a.x(), y1 = (long double)b.y() - a.y();
	long double x2 = (long double)c.x() - a.x(), y2 = (long double)c.y() - a.y();
	return double(x1 * y2 - y1 * x2);
}

} // namespace detail

struct ConvexCertificate {
	bool convex_position = false;
	std::vector<int> hull;   ///< indices in counter-clockwise order
	double min_turn = 0.0;   ///< smallest orientation determinant along the hull
};

/// Every point is a strict vertex of the convex hull in the chart; representatives are oriented
/// towards the interior point, by default the developed base point (1,1,1).
inline ConvexCertificate convex_position(const std::vector<ProjPoint>& pts, const Vec3& interior = Vec3(1.0, 1.0, 1.0)) {
	ConvexCertificate c;
	if (pts.size() < 3) return c;
	Vec3 nrm;
	auto q = detail::affine_chart(pts, interior, nrm);
	std::vector<int> idx(q.size());
	for (std::size_t i = 0; i < q.size(); ++i) idx[i] = int(i);
	std::sort(idx.begin(), idx.end(), [&](int a, int b) {
		return q[std::size_t(a)].x() < q[std::size_t(b)].x() ||
			   (q[std::size_t(a)].x() == q[std::size_t(b)].x() && q[std::size_t(a)].y() < q[std::size_t(b)].y());
	});
	std::vector<int> H;
	for (int pass = 0; pass < 2; ++pass) {
		std::size_t start = H.size();
		for (int i : idx) {
			while (H.size() >= start + 2 &&
				   detail::orient(q[std::size_t(H[H.size() - 2])], q[std::size_t(H.back())], q[std::size_t(i)]) <= 0.0)
				H.pop_back();
			H.push_back(i);
		}
		H.pop_back();
		std::reverse(idx.begin(), idx.end());
	}
	c.hull = H;
	c.min_turn = 1e300;
	for (std::size_t i = 0; i < H.size(); ++i)
		c.min_turn = std::min(c.min_turn, detail::orient(q[std::size_t(H[i])], q[std::size_t(H[(i + 1) % H.size()])],
														 q[std::size_t(H[(i + 2) % H.size()])]));
	c.convex_position = H.size() == pts.size() && c.min_turn > 0.0;
	return c;
}

/// |det(p, q, r)| of unit representatives.
inline double collinearity(const ProjPoint& p, const ProjPoint& q, const ProjPoint& r) {
	Mat3 M;
	M << p.v, q.v, r.v;
	return std::abs(M.determinant());
}

struct PolygonConfig {
	double r_max = 0.0;             ///< probe radius in z; 0 means 0.9 of the sampler reach given below
	double reach = 8.0;             ///< radius of the region where the sampler is valid
	std::vector<double> offsets{-1.0, -0.5, 0.0, 0.5, 1.0};
	int extra_vertex_rays = 2;      ///< additional rays per stable sector besides the midline
	double vertex_spread = 0.5;     ///< fraction of the stable half-width used by extra rays
	double limit_tol = 1e-4;        ///< summed chordal tail for convergence
	double cluster_eps = 1e-3;      ///< chordal distance merging vertex probe limits
	double distinct_eps = 1e-2;
	double collinear_tol = 1e-4;
	double edge_t0 = 0.5;           ///< natural-coordinate start of the edge lines
	double edge_dt = 0.05;          ///< vertex spacing of edge polylines in the natural coordinate
	double ray_dz = 0.05;           ///< vertex spacing of vertex rays in z
	double loop_radius = 0.0;       ///< 0 means half of r_max
	double incidence_offset = 6.0;  ///< edge offset compared against the adjacent vertices; 0 disables
	PathSpec steps;                 ///< step controls copied into every probe
};

struct EdgeSample {
	double offset;
	ProjPoint limit;
	bool converged;
};

struct PolygonReport {
	int n = 0;
	std::vector<ProjPoint> vertices;
	std::vector<double> vertex_angles;
	std::vector<std::vector<EdgeSample>> edges; ///< edges[k] joins vertices k and k+1
	std::vector<int> probe_cluster;             ///< cluster id of every vertex probe
	int vertex_count = 0;
	SL3 holonomy;
	double holonomy_identity_error = 0.0;
	double min_vertex_separation = 0.0;
	double max_edge_collinearity = 0.0;
	double min_adjacent_turn = 0.0;
	double max_incidence_error = 0.0;  ///< extreme edge probes vs adjacent vertices
	double max_holonomy_shift = 0.0;   ///< chordal distance of hol(X_k) from X_{k+n} = X_k
	bool all_converged = true;
	ConvexCertificate certificate;
	std::string end_type;
	std::vector<std::string> warnings;
};

///
/// \brief Polygon of the pole at infinity of a z^d dz^3 (n = d + 3), developed from base 0
///
inline PolygonReport polygon_extract(const ConnectionSampler& s, const CubicDifferential& b, cplx base,
									 const PolygonConfig& cfg) {
	if (s.zeta_mode()) fail(errc::invalid_argument, "polygon extraction runs in the z coordinate");
	PoleAnalysis pa = classify_pole(b, std::nullopt);
	if (b.domain() != Domain::plane || pa.order < 4) fail(errc::unsupported_order, "need a polynomial with pole order >= 4 at infinity");
	const auto& num = b.numerator();
	int d = b.numerator_degree();
	PolygonReport rep;
	rep.n = d + 3;
	const int n = rep.n;
	double rmax = cfg.r_max > 0.0 ? cfg.r_max : 0.9 * cfg.reach;
	cplx lead = num.back();
	double argA = std::arg(lead / 2.0);
	// zeta = scale z^{n/3} with arg(scale) = argA/3, so arg zeta = argA/3 + n phi/3
	auto z_dir = [&](double zeta_angle) { return 3.0 * (zeta_angle - argA / 3.0) / n; };
	auto with_steps = [&](PathSpec p) {
		p.arc_length = cfg.steps.arc_length;
		p.hmax = cfg.steps.hmax;
		p.c = cfg.steps.c;
		return p;
	};
	auto ray = [&](double phi, double r0, double r1) {
		PathSpec p;
		p.vertices.push_back(base);
		cplx e = std::polar(1.0, phi);
		int m = std::max(2, int(std::ceil((r1 - r0) / cfg.ray_dz)));
		if (std::abs(base - r0 * e) > 1e-14) p.vertices.push_back(r0 * e);
		for (int k = 1; k <= m; ++k) p.vertices.push_back((r0 + (r1 - r0) * k / m) * e);
		return with_steps(p);
	};

	std::vector<ProjPoint> probes;
	std::vector<int> probe_k;
	for (int k = 0; k < n; ++k) {
		double phi = z_dir(2.0 * pi * k / 3.0);
		double half = pi / (2.0 * n);
		std::vector<double> phis{phi};
		for (int e = 1; e <= cfg.extra_vertex_rays; ++e) {
			double off = cfg.vertex_spread * half * double((e + 1) / 2) / double((cfg.extra_vertex_rays + 1) / 2);
			phis.push_back(phi + (e % 2 ? off : -off));
		}
		for (double ph : phis) {
			DevPath dp = develop_path(s, ray(ph, std::abs(base) + 1e-3, rmax), base);
			DevLimit L = dev_limit(dp, cfg.limit_tol);
			if (!L.converged) rep.all_converged = false;
			probes.push_back(L.limit);
			probe_k.push_back(k);
			if (ph == phi) {
				rep.vertices.push_back(L.limit);
				rep.vertex_angles.push_back(wrap_2pi(phi));
			}
		}
	}
	std::vector<ProjPoint> centers;
	for (const auto& p : probes) {
		int id = -1;
		for (std::size_t c = 0; c < centers.size(); ++c)
			if (chordal(p, centers[c]) < cfg.cluster_eps) id = int(c);
		if (id < 0) {
			id = int(centers.size());
			centers.push_back(p);
		}
		rep.probe_cluster.push_back(id);
	}
	rep.vertex_count = int(centers.size());

	// edge probes: natural-coordinate lines e^{i psi}(t + i s), psi = (2k+1) pi / 3
	const double nat_scale = (3.0 / n) * std::cbrt(std::abs(lead) / 2.0);
	const double zeta_max = nat_scale * std::pow(rmax, n / 3.0);
	auto edge_probe = [&](int k, double sft) {
		double psi = (2.0 * k + 1.0) * pi / 3.0;
		NaturalBranch br{lead, d, z_dir(psi)};
		PathSpec p;
		p.vertices.push_back(base);
		cplx e = std::polar(1.0, psi);
		double t1 = std::sqrt(std::max(0.0, zeta_max * zeta_max - sft * sft));
		int m = std::max(2, int(std::ceil((t1 - cfg.edge_t0) / cfg.edge_dt)));
		for (int j = 0; j <= m; ++j) {
			cplx z = br.z_of_zeta(e * cplx(cfg.edge_t0 + (t1 - cfg.edge_t0) * j / m, sft));
			if (std::abs(z - p.vertices.back()) > 1e-14) p.vertices.push_back(z);
		}
		DevLimit L = dev_limit(develop_path(s, with_steps(p), base), cfg.limit_tol);
		if (!L.converged) rep.all_converged = false;
		return EdgeSample{sft, L.limit, L.converged};
	};
	for (int k = 0; k < n; ++k) {
		std::vector<EdgeSample> edge;
		for (double sft : cfg.offsets) edge.push_back(edge_probe(k, sft));
		rep.edges.push_back(std::move(edge));
		if (cfg.incidence_offset > 0.0) {
			ProjPoint lo = edge_probe(k, -cfg.incidence_offset).limit, hi = edge_probe(k, cfg.incidence_offset).limit;
			const auto& A = rep.vertices[std::size_t(k)];
			const auto& B = rep.vertices[std::size_t((k + 1) % n)];
			double err = std::min(std::max(chordal(lo, A), chordal(hi, B)), std::max(chordal(lo, B), chordal(hi, A)));
			rep.max_incidence_error = std::max(rep.max_incidence_error, err);
		}
	}

	rep.min_vertex_separation = 1e300;
	for (int i = 0; i < n; ++i)
		for (int j = i + 1; j < n; ++j)
			rep.min_vertex_separation = std::min(rep.min_vertex_separation, chordal(rep.vertices[std::size_t(i)], rep.vertices[std::size_t(j)]));
	for (int k = 0; k < n; ++k) {
		const auto& A = rep.vertices[std::size_t(k)];
		const auto& B = rep.vertices[std::size_t((k + 1) % n)];
		const auto& C = rep.vertices[std::size_t((k + 2) % n)];
		for (const auto& e : rep.edges[std::size_t(k)])
			rep.max_edge_collinearity = std::max(rep.max_edge_collinearity, collinearity(A, B, e.limit));
		double turn = collinearity(A, B, C);
		rep.min_adjacent_turn = k == 0 ? turn : std::min(rep.min_adjacent_turn, turn);
	}
	rep.certificate = convex_position(rep.vertices);

	// holonomy around the pole at infinity; trivial on the plane
	double rl = cfg.loop_radius > 0.0 ? cfg.loop_radius : 0.5 * rmax;
	PathSpec loop = with_steps(PathSpec::circle(0.0, rl, 256, true));
	PathSpec join{{base, loop.start()}};
	PathSpec full = std::abs(base - loop.start()) > 1e-14 ? with_steps(join).then(loop).then(join.reversed()) : loop;
	rep.holonomy = holonomy_loop(s, full, 1e-9);
	rep.holonomy_identity_error = relative_distance(rep.holonomy, SL3::identity());
	for (std::size_t k = 0; k < rep.vertices.size(); ++k)
		rep.max_holonomy_shift = std::max(rep.max_holonomy_shift, chordal(ProjPoint(rep.holonomy.apply(rep.vertices[k].v)), rep.vertices[k]));

	if (rep.vertex_count != n) rep.warnings.push_back("vertex probe clusters differ from n");
	if (rep.min_vertex_separation <= cfg.distinct_eps) rep.warnings.push_back("vertices are not pairwise distinct");
	if (rep.max_edge_collinearity > cfg.collinear_tol) rep.warnings.push_back("edge samples off their vertex line");
	if (!rep.certificate.convex_position) rep.warnings.push_back("vertices not in convex position");
	if (!rep.all_converged) rep.warnings.push_back("some probe rays did not converge");
	rep.end_type = "polygon with " + std::to_string(n) + " vertices";
	return rep;
}

} // namespace wangdev
