#include <wangdev/convexgeom.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wangdev;

namespace {

const ConvexDomain& unit_disk() {
	static const ConvexDomain d = ConvexDomain::disk(0.0, 1.0);
	return d;
}

const ConvexDomain& triangle() {
	static const ConvexDomain d = ConvexDomain::polygon({cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.5, sqrt3 / 2.0)});
	return d;
}

const SupportField& disk_solution() {
	static const SupportField s = [] {
		SupportConfig cfg;
		cfg.n = 129;
		return support_solve(unit_disk(), cfg);
	}();
	return s;
}

const SupportField& triangle_solution() {
	static const SupportField s = [] {
		SupportConfig cfg;
		cfg.n = 129;
		return support_solve(triangle(), cfg);
	}();
	return s;
}

double max_interior_error(const SupportField& s, double c_radius) {
	const Grid2D& g = s.grid();
	double err = 0.0;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (s.is_interior(i, j)) err = std::max(err, std::abs(s.u(i, j) - disk_support(0.0, c_radius, g.node(i, j))));
	return err;
}

// product of the edge distances of the triangle
double edge_product(const ConvexDomain& dom, cplx x) {
	double p = 1.0;
	for (std::size_t e = 0; e < dom.vertices.size(); ++e) {
		auto [n, c] = dom.edge(e);
		p *= c - ConvexDomain::dot(n, x);
	}
	return p;
}

// w = -(edge product)^{1/3} solves det(Hess w) = C w^{-4} for a constant C; recover that constant by differences
double triangle_constant(const ConvexDomain& dom, cplx x) {
	const double h = 1e-3;
	auto w = [&](cplx z) { return -std::cbrt(edge_product(dom, z)); };
	double wxx = (w(x + h) - 2 * w(x) + w(x - h)) / (h * h);
	double wyy = (w(x + cplx(0, h)) - 2 * w(x) + w(x - cplx(0, h))) / (h * h);
	double wxy = (w(x + cplx(h, h)) - w(x + cplx(h, -h)) - w(x + cplx(-h, h)) + w(x + cplx(-h, -h))) / (4 * h * h);
	return (wxx * wyy - wxy * wxy) * std::pow(w(x), 4.0);
}

} // namespace

TEST(Domain, RejectsInvalidInput) {
	EXPECT_THROW(ConvexDomain::disk(0.0, 0.0), error);
	EXPECT_THROW(ConvexDomain::disk(0.0, -1.0), error);
	EXPECT_THROW(ConvexDomain::polygon({0.0, 1.0}), error);
	EXPECT_THROW(ConvexDomain::polygon({cplx(0, 0), cplx(0.5, 1), cplx(1, 0)}), error);
	EXPECT_THROW(ConvexDomain::polygon({cplx(0, 0), cplx(1, 0), cplx(2, 0), cplx(1, 1)}), error);
}

TEST(Domain, InscribedDiskOfTriangle) {
	auto [c, r] = triangle().inscribed_disk();
	EXPECT_NEAR(c.real(), 0.5, 1e-12);
	EXPECT_NEAR(c.imag(), sqrt3 / 6.0, 1e-12);
	EXPECT_NEAR(r, sqrt3 / 6.0, 1e-12);
	EXPECT_NEAR(triangle().circumscribed_disk().second, 1.0 / sqrt3, 1e-12);
}

TEST(Domain, RayExit) {
	EXPECT_NEAR(unit_disk().ray_exit(0.5, 1.0), 0.5, 1e-14);
	EXPECT_NEAR(unit_disk().ray_exit(0.5, -1.0), 1.5, 1e-14);
	EXPECT_NEAR(triangle().ray_exit(cplx(0.5, 0.1), cplx(0, -1)), 0.1, 1e-14);
}

TEST(Domain, AffineImageKeepsOrientation) {
	Eigen::Matrix2d A;
	A << 1.0, 0.0, 0.0, -2.0;
	ConvexDomain m = triangle().affine_image(A, cplx(3.0, 1.0));
	EXPECT_EQ(m.vertices.size(), 3u);
	EXPECT_TRUE(m.contains(cplx(3.5, 1.0 - 0.2)));
	Eigen::Matrix2d S;
	S << 1.0, 1.0, 0.0, 1.0;
	EXPECT_THROW(unit_disk().affine_image(S, 0.0), error);
}

TEST(DiskSupport, ExactFormulaSolvesEquation) {
	// radial and tangential Hessian eigenvalues of -R^{-1/3} sqrt(R^2 - r^2)
	for (double R : {0.5, 1.0, 3.0})
		for (double r : {0.0, 0.3 * R, 0.8 * R}) {
			double s = R * R - r * r, u = disk_support(0.0, R, r);
			double lr = std::pow(R, -1.0 / 3.0) * R * R * std::pow(s, -1.5);
			double lt = std::pow(R, -1.0 / 3.0) * std::pow(s, -0.5);
			EXPECT_NEAR(lr * lt * std::pow(u, 4.0), 1.0, 1e-12);
		}
	EXPECT_DOUBLE_EQ(disk_support(0.0, 1.0, 0.0), -1.0);
	EXPECT_DOUBLE_EQ(disk_support(0.0, 1.0, 1.0), 0.0);
}

TEST(SupportSolve, UnitDisk) {
	const SupportField& s = disk_solution();
	EXPECT_TRUE(s.diag.converged);
	EXPECT_LT(s.diag.residual, SupportConfig{}.tolerance);
	EXPECT_LT(max_interior_error(s, 1.0), 1e-2);
	const Grid2D& g = s.grid();
	EXPECT_NEAR(s.u(g.nx / 2, g.ny / 2), -1.0, 1e-2);
	EXPECT_GT(s.diag.min_hessian_eigenvalue, 0.0);
}

TEST(SupportSolve, NonPositiveEverywhere) {
	for (const SupportField* s : {&disk_solution(), &triangle_solution()})
		for (double u : s->u.v) EXPECT_LE(u, 0.0);
}

TEST(SupportSolve, DiskScalingLaw) {
	// u_rho(x) = rho^{2/3} u_1(x / rho)
	SupportConfig cfg;
	cfg.n = 65;
	for (double rho : {0.5, 2.0, 5.0}) {
		SupportField s = support_solve(ConvexDomain::disk(0.0, rho), cfg);
		const Grid2D& g = s.grid();
		EXPECT_NEAR(s.u(g.nx / 2, g.ny / 2) / std::pow(rho, 2.0 / 3.0), -1.0, 1e-2) << rho;
		EXPECT_LT(max_interior_error(s, rho) / std::pow(rho, 2.0 / 3.0), 2e-2) << rho;
	}
}

TEST(SupportSolve, DiskExactInSquaredForm) {
	// v = (-u)^2 is quadratic for the disk and the three-point arms differentiate it exactly
	SupportConfig cfg;
	cfg.n = 33;
	EXPECT_LT(max_interior_error(support_solve(unit_disk(), cfg), 1.0), 1e-10);
	EXPECT_LT(max_interior_error(disk_solution(), 1.0), 1e-10);
}

TEST(SupportSolve, TriangleNegativeInside) {
	const SupportField& s = triangle_solution();
	EXPECT_TRUE(s.diag.converged);
	const Grid2D& g = s.grid();
	std::size_t count = 0;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (s.is_interior(i, j)) {
				EXPECT_LT(s.u(i, j), 0.0);
				++count;
			}
	EXPECT_GT(count, 1000u);
}

TEST(SupportSolve, TriangleMatchesProductForm) {
	const ConvexDomain& dom = triangle();
	auto [c, r] = dom.inscribed_disk();
	// the constant is independent of the point
	double C = triangle_constant(dom, c);
	EXPECT_GT(C, 0.0);
	EXPECT_NEAR(triangle_constant(dom, c + cplx(0.1, 0.05)) / C, 1.0, 1e-5);
	const SupportField& s = triangle_solution();
	const Grid2D& g = s.grid();
	double err = 0.0;
	const double k = std::pow(C, -1.0 / 6.0);
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			cplx x = g.node(i, j);
			if (!s.is_interior(i, j) || std::abs(x - c) > 0.7 * r) continue;
			err = std::max(err, std::abs(s.u(i, j) + k * std::cbrt(edge_product(dom, x))));
		}
	EXPECT_LT(err, 1e-2);
}

TEST(SupportSolve, InclusionMonotonicity) {
	// larger domains carry deeper support functions: u_out <= u <= u_in on the inscribed disk
	const ConvexDomain& dom = triangle();
	const SupportField& s = triangle_solution();
	auto [ci, ri] = dom.inscribed_disk();
	auto [co, ro] = dom.circumscribed_disk();
	const Grid2D& g = s.grid();
	const double slack = 2.0 * g.h();
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			if (!s.is_interior(i, j)) continue;
			cplx x = g.node(i, j);
			double u = s.u(i, j);
			EXPECT_GE(u, disk_support(co, ro, x) - slack);
			if (std::abs(x - ci) < ri) {
				EXPECT_LE(u, disk_support(ci, ri, x) + slack);
			}
		}
}

TEST(SupportSolve, RejectsInvalidSettings) {
	SupportConfig cfg;
	cfg.n = 5;
	EXPECT_THROW(support_solve(unit_disk(), cfg), error);
}

TEST(SupportSolve, ReportsNonConvergence) {
	SupportConfig cfg;
	cfg.n = 33;
	cfg.max_iterations = 1;
	cfg.restarts = 0;
	cfg.tolerance = 1e-14;
	try {
		support_solve(triangle(), cfg);
		FAIL() << "expected non-convergence";
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::non_convergence);
	}
}

TEST(Blaschke, DiskIsHyperbolic) {
	MetricField m = blaschke_metric(disk_solution());
	const Grid2D& g = *m.grid;
	std::size_t count = 0;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			if (!m.has_curvature(i, j) || std::abs(g.node(i, j)) >= 0.7) continue;
			EXPECT_LT(std::abs(m.f[g.idx(i, j)]), 0.05);
			++count;
		}
	EXPECT_GT(count, 1000u);
}

TEST(Blaschke, DiskMetricMatchesHyperbolic) {
	// -Hess u / u at the center of the unit disk is the identity
	MetricField m = blaschke_metric(disk_solution());
	const Grid2D& g = *m.grid;
	std::size_t k = g.idx(g.nx / 2, g.ny / 2);
	EXPECT_NEAR(m.g11[k], 1.0, 1e-2);
	EXPECT_NEAR(m.g22[k], 1.0, 1e-2);
	EXPECT_NEAR(m.g12[k], 0.0, 1e-2);
	EXPECT_NEAR(m.volume[k], 1.0, 1e-2);
}

TEST(Blaschke, TriangleIsFlat) {
	const ConvexDomain& dom = triangle();
	auto [c, r] = dom.inscribed_disk();
	MetricSummary s = summarize_f(blaschke_metric(triangle_solution()), c, 0.5 * r);
	EXPECT_GT(s.count, 100u);
	EXPECT_LT(std::abs(s.f_min - 1.0), 0.05);
	EXPECT_LT(std::abs(s.f_max - 1.0), 0.05);
}

TEST(Blaschke, BoundedAboveAndNearlyNonNegative) {
	for (const SupportField* s : {&disk_solution(), &triangle_solution()}) {
		MetricField m = blaschke_metric(*s);
		const Grid2D& g = *m.grid;
		auto [c, r] = s->domain.inscribed_disk();
		MetricSummary all = summarize_f(m, c, 10.0);
		EXPECT_GT(all.count, 0u);
		EXPECT_TRUE(std::isfinite(all.f_max));
		// away from the corner-dominated collar f stays in [0, 1] up to slack
		MetricSummary bulk = summarize_f(m, c, 0.8 * r);
		EXPECT_GT(bulk.f_min, -0.05);
		EXPECT_LT(bulk.f_max, 1.05);
		for (int j = 0; j < g.ny; ++j)
			for (int i = 0; i < g.nx; ++i)
				if (m.has_metric(i, j)) {
					EXPECT_GT(m.volume[g.idx(i, j)], 0.0);
				}
	}
}

TEST(Blaschke, SquareApproachesFlatNearEdge) {
	auto sq = ConvexDomain::polygon({cplx(-1, -1), cplx(1, -1), cplx(1, 1), cplx(-1, 1)});
	SupportConfig cfg;
	cfg.n = 129;
	SupportField s = support_solve(sq, cfg);
	MetricField m = blaschke_metric(s);
	const Grid2D& g = *m.grid;
	// march along the inward normal from the midpoint of the bottom edge
	const int i = g.nx / 2;
	std::vector<double> dev;
	// the decrease holds down to about 6h, where the discretization floor sets in
	for (int step : {32, 16, 8, 6}) {
		int j = step;
		ASSERT_TRUE(m.has_curvature(i, j)) << step;
		dev.push_back(std::abs(m.f[g.idx(i, j)] - 1.0));
	}
	for (std::size_t k = 1; k < dev.size(); ++k) EXPECT_LT(dev[k], dev[k - 1]) << k;
	EXPECT_LT(dev.back(), 0.1);
	std::size_t c = g.idx(g.nx / 2, g.ny / 2);
	EXPECT_GT(std::abs(m.f[c] - 1.0), dev.back());
}

TEST(Hilbert, Examples) {
	EXPECT_NEAR(hilbert_norm(unit_disk(), 0.0, 1.0), 2.0, 1e-14);
	EXPECT_NEAR(hilbert_norm(unit_disk(), 0.0, cplx(0.0, 1.0)), 2.0, 1e-14);
	EXPECT_NEAR(hilbert_norm(unit_disk(), 0.5, 1.0), 8.0 / 3.0, 1e-14);
	EXPECT_NEAR(hilbert_norm(unit_disk(), 0.5, 3.0), 8.0, 1e-13);
}

TEST(Hilbert, Errors) {
	EXPECT_THROW(hilbert_norm(unit_disk(), 0.0, 0.0), error);
	try {
		hilbert_norm(unit_disk(), 1.0, 1.0);
		FAIL() << "expected outside-domain";
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::outside_domain);
	}
	EXPECT_THROW(hilbert_norm(triangle(), cplx(2.0, 0.0), 1.0), error);
}

TEST(Hilbert, AffineInvariance) {
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> U(-1.0, 1.0);
	for (int trial = 0; trial < 50; ++trial) {
		Eigen::Matrix2d A;
		do A << U(rng), U(rng), U(rng), U(rng);
		while (std::abs(A.determinant()) < 0.2);
		cplx t(U(rng), U(rng));
		ConvexDomain img = triangle().affine_image(A, t);
		cplx x(0.5 + 0.2 * U(rng), 0.25 + 0.05 * U(rng));
		cplx v(U(rng), U(rng));
		auto map = [&](cplx z, bool linear) {
			Eigen::Vector2d y = A * Eigen::Vector2d(z.real(), z.imag());
			return cplx(y(0), y(1)) + (linear ? 0.0 : t);
		};
		double a = hilbert_norm(triangle(), x, v), b = hilbert_norm(img, map(x, false), map(v, true));
		EXPECT_NEAR(b / a, 1.0, 1e-10);
	}
}

TEST(Hilbert, VolumeDensityOfDisk) {
	// the Hilbert metric of the disk at the center is 2|v|, unit ball of radius 1/2
	EXPECT_NEAR(hilbert_volume_density(unit_disk(), 0.0), 4.0, 1e-10);
}

TEST(Hilbert, VolumeRatioPositiveAndFinite) {
	for (const SupportField* s : {&disk_solution(), &triangle_solution()}) {
		MetricField m = blaschke_metric(*s);
		const Grid2D& g = *m.grid;
		auto [c, r] = s->domain.inscribed_disk();
		int count = 0;
		for (int j = 0; j < g.ny; j += 4)
			for (int i = 0; i < g.nx; i += 4) {
				if (!m.has_metric(i, j) || std::abs(g.node(i, j) - c) > 0.9 * r) continue;
				double q = volume_ratio(s->domain, m, i, j);
				EXPECT_TRUE(std::isfinite(q));
				EXPECT_GT(q, 0.0);
				++count;
			}
		EXPECT_GT(count, 20);
	}
	MetricField m = blaschke_metric(disk_solution());
	EXPECT_TRUE(std::isnan(volume_ratio(unit_disk(), m, 0, 0)));
}
