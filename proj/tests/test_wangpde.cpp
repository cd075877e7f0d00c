#include <wangdev/wangpde.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wangdev;

namespace {

double flat_w(const CubicDifferential& b, cplx z) { return std::log(std::cbrt(2.0)) + (2.0 / 3.0) * std::log(std::abs(b.evaluate(z))); }

double interior_max(const ScalarField& f) {
	const Grid2D& g = *f.grid;
	double m = 0.0;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i)
			if (!g.fixed(i, j)) m = std::max(m, std::abs(f(i, j)));
	return m;
}

std::shared_ptr<Grid2D> annulus_grid(int n) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, n));
	g->mask_disk(0.0, 0.5);
	return g;
}

const SolveResult& linear_solve() {
	static const SolveResult r = [] {
		auto b = CubicDifferential::monomial(2.0, 1);
		auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 4.0, 129));
		return solve(b, g, flat_boundary(b, g));
	}();
	return r;
}

} // namespace

TEST(Residual, VanishesForConstantDifferential) {
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 33));
	ScalarField w(g, FieldRole::w, std::log(2.0));
	for (bool bal : {true, false}) {
		SolverConfig cfg;
		cfg.balanced = bal;
		EXPECT_LT(interior_max(wang_residual(w, b, cfg)), 1e-13);
	}
}

TEST(Residual, ExactPuncturedSolutionIsSecondOrderConsistent) {
	auto b = CubicDifferential::inverse_power(cplx(1.0, 1.0), 3);
	SolverConfig plain;
	plain.balanced = false;
	std::vector<double> r;
	for (int n : {65, 129, 257}) {
		auto g = annulus_grid(n);
		auto w = ScalarField::from_function(g, FieldRole::w, [&](cplx z) { return std::abs(z) < 1e-12 ? 0.0 : flat_w(b, z); });
		r.push_back(interior_max(wang_residual(w, b, plain)));
		EXPECT_LT(interior_max(wang_residual(w, b)), 1e-10);
	}
	EXPECT_GT(r[0] / r[1], 3.5);
	EXPECT_LT(r[0] / r[1], 4.5);
	EXPECT_GT(r[1] / r[2], 3.5);
	EXPECT_LT(r[1] / r[2], 4.5);
}

TEST(Residual, LinearInPerturbation) {
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 33));
	auto bump = [](cplx z) { return std::exp(-std::norm(z)); };
	auto at = [&](double eps) {
		return wang_residual(ScalarField::from_function(g, FieldRole::w, [&](cplx z) { return std::log(2.0) + eps * bump(z); }), b);
	};
	ScalarField r1 = at(1e-4), r2 = at(2e-4);
	double dev = 0.0, size = 0.0;
	for (std::size_t k = 0; k < r1.v.size(); ++k) {
		dev = std::max(dev, std::abs(r2.v[k] - 2.0 * r1.v[k]));
		size = std::max(size, std::abs(r1.v[k]));
	}
	EXPECT_GT(size, 1e-5);
	EXPECT_LT(dev, 1e-3 * size);
}

TEST(Barriers, ConstantDifferential) {
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 33));
	BarrierPair bp = barriers(b, g);
	EXPECT_TRUE(bp.verified);
	EXPECT_EQ(bp.kind, "disk");
	EXPECT_GT(bp.lambda, 1.0);
	for (std::size_t k = 0; k < g->size(); ++k) {
		EXPECT_NEAR(bp.w_minus.v[k], std::log(2.0), 1e-14);
		EXPECT_LE(bp.w_minus.v[k], bp.w_plus.v[k]);
	}
}

TEST(Barriers, LinearDifferentialFinite) {
	auto b = CubicDifferential::monomial(2.0, 1);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 3.0, 65));
	BarrierPair bp = barriers(b, g, nullptr);
	EXPECT_TRUE(bp.verified);
	for (int j = 1; j < g->ny - 1; ++j)
		for (int i = 1; i < g->nx - 1; ++i) {
			EXPECT_TRUE(std::isfinite(bp.w_minus(i, j)));
			EXPECT_TRUE(std::isfinite(bp.w_plus(i, j)));
			EXPECT_LE(bp.w_minus(i, j), bp.w_plus(i, j));
		}
}

TEST(Barriers, PuncturedComparisonKinds) {
	EXPECT_EQ(hyperbolic_comparison(CubicDifferential::inverse_power(1.0, 3)).kind, "annulus");
	EXPECT_EQ(hyperbolic_comparison(CubicDifferential::inverse_power(1.0, 1)).kind, "punctured-disk");
	EXPECT_EQ(hyperbolic_comparison(CubicDifferential::inverse_power(1.0, 5)).kind, "punctured-infinity");
}

TEST(Solve, ConstantDifferentialIsFlat) {
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 33));
	SolveResult r = solve(b, g, flat_boundary(b, g));
	EXPECT_TRUE(r.diag.converged);
	for (double x : r.w.v) EXPECT_NEAR(x, std::log(2.0), 1e-10);
	for (double x : r.u.v) EXPECT_NEAR(x, 0.0, 1e-10);
}

TEST(Solve, PuncturedPlaneSecondOrder) {
	auto b = CubicDifferential::inverse_power(cplx(1.0, 1.0), 3);
	SolverConfig cfg;
	cfg.tolerance = 1e-12;
	cfg.balanced = false;
	std::vector<double> e;
	for (int n : {65, 129, 257}) {
		auto g = annulus_grid(n);
		auto exact = ScalarField::from_function(g, FieldRole::w, [&](cplx z) { return std::abs(z) < 1e-12 ? 0.0 : flat_w(b, z); });
		SolveResult r = solve(b, g, exact, cfg);
		ASSERT_LT(r.diag.residual, 1e-10);
		double m = 0.0;
		for (std::size_t k = 0; k < g->size(); ++k)
			if (!g->fixed(int(k % std::size_t(n)), int(k / std::size_t(n)))) {
				m = std::max(m, std::abs(r.w.v[k] - exact.v[k]));
			}
		e.push_back(m);
	}
	for (int k = 0; k < 2; ++k) {
		double order = std::log2(e[std::size_t(k)] / e[std::size_t(k) + 1]);
		EXPECT_GT(order, 1.8);
		EXPECT_LT(order, 2.2);
	}
}

TEST(Solve, LinearDifferentialNonnegative) {
	const SolveResult& r = linear_solve();
	EXPECT_TRUE(r.diag.converged);
	EXPECT_LT(r.diag.residual, 1e-8);
	for (double x : r.u.v) {
		if (std::isfinite(x)) {
			EXPECT_GE(x, -1e-12);
		}
	}
	EXPECT_TRUE(std::isnan(r.u(64, 64)));
	EXPECT_GT(r.u(72, 64), 0.0);
}

TEST(Solve, LinearDifferentialBetweenBarriers) {
	const SolveResult& r = linear_solve();
	for (std::size_t k = 0; k < r.w.v.size(); ++k) {
		EXPECT_GE(r.w.v[k], r.barriers.w_minus.v[k] - 1e-2 - 1e-12);
		EXPECT_LE(r.w.v[k], r.barriers.w_plus.v[k] + 1e-12);
	}
}

TEST(Solve, ResidualHistoryStrictlyDecreasing) {
	const auto& h = linear_solve().diag.history;
	ASSERT_GE(h.size(), 2u);
	for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k], h[k - 1]);
}

TEST(Solve, SelfConvergenceRatio) {
	auto b = CubicDifferential::monomial(2.0, 1);
	std::vector<SolveResult> rs;
	for (int n : {65, 129, 257}) {
		auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, n));
		SolverConfig cfg;
		cfg.tolerance = 1e-12;
		rs.push_back(solve(b, g, flat_boundary(b, g), cfg));
	}
	auto diff = [&](const SolveResult& c, const SolveResult& f) {
		double m = 0.0;
		for (int j = 0; j < c.u.grid->ny; ++j)
			for (int i = 0; i < c.u.grid->nx; ++i) {
				double a = c.u(i, j), z = f.u(2 * i, 2 * j);
				if (std::isfinite(a) && std::isfinite(z)) m = std::max(m, std::abs(a - z));
			}
		return m;
	};
	double ratio = diff(rs[0], rs[1]) / diff(rs[1], rs[2]);
	EXPECT_GE(ratio, 3.5);
	EXPECT_LE(ratio, 4.5);
}

TEST(Solve, UnmaskedPoleRefused) {
	auto b = CubicDifferential::inverse_power(1.0, 3);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 33));
	ScalarField bd(g, FieldRole::w, 0.0);
	try {
		solve(b, g, bd);
		FAIL();
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::unmasked_pole);
	}
}

TEST(Solve, InvalidSettings) {
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 1.0, 9));
	SolverConfig cfg;
	cfg.damping = 0.0;
	EXPECT_THROW(solve(b, g, flat_boundary(b, g), cfg), error);
	cfg = {};
	cfg.tolerance = -1.0;
	EXPECT_THROW(solve(b, g, flat_boundary(b, g), cfg), error);
}

TEST(UField, Examples) {
	auto b = CubicDifferential::monomial(2.0, 1);
	auto g = std::make_shared<Grid2D>(Grid2D::square(cplx(3.0, 0.0), 1.0, 9));
	auto w0 = ScalarField::from_function(g, FieldRole::w, [&](cplx z) { return flat_w(b, z); });
	for (double x : u_field(w0, b).v) EXPECT_NEAR(x, 0.0, 1e-15);
	ScalarField w1 = w0;
	for (double& x : w1.v) x += 0.3;
	for (double x : u_field(w1, b).v) EXPECT_NEAR(x, 0.3, 1e-14);
	auto c = CubicDifferential::inverse_power(cplx(1.0, 1.0), 3);
	auto ga = annulus_grid(33);
	auto wc = ScalarField::from_function(ga, FieldRole::w, [&](cplx z) { return std::abs(z) < 1e-12 ? 0.0 : flat_w(c, z); });
	ScalarField uc = u_field(wc, c);
	EXPECT_TRUE(std::isnan(uc(16, 16)));
	for (std::size_t k = 0; k < uc.v.size(); ++k) {
		if (std::abs(ga->node(k)) > 1e-12) {
			EXPECT_NEAR(uc.v[k], 0.0, 1e-14);
		}
	}
}

TEST(Bessel, MatchesStandardLibrary) {
	for (double x : {0.0, 0.1, 1.0, 3.7, 10.0, 20.0, 35.0})
		EXPECT_NEAR(bessel_i0(x) / std::cyl_bessel_i(0.0, x), 1.0, 1e-12) << x;
}

TEST(Bessel, Asymptotics) { EXPECT_NEAR(bessel_i0_scaled(50.0) * std::sqrt(2.0 * pi * 50.0), 1.0, 0.02); }

TEST(Bessel, SupersolutionValues) {
	for (double r : {0.5, 2.0, 6.0}) {
		EXPECT_NEAR(bessel_supersolution(r, cplx(r, 0.0)), 0.5, 1e-14);
		EXPECT_NEAR(bessel_supersolution(r, std::polar(r, 1.3)), 0.5, 1e-14);
		double h = 1.0 / std::cyl_bessel_i(0.0, 2.0 * sqrt3 * r);
		EXPECT_NEAR(bessel_supersolution(r, 0.0), h - 0.5 * h * h, 1e-12 * h);
	}
	EXPECT_THROW(bessel_supersolution(1.0, 1.5), error);
}

TEST(Bessel, BoundsSolvedDisk) {
	const double r = 3.0;
	auto b = CubicDifferential::monomial(2.0, 0);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, r, 121));
	g->mask_outside(0.0, r);
	SolveResult s = solve(b, g, ScalarField(g, FieldRole::w, 0.5 + std::log(2.0)));
	ASSERT_TRUE(s.diag.converged);
	for (std::size_t k = 0; k < g->size(); ++k) {
		cplx z = g->node(k);
		if (std::abs(z) <= r) {
			EXPECT_LE(s.u.v[k], bessel_supersolution(r, z) + 1e-8);
		}
	}
}

TEST(Decay, ExactModelRecovered) {
	std::vector<double> xs, ys;
	for (double x = 2.0; x <= 6.0; x += 0.5) {
		xs.push_back(x);
		ys.push_back(0.7 * std::pow(x, -0.5) * std::exp(-2.0 * sqrt3 * x));
	}
	DecayFit f = fit_decay(xs, ys, 0.5);
	EXPECT_NEAR(f.rate, 2.0 * sqrt3, 1e-10);
	EXPECT_NEAR(f.amplitude, 0.7, 1e-9);
	EXPECT_NEAR(f.r2, 1.0, 1e-12);
}

TEST(Decay, FieldFitRecoversRate) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 7.0, 281));
	auto u = ScalarField::from_function(g, FieldRole::u, [](cplx z) {
		double r = std::abs(z);
		return std::sqrt(r) * std::exp(-2.0 * sqrt3 * r);
	});
	DecayFit f = decay_fit(u, 0.0, {3.0, 4.0, 5.0, 6.0}, -0.5);
	EXPECT_NEAR(f.rate, 3.4641, 1e-3);
}

TEST(Decay, TooFewSamples) {
	try {
		fit_decay({1.0, 2.0, 3.0}, {1.0, 0.0, 1e-20});
		FAIL();
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::insufficient_samples);
	}
}

TEST(DiskCenter, ZeroField) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 1.0, 41));
	EXPECT_TRUE(disk_center_check(ScalarField(g, FieldRole::u, 0.0), 2.0, 1.0));
}

TEST(DiskCenter, ExtremalProfile) {
	const double lam = 2.0, r = 1.0, mu = (lam * lam * lam - 1.0) / (4.0 * lam);
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 1.0, 41));
	auto U = ScalarField::from_function(g, FieldRole::u, [&](cplx z) { return std::log(lam + mu * std::norm(z)); });
	EXPECT_NEAR(loglambda_bound(lam, r), std::log(lam + mu), 1e-15);
	EXPECT_TRUE(disk_center_check(U, lam, r));
	auto V = ScalarField::from_function(g, FieldRole::u, [&](cplx) { return std::log(lam) + 0.1; });
	EXPECT_FALSE(disk_center_check(V, lam, r));
}

TEST(DiskCenter, HypothesisViolations) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 1.0, 41));
	try {
		disk_center_check(ScalarField(g, FieldRole::u, 5.0), 2.0, 1.0);
		FAIL();
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::precondition);
	}
	EXPECT_THROW(disk_center_check(ScalarField(g, FieldRole::u, -0.1), 2.0, 1.0), error);
	EXPECT_THROW(disk_center_check(ScalarField(g, FieldRole::u, 0.0), 1.0, 1.0), error);
}

TEST(Gradient, ConstantField) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 81));
	GradientCheck c = gradient_bound_check(ScalarField(g, FieldRole::u, 0.4), 0.0, 1.0);
	EXPECT_TRUE(c.ok);
	EXPECT_NEAR(c.lhs, 0.0, 1e-14);
}

TEST(Gradient, HarmonicField) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, 2.0, 81));
	auto u = ScalarField::from_function(g, FieldRole::u, [](cplx z) { return z.real(); });
	GradientCheck c = gradient_bound_check(u, cplx(0.2, -0.1), 1.0);
	EXPECT_NEAR(c.lhs, 0.5, 1e-10);
	EXPECT_TRUE(c.ok);
}

TEST(Gradient, SolvedField) {
	const SolveResult& r = linear_solve();
	for (cplx z0 : {cplx(2.0, 2.0), cplx(1.5, 0.5), cplx(-1.0, -2.0)}) {
		GradientCheck c = gradient_bound_check(r.u, z0, 1.0);
		EXPECT_TRUE(c.ok) << z0 << " " << c.lhs << " " << c.rhs;
	}
	EXPECT_THROW(gradient_bound_check(r.u, cplx(3.5, 0.0), 1.0), error);
}
