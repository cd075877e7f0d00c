#include <wangdev/cubicdiff.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace wangdev;

TEST(Evaluate, ConstantDifferential) { EXPECT_EQ(CubicDifferential::monomial(2.0, 0).evaluate(cplx(5.0, 1.0)), cplx(2.0)); }

TEST(Evaluate, InversePower) { EXPECT_NEAR(std::abs(CubicDifferential::inverse_power(2.0, 3).evaluate(2.0) - 0.25), 0.0, 1e-15); }

TEST(Evaluate, CubedLaurentPolynomial) {
	// (z^-2 + A z^-1)^3 = (1 + A z)^3 / z^6
	const double A = 1.0;
	CubicDifferential b({1.0, 3.0 * A, 3.0 * A * A, A * A * A}, {{0.0, 6}}, Domain::punctured_plane);
	EXPECT_NEAR(std::abs(b.evaluate(1.0) - 8.0), 0.0, 1e-14);
}

TEST(Evaluate, PoleRejected) {
	auto b = CubicDifferential::inverse_power(1.0, 3);
	try {
		b.evaluate(0.0);
		FAIL();
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::pole_evaluation);
	}
}

TEST(Evaluate, BoundedNearPole) {
	CubicDifferential b({1.0, 2.0, cplx(0.0, 1.0)}, {{cplx(1.0, 1.0), 2}, {cplx(-1.0), 1}}, Domain::punctured_plane);
	double prev = 0.0;
	for (double eps : {1e-2, 1e-4, 1e-6}) {
		double v = std::abs(b.evaluate(cplx(1.0, 1.0) + eps)) * eps * eps;
		EXPECT_TRUE(std::isfinite(v));
		if (prev > 0.0) {
			EXPECT_NEAR(v / prev, 1.0, 50.0 * eps);
		}
		prev = v;
	}
}

TEST(Construction, RejectsBadPoles) {
	EXPECT_THROW(CubicDifferential({1.0}, {{0.0, 0}}, Domain::punctured_plane), error);
	EXPECT_THROW(CubicDifferential({1.0}, {{0.0, 1}, {0.0, 2}}, Domain::punctured_plane), error);
	EXPECT_THROW(CubicDifferential({0.0}, {}, Domain::plane), error);
}

TEST(ClassifyPole, ThirdOrderResidue) {
	const cplx R(0.7, -1.3);
	PoleAnalysis pa = classify_pole(CubicDifferential::inverse_power(R, 3), cplx(0.0));
	EXPECT_EQ(pa.order, 3);
	ASSERT_TRUE(pa.residue);
	EXPECT_NEAR(std::abs(*pa.residue - R), 0.0, 1e-15);
	EXPECT_FALSE(pa.n);
}

TEST(ClassifyPole, ConstantAtInfinity) {
	PoleAnalysis pa = classify_pole(CubicDifferential::monomial(2.0, 0), std::nullopt);
	EXPECT_EQ(pa.order, 6);
	ASSERT_TRUE(pa.n);
	EXPECT_EQ(*pa.n, 3);
}

TEST(ClassifyPole, LinearAtInfinity) {
	PoleAnalysis pa = classify_pole(CubicDifferential::monomial(2.0, 1), std::nullopt);
	EXPECT_EQ(pa.order, 7);
	EXPECT_EQ(*pa.n, 4);
}

TEST(ClassifyPole, OrderArithmeticAtInfinity) {
	for (int d = 0; d <= 5; ++d) EXPECT_EQ(classify_pole(CubicDifferential::monomial(1.0, d), std::nullopt).order, d + 6);
}

TEST(ClassifyPole, InfinityOfInversePowerHasNegatedResidue) {
	// w = 1/z: R z^-3 dz^3 = -R w^-3 dw^3
	PoleAnalysis pa = classify_pole(CubicDifferential::inverse_power(2.0, 3), std::nullopt);
	EXPECT_EQ(pa.order, 3);
	EXPECT_NEAR(std::abs(*pa.residue + 2.0), 0.0, 1e-15);
}

TEST(ClassifyPole, RemovableAndCancelled) {
	// z^3 / z^3 is regular at 0
	CubicDifferential b({0.0, 0.0, 0.0, 1.0}, {{0.0, 3}}, Domain::punctured_plane);
	EXPECT_EQ(classify_pole(b, cplx(0.0)).order, 0);
	// z / z^4 has order 3 with residue 1
	CubicDifferential c({0.0, 1.0}, {{0.0, 4}}, Domain::punctured_plane);
	PoleAnalysis pa = classify_pole(c, cplx(0.0));
	EXPECT_EQ(pa.order, 3);
	EXPECT_NEAR(std::abs(*pa.residue - 1.0), 0.0, 1e-14);
}

TEST(ClassifyPole, ResidueWithOtherPoles) {
	// (1 + z) / (z^3 (z - 2)): residue at 0 is 1 / (0 - 2) = -1/2
	CubicDifferential b({1.0, 1.0}, {{0.0, 3}, {2.0, 1}}, Domain::punctured_plane);
	EXPECT_NEAR(std::abs(*classify_pole(b, cplx(0.0)).residue + 0.5), 0.0, 1e-14);
}

TEST(ClassifyPole, ResidueInvariantUnderDilation) {
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> U(-2.0, 2.0);
	CubicDifferential b({cplx(1.0, 0.5), cplx(-0.3, 0.2), cplx(0.1, 0.0)}, {{0.0, 3}, {cplx(1.5, -0.5), 1}},
						Domain::punctured_plane);
	cplx R = *classify_pole(b, cplx(0.0)).residue;
	for (int k = 0; k < 20; ++k) {
		cplx c(U(rng), U(rng));
		if (std::abs(c) < 0.1) continue;
		PoleAnalysis pa = classify_pole(b.dilate(c), cplx(0.0));
		ASSERT_EQ(pa.order, 3);
		EXPECT_NEAR(std::abs(*pa.residue - R), 0.0, 1e-12 * std::abs(R));
	}
}

TEST(Sectors, NIsOne) {
	SectorDecomposition s = special_sectors(1);
	ASSERT_EQ(s.edge_rays.size(), 1u);
	EXPECT_NEAR(s.edge_rays[0], 0.0, 1e-15);
	auto u = s.unstable_rays();
	ASSERT_EQ(u.size(), 2u);
	EXPECT_NEAR(u[0], pi / 2, 1e-14);
	EXPECT_NEAR(u[1], 3 * pi / 2, 1e-14);
}

TEST(Sectors, NIsTwo) {
	SectorDecomposition s = special_sectors(2);
	std::vector<double> c = s.edge_rays;
	std::sort(c.begin(), c.end());
	EXPECT_NEAR(c[0], 0.0, 1e-15);
	EXPECT_NEAR(c[1], pi, 1e-14);
	auto u = s.unstable_rays();
	ASSERT_EQ(u.size(), 4u);
	for (int k = 0; k < 4; ++k) EXPECT_NEAR(u[std::size_t(k)], (2 * k + 1) * pi / 4, 1e-14);
}

TEST(Sectors, NIsThreeOddMultiplesOfPiOverSix) {
	auto u = special_sectors(3).unstable_rays();
	ASSERT_EQ(u.size(), 6u);
	for (int k = 0; k < 6; ++k) EXPECT_NEAR(u[std::size_t(k)], (2 * k + 1) * pi / 6, 1e-14);
}

TEST(Sectors, ZeroRejected) { EXPECT_THROW(special_sectors(0), error); }

TEST(Sectors, UnstableRaysEvenlySpaced) {
	for (int n = 1; n <= 8; ++n) {
		auto u = special_sectors(n).unstable_rays();
		ASSERT_EQ(int(u.size()), 2 * n);
		for (std::size_t k = 0; k < u.size(); ++k) {
			double next = k + 1 < u.size() ? u[k + 1] : u[0] + 2 * pi;
			EXPECT_NEAR(next - u[k], pi / n, 1e-12);
		}
	}
}

TEST(Sectors, PartitionOfDirections) {
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> U(0.0, 2 * pi);
	for (int n = 1; n <= 8; ++n) {
		SectorDecomposition s = special_sectors(n);
		for (int t = 0; t < 10000; ++t) {
			double th = U(rng);
			int hits = 0;
			for (const auto& iv : s.stable) hits += iv.contains(th);
			for (const auto& iv : s.stable_edge) hits += iv.contains(th);
			for (double r : s.unstable_rays()) hits += std::abs(wrap_2pi(th - r + pi) - pi) < 1e-13;
			EXPECT_EQ(hits, 1);
			// locally constant label off the ray set
			SectorLabel a = sector_label(th, n), b = sector_label(th + 1e-9, n);
			if (a.kind == SectorLabel::Kind::stable || a.kind == SectorLabel::Kind::stable_edge) {
				EXPECT_EQ(a, b);
			}
		}
	}
}

TEST(WindingLabel, ZeroIsEdgeRay) {
	SectorLabel l = winding_sector_label(0.0, 3);
	EXPECT_EQ(l.kind, SectorLabel::Kind::edge_ray);
	EXPECT_EQ(l.k, 0);
	EXPECT_EQ(l.str(), "C_{0,1}");
}

TEST(WindingLabel, PiOverSixIsUnstableMinus) {
	SectorLabel l = winding_sector_label(pi / 6, 3);
	EXPECT_EQ(l.kind, SectorLabel::Kind::unstable_minus);
	EXPECT_EQ(l.k, 1);
}

TEST(WindingLabel, FullTurnShiftsIndexByN) {
	std::mt19937_64 rng(5);
	std::uniform_real_distribution<double> U(-10.0, 10.0);
	for (int n = 1; n <= 6; ++n)
		for (int t = 0; t < 200; ++t) {
			double th = U(rng);
			SectorLabel a = winding_sector_label(th, n), b = winding_sector_label(th - 2 * pi, n);
			EXPECT_EQ(a.kind, b.kind);
			EXPECT_EQ(b.k, a.k - n);
		}
}

TEST(Chart, OrderFourClosedForm) {
	auto b = CubicDifferential({1.0}, {{0.0, 4}}, Domain::punctured_plane);
	PoleAnalysis pa = classify_pole(b, cplx(0.0));
	HalfPlaneChart ch = half_plane_chart(pa, 1, 2.0);
	// n = 1: prefactor (2^(1/3)/3)^-3 = 27/2, phase e^{3 pi i} = -1
	for (cplx z : {cplx(0.0), cplx(1.0, 2.0), cplx(3.0, -1.0)})
		EXPECT_NEAR(std::abs(ch.map(z) - (-13.5) * std::pow(z + 2.0, -3.0)), 0.0, 1e-12 * std::abs(ch.map(z)));
}

TEST(Chart, OrderFiveModulusAtZero) {
	auto b = CubicDifferential({1.0}, {{0.0, 5}}, Domain::punctured_plane);
	const double B = 3.0;
	HalfPlaneChart ch = half_plane_chart(classify_pole(b, cplx(0.0)), 1, B);
	double want = std::pow(std::cbrt(2.0) * 2.0 / 3.0, -1.5) * std::pow(B, -1.5);
	EXPECT_NEAR(std::abs(ch.map(0.0)), want, 1e-14 * want);
}

TEST(Chart, OrderFiveArgumentRange) {
	auto b = CubicDifferential({1.0}, {{0.0, 5}}, Domain::punctured_plane);
	HalfPlaneChart ch = half_plane_chart(classify_pole(b, cplx(0.0)), 1, 1.0);
	const int n = 2, k = 1;
	double centre = (2 * k + 1) * pi / n, lo = 1e9, hi = -1e9;
	for (double y = -1e4; y <= 1e4; y += 0.5) {
		double a = std::arg(ch.map(cplx(0.0, y)) * std::polar(1.0, -centre));
		lo = std::min(lo, a);
		hi = std::max(hi, a);
	}
	EXPECT_LT(hi, 1.5 * pi / n);
	EXPECT_GT(lo, -1.5 * pi / n);
	EXPECT_GT(hi - lo, 0.99 * 3 * pi / n);
}

TEST(Chart, DivisibleByThreeUnsupported) {
	auto b = CubicDifferential({1.0}, {{0.0, 6}}, Domain::punctured_plane);
	try {
		half_plane_chart(classify_pole(b, cplx(0.0)), 1, 1.0);
		FAIL();
	} catch (const error& e) {
		EXPECT_EQ(e.code(), errc::unsupported_order);
	}
}

TEST(Chart, PullbackResidualExamples) {
	auto b4 = CubicDifferential({1.0}, {{0.0, 4}}, Domain::punctured_plane);
	auto c4 = half_plane_chart(classify_pole(b4, cplx(0.0)), 1, 2.0);
	EXPECT_LT(std::abs(chart_pullback_residual(c4, b4, 1.0)), 1e-6);
	EXPECT_LT(std::abs(chart_pullback_residual_exact(c4, b4, 1.0)), 1e-10);
	auto b5 = CubicDifferential({1.0}, {{0.0, 5}}, Domain::punctured_plane);
	auto c5 = half_plane_chart(classify_pole(b5, cplx(0.0)), 1, 2.0);
	EXPECT_LT(std::abs(chart_pullback_residual(c5, b5, cplx(3.0, 2.0))), 1e-6);
}

TEST(Chart, PullbackResidualOverHalfPlane) {
	for (int n : {1, 2, 4, 5}) {
		auto b = CubicDifferential({1.0}, {{0.0, n + 3}}, Domain::punctured_plane);
		for (int k : {0, 1, 2}) {
			auto ch = half_plane_chart(classify_pole(b, cplx(0.0)), k, 2.0);
			for (int i = 0; i < 20; ++i)
				for (int j = 0; j < 20; ++j) {
					cplx z(0.25 * i, -5.0 + 0.5 * j);
					EXPECT_LT(std::abs(chart_pullback_residual(ch, b, z)), 1e-6) << "n=" << n << " z=" << z;
				}
		}
	}
}

TEST(Chart, InjectiveOnBoundaryLine) {
	for (int n : {2, 4, 5}) {
		auto b = CubicDifferential({1.0}, {{0.0, n + 3}}, Domain::punctured_plane);
		auto ch = half_plane_chart(classify_pole(b, cplx(0.0)), 1, 1.0);
		std::vector<cplx> pts;
		for (double y = -50.0; y <= 50.0; y += 0.37)
			for (double x : {0.0, 0.8, 3.1}) pts.push_back(ch.map(cplx(x, y)));
		double dmin = 1e300;
		for (std::size_t a = 0; a < pts.size(); ++a)
			for (std::size_t c = a + 1; c < pts.size(); ++c) dmin = std::min(dmin, std::abs(pts[a] - pts[c]) / std::abs(pts[a]));
		EXPECT_GT(dmin, 1e-6);
	}
}

TEST(NaturalBranch, RoundTripAndPullback) {
	NaturalBranch br{cplx(2.0, 1.0), 2, 0.3};
	auto b = CubicDifferential::polynomial({0.0, 0.0, cplx(2.0, 1.0)});
	for (double r : {0.5, 2.0, 7.0})
		for (double a : {-0.5, 0.3, 1.1}) {
			cplx z = std::polar(r, 0.3 + a);
			cplx zeta = br.zeta_of_z(z);
			EXPECT_NEAR(std::abs(br.z_of_zeta(zeta) - z), 0.0, 1e-12 * r);
			cplx d = br.dz_dzeta(zeta);
			EXPECT_NEAR(std::abs(b.evaluate(z) * d * d * d - 2.0), 0.0, 1e-11);
		}
}
