#pragma once

#include "common.hpp"

#include <Eigen/Dense>

namespace wangdev {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using CMat3 = Eigen::Matrix3cd;

///
/// \brief Real 3x3 matrix stored as e^{logScale} * entries with unit Frobenius norm entries
///
struct SL3 {
	Mat3 m = Mat3::Identity();
	double logScale = 0.0;

	static SL3 identity() {
		SL3 s;
		s.renormalize();
		return s;
	}
	static SL3 from_matrix(const Mat3& a, double log_scale = 0.0) {
		SL3 s{a, log_scale};
		s.renormalize();
		return s;
	}
	/// diag(e^{d_i}) without overflow
	static SL3 diagonal_log(const Vec3& d) {
		double top = d.maxCoeff();
		SL3 s;
		s.m = (d.array() - top).exp().matrix().asDiagonal();
		s.logScale = top;
		s.renormalize();
		return s;
	}

	void renormalize() {
		double f = m.norm();
		if (!(f > 0.0) || !std::isfinite(f)) fail(errc::internal, "transport matrix degenerated");
		m /= f;
		logScale += std::log(f);
	}

	/// Represented matrix; overflows for large logScale.
	Mat3 matrix() const { return m * std::exp(logScale); }

	SL3 operator*(const SL3& o) const {
		SL3 r{m * o.m, logScale + o.logScale};
		r.renormalize();
		return r;
	}

	SL3 inverse() const {
		SL3 r{m.inverse(), -logScale};
		r.renormalize();
		return r;
	}

	/// |log det(represented matrix)|
	double unimodularity_error() const {
		double d = m.determinant();
		if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
		return std::abs(std::log(d) + 3.0 * logScale);
	}

	Vec3 apply(const Vec3& v) const { return m * v; }
};

/// Frobenius distance between the matrices scaled to a common logScale, relative to the larger norm.
inline double relative_distance(const SL3& a, const SL3& b) {
	double s = std::max(a.logScale, b.logScale);
	Mat3 x = a.m * std::exp(a.logScale - s), y = b.m * std::exp(b.logScale - s);
	return (x - y).norm() / std::max(x.norm(), y.norm());
}

/// Largest entrywise relative error |a_ij - b_ij| / |b_ij| over entries where b is nonzero.
inline double entrywise_relative_error(const SL3& a, const SL3& b) {
	double e = 0.0;
	for (int i = 0; i < 3; ++i)
		for (int j = 0; j < 3; ++j) {
			double bv = b.m(i, j), av = a.m(i, j);
			if (bv == 0.0) {
				e = std::max(e, std::abs(av) * std::exp(a.logScale - b.logScale));
				continue;
			}
			double lr = std::log(std::abs(av / bv)) + a.logScale - b.logScale;
			if (!(av / bv > 0.0)) return std::numeric_limits<double>::infinity();
			e = std::max(e, std::abs(std::expm1(lr)));
		}
	return e;
}

} // namespace wangdev
