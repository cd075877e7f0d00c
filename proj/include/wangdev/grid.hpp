#pragma once

#include "common.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace wangdev {

///
/// \brief Uniform node grid; fixed nodes are the outer frame plus masked nodes
///
struct Grid2D {
	cplx origin = 0.0;
	double hx = 1.0, hy = 1.0;
	int nx = 0, ny = 0;
	std::vector<std::uint8_t> mask;

	static Grid2D rect(cplx lo, cplx hi, int nx, int ny) {
		if (nx < 3 || ny < 3) fail(errc::invalid_argument, "grid needs at least 3 nodes per direction");
		if (!(hi.real() > lo.real() && hi.imag() > lo.imag())) fail(errc::invalid_argument, "grid box is empty");
		Grid2D g;
		g.origin = lo;
		g.nx = nx;
		g.ny = ny;
		g.hx = (hi.real() - lo.real()) / (nx - 1);
		g.hy = (hi.imag() - lo.imag()) / (ny - 1);
		g.mask.assign(std::size_t(nx) * std::size_t(ny), 0);
		return g;
	}
	static Grid2D square(cplx center, double half_width, int n) {
		return rect(center - cplx(half_width, half_width), center + cplx(half_width, half_width), n, n);
	}

	std::size_t size() const { return std::size_t(nx) * std::size_t(ny); }
	std::size_t idx(int i, int j) const { return std::size_t(j) * std::size_t(nx) + std::size_t(i); }
	cplx node(int i, int j) const { return origin + cplx(i * hx, j * hy); }
	cplx node(std::size_t k) const { return node(int(k % std::size_t(nx)), int(k / std::size_t(nx))); }
	bool masked(int i, int j) const { return mask[idx(i, j)] != 0; }
	bool frame(int i, int j) const { return i == 0 || j == 0 || i == nx - 1 || j == ny - 1; }
	bool fixed(int i, int j) const { return frame(i, j) || masked(i, j); }
	double h() const { return std::max(hx, hy); }
	cplx hi() const { return node(nx - 1, ny - 1); }

	bool inside_box(cplx z) const {
		return z.real() >= origin.real() && z.imag() >= origin.imag() && z.real() <= hi().real() &&
			   z.imag() <= hi().imag();
	}

	/// Mask nodes strictly inside the disk |z - c| < r.
	void mask_disk(cplx c, double r) {
		for (int j = 0; j < ny; ++j)
			for (int i = 0; i < nx; ++i)
				if (std::abs(node(i, j) - c) < r) mask[idx(i, j)] = 1;
	}
	/// Mask nodes with |z - c| >= r.
	void mask_outside(cplx c, double r) {
		for (int j = 0; j < ny; ++j)
			for (int i = 0; i < nx; ++i)
				if (std::abs(node(i, j) - c) >= r) mask[idx(i, j)] = 1;
	}
};

enum class FieldRole { w, u, support, other };

inline const char* role_name(FieldRole r) {
	switch (r) {
	case FieldRole::w: return "w";
	case FieldRole::u: return "u";
	case FieldRole::support: return "support";
	case FieldRole::other: return "other";
	}
	return "other";
}

struct ScalarField {
	std::shared_ptr<const Grid2D> grid;
	std::vector<double> v;
	FieldRole role = FieldRole::other;

	ScalarField() = default;
	ScalarField(std::shared_ptr<const Grid2D> g, FieldRole r, double fill = 0.0)
		: grid(std::move(g)), v(grid->size(), fill), role(r) {}

	double& operator()(int i, int j) { return v[grid->idx(i, j)]; }
	double operator()(int i, int j) const { return v[grid->idx(i, j)]; }

	template <typename F>
	static ScalarField from_function(std::shared_ptr<const Grid2D> g, FieldRole r, F&& f) {
		ScalarField s(g, r);
		for (int j = 0; j < g->ny; ++j)
			for (int i = 0; i < g->nx; ++i) s(i, j) = f(g->node(i, j));
		return s;
	}
};

///
/// \brief C^1 bicubic Hermite interpolant with finite-difference node derivatives
///
class BicubicInterpolant {
  public:
	struct Sample {
		double f, fx, fy;
	};

	BicubicInterpolant() = default;
	explicit BicubicInterpolant(const ScalarField& s) : m_grid(s.grid), m_f(s.v) {
		const Grid2D& g = *m_grid;
		m_fx.assign(g.size(), 0.0);
		m_fy.assign(g.size(), 0.0);
		m_fxy.assign(g.size(), 0.0);
		auto dx = [&](const std::vector<double>& f, std::vector<double>& out) {
			for (int j = 0; j < g.ny; ++j)
				for (int i = 0; i < g.nx; ++i) out[g.idx(i, j)] = deriv(f, i, j, g.nx, g.hx, 1, 0);
		};
		auto dy = [&](const std::vector<double>& f, std::vector<double>& out) {
			for (int j = 0; j < g.ny; ++j)
				for (int i = 0; i < g.nx; ++i) out[g.idx(i, j)] = deriv(f, j, i, g.ny, g.hy, 0, 1);
		};
		dx(m_f, m_fx);
		dy(m_f, m_fy);
		dy(m_fx, m_fxy);
	}

	const Grid2D& grid() const { return *m_grid; }

	/// True when the cell holding z has no masked corner.
	bool cell_ok(cplx z) const {
		int i, j;
		double s, t;
		if (!locate(z, i, j, s, t)) return false;
		const Grid2D& g = *m_grid;
		return !g.masked(i, j) && !g.masked(i + 1, j) && !g.masked(i, j + 1) && !g.masked(i + 1, j + 1);
	}

	Sample eval(cplx z) const {
		int i, j;
		double s, t;
		if (!locate(z, i, j, s, t)) fail(errc::outside_domain, "interpolation point outside the grid");
		const Grid2D& g = *m_grid;
		double hs[4], ds[4], ht[4], dt[4];
		hermite(s, hs, ds);
		hermite(t, ht, dt);
		Sample out{0.0, 0.0, 0.0};
		const int ci[4] = {i, i + 1, i, i + 1};
		const int cj[4] = {j, j, j + 1, j + 1};
		const int bs[4] = {0, 1, 0, 1};
		const int bt[4] = {0, 0, 1, 1};
		for (int c = 0; c < 4; ++c) {
			std::size_t k = g.idx(ci[c], cj[c]);
			double f = m_f[k], fx = m_fx[k] * g.hx, fy = m_fy[k] * g.hy, fxy = m_fxy[k] * g.hx * g.hy;
			int a = bs[c], b = bt[c];
			double Hs = hs[2 * a], Hsd = hs[2 * a + 1], Ht = ht[2 * b], Htd = ht[2 * b + 1];
			double dHs = ds[2 * a], dHsd = ds[2 * a + 1], dHt = dt[2 * b], dHtd = dt[2 * b + 1];
			out.f += f * Hs * Ht + fx * Hsd * Ht + fy * Hs * Htd + fxy * Hsd * Htd;
			out.fx += f * dHs * Ht + fx * dHsd * Ht + fy * dHs * Htd + fxy * dHsd * Htd;
			out.fy += f * Hs * dHt + fx * Hsd * dHt + fy * Hs * dHtd + fxy * Hsd * dHtd;
		}
		out.fx /= g.hx;
		out.fy /= g.hy;
		return out;
	}

	/// Node derivative estimates used by the interpolant.
	double node_fx(int i, int j) const { return m_fx[m_grid->idx(i, j)]; }
	double node_fy(int i, int j) const { return m_fy[m_grid->idx(i, j)]; }

  private:
	bool locate(cplx z, int& i, int& j, double& s, double& t) const {
		const Grid2D& g = *m_grid;
		double x = (z.real() - g.origin.real()) / g.hx;
		double y = (z.imag() - g.origin.imag()) / g.hy;
		if (!(x >= 0.0 && y >= 0.0 && x <= g.nx - 1 && y <= g.ny - 1)) return false;
		i = std::min(int(x), g.nx - 2);
		j = std::min(int(y), g.ny - 2);
		s = x - i;
		t = y - j;
		return true;
	}

	/// Values H00, H10 (slot 0, 1) for the left node and H01, H11 (slot 2, 3) for the right node.
	static void hermite(double s, double* H, double* dH) {
		double s2 = s * s, s3 = s2 * s;
		H[0] = 2 * s3 - 3 * s2 + 1;
		H[1] = s3 - 2 * s2 + s;
		H[2] = -2 * s3 + 3 * s2;
		H[3] = s3 - s2;
		dH[0] = 6 * s2 - 6 * s;
		dH[1] = 3 * s2 - 4 * s + 1;
		dH[2] = -6 * s2 + 6 * s;
		dH[3] = 3 * s2 - 2 * s;
	}

	/// Derivative along one axis; p is the position along it, q the other index.
	double deriv(const std::vector<double>& f, int p, int q, int n, double h, int ax, int ay) const {
		const Grid2D& g = *m_grid;
		auto at = [&](int pp) { return ax ? f[g.idx(pp, q)] : f[g.idx(q, pp)]; };
		(void)ay;
		if (p >= 2 && p <= n - 3) return (at(p - 2) - 8 * at(p - 1) + 8 * at(p + 1) - at(p + 2)) / (12 * h);
		if (p >= 1 && p <= n - 2) return (at(p + 1) - at(p - 1)) / (2 * h);
		if (p == 0) return (-3 * at(0) + 4 * at(1) - at(2)) / (2 * h);
		return (3 * at(n - 1) - 4 * at(n - 2) + at(n - 3)) / (2 * h);
	}

	std::shared_ptr<const Grid2D> m_grid;
	std::vector<double> m_f, m_fx, m_fy, m_fxy;
};

} // namespace wangdev
