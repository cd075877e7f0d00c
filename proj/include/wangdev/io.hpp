#pragma once

#include "convexgeom.hpp"
#include "develop.hpp"
#include "grid.hpp"
#include "sl3.hpp"
#include "wangpde.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace wangdev::io {

using json = nlohmann::ordered_json;

inline constexpr int report_version = 1;

/// Shortest round-trip decimal form; nan and inf are spelled out.
inline std::string num(double x) {
	if (std::isnan(x)) return "nan";
	if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", x);
	return buf;
}

/// JSON number, or null when not finite.
inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(cplx z) { return json::array({jnum(z.real()), jnum(z.imag())}); }

inline json to_json(const ProjPoint& p) { return json::array({p.v[0], p.v[1], p.v[2]}); }

inline json to_json(const SL3& M) {
	json rows = json::array();
	for (int i = 0; i < 3; ++i) rows.push_back(json::array({M.m(i, 0), M.m(i, 1), M.m(i, 2)}));
	return {{"entries", rows}, {"log_scale", M.logScale}};
}

inline json to_json(const SolveDiagnostics& d) {
	json h = json::array();
	for (double x : d.history) h.push_back(jnum(x));
	return {{"iterations", d.iterations},
			{"linear_iterations", d.linear_iterations},
			{"residual", jnum(d.residual)},
			{"lambda", d.lambda},
			{"converged", d.converged},
			{"history", h}};
}

inline json to_json(const PolygonReport& r) {
	json verts = json::array(), angles = json::array(), edges = json::array(), warn = json::array();
	for (const auto& v : r.vertices) verts.push_back(to_json(v));
	for (double a : r.vertex_angles) angles.push_back(a);
	for (const auto& e : r.edges) {
		json samples = json::array();
		for (const auto& s : e)
			samples.push_back({{"offset", s.offset}, {"limit", to_json(s.limit)}, {"converged", s.converged}});
		edges.push_back(samples);
	}
	for (const auto& w : r.warnings) warn.push_back(w);
	return {{"n", r.n},
			{"vertex_count", r.vertex_count},
			{"vertices", verts},
			{"vertex_angles", angles},
			{"edges", edges},
			{"min_vertex_separation", r.min_vertex_separation},
			{"max_edge_collinearity", r.max_edge_collinearity},
			{"min_adjacent_turn", r.min_adjacent_turn},
			{"max_incidence_error", r.max_incidence_error},
			{"holonomy", to_json(r.holonomy)},
			{"holonomy_identity_error", r.holonomy_identity_error},
			{"max_holonomy_shift", r.max_holonomy_shift},
			{"convex_position", r.certificate.convex_position},
			{"all_converged", r.all_converged},
			{"end_type", r.end_type},
			{"accumulation_points", "unverified: only the finite probe window is reported"},
			{"warnings", warn}};
}

/// "x,y,value" rows over all grid nodes.
inline std::string field_csv(const ScalarField& f) {
	std::ostringstream os;
	os << "x,y,value\n";
	const Grid2D& g = *f.grid;
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			cplx z = g.node(i, j);
			os << num(z.real()) << ',' << num(z.imag()) << ',' << num(f(i, j)) << '\n';
		}
	return os.str();
}

/// Same layout for a raw per-node vector on a grid.
inline std::string field_csv(const Grid2D& g, const std::vector<double>& v) {
	std::ostringstream os;
	os << "x,y,value\n";
	for (int j = 0; j < g.ny; ++j)
		for (int i = 0; i < g.nx; ++i) {
			cplx z = g.node(i, j);
			os << num(z.real()) << ',' << num(z.imag()) << ',' << num(v[g.idx(i, j)]) << '\n';
		}
	return os.str();
}

///
/// \brief SVG drawing of RP^2 data in the affine chart x1 + x2 + x3 = 1
///
/// The coordinate simplex is drawn as an equilateral triangle.
///
class SvgChart {
  public:
	explicit SvgChart(std::string title, double size = 480.0) : m_title(std::move(title)), m_size(size) {}

	/// Chart coordinates; the representative is taken with positive coordinate sum.
	static std::optional<Eigen::Vector2d> chart(const Vec3& x) {
		double s = x.sum();
		if (std::abs(s) < 1e-12 * x.norm()) return std::nullopt;
		Vec3 b = x / s;
		const Eigen::Vector2d V1(0.0, 0.0), V2(1.0, 0.0), V3(0.5, sqrt3 / 2.0);
		return b[0] * V1 + b[1] * V2 + b[2] * V3;
	}

	void polyline(const std::vector<ProjPoint>& pts, const std::string& color, double width = 1.0) {
		std::vector<Eigen::Vector2d> q;
		for (const auto& p : pts)
			if (auto c = chart(p.v))
				if (q.empty() || (*c - q.back()).norm() > 1e-5) q.push_back(*c);
		if (q.size() >= 2) m_items.push_back({Item::line, q, color, width});
	}
	void point(const ProjPoint& p, const std::string& color, double radius = 3.0) {
		if (auto c = chart(p.v)) m_items.push_back({Item::dot, {*c}, color, radius});
	}
	void simplex() {
		std::vector<ProjPoint> t{ProjPoint::of(1, 0, 0), ProjPoint::of(0, 1, 0), ProjPoint::of(0, 0, 1),
								 ProjPoint::of(1, 0, 0)};
		polyline(t, "#999999", 0.75);
	}

	std::string str() const {
		double x0 = -0.05, x1 = 1.05, y0 = -0.05, y1 = sqrt3 / 2.0 + 0.05;
		for (const auto& it : m_items)
			for (const auto& p : it.pts) {
				x0 = std::min(x0, p.x());
				x1 = std::max(x1, p.x());
				y0 = std::min(y0, p.y());
				y1 = std::max(y1, p.y());
			}
		double span = std::max(x1 - x0, y1 - y0);
		auto fixed2 = [](double x) {
			char buf[32];
			std::snprintf(buf, sizeof buf, "%.2f", x);
			return std::string(buf);
		};
		auto X = [&](double x) { return fixed2((x - x0) / span * m_size); };
		auto Y = [&](double y) { return fixed2((y1 - y) / span * m_size); };
		std::ostringstream os;
		os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(m_size) << "\" height=\"" << num(m_size + 24)
		   << "\">\n";
		os << "<title>" << m_title << "</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
		os << "<g transform=\"translate(0,24)\">\n";
		for (const auto& it : m_items) {
			if (it.kind == Item::line) {
				os << "<polyline fill=\"none\" stroke=\"" << it.color << "\" stroke-width=\"" << num(it.size)
				   << "\" points=\"";
				for (std::size_t k = 0; k < it.pts.size(); ++k)
					os << (k ? " " : "") << X(it.pts[k].x()) << ',' << Y(it.pts[k].y());
				os << "\"/>\n";
			} else {
				os << "<circle cx=\"" << X(it.pts[0].x()) << "\" cy=\"" << Y(it.pts[0].y()) << "\" r=\"" << num(it.size)
				   << "\" fill=\"" << it.color << "\"/>\n";
			}
		}
		os << "</g>\n<text x=\"8\" y=\"16\" font-family=\"sans-serif\" font-size=\"13\">" << m_title << "</text>\n</svg>\n";
		return os.str();
	}

  private:
	struct Item {
		enum Kind { line, dot } kind;
		std::vector<Eigen::Vector2d> pts;
		std::string color;
		double size;
	};
	std::string m_title;
	double m_size;
	std::vector<Item> m_items;
};

/// Color wheel entry for curve k of m.
inline std::string palette(std::size_t k, std::size_t m) {
	static const char* base[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
	(void)m;
	return base[k % 8];
}

} // namespace wangdev::io
