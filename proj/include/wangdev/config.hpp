#pragma once

#include "convexgeom.hpp"
#include "cubicdiff.hpp"
#include "develop.hpp"
#include "wangpde.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wangdev::config {

using json = nlohmann::json;

/// Config problem located by line and column (syntax) or by JSON pointer (content).
class ConfigError : public std::runtime_error {
  public:
	ConfigError(std::string where, const std::string& msg)
		: std::runtime_error(where + ": " + msg), m_where(std::move(where)) {}
	const std::string& where() const { return m_where; }

  private:
	std::string m_where;
};

/// Read-only view of a JSON subtree that remembers its pointer.
class Node {
  public:
	Node(const json* j, std::string path) : m_j(j), m_path(std::move(path)) {}

	const std::string& path() const { return m_path; }
	std::string at_key(const std::string& k) const { return m_path + "/" + k; }
	bool has(const std::string& k) const { return m_j->is_object() && m_j->contains(k) && !(*m_j)[k].is_null(); }
	const json& raw() const { return *m_j; }

	Node child(const std::string& k) const {
		if (!has(k)) throw ConfigError(at_key(k), "missing required field");
		return {&(*m_j)[k], at_key(k)};
	}
	Node item(std::size_t i) const { return {&(*m_j)[i], m_path + "/" + std::to_string(i)}; }
	std::size_t size() const { return m_j->size(); }

	void require_object() const {
		if (!m_j->is_object()) throw ConfigError(where(), "expected an object");
	}
	void require_array() const {
		if (!m_j->is_array()) throw ConfigError(where(), "expected an array");
	}
	/// Rejects keys outside the allowed set.
	void only(std::initializer_list<const char*> keys) const {
		require_object();
		std::set<std::string> ok(keys.begin(), keys.end());
		for (auto it = m_j->begin(); it != m_j->end(); ++it)
			if (!ok.count(it.key())) throw ConfigError(at_key(it.key()), "unknown field");
	}

	double number() const {
		if (!m_j->is_number()) throw ConfigError(where(), "expected a number");
		return m_j->get<double>();
	}
	long integer() const {
		if (!m_j->is_number_integer()) throw ConfigError(where(), "expected an integer");
		return m_j->get<long>();
	}
	bool boolean() const {
		if (!m_j->is_boolean()) throw ConfigError(where(), "expected true or false");
		return m_j->get<bool>();
	}
	std::string string() const {
		if (!m_j->is_string()) throw ConfigError(where(), "expected a string");
		return m_j->get<std::string>();
	}
	cplx complex() const {
		if (m_j->is_number()) return m_j->get<double>();
		if (!m_j->is_array() || m_j->size() != 2 || !(*m_j)[0].is_number() || !(*m_j)[1].is_number())
			throw ConfigError(where(), "expected a complex number [re, im]");
		return {(*m_j)[0].get<double>(), (*m_j)[1].get<double>()};
	}
	std::vector<double> numbers() const {
		require_array();
		std::vector<double> out;
		for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).number());
		return out;
	}
	std::vector<cplx> complexes() const {
		require_array();
		std::vector<cplx> out;
		for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).complex());
		return out;
	}

	double number(const std::string& k, double dflt) const { return has(k) ? child(k).number() : dflt; }
	long integer(const std::string& k, long dflt) const { return has(k) ? child(k).integer() : dflt; }
	bool boolean(const std::string& k, bool dflt) const { return has(k) ? child(k).boolean() : dflt; }
	std::string string(const std::string& k, const std::string& dflt) const { return has(k) ? child(k).string() : dflt; }
	cplx complex(const std::string& k, cplx dflt) const { return has(k) ? child(k).complex() : dflt; }

  private:
	std::string where() const { return m_path.empty() ? "/" : m_path; }
	const json* m_j;
	std::string m_path;
};

/// Positive-check helper keyed by pointer.
inline void check(bool ok, const std::string& where, const std::string& msg) {
	if (!ok) throw ConfigError(where, msg);
}

struct GridSpec {
	double radius = 8.0;      ///< half width of the square [-radius, radius]^2
	int n = 257;
	double mask_radius = 0.5; ///< masked disk around every finite pole
};

struct LineProbe {
	std::vector<double> angles{pi / 3.0, pi, 5.0 * pi / 3.0};
	std::vector<double> offsets{-1.0, -0.5, 0.0, 0.5, 1.0};
	double t_max = 3.0;
};

struct RayProbe {
	int count = 24;
	double length = 3.0;
	double phase = 0.0;
};

struct LoopProbe {
	cplx center = 0.0;
	double radius = 1.0;
	int points = 64;
	bool clockwise = true;
};

struct ProbeSpec {
	cplx base = 0.0;
	std::string sampler = "auto"; ///< auto | exact | grid
	std::optional<LineProbe> lines;
	std::optional<RayProbe> rays;
	std::vector<LoopProbe> loops;
	std::vector<std::vector<cplx>> paths;
	double sample_dt = 0.02;
	PolygonConfig polygon;
};

struct SupportSpec {
	ConvexDomain domain = ConvexDomain::disk(0.0, 1.0);
	SupportConfig solver;
	double region_fraction = 0.5; ///< f statistics over the inscribed disk scaled by this factor
};

struct DecaySpec {
	std::vector<double> radii{3.0, 4.0, 5.0, 6.0};
	double h = 0.05;
	double boundary = 0.5;
	double rate_tolerance = 0.05;
	double gradient_radius = 1.0;
	double prefactor = -0.5; ///< p in the fit of log u(0) + p log r
};

struct OutputSpec {
	std::string name = "run";
	std::vector<std::string> formats{"json"};
};

struct ExperimentConfig {
	std::optional<CubicDifferential> differential;
	std::string domain_name = "plane";
	GridSpec grid;
	SolverConfig solver;
	ProbeSpec probes;
	std::optional<SupportSpec> support;
	DecaySpec decay;
	OutputSpec output;
	json source;
};

/// 1-based line and column of a byte offset.
inline std::string line_col(const std::string& text, std::size_t pos) {
	std::size_t line = 1, col = 1;
	for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
		if (text[i] == '\n') {
			++line;
			col = 1;
		} else {
			++col;
		}
	}
	return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

namespace detail {

inline CubicDifferential parse_differential(const Node& d, std::string& domain_name) {
	d.only({"numerator", "poles", "domain"});
	std::vector<cplx> num = d.child("numerator").complexes();
	check(!num.empty(), d.at_key("numerator"), "numerator needs at least one coefficient");
	bool nonzero = false;
	for (auto c : num) nonzero = nonzero || c != cplx(0.0);
	check(nonzero, d.at_key("numerator"), "numerator is identically zero");
	std::vector<Pole> poles;
	if (d.has("poles")) {
		Node ps = d.child("poles");
		ps.require_array();
		for (std::size_t i = 0; i < ps.size(); ++i) {
			Node p = ps.item(i);
			p.only({"at", "mult"});
			long m = p.integer("mult", 1);
			check(m >= 1, p.at_key("mult"), "multiplicity must be >= 1");
			poles.push_back({p.child("at").complex(), int(m)});
			for (std::size_t j = 0; j + 1 < poles.size(); ++j)
				check(std::abs(poles[j].at - poles.back().at) > 1e-12, p.at_key("at"), "duplicate pole location");
		}
	}
	domain_name = d.string("domain", poles.empty() ? "plane" : "punctured");
	check(domain_name == "plane" || domain_name == "punctured", d.at_key("domain"), "domain must be plane or punctured");
	check(domain_name == "punctured" || poles.empty(), d.at_key("poles"), "poles require the punctured domain");
	check(domain_name == "plane" || !poles.empty(), d.at_key("domain"), "punctured domain requires at least one pole");
	return {num, poles, domain_name == "plane" ? Domain::plane : Domain::punctured_plane};
}

inline void parse_solver(const Node& s, SolverConfig& c) {
	s.only({"tolerance", "max_iterations", "damping", "linear_tolerance", "max_linear_iterations", "balanced",
			"balance_cutoff", "refine_sweeps"});
	c.tolerance = s.number("tolerance", c.tolerance);
	check(c.tolerance > 0.0, s.at_key("tolerance"), "must be positive");
	c.max_iterations = int(s.integer("max_iterations", c.max_iterations));
	check(c.max_iterations >= 1, s.at_key("max_iterations"), "must be >= 1");
	c.damping = s.number("damping", c.damping);
	check(c.damping > 0.0 && c.damping <= 1.0, s.at_key("damping"), "must lie in (0, 1]");
	c.linear_tolerance = s.number("linear_tolerance", c.linear_tolerance);
	check(c.linear_tolerance > 0.0, s.at_key("linear_tolerance"), "must be positive");
	c.max_linear_iterations = int(s.integer("max_linear_iterations", c.max_linear_iterations));
	check(c.max_linear_iterations >= 1, s.at_key("max_linear_iterations"), "must be >= 1");
	c.balanced = s.boolean("balanced", c.balanced);
	c.balance_cutoff = s.number("balance_cutoff", c.balance_cutoff);
	check(c.balance_cutoff >= 0.0, s.at_key("balance_cutoff"), "must be non-negative");
	c.refine_sweeps = int(s.integer("refine_sweeps", c.refine_sweeps));
	check(c.refine_sweeps >= 0, s.at_key("refine_sweeps"), "must be non-negative");
}

inline void parse_probes(const Node& p, ProbeSpec& ps) {
	p.only({"base", "sampler", "lines", "rays", "loops", "paths", "sample_dt", "polygon"});
	ps.base = p.complex("base", ps.base);
	ps.sampler = p.string("sampler", ps.sampler);
	check(ps.sampler == "auto" || ps.sampler == "exact" || ps.sampler == "grid", p.at_key("sampler"),
		  "sampler must be auto, exact or grid");
	ps.sample_dt = p.number("sample_dt", ps.sample_dt);
	check(ps.sample_dt > 0.0, p.at_key("sample_dt"), "must be positive");
	if (p.has("lines")) {
		Node l = p.child("lines");
		l.only({"angles", "offsets", "t_max"});
		LineProbe lp;
		if (l.has("angles")) lp.angles = l.child("angles").numbers();
		if (l.has("offsets")) lp.offsets = l.child("offsets").numbers();
		lp.t_max = l.number("t_max", lp.t_max);
		check(lp.t_max > 0.0, l.at_key("t_max"), "must be positive");
		check(!lp.angles.empty() && !lp.offsets.empty(), l.path(), "angles and offsets must be non-empty");
		ps.lines = lp;
	}
	if (p.has("rays")) {
		Node r = p.child("rays");
		r.only({"count", "length", "phase"});
		RayProbe rp;
		rp.count = int(r.integer("count", rp.count));
		check(rp.count >= 1 && rp.count <= 10000, r.at_key("count"), "must lie in 1..10000");
		rp.length = r.number("length", rp.length);
		check(rp.length > 0.0, r.at_key("length"), "must be positive");
		rp.phase = r.number("phase", rp.phase);
		ps.rays = rp;
	}
	if (p.has("loops")) {
		Node ls = p.child("loops");
		ls.require_array();
		for (std::size_t i = 0; i < ls.size(); ++i) {
			Node l = ls.item(i);
			l.only({"center", "radius", "points", "clockwise"});
			LoopProbe lp;
			lp.center = l.complex("center", lp.center);
			lp.radius = l.number("radius", lp.radius);
			check(lp.radius > 0.0, l.at_key("radius"), "must be positive");
			lp.points = int(l.integer("points", lp.points));
			check(lp.points >= 3, l.at_key("points"), "must be >= 3");
			lp.clockwise = l.boolean("clockwise", lp.clockwise);
			ps.loops.push_back(lp);
		}
	}
	if (p.has("paths")) {
		Node ls = p.child("paths");
		ls.require_array();
		for (std::size_t i = 0; i < ls.size(); ++i) {
			auto v = ls.item(i).complexes();
			check(v.size() >= 2, ls.item(i).path(), "path needs at least two vertices");
			ps.paths.push_back(v);
		}
	}
	if (p.has("polygon")) {
		Node q = p.child("polygon");
		q.only({"r_max", "offsets", "limit_tol", "cluster_eps", "distinct_eps", "incidence_offset"});
		PolygonConfig& c = ps.polygon;
		c.r_max = q.number("r_max", c.r_max);
		check(c.r_max >= 0.0, q.at_key("r_max"), "must be non-negative");
		if (q.has("offsets")) c.offsets = q.child("offsets").numbers();
		c.limit_tol = q.number("limit_tol", c.limit_tol);
		c.cluster_eps = q.number("cluster_eps", c.cluster_eps);
		c.distinct_eps = q.number("distinct_eps", c.distinct_eps);
		c.incidence_offset = q.number("incidence_offset", c.incidence_offset);
		check(c.limit_tol > 0.0 && c.cluster_eps > 0.0 && c.distinct_eps > 0.0, q.path(), "tolerances must be positive");
	}
}

inline SupportSpec parse_support(const Node& s) {
	s.only({"domain", "n", "tolerance", "max_iterations", "region_fraction", "restarts"});
	SupportSpec out;
	Node d = s.child("domain");
	d.only({"kind", "vertices", "center", "radius"});
	std::string kind = d.child("kind").string();
	try {
		if (kind == "disk") {
			double r = d.child("radius").number();
			check(r > 0.0, d.at_key("radius"), "must be positive");
			out.domain = ConvexDomain::disk(d.complex("center", 0.0), r);
		} else if (kind == "polygon") {
			out.domain = ConvexDomain::polygon(d.child("vertices").complexes());
		} else {
			throw ConfigError(d.at_key("kind"), "kind must be disk or polygon");
		}
	} catch (const wangdev::error& e) {
		throw ConfigError(d.path(), e.what());
	}
	out.solver.n = int(s.integer("n", out.solver.n));
	check(out.solver.n >= 9 && out.solver.n <= 2049, s.at_key("n"), "must lie in 9..2049");
	out.solver.tolerance = s.number("tolerance", out.solver.tolerance);
	check(out.solver.tolerance > 0.0, s.at_key("tolerance"), "must be positive");
	out.solver.max_iterations = int(s.integer("max_iterations", out.solver.max_iterations));
	check(out.solver.max_iterations >= 1, s.at_key("max_iterations"), "must be >= 1");
	out.solver.restarts = int(s.integer("restarts", out.solver.restarts));
	check(out.solver.restarts >= 0, s.at_key("restarts"), "must be non-negative");
	out.region_fraction = s.number("region_fraction", out.region_fraction);
	check(out.region_fraction > 0.0 && out.region_fraction < 1.0, s.at_key("region_fraction"), "must lie in (0, 1)");
	return out;
}

inline void parse_decay(const Node& d, DecaySpec& s) {
	d.only({"radii", "h", "boundary", "rate_tolerance", "gradient_radius", "prefactor"});
	if (d.has("radii")) s.radii = d.child("radii").numbers();
	check(s.radii.size() >= 3, d.at_key("radii"), "need at least three radii");
	for (double r : s.radii) check(r >= 1.0, d.at_key("radii"), "radii must be >= 1");
	s.h = d.number("h", s.h);
	check(s.h > 0.0 && s.h <= 0.5, d.at_key("h"), "must lie in (0, 0.5]");
	s.boundary = d.number("boundary", s.boundary);
	check(s.boundary > 0.0, d.at_key("boundary"), "must be positive");
	s.rate_tolerance = d.number("rate_tolerance", s.rate_tolerance);
	check(s.rate_tolerance > 0.0, d.at_key("rate_tolerance"), "must be positive");
	s.gradient_radius = d.number("gradient_radius", s.gradient_radius);
	check(s.gradient_radius > 0.0, d.at_key("gradient_radius"), "must be positive");
	s.prefactor = d.number("prefactor", s.prefactor);
}

inline void parse_output(const Node& o, OutputSpec& s) {
	o.only({"name", "formats"});
	s.name = o.string("name", s.name);
	check(!s.name.empty() && s.name.find('/') == std::string::npos, o.at_key("name"), "name must be a plain file stem");
	if (o.has("formats")) {
		Node f = o.child("formats");
		f.require_array();
		s.formats.clear();
		for (std::size_t i = 0; i < f.size(); ++i) {
			std::string x = f.item(i).string();
			check(x == "json" || x == "csv" || x == "svg", f.item(i).path(), "format must be json, csv or svg");
			s.formats.push_back(x);
		}
	}
}

} // namespace detail

/// Parses a config document; syntax errors carry line and column, content errors a JSON pointer.
inline ExperimentConfig parse(const std::string& text) {
	ExperimentConfig cfg;
	try {
		cfg.source = json::parse(text);
	} catch (const json::parse_error& e) {
		std::string msg = e.what();
		auto k = msg.find("parse error");
		throw ConfigError(line_col(text, e.byte > 0 ? e.byte - 1 : 0), k == std::string::npos ? msg : msg.substr(k));
	}
	Node root(&cfg.source, "");
	root.only({"differential", "grid", "solver", "probes", "support", "decay", "output", "description"});
	if (root.has("differential")) cfg.differential = detail::parse_differential(root.child("differential"), cfg.domain_name);
	if (root.has("grid")) {
		Node g = root.child("grid");
		g.only({"radius", "n", "mask_radius"});
		cfg.grid.radius = g.number("radius", cfg.grid.radius);
		check(cfg.grid.radius > 0.0, g.at_key("radius"), "must be positive");
		cfg.grid.n = int(g.integer("n", cfg.grid.n));
		check(cfg.grid.n >= 9 && cfg.grid.n <= 4097, g.at_key("n"), "must lie in 9..4097");
		cfg.grid.mask_radius = g.number("mask_radius", cfg.grid.mask_radius);
		check(cfg.grid.mask_radius >= 0.0, g.at_key("mask_radius"), "must be non-negative");
	}
	if (root.has("solver")) detail::parse_solver(root.child("solver"), cfg.solver);
	if (root.has("probes")) detail::parse_probes(root.child("probes"), cfg.probes);
	if (root.has("support")) cfg.support = detail::parse_support(root.child("support"));
	if (root.has("decay")) detail::parse_decay(root.child("decay"), cfg.decay);
	if (root.has("output")) detail::parse_output(root.child("output"), cfg.output);
	return cfg;
}

inline ExperimentConfig load(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw ConfigError(path, "cannot read config file");
	std::ostringstream ss;
	ss << in.rdbuf();
	return parse(ss.str());
}

/// Largest modulus among finite poles and zeros.
inline double max_feature_modulus(const CubicDifferential& b) {
	double m = 0.0;
	for (const auto& p : b.poles()) m = std::max(m, std::abs(p.at));
	for (auto z : b.zeros()) m = std::max(m, std::abs(z));
	return m;
}

/// Checks that depend on the requested pipeline: differential present, truncation radius
/// beyond every finite pole and zero by 2, every pole masked and well inside the grid.
inline void validate_for_grid(const ExperimentConfig& cfg) {
	if (!cfg.differential) throw ConfigError("/differential", "missing required field");
	const CubicDifferential& b = *cfg.differential;
	double m = max_feature_modulus(b);
	if (!(cfg.grid.radius > m + 2.0)) {
		std::ostringstream os;
		os << "truncation radius " << cfg.grid.radius << " must exceed the largest pole/zero modulus " << m << " plus 2";
		throw ConfigError("/grid/radius", os.str());
	}
	if (!b.poles().empty()) {
		double h = 2.0 * cfg.grid.radius / (cfg.grid.n - 1);
		check(cfg.grid.mask_radius > 0.0, "/grid/mask_radius", "poles must be masked: mask_radius must be positive");
		check(cfg.grid.mask_radius >= 1.5 * h, "/grid/mask_radius", "mask radius must cover at least 1.5 grid steps");
		for (std::size_t i = 0; i < b.poles().size(); ++i)
			for (std::size_t j = 0; j < i; ++j)
				check(std::abs(b.poles()[i].at - b.poles()[j].at) > 2.0 * cfg.grid.mask_radius,
					  "/differential/poles/" + std::to_string(i), "masked disks of distinct poles overlap");
	}
}

/// The grid of a config: square [-radius, radius]^2 with disks masked around poles.
inline std::shared_ptr<Grid2D> make_grid(const ExperimentConfig& cfg) {
	auto g = std::make_shared<Grid2D>(Grid2D::square(0.0, cfg.grid.radius, cfg.grid.n));
	if (cfg.differential)
		for (const auto& p : cfg.differential->poles()) g->mask_disk(p.at, cfg.grid.mask_radius);
	return g;
}

} // namespace wangdev::config
