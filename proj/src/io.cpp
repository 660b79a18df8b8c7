#include "slagflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slagflow/errors.hpp"
#include "slagflow/geometry.hpp"

namespace slagflow {

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
    int line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

int line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void config_fail(const std::string& text, const std::string& key,
                              const std::string& what) {
    const int line = line_of_key(text, key);
    std::ostringstream os;
    os << "config error";
    if (line > 0) os << " (line " << line << ")";
    os << ": " << what;
    throw ConfigError(os.str());
}

Complex complex_of(const Json& j, const std::string& text, const std::string& key) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        config_fail(text, key, "expected [re, im] pair in \"" + key + "\"");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Complex> complex_list(const Json& j, const std::string& text,
                                  const std::string& key) {
    if (!j.is_array() || j.empty())
        config_fail(text, key, "expected a non-empty array in \"" + key + "\"");
    std::vector<Complex> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(complex_of(e, text, key));
    return out;
}

void read_numerics(const Json& j, NumericsConfig& n, const std::string& text) {
    auto get = [&](const char* key, auto& field) {
        if (!j.contains(key)) return;
        if (!j[key].is_number())
            config_fail(text, key, std::string("\"") + key + "\" must be a number");
        field = static_cast<std::decay_t<decltype(field)>>(j[key].get<double>());
    };
    get("sep_tol", n.sep_tol);
    get("root_tol", n.root_tol);
    get("eps_root", n.eps_root);
    get("n_points", n.n_points);
    get("n_min", n.n_min);
    get("h_min_factor", n.h_min_factor);
    get("h_max_factor", n.h_max_factor);
    get("resample_tol", n.resample_tol);
    get("c_safety", n.c_safety);
    get("mp_tol", n.mp_tol);
    get("conv_tol", n.conv_tol);
    get("tau_max", n.tau_max);
    get("dt_min", n.dt_min);
    get("split_radius_factor", n.split_radius_factor);
    get("end_guard_factor", n.end_guard_factor);
    get("w_cone", n.w_cone);
    get("cone_margin", n.cone_margin);
    get("delta0_factor", n.delta0_factor);
    get("capture_radius_factor", n.capture_radius_factor);
    get("shoot_step_factor", n.shoot_step_factor);
    get("idx_tol", n.idx_tol);
    get("winding_bound", n.winding_bound);
    get("quad_order", n.quad_order);
    get("snapshot_every", n.snapshot_every);
    get("record_every", n.record_every);
}

}  // namespace

MarkedCurve build_initial_curve(const Json& section, const ComplexPoly& p,
                                const NumericsConfig& numerics,
                                const std::string& text) {
    if (!section.contains("type") || !section["type"].is_string())
        config_fail(text, "initial_curve", "initial_curve needs a string \"type\"");
    const std::string type = section["type"].get<std::string>();
    const int m = section.value("n_points", numerics.n_points);
    if (m < numerics.n_min)
        config_fail(text, "n_points", "initial_curve n_points below N_min");

    MarkedCurve c;
    if (type == "points") {
        if (!section.contains("data"))
            config_fail(text, "data", "points curve needs \"data\"");
        c.points = complex_list(section["data"], text, "data");
        const double tol = 1e-9 * (1.0 + p.root_diameter());
        for (int j = 0; j < static_cast<int>(p.roots().size()); ++j) {
            if (std::abs(c.points.front() - p.roots()[j]) < tol) c.left_root = j;
            if (std::abs(c.points.back() - p.roots()[j]) < tol) c.right_root = j;
        }
        if (c.left_root) c.points.front() = p.roots()[*c.left_root];
        if (c.right_root) c.points.back() = p.roots()[*c.right_root];
        return c;
    }

    const int from = section.value("from", 0);
    const int to = section.value("to", static_cast<int>(p.roots().size()) - 1);
    if (from < 0 || to < 0 || from >= static_cast<int>(p.roots().size()) ||
        to >= static_cast<int>(p.roots().size()) || from == to)
        config_fail(text, "from", "initial_curve root indices out of range");
    const Complex a = p.roots()[from], b = p.roots()[to];
    const Complex dir = (b - a) / std::abs(b - a);
    const Complex nu = Complex(0.0, 1.0) * dir;
    const double bump = section.value("bump", 0.0);

    c.points.resize(m);
    if (type == "segment") {
        for (int j = 0; j < m; ++j) {
            const double u = static_cast<double>(j) / (m - 1);
            c.points[j] = a + u * (b - a) + bump * std::sin(kPi * u) * nu;
        }
    } else if (type == "arc") {
        const double sag = section.value("bulge", 0.0);
        if (sag == 0.0)
            config_fail(text, "bulge", "arc curve needs a nonzero \"bulge\"");
        const double half = 0.5 * std::abs(b - a);
        const double R = (half * half + sag * sag) / (2.0 * sag);  // signed
        const Complex mid = 0.5 * (a + b);
        const Complex center = mid + (sag - R) * nu;
        const double ta = std::arg(a - center);
        const double tapex = continue_angle(ta, std::arg(mid + sag * nu - center));
        const double tb = continue_angle(tapex, std::arg(b - center));
        for (int j = 0; j < m; ++j) {
            const double u = static_cast<double>(j) / (m - 1);
            const double th = ta + u * (tb - ta);
            c.points[j] = center + std::abs(R) * std::exp(Complex(0.0, th));
            if (bump != 0.0) {
                const Complex tang =
                    Complex(0.0, tb > ta ? 1.0 : -1.0) * std::exp(Complex(0.0, th));
                c.points[j] += bump * std::sin(kPi * u) * Complex(0.0, 1.0) * tang;
            }
        }
    } else {
        config_fail(text, "type", "unknown initial_curve type \"" + type + "\"");
    }
    c.points.front() = a;
    c.points.back() = b;
    c.left_root = from;
    c.right_root = to;
    c.grading_offset = section.value("grading_offset", 0);
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    Config cfg;
    try {
        cfg.raw = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::ostringstream os;
        os << "config error (line " << line_of_offset(text, e.byte) << "): " << e.what();
        throw ConfigError(os.str());
    }
    if (!cfg.raw.is_object()) throw ConfigError("config error: top level must be an object");

    if (cfg.raw.contains("dimension")) {
        if (!cfg.raw["dimension"].is_number_integer() || cfg.raw["dimension"] < 2)
            config_fail(text, "dimension", "\"dimension\" must be an integer >= 2");
        cfg.dimension = cfg.raw["dimension"].get<int>();
    }
    if (cfg.raw.contains("numerics")) read_numerics(cfg.raw["numerics"], cfg.numerics, text);

    if (cfg.raw.contains("polynomial")) {
        const auto& pj = cfg.raw["polynomial"];
        try {
            if (pj.contains("coeffs")) {
                cfg.poly = ComplexPoly::from_coeffs(complex_list(pj["coeffs"], text, "coeffs"),
                                                    cfg.numerics);
            } else if (pj.contains("roots")) {
                const Complex lead = pj.contains("leading")
                                         ? complex_of(pj["leading"], text, "leading")
                                         : Complex(1.0, 0.0);
                cfg.poly = ComplexPoly::from_roots(complex_list(pj["roots"], text, "roots"),
                                                   lead, cfg.numerics);
            } else {
                config_fail(text, "polynomial", "polynomial needs \"coeffs\" or \"roots\"");
            }
        } catch (const DegenerateRoots& e) {
            config_fail(text, "polynomial", e.what());
        }
    }

    if (cfg.raw.contains("initial_curve")) {
        if (!cfg.poly)
            config_fail(text, "initial_curve", "initial_curve requires a polynomial");
        cfg.initial_curve =
            build_initial_curve(cfg.raw["initial_curve"], *cfg.poly, cfg.numerics, text);
    }

    if (cfg.raw.contains("output")) {
        const auto& oj = cfg.raw["output"];
        cfg.output.dir = oj.value("dir", cfg.output.dir);
        cfg.output.snapshot_every = oj.value("snapshot_every", cfg.output.snapshot_every);
        cfg.output.record_every = oj.value("record_every", cfg.output.record_every);
        cfg.numerics.snapshot_every = cfg.output.snapshot_every;
        cfg.numerics.record_every = std::max(1, cfg.output.record_every);
    }

    if (cfg.raw.contains("slag")) {
        const auto& sj = cfg.raw["slag"];
        cfg.slag.root = sj.value("root", cfg.slag.root);
        cfg.slag.phi = sj.value("phi", cfg.slag.phi);
        cfg.slag.branch = sj.value("branch", cfg.slag.branch);
        cfg.slag.max_length = sj.value("max_length", cfg.slag.max_length);
        cfg.slag.root_a = sj.value("root_a", cfg.slag.root_a);
        cfg.slag.root_b = sj.value("root_b", cfg.slag.root_b);
        if (sj.contains("phi_window")) {
            const auto w = sj["phi_window"];
            if (!w.is_array() || w.size() != 2)
                config_fail(text, "phi_window", "\"phi_window\" must be [lo, hi]");
            cfg.slag.phi_lo = w[0].get<double>();
            cfg.slag.phi_hi = w[1].get<double>();
        }
    }

    if (cfg.raw.contains("local_model")) {
        const auto& lj = cfg.raw["local_model"];
        cfg.local_model_c = lj.value("c", cfg.local_model_c);
        cfg.local_model_samples = lj.value("samples", cfg.local_model_samples);
    }

    if (cfg.raw.contains("stability"))
        cfg.winding_bound = cfg.raw["stability"].value("winding_bound", cfg.winding_bound);

    if (cfg.raw.contains("crosscheck")) {
        const auto& cj = cfg.raw["crosscheck"];
        cfg.crosscheck.count = cj.value("count", cfg.crosscheck.count);
        cfg.crosscheck.seed = cj.value("seed", cfg.crosscheck.seed);
    }
    return cfg;
}

Json numerics_to_json(const NumericsConfig& n) {
    Json j;
    j["sep_tol"] = n.sep_tol;
    j["root_tol"] = n.root_tol;
    j["eps_root"] = n.eps_root;
    j["n_points"] = n.n_points;
    j["n_min"] = n.n_min;
    j["h_min_factor"] = n.h_min_factor;
    j["h_max_factor"] = n.h_max_factor;
    j["resample_tol"] = n.resample_tol;
    j["c_safety"] = n.c_safety;
    j["mp_tol"] = n.mp_tol;
    j["conv_tol"] = n.conv_tol;
    j["tau_max"] = n.tau_max;
    j["dt_min"] = n.dt_min;
    j["split_radius_factor"] = n.split_radius_factor;
    j["end_guard_factor"] = n.end_guard_factor;
    j["w_cone"] = n.w_cone;
    j["cone_margin"] = n.cone_margin;
    j["delta0_factor"] = n.delta0_factor;
    j["capture_radius_factor"] = n.capture_radius_factor;
    j["shoot_step_factor"] = n.shoot_step_factor;
    j["idx_tol"] = n.idx_tol;
    j["winding_bound"] = n.winding_bound;
    j["quad_order"] = n.quad_order;
    j["snapshot_every"] = n.snapshot_every;
    j["record_every"] = n.record_every;
    return j;
}

namespace {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "Converged";
        case Verdict::Split: return "Split";
        case Verdict::StepFailure: return "StepFailure";
        case Verdict::MaxTime: return "MaxTime";
    }
    return "Unknown";
}

Json report_tree(const RunResult& r) {
    Json j;
    j["verdict"] = verdict_name(r.report.verdict);
    if (r.report.verdict == Verdict::Split) {
        j["split_root"] = r.report.split_root;
        j["split_tau"] = r.report.split_tau;
    }
    j["accepted_steps"] = r.report.accepted_steps;
    j["max_sup_increase"] = r.report.max_sup_increase;
    j["max_inf_decrease"] = r.report.max_inf_decrease;
    j["max_w_increase"] = r.report.max_w_increase;
    j["worst_cone_variation"] = r.report.worst_cone_variation;
    if (!r.children.empty()) {
        Json kids = Json::array();
        for (const auto& child : r.children) kids.push_back(report_tree(child));
        j["children"] = std::move(kids);
    }
    return j;
}

void collect_impl(const RunResult& r, std::vector<FlowRecord>& out) {
    out.insert(out.end(), r.report.series.begin(), r.report.series.end());
    for (const auto& child : r.children) collect_impl(child, out);
}

}  // namespace

std::vector<FlowRecord> collect_records(const RunResult& r) {
    std::vector<FlowRecord> out;
    collect_impl(r, out);
    return out;
}

Json flow_report_json(const RunResult& result, const ComplexPoly& p, int n,
                      const Config& cfg) {
    Json j;
    j["dimension"] = n;
    Json roots = Json::array();
    for (const auto& z : p.roots()) roots.push_back({z.real(), z.imag()});
    j["roots"] = std::move(roots);
    j["run"] = report_tree(result);

    Json finals = Json::array();
    for (const auto& c : result.finals) {
        Json f;
        f["left_root"] = c.left_root ? Json(*c.left_root) : Json(nullptr);
        f["right_root"] = c.right_root ? Json(*c.right_root) : Json(nullptr);
        f["n_points"] = c.size();
        f["grading_offset"] = c.grading_offset;
        f["tau"] = c.time;
        const auto prof = phase_profile(c, p, n);
        f["sup_theta"] = prof.sup;
        f["inf_theta"] = prof.inf;
        const auto pp =
            period_and_phase(c.points, p, n, 0.5 * (prof.sup + prof.inf));
        f["period"] = {pp.period.real(), pp.period.imag()};
        f["phi"] = pp.phi;
        f["lift_window"] = {pp.phi - kPi, pp.phi + kPi};
        f["weighted_volume"] = weighted_volume(c, p, n);
        finals.push_back(std::move(f));
    }
    j["finals"] = std::move(finals);
    j["numerics"] = numerics_to_json(cfg.numerics);
    j["config"] = cfg.raw;
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
}

void write_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string timeseries_csv(const std::vector<FlowRecord>& records) {
    std::ostringstream os;
    os << "tau,sup_theta,inf_theta,weighted_volume,min_root_dist,"
          "max_curvature_dc,dt,theta_bar,l2_phase_var\n";
    char line[512];
    for (const auto& r : records) {
        std::snprintf(line, sizeof(line),
                      "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.tau,
                      r.sup_theta, r.inf_theta, r.weighted_volume, r.min_root_dist,
                      r.max_curvature_dc, r.dt, r.theta_bar, r.l2_phase_var);
        os << line;
    }
    return os.str();
}

Json final_curve_json(const MarkedCurve& c) {
    Json j;
    Json pts = Json::array();
    for (const auto& z : c.points) pts.push_back({z.real(), z.imag()});
    j["points"] = std::move(pts);
    j["grading_offset"] = c.grading_offset;
    j["left_root"] = c.left_root ? Json(*c.left_root) : Json(nullptr);
    j["right_root"] = c.right_root ? Json(*c.right_root) : Json(nullptr);
    j["tau"] = c.time;
    return j;
}

std::string svg_snapshot(const std::vector<Complex>& curve, const ComplexPoly& p,
                         const std::vector<std::vector<Complex>>& connectors) {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    auto grow = [&](Complex z) {
        xlo = std::min(xlo, z.real());
        xhi = std::max(xhi, z.real());
        ylo = std::min(ylo, z.imag());
        yhi = std::max(yhi, z.imag());
    };
    for (const auto& z : curve) grow(z);
    for (const auto& z : p.roots()) grow(z);
    const double pad = 0.1 * std::max({xhi - xlo, yhi - ylo, 1e-6});
    xlo -= pad;
    xhi += pad;
    ylo -= pad;
    yhi += pad;

    const double W = 640.0;
    const double H = W * (yhi - ylo) / (xhi - xlo);
    const double sx = W / (xhi - xlo);
    auto px = [&](Complex z) { return (z.real() - xlo) * sx; };
    auto py = [&](Complex z) { return (yhi - z.imag()) * sx; };  // flip y

    std::ostringstream os;
    char buf[160];
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" "
                  "height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                  W, H, W, H);
    os << buf;
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    auto polyline = [&](const std::vector<Complex>& pts, const char* stroke,
                        const char* width) {
        os << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\""
           << width << "\" points=\"";
        for (const auto& z : pts) {
            std::snprintf(buf, sizeof(buf), "%.3f,%.3f ", px(z), py(z));
            os << buf;
        }
        os << "\"/>\n";
    };
    for (const auto& conn : connectors) polyline(conn, "#9ecae1", "1.5");
    if (!curve.empty()) polyline(curve, "#000000", "2");
    for (const auto& z : p.roots()) {
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"#d62728\"/>\n",
                      px(z), py(z));
        os << buf;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace slagflow
