#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "slagflow/errors.hpp"
#include "slagflow/floer.hpp"
#include "slagflow/flow.hpp"
#include "slagflow/geometry.hpp"
#include "slagflow/io.hpp"
#include "slagflow/slag.hpp"

namespace sf = slagflow;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSplit = 2;
constexpr int kExitStepFailure = 3;
constexpr int kExitConfig = 4;

std::string out_path(const sf::Config& cfg, const std::string& name) {
    return (fs::path(cfg.output.dir) / name).string();
}

sf::Json class_json(const sf::LagClass& c) {
    sf::Json j;
    j["root_pair"] = {c.root_pair.first, c.root_pair.second};
    j["winding"] = c.winding;
    j["period"] = {c.period.real(), c.period.imag()};
    j["phi"] = c.phi;
    j["lift_window"] = {c.phi - sf::kPi, c.phi + sf::kPi};
    j["has_slag"] = c.has_slag;
    return j;
}

sf::Json curve_points_json(const sf::MarkedCurve& c) {
    sf::Json pts = sf::Json::array();
    for (const auto& z : c.points) pts.push_back({z.real(), z.imag()});
    return pts;
}

std::vector<std::vector<sf::Complex>> reference_connectors(const sf::Config& cfg) {
    std::vector<std::vector<sf::Complex>> out;
    if (!cfg.poly || !cfg.initial_curve || !cfg.initial_curve->left_root ||
        !cfg.initial_curve->right_root)
        return out;
    const int R = static_cast<int>(cfg.poly->roots().size());
    for (int a = 0; a < R; ++a) {
        for (int b = a + 1; b < R; ++b) {
            try {
                const auto conn = sf::slag_connect(*cfg.poly, cfg.dimension, a, b,
                                                   cfg.slag.phi_lo, cfg.slag.phi_hi, 0,
                                                   cfg.numerics);
                if (conn) out.push_back(conn->curve.points);
            } catch (const sf::Error&) {
                // reference decoration only; missing connectors are fine
            }
        }
    }
    return out;
}

int run_flow(const sf::Config& cfg) {
    if (!cfg.poly || !cfg.initial_curve) {
        std::cerr << "config error: flow needs polynomial and initial_curve\n";
        return kExitConfig;
    }
    const auto connectors = reference_connectors(cfg);
    long snap_counter = 0;
    sf::SnapshotCallback snap = [&](const sf::MarkedCurve& c, const sf::FlowRecord&,
                                    long) {
        char name[64];
        std::snprintf(name, sizeof(name), "snap_%06ld.svg", snap_counter++);
        sf::write_text_file(out_path(cfg, name),
                            sf::svg_snapshot(c.points, *cfg.poly, connectors));
    };

    sf::RunResult result;
    try {
        result = sf::run(*cfg.initial_curve, *cfg.poly, cfg.dimension, cfg.numerics, snap);
    } catch (const sf::Error& e) {
        std::cerr << "flow error: " << e.what() << "\n";
        return kExitStepFailure;
    }

    sf::write_json_file(out_path(cfg, "report.json"),
                        sf::flow_report_json(result, *cfg.poly, cfg.dimension, cfg));
    sf::write_text_file(out_path(cfg, "timeseries.csv"),
                        sf::timeseries_csv(sf::collect_records(result)));
    for (std::size_t i = 0; i < result.finals.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "final_curve_%d.json", static_cast<int>(i));
        sf::write_json_file(out_path(cfg, name), sf::final_curve_json(result.finals[i]));
    }
    if (!result.finals.empty()) {
        char name[64];
        std::snprintf(name, sizeof(name), "snap_%06ld.svg", snap_counter);
        sf::write_text_file(out_path(cfg, name),
                            sf::svg_snapshot(result.finals.back().points, *cfg.poly,
                                             connectors));
    }

    switch (result.report.verdict) {
        case sf::Verdict::Split: return kExitSplit;
        case sf::Verdict::StepFailure: return kExitStepFailure;
        default: return kExitOk;
    }
}

int run_slag_shoot(const sf::Config& cfg) {
    if (!cfg.poly) {
        std::cerr << "config error: slag shoot needs a polynomial\n";
        return kExitConfig;
    }
    const auto res = sf::slag_shoot(*cfg.poly, cfg.dimension, cfg.slag.root, cfg.slag.phi,
                                    cfg.slag.branch, cfg.slag.max_length, cfg.numerics);
    sf::Json j;
    j["phi"] = cfg.slag.phi;
    j["branch"] = cfg.slag.branch;
    j["length"] = res.length;
    j["stop"] = res.stop == sf::ShootStop::CapturedRoot ? "captured"
                : res.stop == sf::ShootStop::LeftDomain ? "left_domain"
                                                        : "max_length";
    j["captured_root"] =
        res.captured_root ? sf::Json(*res.captured_root) : sf::Json(nullptr);
    j["curve"] = curve_points_json(res.curve);
    sf::write_json_file(out_path(cfg, "report.json"), j);
    sf::write_text_file(out_path(cfg, "shoot.svg"),
                        sf::svg_snapshot(res.curve.points, *cfg.poly, {}));
    return kExitOk;
}

int run_slag_connect(const sf::Config& cfg) {
    if (!cfg.poly) {
        std::cerr << "config error: slag connect needs a polynomial\n";
        return kExitConfig;
    }
    const auto conn =
        sf::slag_connect(*cfg.poly, cfg.dimension, cfg.slag.root_a, cfg.slag.root_b,
                         cfg.slag.phi_lo, cfg.slag.phi_hi, cfg.slag.branch, cfg.numerics);
    sf::Json j;
    j["found"] = conn.has_value();
    if (conn) {
        j["phi_star"] = conn->phi_star;
        j["branch"] = conn->branch_k;
        j["curve"] = curve_points_json(conn->curve);
        sf::write_text_file(out_path(cfg, "connect.svg"),
                            sf::svg_snapshot(conn->curve.points, *cfg.poly,
                                             {conn->curve.points}));
    }
    sf::write_json_file(out_path(cfg, "report.json"), j);
    return kExitOk;
}

int run_stability(const sf::Config& cfg) {
    if (!cfg.poly || !cfg.initial_curve) {
        std::cerr << "config error: stability needs polynomial and initial_curve\n";
        return kExitConfig;
    }
    const auto rep = sf::check_stability(*cfg.initial_curve, *cfg.poly, cfg.dimension,
                                         cfg.winding_bound, cfg.numerics);
    sf::Json j;
    j["sup_theta"] = rep.sup_theta;
    j["inf_theta"] = rep.inf_theta;
    j["weighted_volume"] = rep.weighted_vol;
    j["close_all"] = rep.close_all;
    j["vclose_all"] = rep.vclose_all;
    sf::Json splits = sf::Json::array();
    for (const auto& s : rep.splittings) {
        sf::Json e;
        e["root"] = s.root;
        e["winding"] = s.first.winding;
        e["phi1"] = s.first.phi;
        e["phi2"] = s.second.phi;
        e["close_ok"] = s.close_ok;
        e["vclose_ok"] = s.vclose_ok;
        e["ineq_filtered"] = s.ineq_filtered;
        splits.push_back(std::move(e));
    }
    j["splittings"] = std::move(splits);
    sf::write_json_file(out_path(cfg, "report.json"), j);
    return kExitOk;
}

int run_decompose(const sf::Config& cfg) {
    if (!cfg.poly || !cfg.initial_curve) {
        std::cerr << "config error: decompose needs polynomial and initial_curve\n";
        return kExitConfig;
    }
    const auto L = sf::lag_class_of(*cfg.initial_curve, *cfg.poly, cfg.dimension,
                                    cfg.numerics);
    auto pieces = sf::jordan_holder(L, *cfg.poly, cfg.dimension, cfg.winding_bound,
                                    cfg.numerics);
    for (auto& piece : pieces) {
        const auto conn = sf::slag_connect(*cfg.poly, cfg.dimension,
                                           piece.root_pair.first, piece.root_pair.second,
                                           piece.phi - 0.75, piece.phi + 0.75, 0,
                                           cfg.numerics);
        piece.has_slag = conn.has_value();
    }
    sf::Json j;
    j["class"] = class_json(L);
    sf::Json arr = sf::Json::array();
    for (const auto& piece : pieces) arr.push_back(class_json(piece));
    j["pieces"] = std::move(arr);
    sf::write_json_file(out_path(cfg, "report.json"), j);
    return kExitOk;
}

int run_crosscheck(const sf::Config& cfg, unsigned seed) {
    if (!cfg.poly) {
        std::cerr << "config error: crosscheck needs a polynomial\n";
        return kExitConfig;
    }
    const auto& p = *cfg.poly;
    std::mt19937 rng(seed ? seed : cfg.crosscheck.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double diam = std::max(1.0, p.root_diameter());

    // random cubic Bezier curves in a disc offset away from all roots
    double worst = 0.0;
    for (int trial = 0; trial < cfg.crosscheck.count; ++trial) {
        const double ang = 2.0 * sf::kPi * unit(rng);
        sf::Complex center = 2.5 * diam * std::exp(sf::Complex(0.0, ang));
        for (const auto& z : p.roots()) center += z / static_cast<double>(p.degree());
        sf::Complex ctrl[4];
        for (auto& c : ctrl)
            c = center + 0.4 * diam * sf::Complex(unit(rng) - 0.5, unit(rng) - 0.5);
        sf::MarkedCurve c;
        c.points.resize(200);
        for (int k = 0; k < 200; ++k) {
            const double u = k / 199.0, v = 1.0 - u;
            c.points[k] = v * v * v * ctrl[0] + 3.0 * v * v * u * ctrl[1] +
                          3.0 * v * u * u * ctrl[2] + u * u * u * ctrl[3];
        }
        const auto v1 = sf::velocity(c, p, cfg.dimension, sf::VelocityFormula::Result1,
                                     cfg.numerics);
        const auto v2 = sf::velocity(c, p, cfg.dimension, sf::VelocityFormula::Conformal,
                                     cfg.numerics);
        const auto v3 = sf::velocity(c, p, cfg.dimension,
                                     sf::VelocityFormula::DoubleCover, cfg.numerics);
        double scale = 1e-12;
        for (double v : v1) scale = std::max(scale, std::abs(v));
        for (std::size_t k = 0; k < v1.size(); ++k) {
            worst = std::max(worst, std::abs(v1[k] - v2[k]) / scale);
            worst = std::max(worst, std::abs(v1[k] - v3[k]) / scale);
        }
    }
    std::printf("max relative velocity disagreement: %.3e over %d curves\n", worst,
                cfg.crosscheck.count);
    sf::Json j;
    j["max_relative_disagreement"] = worst;
    j["count"] = cfg.crosscheck.count;
    sf::write_json_file(out_path(cfg, "report.json"), j);
    return kExitOk;
}

int run_localmodel(const sf::Config& cfg) {
    const int n = cfg.dimension;
    const auto curve = sf::local_model_curve(n, cfg.local_model_c, cfg.local_model_samples);
    const auto phase = sf::local_model_phase(curve, n);
    double dev = 0.0;
    for (double v : phase) dev = std::max(dev, std::abs(v));
    sf::Json j;
    j["n"] = n;
    j["c"] = cfg.local_model_c;
    j["max_phase_deviation"] = dev;
    j["curve"] = curve_points_json(curve);
    sf::write_json_file(out_path(cfg, "report.json"), j);
    // the model's cone point is the origin: draw against p = t
    const auto pt = sf::ComplexPoly::from_coeffs({{0.0, 0.0}, {1.0, 0.0}});
    sf::write_text_file(out_path(cfg, "localmodel.svg"),
                        sf::svg_snapshot(curve.points, pt, {}));
    return kExitOk;
}

int dispatch_one(const std::string& mode, sf::Config cfg, const std::string& out_dir,
                 unsigned seed) {
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    try {
        if (mode == "flow") return run_flow(cfg);
        if (mode == "slag_shoot") return run_slag_shoot(cfg);
        if (mode == "slag_connect") return run_slag_connect(cfg);
        if (mode == "stability") return run_stability(cfg);
        if (mode == "decompose") return run_decompose(cfg);
        if (mode == "crosscheck") return run_crosscheck(cfg, seed);
        if (mode == "localmodel") return run_localmodel(cfg);
    } catch (const sf::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const sf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStepFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStepFailure;
    }
    std::cerr << "unknown subcommand\n";
    return kExitConfig;
}

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slagflow: reduced flow of O(n)-invariant Lagrangian spheres"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string sweep;
    unsigned seed = 0;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--sweep", sweep, "KEY=v1,v2,... fan-out over a config key");
    app.add_option("--seed", seed, "RNG seed for randomized crosschecks");

    auto* flow_cmd = app.add_subcommand("flow", "run the reduced flow");
    auto* slag_cmd = app.add_subcommand("slag", "SLag shooting and connecting");
    slag_cmd->require_subcommand(1);
    auto* shoot_cmd = slag_cmd->add_subcommand("shoot", "integrate the SLag ODE");
    auto* connect_cmd = slag_cmd->add_subcommand("connect", "bisect for a connector");
    auto* stab_cmd = app.add_subcommand("stability", "(close)/(vclose) verdicts");
    auto* dec_cmd = app.add_subcommand("decompose", "Jordan-Holder decomposition");
    auto* cross_cmd = app.add_subcommand("crosscheck", "velocity formula agreement");
    auto* local_cmd = app.add_subcommand("localmodel", "connect-sum local model");

    CLI11_PARSE(app, argc, argv);

    std::string mode;
    if (flow_cmd->parsed()) mode = "flow";
    if (slag_cmd->parsed()) mode = shoot_cmd->parsed() ? "slag_shoot" : "slag_connect";
    if (connect_cmd->parsed()) mode = "slag_connect";
    if (stab_cmd->parsed()) mode = "stability";
    if (dec_cmd->parsed()) mode = "decompose";
    if (cross_cmd->parsed()) mode = "crosscheck";
    if (local_cmd->parsed()) mode = "localmodel";

    sf::Config cfg;
    try {
        cfg = sf::load_config(config_path);
    } catch (const sf::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
    if (!out_dir.empty()) cfg.output.dir = out_dir;

    if (sweep.empty()) return dispatch_one(mode, cfg, cfg.output.dir, seed);

    // --sweep numerics.c_safety=0.2,0.4 : independent runs in parallel
    const auto eq = sweep.find('=');
    if (eq == std::string::npos) {
        std::cerr << "config error: --sweep expects KEY=v1,v2,...\n";
        return kExitConfig;
    }
    const std::string key = sweep.substr(0, eq);
    std::string ptr = "/" + key;
    for (char& c : ptr)
        if (c == '.') c = '/';
    std::vector<std::string> values;
    for (std::size_t pos = eq + 1; pos <= sweep.size();) {
        const auto comma = sweep.find(',', pos);
        values.push_back(sweep.substr(pos, comma == std::string::npos ? std::string::npos
                                                                      : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }

    std::vector<std::future<int>> futures;
    for (const auto& value : values) {
        sf::Json raw = cfg.raw;
        try {
            // "2" stays an integer, "0.4" a double, anything else a string
            sf::Json parsed = sf::Json::parse(value, nullptr, false);
            if (parsed.is_discarded()) parsed = value;
            raw[sf::Json::json_pointer(ptr)] = parsed;
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "config error: bad sweep key " << key << ": " << e.what() << "\n";
            return kExitConfig;
        }
        const std::string run_dir =
            (fs::path(cfg.output.dir) / ("sweep_" + sanitize(key) + "_" + sanitize(value)))
                .string();
        const std::string tmp_cfg = (fs::path(run_dir) / "config.json").string();
        try {
            sf::write_json_file(tmp_cfg, raw);
        } catch (const sf::Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitStepFailure;
        }
        futures.push_back(std::async(std::launch::async, [=]() {
            sf::Config sub;
            try {
                sub = sf::load_config(tmp_cfg);
            } catch (const sf::ConfigError& e) {
                std::cerr << e.what() << "\n";
                return kExitConfig;
            }
            return dispatch_one(mode, sub, run_dir, seed);
        }));
    }
    int code = kExitOk;
    for (auto& f : futures) code = std::max(code, f.get());
    return code;
}
