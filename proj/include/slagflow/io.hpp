#ifndef SLAGFLOW_IO_HPP
#define SLAGFLOW_IO_HPP

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slagflow/complex_poly.hpp"
#include "slagflow/curve.hpp"
#include "slagflow/flow.hpp"
#include "slagflow/numerics.hpp"

namespace slagflow {

using Json = nlohmann::ordered_json;

struct OutputConfig {
    std::string dir = ".";
    int snapshot_every = 0;
    int record_every = 1;
};

struct SlagSection {
    int root = 0;
    double phi = 0.0;
    int branch = 0;
    double max_length = 10.0;
    int root_a = 0;
    int root_b = 1;
    double phi_lo = -1.5;
    double phi_hi = 1.5;
};

struct LocalModelSection {
    int c_count = 1;
    double c = 1.0;
    int samples = 400;
};

struct CrosscheckSection {
    int count = 100;
    unsigned seed = 1;
};

struct Config {
    int dimension = 2;
    std::optional<ComplexPoly> poly;
    std::optional<MarkedCurve> initial_curve;
    NumericsConfig numerics;
    OutputConfig output;
    SlagSection slag;
    CrosscheckSection crosscheck;
    double local_model_c = 1.0;
    int local_model_samples = 400;
    int winding_bound = 1;
    Json raw;  ///< the parsed file, echoed into reports
};

/// Parse and validate the config file. Throws ConfigError with a
/// line-numbered diagnostic on syntax or semantic errors.
Config load_config(const std::string& path);

/// Build the initial curve described by an "initial_curve" section
/// (types segment / arc / points; optional "bump" sine amplitude).
MarkedCurve build_initial_curve(const Json& section, const ComplexPoly& p,
                                const NumericsConfig& numerics,
                                const std::string& file_text);

Json numerics_to_json(const NumericsConfig& cfg);

/// report.json body for a flow run: verdict, finals with phases and
/// periods, monotonicity block, config echo.
Json flow_report_json(const RunResult& result, const ComplexPoly& p, int n,
                      const Config& cfg);

/// Flatten the surgery tree's time series in run order.
std::vector<FlowRecord> collect_records(const RunResult& result);

void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const Json& j);
std::string timeseries_csv(const std::vector<FlowRecord>& records);
Json final_curve_json(const MarkedCurve& c);

/// Deterministic SVG: curve in black, roots as dots, reference connectors
/// in light strokes.
std::string svg_snapshot(const std::vector<Complex>& curve, const ComplexPoly& p,
                         const std::vector<std::vector<Complex>>& connectors);

}  // namespace slagflow

#endif
