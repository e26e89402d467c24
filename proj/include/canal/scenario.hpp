#ifndef CANAL_SCENARIO_HPP
#define CANAL_SCENARIO_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "canal/network.hpp"

namespace canal {

inline constexpr const char* version_string = "0.1.0";

/// Piecewise-constant initial data: the segment holds on x < x_end, segments
/// are listed left to right and must cover the canal.
struct InitialSegment {
    double x_end = 0.0;
    double h = 1.0;
    double v = 0.0;
};

struct CanalConfig {
    std::string name;
    double length = 1.0;
    int cells = 100;
    double half_width = 1.0;
    std::vector<InitialSegment> initial;
};

struct JunctionConfig {
    double theta = 0.0;
    double phi = 0.0;
    std::string incoming;
    std::array<std::string, 2> outgoing;
};

struct OutputConfig {
    enum class Cadence { every_step, every_n, at_times };
    Cadence cadence = Cadence::at_times;
    long every_n = 1;
    std::vector<double> times;
    std::vector<std::string> fields = {"h", "q", "v"};
};

struct ScenarioConfig {
    std::string name = "scenario";
    PhysicalConstants physics;
    std::vector<CanalConfig> canals;
    std::vector<JunctionConfig> junctions;
    JunctionModel junction_model = JunctionModel::momentum;
    NewtonOptions newton{1e-12, 50, 0.5, 1e-4};  // runs default to a tight residual
    TimeControls time;
    OutputConfig output;
};

struct ConfigError {
    std::string path;
    std::string message;
};

struct ParseResult {
    std::optional<ScenarioConfig> config;
    std::vector<ConfigError> errors;

    bool ok() const { return config.has_value(); }
};

// ---------------------------------------------------------------------------
// Rendering and parsing (JSON with stable key order)

namespace scenario_detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const ScenarioConfig& cfg) {
    ordered_json j;
    j["name"] = cfg.name;
    j["physics"] = {{"g", cfg.physics.g}};
    j["canals"] = ordered_json::array();
    for (const auto& canal : cfg.canals) {
        ordered_json jc;
        jc["name"] = canal.name;
        jc["length"] = canal.length;
        jc["cells"] = canal.cells;
        jc["half_width"] = canal.half_width;
        jc["initial"] = ordered_json::array();
        for (const auto& seg : canal.initial)
            jc["initial"].push_back({{"x_end", seg.x_end}, {"h", seg.h}, {"v", seg.v}});
        j["canals"].push_back(std::move(jc));
    }
    j["junctions"] = ordered_json::array();
    for (const auto& junction : cfg.junctions) {
        j["junctions"].push_back({{"theta", junction.theta},
                                  {"phi", junction.phi},
                                  {"incoming", junction.incoming},
                                  {"outgoing", {junction.outgoing[0], junction.outgoing[1]}}});
    }
    j["junction_model"] = to_string(cfg.junction_model);
    j["newton"] = {{"tol", cfg.newton.tol},
                   {"max_iter", cfg.newton.max_iter},
                   {"damping", cfg.newton.damping},
                   {"min_step", cfg.newton.min_step}};
    j["time"] = {{"cfl", cfg.time.cfl},
                 {"t_end", cfg.time.t_end},
                 {"max_steps", cfg.time.max_steps}};
    ordered_json jo;
    switch (cfg.output.cadence) {
        case OutputConfig::Cadence::every_step:
            jo["cadence"] = "every_step";
            break;
        case OutputConfig::Cadence::every_n:
            jo["cadence"] = "every_n";
            jo["every_n"] = cfg.output.every_n;
            break;
        case OutputConfig::Cadence::at_times:
            jo["cadence"] = "times";
            jo["times"] = cfg.output.times;
            break;
    }
    jo["fields"] = cfg.output.fields;
    j["output"] = std::move(jo);
    return j;
}

struct Collector {
    std::vector<ConfigError>& errors;
    void add(const std::string& path, const std::string& message) {
        errors.push_back({path, message});
    }
};

}  // namespace scenario_detail

inline std::string render_config(const ScenarioConfig& cfg) {
    return scenario_detail::to_json(cfg).dump(2) + "\n";
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return render_config(a) == render_config(b);
}

/// Semantic validation. Returns every problem found, not just the first:
/// missing sections, bad dimensions, supercritical initial cells, unresolved
/// junction references and degenerate junction triangles.
inline std::vector<ConfigError> validate_config(const ScenarioConfig& cfg) {
    std::vector<ConfigError> errors;
    scenario_detail::Collector out{errors};

    if (cfg.canals.empty())
        out.add("canals", "at least one canal is required");
    for (std::size_t i = 0; i < cfg.canals.size(); ++i) {
        const auto& canal = cfg.canals[i];
        const std::string base = "canals[" + std::to_string(i) + "]";
        if (canal.name.empty())
            out.add(base + ".name", "canal name must not be empty");
        for (std::size_t k = 0; k < i; ++k)
            if (cfg.canals[k].name == canal.name)
                out.add(base + ".name", "duplicate canal name '" + canal.name + "'");
        if (!(canal.length > 0.0))
            out.add(base + ".length", "length must be positive");
        if (canal.cells < 2)
            out.add(base + ".cells", "at least 2 cells are required");
        if (!(canal.half_width > 0.0))
            out.add(base + ".half_width", "half-width must be positive");
        if (canal.initial.empty()) {
            out.add(base + ".initial", "initial data is required");
            continue;
        }
        double prev = 0.0;
        for (std::size_t s = 0; s < canal.initial.size(); ++s) {
            const auto& seg = canal.initial[s];
            const std::string sp = base + ".initial[" + std::to_string(s) + "]";
            if (!(seg.h > 0.0))
                out.add(sp + ".h", "initial height must be positive");
            else if (!(std::abs(seg.v) < std::sqrt(cfg.physics.g * seg.h)))
                out.add(sp, "initial state is not subcritical (|v| >= sqrt(g h))");
            if (!(seg.x_end > prev))
                out.add(sp + ".x_end", "segment ends must increase");
            prev = seg.x_end;
        }
        if (std::abs(prev - canal.length) > 1e-9 * canal.length)
            out.add(base + ".initial", "segments must cover the canal up to its length");
    }
    if (!(cfg.physics.g > 0.0))
        out.add("physics.g", "gravity must be positive");
    if (!(cfg.time.cfl > 0.0 && cfg.time.cfl <= 1.0))
        out.add("time.cfl", "cfl must lie in (0, 1]");
    if (!(cfg.time.t_end >= 0.0))
        out.add("time.t_end", "final time must be nonnegative");
    if (!(cfg.newton.tol > 0.0))
        out.add("newton.tol", "tolerance must be positive");
    if (cfg.newton.max_iter < 1)
        out.add("newton.max_iter", "at least one iteration is required");
    if (!(cfg.newton.damping > 0.0 && cfg.newton.damping < 1.0))
        out.add("newton.damping", "damping factor must lie in (0, 1)");

    auto canal_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < cfg.canals.size(); ++i)
            if (cfg.canals[i].name == name)
                return static_cast<int>(i);
        return -1;
    };
    for (std::size_t i = 0; i < cfg.junctions.size(); ++i) {
        const auto& junction = cfg.junctions[i];
        const std::string base = "junctions[" + std::to_string(i) + "]";
        const int in = canal_index(junction.incoming);
        const int o0 = canal_index(junction.outgoing[0]);
        const int o1 = canal_index(junction.outgoing[1]);
        if (in < 0)
            out.add(base + ".incoming", "unknown canal '" + junction.incoming + "'");
        if (o0 < 0)
            out.add(base + ".outgoing[0]", "unknown canal '" + junction.outgoing[0] + "'");
        if (o1 < 0)
            out.add(base + ".outgoing[1]", "unknown canal '" + junction.outgoing[1] + "'");
        if (in < 0 || o0 < 0 || o1 < 0)
            continue;
        if (in == o0 || in == o1 || o0 == o1) {
            out.add(base, "a junction must touch three distinct canals");
            continue;
        }
        const JunctionShape shape{junction.theta, junction.phi, cfg.canals[in].half_width,
                                  cfg.canals[o0].half_width, cfg.canals[o1].half_width};
        try {
            (void)build(shape);
        } catch (const std::exception& e) {
            out.add(base, e.what());
        }
    }
    if (cfg.output.cadence == OutputConfig::Cadence::at_times) {
        if (cfg.output.times.empty())
            out.add("output.times", "at least one output time is required");
        for (std::size_t i = 1; i < cfg.output.times.size(); ++i)
            if (!(cfg.output.times[i] > cfg.output.times[i - 1]))
                out.add("output.times", "output times must increase");
    }
    if (cfg.output.cadence == OutputConfig::Cadence::every_n && cfg.output.every_n < 1)
        out.add("output.every_n", "cadence step must be at least 1");
    return errors;
}

/// Parse a JSON scenario document. Syntax problems are reported with line and
/// column; a syntactically valid document is then validated semantically and
/// all findings are returned together.
inline ParseResult parse_config(const std::string& text) {
    namespace sd = scenario_detail;
    ParseResult result;

    sd::ordered_json j;
    try {
        j = sd::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        result.errors.push_back({"line " + std::to_string(line) + ", column " +
                                     std::to_string(col),
                                 e.what()});
        return result;
    }

    ScenarioConfig cfg;
    cfg.output.fields.clear();
    sd::Collector out{result.errors};
    auto require = [&](const sd::ordered_json& node, const char* key,
                       const std::string& path) -> const sd::ordered_json* {
        if (!node.contains(key)) {
            out.add(path.empty() ? key : path + "." + key, "required section is missing");
            return nullptr;
        }
        return &node.at(key);
    };

    try {
        if (j.contains("name"))
            cfg.name = j.at("name").get<std::string>();
        if (const auto* physics = require(j, "physics", ""))
            cfg.physics.g = physics->value("g", 9.81);
        if (const auto* canals = require(j, "canals", "")) {
            for (std::size_t i = 0; i < canals->size(); ++i) {
                const auto& jc = (*canals)[i];
                CanalConfig canal;
                canal.name = jc.value("name", "canal" + std::to_string(i + 1));
                canal.length = jc.value("length", 0.0);
                canal.cells = jc.value("cells", 0);
                canal.half_width = jc.value("half_width", 0.0);
                if (jc.contains("initial"))
                    for (const auto& js : jc.at("initial"))
                        canal.initial.push_back({js.value("x_end", canal.length),
                                                 js.value("h", 0.0), js.value("v", 0.0)});
                cfg.canals.push_back(std::move(canal));
            }
        }
        if (j.contains("junctions")) {
            for (const auto& jj : j.at("junctions")) {
                JunctionConfig junction;
                junction.theta = jj.value("theta", 0.0);
                junction.phi = jj.value("phi", 0.0);
                junction.incoming = jj.value("incoming", "");
                if (jj.contains("outgoing") && jj.at("outgoing").is_array() &&
                    jj.at("outgoing").size() == 2) {
                    junction.outgoing[0] = jj.at("outgoing")[0].get<std::string>();
                    junction.outgoing[1] = jj.at("outgoing")[1].get<std::string>();
                } else {
                    out.add("junctions", "outgoing must list exactly two canals");
                }
                cfg.junctions.push_back(std::move(junction));
            }
        }
        if (j.contains("junction_model")) {
            const std::string m = j.at("junction_model").get<std::string>();
            if (m == "momentum")
                cfg.junction_model = JunctionModel::momentum;
            else if (m == "energy" || m == "equal_energy")
                cfg.junction_model = JunctionModel::equal_energy;
            else
                out.add("junction_model", "expected 'momentum' or 'energy', got '" + m + "'");
        }
        if (j.contains("newton")) {
            const auto& jn = j.at("newton");
            cfg.newton.tol = jn.value("tol", cfg.newton.tol);
            cfg.newton.max_iter = jn.value("max_iter", cfg.newton.max_iter);
            cfg.newton.damping = jn.value("damping", cfg.newton.damping);
            cfg.newton.min_step = jn.value("min_step", cfg.newton.min_step);
        }
        if (const auto* time = require(j, "time", "")) {
            cfg.time.cfl = time->value("cfl", 0.9);
            cfg.time.t_end = time->value("t_end", -1.0);
            cfg.time.max_steps = time->value("max_steps", cfg.time.max_steps);
        }
        if (const auto* output = require(j, "output", "")) {
            const std::string cadence = output->value("cadence", "times");
            if (cadence == "every_step") {
                cfg.output.cadence = OutputConfig::Cadence::every_step;
            } else if (cadence == "every_n") {
                cfg.output.cadence = OutputConfig::Cadence::every_n;
                cfg.output.every_n = output->value("every_n", 1L);
            } else if (cadence == "times") {
                cfg.output.cadence = OutputConfig::Cadence::at_times;
                if (output->contains("times"))
                    cfg.output.times = output->at("times").get<std::vector<double>>();
            } else {
                out.add("output.cadence", "expected 'every_step', 'every_n' or 'times'");
            }
            if (output->contains("fields"))
                cfg.output.fields = output->at("fields").get<std::vector<std::string>>();
            else
                cfg.output.fields = {"h", "q", "v"};
            for (const auto& f : cfg.output.fields)
                if (f != "h" && f != "q" && f != "v")
                    out.add("output.fields", "unknown field '" + f + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        out.add("document", e.what());
        return result;
    }

    auto semantic = validate_config(cfg);
    result.errors.insert(result.errors.end(), semantic.begin(), semantic.end());
    if (result.errors.empty())
        result.config = std::move(cfg);
    return result;
}

// ---------------------------------------------------------------------------
// Presets for the reference experiments

namespace scenario_detail {

inline CanalConfig uniform_canal(const std::string& name, double length, int cells,
                                 double half_width, double h) {
    return {name, length, cells, half_width, {{length, h, 0.0}}};
}

inline CanalConfig dam_break_canal(const std::string& name, double length, int cells,
                                   double half_width, double h_left, double h_right) {
    return {name, length, cells, half_width,
            {{0.5 * length, h_left, 0.0}, {length, h_right, 0.0}}};
}

inline ScenarioConfig junction_scenario(const std::string& name, double theta, double phi,
                                        double s1, double s2, double s3, double length,
                                        int cells, double t_end) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.canals = {dam_break_canal("canal1", length, cells, s1, 1.5, 1.0),
                  uniform_canal("canal2", length, cells, s2, 1.0),
                  uniform_canal("canal3", length, cells, s3, 1.0)};
    cfg.junctions = {{theta, phi, "canal1", {"canal2", "canal3"}}};
    cfg.time.t_end = t_end;
    cfg.output.cadence = OutputConfig::Cadence::at_times;
    cfg.output.times = {0.0, 0.5 * t_end, t_end};
    return cfg;
}

}  // namespace scenario_detail

/// Named configurations of the reference experiments. Symmetric-angle and
/// merging families keep the through length (incoming plus outgoing canal)
/// at 5 so the dam-break wave interacts with the junction before the final
/// time; the convergence and 1D/2D-comparison setups use the stated lengths.
inline std::vector<std::string> preset_names() {
    return {"test71",
            "test72-single",
            "test72-theta0",
            "test72-theta1",
            "test72-theta2",
            "test72-theta3",
            "test72-asym-phi1",
            "test72-asym-phi2",
            "test72-asym-phi3",
            "test72-width-s3=0.5",
            "test72-width-s3=1",
            "test72-width-s3=1.5",
            "test72-width-s3=2",
            "test73-phi0",
            "test73-phi1",
            "test73-phi2",
            "test73-phi3",
            "test74-diverge",
            "test74-merge"};
}

inline std::optional<ScenarioConfig> make_preset(const std::string& name) {
    namespace sd = scenario_detail;
    const double pi = M_PI;

    if (name == "test71")
        return sd::junction_scenario(name, pi / 6, -pi / 6, 1.0, 1.0, 1.0, 3.5, 96, 0.9);

    if (name == "test72-single") {
        ScenarioConfig cfg;
        cfg.name = name;
        cfg.canals = {sd::dam_break_canal("canal1", 5.0, 500, 1.0, 1.5, 1.0)};
        // dam at the quarter point, matching the network runs by arclength
        cfg.canals[0].initial = {{1.25, 1.5, 0.0}, {5.0, 1.0, 0.0}};
        cfg.time.t_end = 0.5;
        cfg.output.times = {0.0, 0.25, 0.5};
        return cfg;
    }
    for (int k = 0; k <= 3; ++k) {
        const double theta[] = {0.0, pi / 12, pi / 6, pi / 3};
        if (name == "test72-theta" + std::to_string(k))
            return sd::junction_scenario(name, theta[k], -theta[k], 1.0, 0.5, 0.5, 2.5, 250,
                                         0.5);
    }
    for (int k = 1; k <= 3; ++k)
        if (name == "test72-asym-phi" + std::to_string(k))
            return sd::junction_scenario(name, pi / 8, -k * pi / 8, 1.0, 0.5, 0.5, 2.5, 250,
                                         0.5);
    for (const char* w : {"0.5", "1", "1.5", "2"})
        if (name == std::string("test72-width-s3=") + w)
            return sd::junction_scenario(name, pi / 4, -pi / 4, 1.0, 1.0, std::stod(w), 2.5,
                                         250, 0.5);
    for (int k = 0; k <= 3; ++k) {
        const double phi[] = {-pi / 3, -pi / 6, -pi / 12, 0.0};
        if (name == "test73-phi" + std::to_string(k)) {
            ScenarioConfig cfg =
                sd::junction_scenario(name, pi / 3, phi[k], 1.0, 1.0, 1.0, 2.5, 250, 0.5);
            // Merging data: dam breaks on canals 1 and 3, canal 2 at rest.
            cfg.canals[2] = sd::dam_break_canal("canal3", 2.5, 250, 1.0, 1.5, 1.0);
            return cfg;
        }
    }
    if (name == "test74-diverge")
        return sd::junction_scenario(name, pi / 3, -pi / 12, 1.0, 1.0, 1.0, 5.0, 500, 1.5);
    if (name == "test74-merge") {
        ScenarioConfig cfg = sd::junction_scenario(name, 5 * pi / 12, -3 * pi / 8, 1.0, 1.0,
                                                   1.0, 5.0, 500, 1.5);
        cfg.canals[2] = sd::dam_break_canal("canal3", 5.0, 500, 1.0, 1.5, 1.0);
        return cfg;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Running a scenario and persisting artifacts

struct CanalSeries {
    std::string name;
    std::vector<double> x;  // cell centers
    std::vector<double> times;
    std::vector<std::vector<State>> snapshots;  // one state vector per time
};

struct JunctionLogRow {
    double t = 0.0;
    Vec6 x;
    int iterations = 0;
    double residual = 0.0;
    double determinant = 0.0;
};

struct RunArtifacts {
    std::filesystem::path out_dir;
    ScenarioConfig config;
    std::vector<CanalSeries> canals;
    std::vector<std::vector<JunctionLogRow>> junction_logs;
    nlohmann::ordered_json manifest;
};

namespace scenario_detail {

inline std::string fmt17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline NetworkState network_from_config(const ScenarioConfig& cfg) {
    std::vector<Canal> canals;
    for (const auto& cc : cfg.canals) {
        Canal canal;
        canal.name = cc.name;
        canal.length = cc.length;
        canal.cells = cc.cells;
        canal.half_width = cc.half_width;
        canal.u.resize(cc.cells);
        const double dx = cc.length / cc.cells;
        for (int i = 0; i < cc.cells; ++i) {
            const double xc = (i + 0.5) * dx;
            const InitialSegment* seg = &cc.initial.back();
            for (const auto& candidate : cc.initial) {
                if (xc <= candidate.x_end) {
                    seg = &candidate;
                    break;
                }
            }
            canal.u[i] = {seg->h, seg->h * seg->v};
        }
        canals.push_back(std::move(canal));
    }
    std::vector<JunctionSpecEntry> junctions;
    auto index_of = [&](const std::string& name) {
        for (std::size_t i = 0; i < canals.size(); ++i)
            if (canals[i].name == name)
                return static_cast<int>(i);
        throw std::invalid_argument("unknown canal '" + name + "'");
    };
    for (const auto& jc : cfg.junctions)
        junctions.push_back({jc.theta, jc.phi, index_of(jc.incoming),
                             {index_of(jc.outgoing[0]), index_of(jc.outgoing[1])},
                             cfg.junction_model});
    return make_network(std::move(canals), junctions);
}

inline void write_artifacts(RunArtifacts& artifacts) {
    namespace fs = std::filesystem;
    fs::create_directories(artifacts.out_dir);
    const auto& fields = artifacts.config.output.fields;

    for (const auto& series : artifacts.canals) {
        std::ofstream file(artifacts.out_dir / (series.name + ".csv"));
        file << "t,x";
        for (const auto& f : fields)
            file << "," << f;
        file << "\n";
        for (std::size_t ti = 0; ti < series.times.size(); ++ti) {
            for (std::size_t i = 0; i < series.x.size(); ++i) {
                const State& u = series.snapshots[ti][i];
                file << fmt17(series.times[ti]) << "," << fmt17(series.x[i]);
                for (const auto& f : fields) {
                    const double value = f == "h" ? u.h : f == "q" ? u.q : u.q / u.h;
                    file << "," << fmt17(value);
                }
                file << "\n";
            }
        }
    }
    for (std::size_t j = 0; j < artifacts.junction_logs.size(); ++j) {
        std::ofstream file(artifacts.out_dir / ("junction" + std::to_string(j) + ".csv"));
        file << "t,h1,h2,h3,v1,v2,v3,iterations,residual,det\n";
        for (const auto& row : artifacts.junction_logs[j]) {
            file << fmt17(row.t);
            for (int i = 0; i < 6; ++i)
                file << "," << fmt17(row.x[i]);
            file << "," << row.iterations << "," << fmt17(row.residual) << ","
                 << fmt17(row.determinant) << "\n";
        }
    }
    std::ofstream manifest(artifacts.out_dir / "manifest.json");
    manifest << artifacts.manifest.dump(2) << "\n";
}

}  // namespace scenario_detail

/// Run a validated scenario and write one delimited table per canal, one log
/// per junction and a manifest echoing every number needed to reproduce the
/// run. Outputs are deterministic: identical configs give identical files.
/// On simulation failure the partial outputs and a failure manifest are still
/// written before the error propagates.
inline RunArtifacts run_scenario(const ScenarioConfig& cfg,
                                 const std::filesystem::path& out_dir) {
    namespace sd = scenario_detail;
    {
        auto errors = validate_config(cfg);
        if (!errors.empty())
            throw std::invalid_argument("run_scenario: invalid config: " + errors.front().path +
                                        ": " + errors.front().message);
    }

    RunArtifacts artifacts;
    artifacts.out_dir = out_dir;
    artifacts.config = cfg;

    NetworkState net = sd::network_from_config(cfg);
    for (const auto& canal : net.canals) {
        CanalSeries series;
        series.name = canal.name;
        for (int i = 0; i < canal.cells; ++i)
            series.x.push_back((i + 0.5) * canal.dx());
        artifacts.canals.push_back(std::move(series));
    }
    artifacts.junction_logs.resize(net.junctions.size());

    OutputSchedule schedule;
    switch (cfg.output.cadence) {
        case OutputConfig::Cadence::every_step:
            schedule = {};
            break;
        case OutputConfig::Cadence::every_n:
            schedule = OutputSchedule::every(cfg.output.every_n);
            break;
        case OutputConfig::Cadence::at_times:
            schedule = OutputSchedule::at(cfg.output.times);
            break;
    }

    Observer observer = [&](const NetworkState& s) {
        for (std::size_t k = 0; k < s.canals.size(); ++k) {
            artifacts.canals[k].times.push_back(s.time);
            artifacts.canals[k].snapshots.push_back(s.canals[k].u);
        }
    };
    StepHook hook = [&](const NetworkState& s) {
        for (std::size_t j = 0; j < s.junctions.size(); ++j) {
            const auto& junction = s.junctions[j];
            artifacts.junction_logs[j].push_back({s.time, junction.last.x,
                                                  junction.last.iterations,
                                                  junction.last.residual_norm,
                                                  junction.last_determinant});
        }
    };

    auto manifest_base = [&]() {
        nlohmann::ordered_json m;
        m["version"] = version_string;
        m["name"] = cfg.name;
        m["config"] = sd::to_json(cfg);
        return m;
    };

    const auto start = std::chrono::steady_clock::now();
    try {
        run(net, cfg.time, cfg.physics, cfg.newton, observer, schedule, hook);
    } catch (const std::exception& e) {
        artifacts.manifest = manifest_base();
        artifacts.manifest["status"] = "failed";
        artifacts.manifest["failure"] = {{"step", net.step_count},
                                         {"time", net.time},
                                         {"message", e.what()}};
        sd::write_artifacts(artifacts);
        throw;
    }
    const auto stop = std::chrono::steady_clock::now();

    artifacts.manifest = manifest_base();
    artifacts.manifest["status"] = "ok";
    artifacts.manifest["steps"] = net.step_count;
    artifacts.manifest["wall_seconds"] =
        std::chrono::duration<double>(stop - start).count();
    sd::write_artifacts(artifacts);
    return artifacts;
}

}  // namespace canal

#endif  // CANAL_SCENARIO_HPP
