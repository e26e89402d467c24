// canal-sim: run junction scenarios, validate configs and compare outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "canal/compare.hpp"
#include "canal/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_simulation = 2;

std::optional<canal::ScenarioConfig> load_config(const std::string& arg,
                                                 std::vector<canal::ConfigError>& errors) {
    if (auto preset = canal::make_preset(arg))
        return preset;
    std::ifstream file(arg);
    if (!file) {
        errors.push_back({arg, "no such preset or config file"});
        return std::nullopt;
    }
    std::stringstream ss;
    ss << file.rdbuf();
    auto result = canal::parse_config(ss.str());
    errors = std::move(result.errors);
    return result.config;
}

void print_errors(const std::vector<canal::ConfigError>& errors) {
    for (const auto& e : errors)
        std::cerr << "error: " << e.path << ": " << e.message << "\n";
}

struct PresetRow {
    std::string name;
    std::string summary;
};

std::string describe(const canal::ScenarioConfig& cfg) {
    std::ostringstream out;
    if (cfg.junctions.empty()) {
        out << "single canal, L=" << cfg.canals[0].length;
    } else {
        const auto& j = cfg.junctions[0];
        out << "theta=" << j.theta << ", phi=" << j.phi << ", s=(" << cfg.canals[0].half_width
            << "," << cfg.canals[1].half_width << "," << cfg.canals[2].half_width
            << "), L=" << cfg.canals[0].length;
    }
    out << ", T=" << cfg.time.t_end;
    return out.str();
}

int cmd_run(const std::string& source, std::string out_dir, double cfl_override,
            int cells_override, const std::string& junction_override) {
    std::vector<canal::ConfigError> errors;
    auto cfg = load_config(source, errors);
    if (!cfg) {
        print_errors(errors);
        return exit_validation;
    }
    if (cfl_override > 0.0)
        cfg->time.cfl = cfl_override;
    if (cells_override > 0)
        for (auto& c : cfg->canals)
            c.cells = cells_override;
    if (junction_override == "momentum")
        cfg->junction_model = canal::JunctionModel::momentum;
    else if (junction_override == "energy")
        cfg->junction_model = canal::JunctionModel::equal_energy;

    errors = canal::validate_config(*cfg);
    if (!errors.empty()) {
        print_errors(errors);
        return exit_validation;
    }

    if (out_dir.empty())
        out_dir = "out-" + cfg->name;
    try {
        const auto artifacts = canal::run_scenario(*cfg, out_dir);
        std::cout << cfg->name << ": " << artifacts.manifest["steps"].get<long>()
                  << " steps, t_end=" << cfg->time.t_end << ", outputs in " << out_dir
                  << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "simulation failed: " << e.what() << "\n";
        std::cerr << "partial outputs and manifest written to " << out_dir << "\n";
        return exit_simulation;
    }
}

int cmd_validate(const std::string& source) {
    std::vector<canal::ConfigError> errors;
    auto cfg = load_config(source, errors);
    if (!cfg) {
        print_errors(errors);
        return exit_validation;
    }
    std::cout << source << ": valid (" << cfg->canals.size() << " canals, "
              << cfg->junctions.size() << " junctions)\n";
    return exit_ok;
}

int cmd_presets() {
    for (const auto& name : canal::preset_names()) {
        const auto cfg = canal::make_preset(name);
        std::printf("%-22s %s\n", name.c_str(), describe(*cfg).c_str());
    }
    return exit_ok;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& norms,
                const std::string& fields, bool interpolate) {
    canal::CompareOptions opts;
    opts.allow_interpolation = interpolate;
    if (!fields.empty()) {
        std::stringstream ss(fields);
        std::string f;
        while (std::getline(ss, f, ','))
            opts.fields.push_back(f);
    }
    auto wants = [&](const char* n) {
        return norms.empty() || norms.find(n) != std::string::npos;
    };

    try {
        if (dirs.size() == 2) {
            const auto report = canal::compare_runs(dirs[0], dirs[1], opts);
            std::printf("%-18s %-10s %-6s", "canal", "time", "field");
            if (wants("l1"))
                std::printf(" %-13s", "l1");
            if (wants("l2"))
                std::printf(" %-13s", "l2");
            if (wants("linf"))
                std::printf(" %-13s", "linf");
            std::printf("\n");
            for (const auto& e : report.entries) {
                std::printf("%-18s %-10.6g %-6s", e.canal.c_str(), e.time, e.field.c_str());
                if (wants("l1"))
                    std::printf(" %-13.6e", e.norms.l1);
                if (wants("l2"))
                    std::printf(" %-13.6e", e.norms.l2);
                if (wants("linf"))
                    std::printf(" %-13.6e", e.norms.linf);
                std::printf("\n");
            }
            return exit_ok;
        }
        // three or more directories form a refinement ladder
        const std::string field = opts.fields.empty() ? "h" : opts.fields.front();
        std::vector<fs::path> paths(dirs.begin(), dirs.end());
        const auto ladder = canal::refinement_ladder(paths, field, opts);
        for (const auto& row : ladder) {
            std::printf("%s t=%.6g field=%s\n", row.canal.c_str(), row.time,
                        row.field.c_str());
            for (std::size_t i = 0; i < row.l1.size(); ++i) {
                std::printf("  L1(%zu,%zu) = %.6e", i, i + 1, row.l1[i]);
                if (i > 0 && row.l1[i - 1] > 0.0 && row.l1[i] > 0.0)
                    std::printf("   order = %.3f", row.order[i - 1]);
                std::printf("\n");
            }
        }
        return exit_ok;
    } catch (const std::exception& e) {
        std::cerr << "compare failed: " << e.what() << "\n";
        return exit_validation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D shallow-water canal network simulator with an angle-dependent "
                 "junction Riemann solver"};
    app.require_subcommand(1);

    std::string source, out_dir, junction_model, norms, fields;
    double cfl = -1.0;
    int cells = -1;
    bool interpolate = false;
    std::vector<std::string> dirs;
    std::string presets_action = "list";

    auto* run = app.add_subcommand("run", "run a scenario config or preset");
    run->add_option("config", source, "config file or preset name")->required();
    run->add_option("--out", out_dir, "output directory (default out-<name>)");
    run->add_option("--cfl", cfl, "override the Courant number");
    run->add_option("--cells", cells, "override the per-canal cell count");
    run->add_option("--junction", junction_model, "junction model: momentum|energy")
        ->check(CLI::IsMember({"momentum", "energy"}));

    auto* compare = app.add_subcommand("compare", "compare two runs, or a refinement ladder");
    compare->add_option("dirs", dirs, "run directories")->expected(2, -1);
    compare->add_option("--norms", norms, "subset of l1,l2,linf to print");
    compare->add_option("--fields", fields, "fields to compare (default: all common)");
    compare->add_flag("--interpolate", interpolate, "allow non-nested grid interpolation");

    auto* presets = app.add_subcommand("presets", "list the built-in scenarios");
    presets->add_option("action", presets_action)->check(CLI::IsMember({"list"}));

    auto* validate = app.add_subcommand("validate", "check a scenario config");
    validate->add_option("config", source, "config file or preset name")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return cmd_run(source, out_dir, cfl, cells, junction_model);
    if (compare->parsed())
        return cmd_compare(dirs, norms, fields, interpolate);
    if (presets->parsed())
        return cmd_presets();
    if (validate->parsed())
        return cmd_validate(source);
    return exit_ok;
}
