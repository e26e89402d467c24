#ifndef CANAL_COMPARE_HPP
#define CANAL_COMPARE_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace canal {

/// One canal's tabulated output: columns t, x plus named fields, one block of
/// rows per output time on a fixed cell-center grid.
struct CanalTable {
    std::string name;
    std::vector<std::string> fields;
    std::vector<double> times;
    std::vector<double> x;
    // values[time][field][cell]
    std::vector<std::vector<std::vector<double>>> values;

    double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
    double length() const { return x.empty() ? 0.0 : x.back() + 0.5 * dx(); }

    int field_index(const std::string& f) const {
        for (std::size_t i = 0; i < fields.size(); ++i)
            if (fields[i] == f)
                return static_cast<int>(i);
        return -1;
    }
};

struct NormTriple {
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

struct CompareEntry {
    std::string canal;
    double time = 0.0;
    std::string field;
    NormTriple norms;
};

struct CompareReport {
    std::vector<CompareEntry> entries;

    NormTriple max_norms() const {
        NormTriple m;
        for (const auto& e : entries) {
            m.l1 = std::max(m.l1, e.norms.l1);
            m.l2 = std::max(m.l2, e.norms.l2);
            m.linf = std::max(m.linf, e.norms.linf);
        }
        return m;
    }
};

struct CompareOptions {
    bool allow_interpolation = false;  // linear interpolation for non-nested grids
    std::vector<std::string> fields;   // empty: every common field
};

inline CanalTable read_canal_table(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file)
        throw std::runtime_error("cannot open " + path.string());
    CanalTable table;
    table.name = path.stem().string();

    std::string line;
    if (!std::getline(file, line))
        throw std::runtime_error(path.string() + ": empty file");
    {
        std::stringstream header(line);
        std::string col;
        std::vector<std::string> cols;
        while (std::getline(header, col, ','))
            cols.push_back(col);
        if (cols.size() < 3 || cols[0] != "t" || cols[1] != "x")
            throw std::runtime_error(path.string() + ": expected header starting with t,x");
        table.fields.assign(cols.begin() + 2, cols.end());
    }

    bool first_block = true;
    std::size_t cell = 0;
    while (std::getline(file, line)) {
        if (line.empty())
            continue;
        std::vector<double> row;
        const char* p = line.c_str();
        char* end = nullptr;
        while (true) {
            row.push_back(std::strtod(p, &end));
            if (*end != ',')
                break;
            p = end + 1;
        }
        if (row.size() != table.fields.size() + 2)
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        const double t = row[0];
        if (table.times.empty() || t != table.times.back()) {
            table.times.push_back(t);
            table.values.emplace_back(table.fields.size());
            if (!first_block && cell != table.x.size())
                throw std::runtime_error(path.string() + ": ragged time block");
            first_block = table.x.empty();
            cell = 0;
        }
        if (first_block)
            table.x.push_back(row[1]);
        ++cell;
        for (std::size_t f = 0; f < table.fields.size(); ++f)
            table.values.back()[f].push_back(row[2 + f]);
    }
    return table;
}

namespace compare_detail {

inline bool nearly(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// Map one field vector onto a target grid. Nested grids (integer refinement
/// of the same interval) are restricted by conservative cell averaging;
/// anything else needs interpolation to be enabled.
inline std::vector<double> to_grid(const std::vector<double>& x_from,
                                   const std::vector<double>& v,
                                   const std::vector<double>& x_to, bool allow_interp) {
    if (x_from.size() == x_to.size()) {
        bool same = true;
        for (std::size_t i = 0; i < x_to.size(); ++i)
            if (!nearly(x_from[i], x_to[i], 1e-9 * std::max(1.0, std::abs(x_to[i]))))
                same = false;
        if (same)
            return v;
    }
    if (x_from.size() > x_to.size() && x_from.size() % x_to.size() == 0) {
        const std::size_t ratio = x_from.size() / x_to.size();
        const double dx_from = x_from.size() > 1 ? x_from[1] - x_from[0] : 0.0;
        const double dx_to = x_to.size() > 1 ? x_to[1] - x_to[0] : 0.0;
        if (nearly(dx_from * ratio, dx_to, 1e-9 * dx_to)) {
            std::vector<double> out(x_to.size());
            for (std::size_t i = 0; i < x_to.size(); ++i) {
                double acc = 0.0;
                for (std::size_t k = 0; k < ratio; ++k)
                    acc += v[i * ratio + k];
                out[i] = acc / ratio;
            }
            return out;
        }
    }
    if (!allow_interp)
        throw std::runtime_error(
            "incompatible output grids; pass --interpolate to map between them");
    std::vector<double> out(x_to.size());
    for (std::size_t i = 0; i < x_to.size(); ++i) {
        const double xc = x_to[i];
        auto it = std::lower_bound(x_from.begin(), x_from.end(), xc);
        if (it == x_from.begin())
            out[i] = v.front();
        else if (it == x_from.end())
            out[i] = v.back();
        else {
            const std::size_t hi = it - x_from.begin();
            const double w = (xc - x_from[hi - 1]) / (x_from[hi] - x_from[hi - 1]);
            out[i] = (1.0 - w) * v[hi - 1] + w * v[hi];
        }
    }
    return out;
}

inline NormTriple diff_norms(const std::vector<double>& a, const std::vector<double>& b,
                             double dx) {
    NormTriple n;
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        n.l1 += d * dx;
        sq += d * d * dx;
        n.linf = std::max(n.linf, d);
    }
    n.l2 = std::sqrt(sq);
    return n;
}

inline std::vector<double> field_or_speed(const CanalTable& t, std::size_t ti,
                                          const std::string& field) {
    if (field == "speed") {
        const int vx = t.field_index("vx"), vy = t.field_index("vy");
        if (vx >= 0 && vy >= 0) {
            std::vector<double> s(t.x.size());
            for (std::size_t i = 0; i < s.size(); ++i)
                s[i] = std::hypot(t.values[ti][vx][i], t.values[ti][vy][i]);
            return s;
        }
        const int v = t.field_index("v");
        if (v >= 0) {
            std::vector<double> s = t.values[ti][v];
            for (double& e : s)
                e = std::abs(e);
            return s;
        }
        throw std::runtime_error(t.name + ": no velocity columns for speed comparison");
    }
    const int f = t.field_index(field);
    if (f < 0)
        throw std::runtime_error(t.name + ": missing field " + field);
    return t.values[ti][f];
}

inline std::vector<std::filesystem::path> canal_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string stem = entry.path().stem().string();
        if (entry.path().extension() == ".csv" && stem.rfind("junction", 0) != 0)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Concatenate two canals end to end (incoming canal first, outgoing canal
/// shifted by the incoming length) into one table along the through path.
inline CanalTable concat_path(const CanalTable& in, const CanalTable& out,
                              const std::string& name) {
    CanalTable path;
    path.name = name;
    path.fields = in.fields;
    path.times = in.times;
    path.x = in.x;
    const double offset = in.length();
    for (double xc : out.x)
        path.x.push_back(offset + xc);
    path.values.resize(in.times.size());
    for (std::size_t ti = 0; ti < in.times.size(); ++ti) {
        for (std::size_t f = 0; f < in.fields.size(); ++f) {
            std::vector<double> joined = in.values[ti][f];
            const auto& tail = out.values[ti][f];
            joined.insert(joined.end(), tail.begin(), tail.end());
            path.values[ti].push_back(std::move(joined));
        }
    }
    return path;
}

inline std::optional<nlohmann::json> read_manifest(const std::filesystem::path& dir) {
    std::ifstream file(dir / "manifest.json");
    if (!file)
        return std::nullopt;
    try {
        return nlohmann::json::parse(file);
    } catch (...) {
        return std::nullopt;
    }
}

inline void compare_tables(const CanalTable& a, const CanalTable& b,
                           const CompareOptions& opts, CompareReport& report) {
    // Compare on the coarser grid and on common output times.
    const bool a_coarse = a.x.size() <= b.x.size();
    const CanalTable& coarse = a_coarse ? a : b;
    const CanalTable& fine = a_coarse ? b : a;

    std::vector<std::string> fields = opts.fields;
    if (fields.empty()) {
        const bool sample_2d = fine.field_index("vx") >= 0 || coarse.field_index("vx") >= 0;
        if (sample_2d) {
            fields = {"h", "speed"};
        } else {
            for (const auto& f : a.fields)
                if (b.field_index(f) >= 0)
                    fields.push_back(f);
        }
    }

    bool any_time = false;
    for (std::size_t ta = 0; ta < coarse.times.size(); ++ta) {
        std::size_t tb = fine.times.size();
        for (std::size_t i = 0; i < fine.times.size(); ++i)
            if (nearly(fine.times[i], coarse.times[ta], 1e-9 * std::max(1.0, coarse.times[ta])))
                tb = i;
        if (tb == fine.times.size())
            continue;
        any_time = true;
        for (const auto& f : fields) {
            const auto va = field_or_speed(coarse, ta, f);
            const auto vb = to_grid(fine.x, field_or_speed(fine, tb, f), coarse.x,
                                    opts.allow_interpolation);
            report.entries.push_back(
                {a.name, coarse.times[ta], f, diff_norms(va, vb, coarse.dx())});
        }
    }
    if (!any_time)
        throw std::runtime_error("runs share no output times for canal " + a.name);
}

}  // namespace compare_detail

/// Compare two run directories canal by canal. Special cases: a single-canal
/// run against a one-junction network run is compared along the two through
/// paths (incoming canal joined with each outgoing canal), and directories of
/// imported mid-channel samples with vx/vy columns are compared on height and
/// velocity magnitude.
inline CompareReport compare_runs(const std::filesystem::path& dir_a,
                                  const std::filesystem::path& dir_b,
                                  const CompareOptions& opts = {}) {
    namespace cd = compare_detail;
    CompareReport report;

    std::vector<CanalTable> tables_a, tables_b;
    for (const auto& f : cd::canal_files(dir_a))
        tables_a.push_back(read_canal_table(f));
    for (const auto& f : cd::canal_files(dir_b))
        tables_b.push_back(read_canal_table(f));
    if (tables_a.empty() || tables_b.empty())
        throw std::runtime_error("no canal tables found to compare");

    auto find = [](std::vector<CanalTable>& tables, const std::string& name) -> CanalTable* {
        for (auto& t : tables)
            if (t.name == name)
                return &t;
        return nullptr;
    };

    bool same_names = tables_a.size() == tables_b.size();
    if (same_names)
        for (const auto& t : tables_a)
            if (!find(tables_b, t.name))
                same_names = false;

    if (same_names) {
        for (auto& ta : tables_a)
            cd::compare_tables(ta, *find(tables_b, ta.name), opts, report);
        return report;
    }

    // Single canal vs one-junction network: join the network canals into the
    // two through paths using the topology recorded in its manifest.
    const bool a_single = tables_a.size() == 1;
    auto& single = a_single ? tables_a : tables_b;
    auto& network = a_single ? tables_b : tables_a;
    const auto manifest = cd::read_manifest(a_single ? dir_b : dir_a);
    if (single.size() == 1 && network.size() == 3 && manifest &&
        manifest->contains("config") && (*manifest)["config"].contains("junctions") &&
        (*manifest)["config"]["junctions"].size() == 1) {
        const auto& jj = (*manifest)["config"]["junctions"][0];
        const CanalTable* in = find(network, jj["incoming"].get<std::string>());
        const CanalTable* o0 = find(network, jj["outgoing"][0].get<std::string>());
        const CanalTable* o1 = find(network, jj["outgoing"][1].get<std::string>());
        if (!in || !o0 || !o1)
            throw std::runtime_error("network manifest references missing canal tables");
        cd::compare_tables(cd::concat_path(*in, *o0, in->name + "+" + o0->name), single[0],
                           opts, report);
        cd::compare_tables(cd::concat_path(*in, *o1, in->name + "+" + o1->name), single[0],
                           opts, report);
        return report;
    }
    throw std::runtime_error("run directories have incompatible canal sets");
}

/// L1 self-differences and observed convergence orders for a refinement
/// ladder of run directories (coarsest first).
struct LadderResult {
    std::string canal;
    std::string field;
    double time = 0.0;
    std::vector<double> l1;     // successive pair differences
    std::vector<double> order;  // log2 ratios of successive differences
};

inline std::vector<LadderResult> refinement_ladder(
    const std::vector<std::filesystem::path>& dirs, const std::string& field,
    const CompareOptions& opts = {}) {
    if (dirs.size() < 3)
        throw std::runtime_error("a refinement ladder needs at least three runs");
    CompareOptions o = opts;
    o.fields = {field};

    std::map<std::pair<std::string, double>, LadderResult> acc;
    for (std::size_t i = 0; i + 1 < dirs.size(); ++i) {
        const CompareReport r = compare_runs(dirs[i], dirs[i + 1], o);
        for (const auto& e : r.entries) {
            auto& slot = acc[{e.canal, e.time}];
            slot.canal = e.canal;
            slot.field = field;
            slot.time = e.time;
            slot.l1.push_back(e.norms.l1);
        }
    }
    std::vector<LadderResult> results;
    for (auto& [key, slot] : acc) {
        for (std::size_t i = 0; i + 1 < slot.l1.size(); ++i)
            slot.order.push_back(std::log2(slot.l1[i] / slot.l1[i + 1]));
        results.push_back(std::move(slot));
    }
    return results;
}

}  // namespace canal

#endif  // CANAL_COMPARE_HPP
