// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities next to the pinned thresholds.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "canal/compare.hpp"
#include "canal/network.hpp"
#include "canal/scenario.hpp"

using namespace canal;

namespace {

namespace fs = std::filesystem;
const PhysicalConstants g_std{9.81};
constexpr double pi = M_PI;

fs::path work_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("canal-acceptance-" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void report(int criterion, const std::string& name, bool pass, const std::string& details) {
    std::printf("[acceptance] criterion %d (%s): %s  %s\n", criterion, name.c_str(),
                pass ? "PASS" : "FAIL", details.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

CanalConfig uniform_canal(const std::string& name, double length, int cells,
                          double half_width, double h) {
    return {name, length, cells, half_width, {{length, h, 0.0}}};
}

CanalConfig dam_canal(const std::string& name, double length, int cells, double half_width,
                      double dam_x, double h_left, double h_right) {
    return {name, length, cells, half_width,
            {{dam_x, h_left, 0.0}, {length, h_right, 0.0}}};
}

ScenarioConfig junction_config(const std::string& name, double theta, double phi, double s1,
                               double s2, double s3, double length, int cells, double t_end,
                               std::vector<double> times) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.canals = {dam_canal("canal1", length, cells, s1, 0.5 * length, 1.5, 1.0),
                  uniform_canal("canal2", length, cells, s2, 1.0),
                  uniform_canal("canal3", length, cells, s3, 1.0)};
    cfg.junctions = {{theta, phi, "canal1", {"canal2", "canal3"}}};
    cfg.time.t_end = t_end;
    cfg.output.times = std::move(times);
    return cfg;
}

double linf_between_runs(const RunArtifacts& a, const RunArtifacts& b) {
    double dmax = 0.0;
    for (std::size_t k = 0; k < a.canals.size(); ++k)
        for (std::size_t t = 0; t < a.canals[k].snapshots.size(); ++t)
            for (std::size_t i = 0; i < a.canals[k].x.size(); ++i) {
                const State& ua = a.canals[k].snapshots[t][i];
                const State& ub = b.canals[k].snapshots[t][i];
                dmax = std::max({dmax, std::abs(ua.h - ub.h), std::abs(ua.q - ub.q)});
            }
    return dmax;
}

}  // namespace

TEST_CASE("criterion 1: lake at rest") {
    Stopwatch clock;
    std::vector<Canal> canals;
    for (int k = 0; k < 3; ++k) {
        Canal c;
        c.name = "canal" + std::to_string(k + 1);
        c.length = 1.0;
        c.cells = 50;
        c.half_width = k == 0 ? 1.0 : (k == 1 ? 0.8 : 1.3);
        c.u.assign(c.cells, State{1.0, 0.0});
        canals.push_back(std::move(c));
    }
    NetworkState net = make_network(std::move(canals), {{pi / 5, -pi / 7, 0, {1, 2}}});
    TimeControls tc{0.9, 1e12, 1000};
    run(net, tc, g_std);

    double dev_h = 0.0, dev_q = 0.0;
    for (const auto& c : net.canals)
        for (const auto& u : c.u) {
            dev_h = std::max(dev_h, std::abs(u.h - 1.0));
            dev_q = std::max(dev_q, std::abs(u.q));
        }
    const double elapsed = clock.seconds();
    const bool pass =
        net.step_count == 1000 && dev_h <= 1e-13 && dev_q <= 1e-13 && elapsed < 5.0;
    report(1, "lake at rest", pass,
           fmt("max|h-1|=%.2e max|q|=%.2e (tol 1e-13), %ld steps, %.2fs (limit 5s)", dev_h,
               dev_q, net.step_count, elapsed));
    REQUIRE(net.step_count == 1000);
    REQUIRE(dev_h <= 1e-13);
    REQUIRE(dev_q <= 1e-13);
    REQUIRE(elapsed < 5.0);
}

TEST_CASE("criterion 2: straight-channel equivalence") {
    Stopwatch clock;
    const std::vector<double> times{0.0, 0.225, 0.45, 0.675, 0.9};
    ScenarioConfig network = junction_config("straight-net", 0.0, 0.0, 1.0, 1.0, 1.0, 3.5,
                                             350, 0.9, times);
    ScenarioConfig single;
    single.name = "straight-single";
    single.canals = {dam_canal("long", 7.0, 700, 1.0, 1.75, 1.5, 1.0)};
    single.time.t_end = 0.9;
    single.output.times = times;

    const fs::path dir_net = work_dir("c2-net");
    const fs::path dir_single = work_dir("c2-single");
    run_scenario(network, dir_net);
    run_scenario(single, dir_single);

    const CompareReport rep = compare_runs(dir_net, dir_single);
    const double linf = rep.max_norms().linf;
    const double elapsed = clock.seconds();
    const bool pass = linf <= 1e-9 && elapsed < 10.0;
    report(2, "straight-channel equivalence", pass,
           fmt("Linf(network - single canal)=%.2e over %zu comparisons (tol 1e-9), %.2fs "
               "(limit 10s)",
               linf, rep.entries.size(), elapsed));
    REQUIRE_FALSE(rep.entries.empty());
    REQUIRE(linf <= 1e-9);
    REQUIRE(elapsed < 10.0);
}

TEST_CASE("criterion 3: orthogonal equivalence of junction closures") {
    Stopwatch clock;
    auto run_pair = [&](double angle, const char* tag) {
        ScenarioConfig cfg = junction_config(tag, angle, -angle, 1.0, 1.0, 1.0, 2.5, 250,
                                             0.5, {0.0, 0.25, 0.5});
        const fs::path dir_m = work_dir(std::string(tag) + "-momentum");
        cfg.junction_model = JunctionModel::momentum;
        const RunArtifacts momentum = run_scenario(cfg, dir_m);
        const fs::path dir_e = work_dir(std::string(tag) + "-energy");
        cfg.junction_model = JunctionModel::equal_energy;
        const RunArtifacts energy = run_scenario(cfg, dir_e);
        return linf_between_runs(momentum, energy);
    };

    const double d_orth = run_pair(pi / 3, "c3-orth");
    const double d_skew = run_pair(pi / 6, "c3-skew");
    const double elapsed = clock.seconds();
    const bool pass = d_orth <= 1e-8 && d_skew > 1e-4 && elapsed < 20.0;
    report(3, "orthogonal equivalence", pass,
           fmt("pi/3: Linf=%.2e (tol 1e-8); pi/6: Linf=%.2e (must exceed 1e-4); %.2fs "
               "(limit 20s)",
               d_orth, d_skew, elapsed));
    REQUIRE(d_orth <= 1e-8);
    REQUIRE(d_skew > 1e-4);
    REQUIRE(elapsed < 20.0);
}

TEST_CASE("criterion 4: jacobian and determinant oracles") {
    Stopwatch clock;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> angle(0.05, 0.5 * pi - 0.05);
    std::uniform_real_distribution<double> width(0.3, 2.0);
    std::uniform_real_distribution<double> height(0.4, 2.5);
    std::uniform_real_distribution<double> froude(-0.8, 0.8);

    auto proper = [&]() {
        for (;;) {
            const JunctionShape s{angle(rng), -angle(rng), width(rng), width(rng),
                                  width(rng)};
            const double sum = s.s1 + s.s2 + s.s3;
            if (degeneracy_expression(s) < -1e-9 * sum * sum)
                return s;
        }
    };
    auto random_trace = [&](double fr) {
        JunctionTrace t;
        for (int k = 0; k < 3; ++k) {
            t.h[k] = height(rng);
            t.v[k] = froude(rng) * fr * std::sqrt(9.81 * t.h[k]);
        }
        return t;
    };

    // analytic Jacobian vs central differences
    double jac_err = 0.0;
    int checked = 0;
    while (checked < 100) {
        const JunctionShape s = proper();
        const JunctionGeometry g = build(s);
        const JunctionTrace trace = random_trace(1.0);
        const JunctionTrace point = random_trace(1.0);
        bool near = false;
        for (int k = 0; k < 3; ++k)
            if (std::abs(point.h[k] - trace.h[k]) < 1e-3)
                near = true;
        if (near)
            continue;
        const Vec6 x = point.as_vector();
        const Mat6 J = junction_jacobian(x, trace, g, g_std);
        for (int i = 0; i < 6; ++i) {
            const double eps = 1e-6 * std::max(1.0, std::abs(x[i]));
            Vec6 xp = x, xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            const Vec6 col =
                (junction_residual(xp, trace, g, g_std) - junction_residual(xm, trace, g, g_std)) /
                (2.0 * eps);
            for (int r = 0; r < 6; ++r) {
                const double scale = std::max({std::abs(J(r, i)), std::abs(col[r]), 1.0});
                jac_err = std::max(jac_err, std::abs(J(r, i) - col[r]) / scale);
            }
        }
        ++checked;
    }

    // vanishing-velocity determinant against the closed form
    double det_vanish_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const JunctionShape s = proper();
        const JunctionGeometry g = build(s);
        JunctionTrace t;
        for (int k = 0; k < 3; ++k) {
            t.h[k] = height(rng);
            t.v[k] = 0.0;
        }
        const double det = existence_diagnostic(t.as_vector(), t, g, g_std);
        const double g52 = std::pow(9.81, 2.5);
        const double h1 = t.h[0], h2 = t.h[1], h3 = t.h[2];
        const double expected =
            g52 * std::sqrt(h1 * h2 * h3) *
            (-g.alpha1 * (g.alpha2 * g.beta3 - g.alpha3 * g.beta2) * std::sqrt(h2 * h3) -
             g.gamma2 * (g.alpha1 * g.beta3 - g.alpha3 * g.beta1) * std::sqrt(h1 * h3) +
             g.gamma3 * (g.alpha1 * g.beta2 - g.alpha2 * g.beta1) * std::sqrt(h1 * h2));
        det_vanish_err = std::max(det_vanish_err,
                                  std::abs(det - expected) / std::abs(expected));
    }

    // orthogonal rarefaction-branch determinant: closed form and strict sign
    double det_orth_err = 0.0;
    bool orth_negative = true;
    for (int i = 0; i < 100; ++i) {
        JunctionTrace point = random_trace(1.0);
        const JunctionTrace t = point;  // equal heights: rarefaction side
        const double det =
            existence_diagnostic_equal_energy(point.as_vector(), t, 1.0, 1.0, 1.0, g_std);
        const double l1 = point.v[0] - std::sqrt(9.81 * point.h[0]);
        const double l2 = point.v[1] + std::sqrt(9.81 * point.h[1]);
        const double l3 = point.v[2] + std::sqrt(9.81 * point.h[2]);
        const double expected = l1 * l2 * l3 * (l2 * l3 - l1 * l3 - l1 * l2);
        det_orth_err = std::max(det_orth_err, std::abs(det - expected) / std::abs(expected));
        orth_negative = orth_negative && det < 0.0;
    }

    const double elapsed = clock.seconds();
    const bool pass = jac_err <= 1e-5 && det_vanish_err <= 1e-8 && det_orth_err <= 1e-8 &&
                      orth_negative && elapsed < 5.0;
    report(4, "jacobian and determinant oracles", pass,
           fmt("FD rel err=%.2e (tol 1e-5); det rel err: vanishing=%.2e, orthogonal=%.2e "
               "(tol 1e-8); orthogonal det<0: %s; %.2fs (limit 5s)",
               jac_err, det_vanish_err, det_orth_err, orth_negative ? "yes" : "no", elapsed));
    REQUIRE(jac_err <= 1e-5);
    REQUIRE(det_vanish_err <= 1e-8);
    REQUIRE(det_orth_err <= 1e-8);
    REQUIRE(orth_negative);
    REQUIRE(elapsed < 5.0);
}

TEST_CASE("criterion 5: convergence study (test71)") {
    Stopwatch clock;
    const std::vector<int> ladder{12, 24, 48, 96};
    std::vector<RunArtifacts> runs;
    std::vector<fs::path> dirs;
    for (int n : ladder) {
        ScenarioConfig cfg = *make_preset("test71");
        for (auto& c : cfg.canals)
            c.cells = n;
        dirs.push_back(work_dir("c5-n" + std::to_string(n)));
        runs.push_back(run_scenario(cfg, dirs.back()));
    }

    // junction-face states across resolutions at the final time
    double dx_max = 0.0;
    for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            const Vec6 xa = runs[a].junction_logs[0].back().x;
            const Vec6 xb = runs[b].junction_logs[0].back().x;
            dx_max = std::max(dx_max, (xa - xb).cwiseAbs().maxCoeff());
        }
    const bool n_independent = dx_max <= 1e-8;

    // L1 self-differences of the canal-1 height profile at T, full canal and
    // restricted to the smooth window between the outer boundary zone and the
    // reflected wave front
    auto l1_diff = [&](const RunArtifacts& coarse, const RunArtifacts& fine, double x_lo,
                       double x_hi) {
        const auto& a = coarse.canals[0];
        const auto& b = fine.canals[0];
        const std::size_t ratio = b.x.size() / a.x.size();
        const double dxa = a.x[1] - a.x[0];
        double acc = 0.0;
        for (std::size_t i = 0; i < a.x.size(); ++i) {
            if (a.x[i] < x_lo || a.x[i] > x_hi)
                continue;
            double avg = 0.0;
            for (std::size_t k = 0; k < ratio; ++k)
                avg += b.snapshots.back()[i * ratio + k].h;
            avg /= ratio;
            acc += std::abs(a.snapshots.back()[i].h - avg) * dxa;
        }
        return acc;
    };
    std::vector<double> l1_full, l1_smooth;
    for (std::size_t i = 0; i + 1 < runs.size(); ++i) {
        l1_full.push_back(l1_diff(runs[i], runs[i + 1], 0.0, 3.5));
        l1_smooth.push_back(l1_diff(runs[i], runs[i + 1], 0.5, 2.2));
    }
    const bool monotone = l1_full[0] > l1_full[1] && l1_full[1] > l1_full[2];
    const double order = std::min(std::log2(l1_smooth[0] / l1_smooth[1]),
                                  std::log2(l1_smooth[1] / l1_smooth[2]));

    // stationary junction jump on the finest run over the last 20%
    const auto& log96 = runs.back().junction_logs[0];
    const double t_end = log96.back().t;
    double variation = 0.0;
    for (const auto& row : log96)
        if (row.t >= 0.8 * t_end)
            variation = std::max(variation, (row.x - log96.back().x).cwiseAbs().maxCoeff());
    const double jump = log96.back().x[1] - log96.back().x[0];
    const bool stationary_jump = std::abs(jump) >= 0.01 && variation <= 1e-3;

    const double elapsed = clock.seconds();
    const bool pass =
        n_independent && monotone && order >= 0.7 && stationary_jump && elapsed < 30.0;
    report(5, "convergence study", pass,
           fmt("junction-state spread over N=%.2e (tol 1e-8); L1 diffs %.2e>%.2e>%.2e "
               "monotone=%s; smooth order=%.2f (>=0.7); jump=%.3f, last-20%% "
               "variation=%.2e; %.2fs (limit 30s)",
               dx_max, l1_full[0], l1_full[1], l1_full[2], monotone ? "yes" : "no", order,
               jump, variation, elapsed));
    REQUIRE(monotone);
    REQUIRE(order >= 0.7);
    REQUIRE(std::abs(jump) >= 0.01);
    REQUIRE(variation <= 1e-3);
    REQUIRE(elapsed < 30.0);
    // The grid spread of the junction states converges at first order (the
    // reflected rarefaction tail is still draining past the junction), so the
    // pinned 1e-8 is out of reach for N <= 96; see the decisions ledger.
    REQUIRE(dx_max <= 1e-8);
}

TEST_CASE("criterion 6: angle monotonicity (test72)") {
    Stopwatch clock;
    std::vector<double> h1;
    double pair_dev = 0.0;
    for (int k = 0; k <= 3; ++k) {
        const auto cfg = make_preset("test72-theta" + std::to_string(k));
        REQUIRE(cfg.has_value());
        const RunArtifacts art = run_scenario(*cfg, work_dir("c6-theta" + std::to_string(k)));
        h1.push_back(art.junction_logs[0].back().x[0]);
        for (std::size_t t = 0; t < art.canals[1].snapshots.size(); ++t)
            for (std::size_t i = 0; i < art.canals[1].x.size(); ++i) {
                const State& u2 = art.canals[1].snapshots[t][i];
                const State& u3 = art.canals[2].snapshots[t][i];
                pair_dev = std::max({pair_dev, std::abs(u2.h - u3.h), std::abs(u2.q - u3.q)});
            }
    }
    bool increasing = true, decreasing = true;
    for (std::size_t i = 0; i + 1 < h1.size(); ++i) {
        increasing = increasing && h1[i + 1] > h1[i];
        decreasing = decreasing && h1[i + 1] < h1[i];
    }
    const bool monotone = increasing || decreasing;
    const double elapsed = clock.seconds();
    const bool pass = monotone && pair_dev <= 1e-12 && elapsed < 30.0;
    report(6, "angle monotonicity", pass,
           fmt("junction h1 over theta: %.6f, %.6f, %.6f, %.6f (%s); canal2/3 "
               "deviation=%.2e (tol 1e-12); %.2fs (limit 30s)",
               h1[0], h1[1], h1[2], h1[3],
               monotone ? (increasing ? "increasing" : "decreasing") : "not monotone",
               pair_dev, elapsed));
    REQUIRE(monotone);
    REQUIRE(pair_dev <= 1e-12);
    REQUIRE(elapsed < 30.0);
}

TEST_CASE("criterion 7: asymmetric angles (test72-asym)") {
    Stopwatch clock;
    std::vector<double> h2, h3;
    std::vector<RunArtifacts> runs;
    for (int k = 1; k <= 3; ++k) {
        const auto cfg = make_preset("test72-asym-phi" + std::to_string(k));
        REQUIRE(cfg.has_value());
        runs.push_back(run_scenario(*cfg, work_dir("c7-phi" + std::to_string(k))));
        h2.push_back(runs.back().junction_logs[0].back().x[1]);
        h3.push_back(runs.back().junction_logs[0].back().x[2]);
    }
    const bool trends = h2[0] > h2[1] && h2[1] > h2[2] && h3[0] < h3[1] && h3[1] < h3[2];

    double canal1_dev = 0.0;
    for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t b = a + 1; b < runs.size(); ++b)
            for (std::size_t t = 0; t < runs[a].canals[0].snapshots.size(); ++t)
                for (std::size_t i = 0; i < runs[a].canals[0].x.size(); ++i)
                    canal1_dev = std::max(canal1_dev,
                                          std::abs(runs[a].canals[0].snapshots[t][i].h -
                                                   runs[b].canals[0].snapshots[t][i].h));
    const double elapsed = clock.seconds();
    const bool pass = trends && canal1_dev <= 1e-6 && elapsed < 30.0;
    report(7, "asymmetric angles", pass,
           fmt("junction h2: %.6f>%.6f>%.6f, h3: %.6f<%.6f<%.6f (trends %s); canal1 "
               "profile spread=%.2e (tol 1e-6); %.2fs (limit 30s)",
               h2[0], h2[1], h2[2], h3[0], h3[1], h3[2], trends ? "hold" : "broken",
               canal1_dev, elapsed));
    REQUIRE(trends);
    REQUIRE(elapsed < 30.0);
    // The canal-1 profiles track the junction solution, which genuinely moves
    // with phi at the 1e-4 level; 1e-6 is out of reach. See the ledger.
    REQUIRE(canal1_dev <= 1e-6);
}

TEST_CASE("criterion 8: merging junction (test73)") {
    Stopwatch clock;
    std::vector<RunArtifacts> runs;
    for (int k = 0; k <= 3; ++k) {
        const auto cfg = make_preset("test73-phi" + std::to_string(k));
        REQUIRE(cfg.has_value());
        runs.push_back(run_scenario(*cfg, work_dir("c8-phi" + std::to_string(k))));
    }
    // canal-2 height profile at the final time, relative spread about the mean
    const std::size_t cells = runs[0].canals[1].x.size();
    double rel_dev = 0.0;
    for (std::size_t i = 0; i < cells; ++i) {
        double mean = 0.0;
        for (const auto& r : runs)
            mean += r.canals[1].snapshots.back()[i].h;
        mean /= runs.size();
        for (const auto& r : runs)
            rel_dev = std::max(rel_dev,
                               std::abs(r.canals[1].snapshots.back()[i].h - mean) / mean);
    }
    const double elapsed = clock.seconds();
    const bool pass = rel_dev <= 0.05 && elapsed < 30.0;
    report(8, "merging junction", pass,
           fmt("canal-2 profile spread across phi runs=%.2f%% (tol 5%%); %.2fs (limit 30s)",
               100.0 * rel_dev, elapsed));
    REQUIRE(rel_dev <= 0.05);
    REQUIRE(elapsed < 30.0);
}

TEST_CASE("criterion 9: imported mid-channel sample overlay") {
    Stopwatch clock;
    ScenarioConfig cfg = *make_preset("test72-theta2");
    for (auto& c : cfg.canals)
        c.cells = 80;
    const fs::path dir_run = work_dir("c9-run");
    const RunArtifacts art = run_scenario(cfg, dir_run);

    // synthesize a 2D-style sample from the run itself: per-canal tables with
    // velocity components along the canal axis
    const fs::path dir_sample = work_dir("c9-sample");
    const double angles[3] = {0.0, cfg.junctions[0].phi, cfg.junctions[0].theta};
    for (std::size_t k = 0; k < art.canals.size(); ++k) {
        std::ofstream file(dir_sample / (art.canals[k].name + ".csv"));
        file << "t,x,h,vx,vy\n";
        char buf[160];
        for (std::size_t t = 0; t < art.canals[k].times.size(); ++t)
            for (std::size_t i = 0; i < art.canals[k].x.size(); ++i) {
                const State& u = art.canals[k].snapshots[t][i];
                const double v = u.q / u.h;
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                              art.canals[k].times[t], art.canals[k].x[i], u.h,
                              v * std::cos(angles[k]), v * std::sin(angles[k]));
                file << buf;
            }
    }

    const CompareReport rep = compare_runs(dir_run, dir_sample);
    bool has_height = false, has_speed = false;
    for (const auto& e : rep.entries) {
        has_height = has_height || e.field == "h";
        has_speed = has_speed || e.field == "speed";
    }
    const double worst = rep.max_norms().linf;

    // the compare verb of the CLI agrees
    int cli_status = -1;
#ifdef CANAL_SIM_PATH
    const std::string cmd = std::string(CANAL_SIM_PATH) + " compare " + dir_run.string() +
                            " " + dir_sample.string() + " > " +
                            (dir_sample / "cli.txt").string();
    cli_status = std::system(cmd.c_str());
#endif

    const double elapsed = clock.seconds();
    const bool pass = has_height && has_speed && worst <= 1e-12 && cli_status == 0 &&
                      elapsed < 5.0;
    report(9, "imported sample overlay", pass,
           fmt("height+speed compared: %s; max norm=%.2e (tol 1e-12); compare verb exit=%d; "
               "%.2fs (limit 5s)",
               has_height && has_speed ? "yes" : "no", worst, cli_status, elapsed));
    REQUIRE(has_height);
    REQUIRE(has_speed);
    REQUIRE(worst <= 1e-12);
    REQUIRE(cli_status == 0);
    REQUIRE(elapsed < 5.0);
}
