#ifndef CANAL_NETWORK_HPP
#define CANAL_NETWORK_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "canal/junction_solver.hpp"
#include "canal/swe.hpp"

namespace canal {

class SimulationError : public std::runtime_error {
public:
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

/// Uniform-grid canal. Cell j covers [(j) dx, (j+1) dx); the state vector has
/// one entry per cell. Ends are either outer boundaries (homogeneous Neumann)
/// or attached to a junction, recorded by make_network.
struct Canal {
    std::string name;
    double length = 1.0;
    int cells = 2;
    double half_width = 1.0;
    std::vector<State> u;

    // -1 when the end is an outer boundary.
    int left_junction = -1;   // this canal leaves that junction (outgoing)
    int left_slot = -1;       // 0 -> canal 2 of the junction, 1 -> canal 3
    int right_junction = -1;  // this canal enters that junction (incoming)

    double dx() const { return length / cells; }
};

enum class JunctionModel { momentum, equal_energy };

inline const char* to_string(JunctionModel m) {
    return m == JunctionModel::momentum ? "momentum" : "energy";
}

/// One three-canal node: the incoming canal ends here (its face M+1/2), the
/// two outgoing canals start here (their faces 1/2).
struct NetworkJunction {
    JunctionShape shape;
    JunctionGeometry geometry;
    int incoming = -1;
    std::array<int, 2> outgoing{-1, -1};
    JunctionModel model = JunctionModel::momentum;

    std::optional<Vec6> last_solution;  // warm start for the next solve
    JunctionSolution last{};            // diagnostics of the latest solve
    double last_determinant = 0.0;
    bool solved_once = false;

    JunctionSolution solve(const JunctionTrace& trace, const NewtonOptions& opts,
                           const PhysicalConstants& c) {
        const Vec6* warm = last_solution ? &*last_solution : nullptr;
        JunctionSolution sol =
            model == JunctionModel::momentum
                ? solve_junction(trace, geometry, opts, c, warm)
                : solve_junction_equal_energy(trace, shape.s1, shape.s2, shape.s3, opts, c,
                                              warm);
        last_solution = sol.x;
        last = sol;
        last_determinant =
            model == JunctionModel::momentum
                ? existence_diagnostic(sol.x, trace, geometry, c)
                : existence_diagnostic_equal_energy(sol.x, trace, shape.s1, shape.s2,
                                                    shape.s3, c);
        solved_once = true;
        return sol;
    }
};

struct NetworkState {
    std::vector<Canal> canals;
    std::vector<NetworkJunction> junctions;
    double time = 0.0;
    long step_count = 0;
};

struct TimeControls {
    double cfl = 0.9;
    double t_end = 0.0;
    long max_steps = 10'000'000;
};

/// Assemble and validate a network: junction geometries are built from the
/// canal half-widths, canal ends are linked, and the topology is checked
/// (three distinct canals per junction, each canal end used at most once).
struct JunctionSpecEntry {
    double theta = 0.0;
    double phi = 0.0;
    int incoming = -1;
    std::array<int, 2> outgoing{-1, -1};
    JunctionModel model = JunctionModel::momentum;
};

inline NetworkState make_network(std::vector<Canal> canals,
                                 const std::vector<JunctionSpecEntry>& junctions) {
    NetworkState net;
    for (auto& canal : canals) {
        if (canal.cells < 2)
            throw std::invalid_argument("canal " + canal.name + ": needs at least 2 cells");
        if (!(canal.length > 0.0) || !(canal.half_width > 0.0))
            throw std::invalid_argument("canal " + canal.name + ": nonpositive dimension");
        if (static_cast<int>(canal.u.size()) != canal.cells)
            throw std::invalid_argument("canal " + canal.name + ": state size != cell count");
        for (const State& s : canal.u)
            if (!(s.h > 0.0) || !std::isfinite(s.h) || !std::isfinite(s.q))
                throw std::invalid_argument("canal " + canal.name + ": invalid initial state");
        canal.left_junction = canal.right_junction = -1;
    }
    net.canals = std::move(canals);

    const int n = static_cast<int>(net.canals.size());
    for (const auto& j : junctions) {
        NetworkJunction nj;
        nj.incoming = j.incoming;
        nj.outgoing = j.outgoing;
        nj.model = j.model;
        for (int id : {j.incoming, j.outgoing[0], j.outgoing[1]})
            if (id < 0 || id >= n)
                throw std::invalid_argument("junction references unknown canal");
        if (j.incoming == j.outgoing[0] || j.incoming == j.outgoing[1] ||
            j.outgoing[0] == j.outgoing[1])
            throw std::invalid_argument("junction must touch three distinct canals");

        nj.shape = JunctionShape{j.theta, j.phi, net.canals[j.incoming].half_width,
                                 net.canals[j.outgoing[0]].half_width,
                                 net.canals[j.outgoing[1]].half_width};
        nj.geometry = build(nj.shape);

        const int id = static_cast<int>(net.junctions.size());
        Canal& in = net.canals[j.incoming];
        if (in.right_junction != -1)
            throw std::invalid_argument("canal " + in.name + ": right end attached twice");
        in.right_junction = id;
        for (int slot = 0; slot < 2; ++slot) {
            Canal& out = net.canals[j.outgoing[slot]];
            if (out.left_junction != -1)
                throw std::invalid_argument("canal " + out.name + ": left end attached twice");
            out.left_junction = id;
            out.left_slot = slot;
        }
        net.junctions.push_back(std::move(nj));
    }
    return net;
}

/// Largest stable time step: cfl times the smallest cell width divided by the
/// largest wave speed anywhere in the network. Zero speed everywhere yields
/// the full remaining time.
inline double compute_dt(const NetworkState& net, const TimeControls& tc,
                         const PhysicalConstants& c) {
    if (!(tc.cfl > 0.0 && tc.cfl <= 1.0))
        throw std::invalid_argument("time controls: cfl must lie in (0, 1]");
    double dx_min = std::numeric_limits<double>::infinity();
    double speed = 0.0;
    for (const Canal& canal : net.canals) {
        dx_min = std::min(dx_min, canal.dx());
        for (const State& u : canal.u) {
            const WavePair w = eigenvalues(u, c);
            speed = std::max({speed, std::abs(w.lambda1), std::abs(w.lambda2)});
        }
    }
    const double remaining = tc.t_end - net.time;
    if (speed == 0.0)
        return remaining;
    return std::min(tc.cfl * dx_min / speed, remaining);
}

/// One forward-Euler Godunov step over the whole network. All junction
/// systems are solved first from the current traces, then every interface
/// flux is evaluated, then cells are updated conservatively; failures leave
/// the state untouched.
inline void step(NetworkState& net, double dt, const PhysicalConstants& c,
                 const NewtonOptions& opts = {}) {
    struct JunctionFluxes {
        FluxVector incoming, out0, out1;
    };
    std::vector<JunctionFluxes> jf(net.junctions.size());

    for (std::size_t j = 0; j < net.junctions.size(); ++j) {
        NetworkJunction& junction = net.junctions[j];
        const Canal& in = net.canals[junction.incoming];
        const Canal& o0 = net.canals[junction.outgoing[0]];
        const Canal& o1 = net.canals[junction.outgoing[1]];
        const JunctionTrace trace =
            JunctionTrace::from_states(in.u.back(), o0.u.front(), o1.u.front());
        try {
            const JunctionSolution sol = junction.solve(trace, opts, c);
            jf[j].incoming = flux(sol.state(0), c);
            jf[j].out0 = flux(sol.state(1), c);
            jf[j].out1 = flux(sol.state(2), c);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "junction " << j << " (" << in.name << " -> " << o0.name << ", " << o1.name
                << ") at t=" << net.time << ", step " << net.step_count << ": " << e.what()
                << " [trace h=(" << trace.h[0] << "," << trace.h[1] << "," << trace.h[2]
                << ") v=(" << trace.v[0] << "," << trace.v[1] << "," << trace.v[2] << ")]";
            std::throw_with_nested(SimulationError(msg.str()));
        }
    }

    std::vector<std::vector<FluxVector>> fluxes(net.canals.size());
    for (std::size_t k = 0; k < net.canals.size(); ++k) {
        const Canal& canal = net.canals[k];
        auto& f = fluxes[k];
        f.resize(canal.cells + 1);
        try {
            f.front() = canal.left_junction >= 0
                            ? (canal.left_slot == 0 ? jf[canal.left_junction].out0
                                                    : jf[canal.left_junction].out1)
                            : flux(canal.u.front(), c);  // Neumann ghost equals first cell
            for (int i = 1; i < canal.cells; ++i)
                f[i] = godunov_flux(canal.u[i - 1], canal.u[i], c);
            f.back() = canal.right_junction >= 0 ? jf[canal.right_junction].incoming
                                                 : flux(canal.u.back(), c);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "canal " << canal.name << " at t=" << net.time << ", step "
                << net.step_count << ": " << e.what();
            std::throw_with_nested(SimulationError(msg.str()));
        }
    }

    for (std::size_t k = 0; k < net.canals.size(); ++k) {
        Canal& canal = net.canals[k];
        const double r = dt / canal.dx();
        const auto& f = fluxes[k];
        for (int i = 0; i < canal.cells; ++i) {
            canal.u[i].h -= r * (f[i + 1][0] - f[i][0]);
            canal.u[i].q -= r * (f[i + 1][1] - f[i][1]);
        }
    }
    net.time += dt;
    net.step_count += 1;
}

/// When and how often run() hands snapshots to the observer.
struct OutputSchedule {
    enum class Kind { every_step, every_n, at_times };
    Kind kind = Kind::every_step;
    long n = 1;
    std::vector<double> times;  // ascending; the step size is clipped to hit each exactly

    static OutputSchedule every(long n_steps) { return {Kind::every_n, n_steps, {}}; }
    static OutputSchedule at(std::vector<double> ts) {
        return {Kind::at_times, 1, std::move(ts)};
    }
};

using Observer = std::function<void(const NetworkState&)>;
using StepHook = std::function<void(const NetworkState&)>;

/// Advance the network to t_end (or max_steps). The observer receives full
/// snapshots per the schedule; the step hook fires after every step (used for
/// junction logging). On failure the observer is handed the last consistent
/// state before the error propagates.
inline void run(NetworkState& net, const TimeControls& tc, const PhysicalConstants& c,
                const NewtonOptions& opts = {}, const Observer& observer = {},
                const OutputSchedule& schedule = {}, const StepHook& step_hook = {}) {
    constexpr double time_eps = 1e-12;
    std::size_t next_time_idx = 0;

    auto emit = [&](const NetworkState& s) {
        if (observer)
            observer(s);
    };

    if (schedule.kind == OutputSchedule::Kind::at_times) {
        while (next_time_idx < schedule.times.size() &&
               schedule.times[next_time_idx] <= net.time + time_eps) {
            emit(net);
            ++next_time_idx;
        }
    } else {
        emit(net);
    }

    try {
        long steps_done = 0;
        bool emitted_last = true;
        while (net.time < tc.t_end - time_eps && steps_done < tc.max_steps) {
            double dt = compute_dt(net, tc, c);
            double target = -1.0;
            if (schedule.kind == OutputSchedule::Kind::at_times &&
                next_time_idx < schedule.times.size()) {
                target = schedule.times[next_time_idx];
                dt = std::min(dt, target - net.time);
            }
            step(net, dt, c, opts);
            ++steps_done;
            if (target > 0.0 && std::abs(net.time - target) < time_eps)
                net.time = target;
            if (std::abs(net.time - tc.t_end) < time_eps)
                net.time = tc.t_end;

            if (step_hook)
                step_hook(net);

            emitted_last = false;
            switch (schedule.kind) {
                case OutputSchedule::Kind::every_step:
                    emit(net);
                    emitted_last = true;
                    break;
                case OutputSchedule::Kind::every_n:
                    if (net.step_count % schedule.n == 0) {
                        emit(net);
                        emitted_last = true;
                    }
                    break;
                case OutputSchedule::Kind::at_times:
                    while (next_time_idx < schedule.times.size() &&
                           schedule.times[next_time_idx] <= net.time + time_eps) {
                        emit(net);
                        emitted_last = true;
                        ++next_time_idx;
                    }
                    break;
            }
        }
        if (!emitted_last && schedule.kind == OutputSchedule::Kind::every_n)
            emit(net);
    } catch (...) {
        emit(net);  // partial results up to the failing step
        throw;
    }
}

}  // namespace canal

#endif  // CANAL_NETWORK_HPP
