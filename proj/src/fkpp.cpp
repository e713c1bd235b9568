#include "branchlab/fkpp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "branchlab/parallel.hpp"

namespace branchlab {

DiscreteOperator FkppProblem::discretize() const {
    return DiscreteOperator(grid, diffusion, drift, left, right, radial_dimension);
}

MotionSpec FkppProblem::motion() const {
    MotionSpec m;
    m.drift = drift;
    m.diffusion = diffusion;
    if (radial_dimension > 1) {
        m.kind = MotionKind::diffusion_radial;
        m.dimension = radial_dimension;
        m.domain = {0.0, grid.right(), Boundary::reflecting, right};
    } else {
        m.domain = {grid.left(), grid.right(), left, right};
    }
    return m;
}

double nonlinearity(const FkppProblem& problem, double u, double x) { return problem.branch.nonlinearity(u, x); }

namespace {

std::vector<double> reaction(const FkppProblem& p, const DiscreteOperator& op, const std::vector<double>& y) {
    std::vector<double> f(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double x = op.grid().x(op.first_node() + static_cast<int>(i));
        f[i] = p.branch.nonlinearity(std::clamp(y[i], 0.0, 1.0), x);
    }
    return f;
}

double clamp_unit(std::vector<double>& y) {
    double worst = 0.0;
    for (double& v : y) {
        if (v < 0.0) {
            worst = std::max(worst, -v);
            v = 0.0;
        } else if (v > 1.0) {
            worst = std::max(worst, v - 1.0);
            v = 1.0;
        }
    }
    return worst;
}

}  // namespace

ParabolicSolution solve_parabolic(const FkppProblem& problem, double t_end, double dt,
                                  const std::vector<double>& snapshots) {
    if (!(dt > 0.0) || !(t_end >= 0.0)) throw ValidationError("solve_parabolic needs dt > 0 and t_end >= 0");
    if (dt * problem.branch.rate_bound() > 0.1 + 1e-12) {
        throw ValidationError("time step too large: dt * sup r must not exceed 0.1");
    }
    const auto op = problem.discretize();
    const auto& a = op.matrix();
    auto y = op.sample_active(problem.initial);
    for (double v : y) {
        if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw ValidationError("initial datum must take values in [0, 1]");
    }
    clamp_unit(y);

    const long n_steps = std::max<long>(1, std::lround(std::ceil(t_end / dt - 1e-9)));
    const double h = t_end > 0.0 ? t_end / static_cast<double>(n_steps) : dt;
    std::vector<long> marks;
    for (double s : snapshots) {
        if (s < 0.0 || s > t_end) throw ValidationError("snapshot time outside [0, t_end]");
        marks.push_back(std::lround(s / h));
    }
    std::sort(marks.begin(), marks.end());

    ParabolicSolution sol;
    auto record = [&](long step) {
        while (!marks.empty() && marks.front() == step) {
            sol.times.push_back(static_cast<double>(step) * h);
            sol.fields.push_back(op.expand(y));
            marks.erase(marks.begin());
        }
    };
    record(0);
    if (t_end == 0.0) {
        sol.times.push_back(0.0);
        sol.fields.push_back(op.expand(y));
        return sol;
    }

    const TridiagonalSolver euler_half(a, 1.0, -0.5 * h);
    const TridiagonalSolver cn(a, 1.0, -0.5 * h);
    std::vector<double> f_prev, f_cur, work(y.size());
    for (long step = 1; step <= n_steps; ++step) {
        f_cur = reaction(problem, op, y);
        if (step <= 2) {
            // Two semi-implicit Euler half-steps damp the stiff modes of rough data.
            for (int k = 0; k < 2; ++k) {
                const auto f = k == 0 ? f_cur : reaction(problem, op, y);
                for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 * h * f[i];
                euler_half.solve(y);
            }
        } else {
            a.apply(y, work);
            for (std::size_t i = 0; i < y.size(); ++i) {
                y[i] += 0.5 * h * work[i] + h * (1.5 * f_cur[i] - 0.5 * f_prev[i]);
            }
            cn.solve(y);
        }
        f_prev = std::move(f_cur);
        const double c = clamp_unit(y);
        sol.max_clamp = std::max(sol.max_clamp, c);
        if (c > kClampTolerance) {
            throw InstabilityError("solution left [0, 1] by " + std::to_string(c) + " at t = " +
                                   std::to_string(static_cast<double>(step) * h) + "; reduce dt or refine the grid");
        }
        sol.steps = step;
        record(step);
    }
    if (sol.times.empty() || sol.times.back() != t_end) {
        sol.times.push_back(t_end);
        sol.fields.push_back(op.expand(y));
    }
    return sol;
}

double stationary_residual(const FkppProblem& problem, const std::vector<double>& field) {
    const auto op = problem.discretize();
    const auto u = op.restrict_to_active(field);
    std::vector<double> lu(u.size());
    op.matrix().apply(u, lu);
    const auto f = reaction(problem, op, u);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(lu[i] + f[i]));
    return worst;
}

StationaryResult stationary_monotone(const FkppProblem& problem, double shift, double tol) {
    const auto op = problem.discretize();
    const auto& a = op.matrix();
    StationaryResult res;
    const double lipschitz = problem.branch.lipschitz_bound();
    res.shift = shift > 0.0 ? shift : 1.1 * lipschitz;
    if (!(res.shift > lipschitz)) throw ValidationError("monotone iteration shift must exceed the Lipschitz bound");

    const auto linear = op.with_potential(op.sample_active([&](double x) { return problem.branch.growth(x); }));
    res.linear_growth = dominant_eigenvalue(linear);
    if (res.linear_growth <= 0.0) {
        res.field.assign(static_cast<std::size_t>(op.grid().n_nodes()), 0.0);
        res.degenerate = true;
        return res;
    }
    auto w = dominant_eigenvector(linear, res.linear_growth);
    for (double& v : w) v *= 1e-6;

    const TridiagonalSolver solver(a, res.shift, -1.0);
    std::vector<double> next(w.size());
    for (res.sweeps = 1; res.sweeps <= kMaxMonotoneSweeps; ++res.sweeps) {
        const auto f = reaction(problem, op, w);
        for (std::size_t i = 0; i < w.size(); ++i) next[i] = f[i] + res.shift * w[i];
        solver.solve(next);
        res.step = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = next[i] - w[i];
            if (d < -1e-10) {
                throw ConvergenceError("monotone iteration decreased at sweep " + std::to_string(res.sweeps) +
                                       "; refine the grid so the discrete maximum principle holds");
            }
            res.step = std::max(res.step, std::abs(d));
        }
        w.swap(next);
        if (res.step < tol) break;
    }
    if (res.sweeps > kMaxMonotoneSweeps) {
        throw ConvergenceError("monotone iteration did not settle in " + std::to_string(kMaxMonotoneSweeps) + " sweeps");
    }
    res.field = op.expand(w);
    res.residual = stationary_residual(problem, res.field);
    return res;
}

LongtimeResult maximal_stationary_via_longtime(const FkppProblem& problem, double t_end, double dt, double tol) {
    FkppProblem p = problem;
    p.initial = 1.0;
    const auto sol = solve_parabolic(p, t_end, dt, {0.5 * t_end});
    LongtimeResult res;
    res.t_end = t_end;
    res.field = sol.fields.back();
    for (std::size_t i = 0; i < res.field.size(); ++i) {
        res.change = std::max(res.change, std::abs(res.field[i] - sol.fields.front()[i]));
    }
    res.settled = res.change < tol;
    if (!res.settled) {
        res.warning = "not settled: sup |y(t) - y(t/2)| = " + std::to_string(res.change) + " at t = " + std::to_string(t_end);
    }
    return res;
}

std::vector<DualityReport> mckean_duality_check(const FkppProblem& problem, const std::vector<ScalarField>& data,
                                                const DualitySettings& settings, int threads) {
    if (settings.points < 1 || settings.replicas < 1) throw ValidationError("duality check needs points and replicas");
    const auto& grid = problem.grid;
    std::vector<double> xs;
    for (int k = 0; k < settings.points; ++k) {
        xs.push_back(grid.left() + (grid.right() - grid.left()) * (k + 1) / (settings.points + 1));
    }
    std::vector<DualityReport> reports(data.size());
    for (std::size_t g = 0; g < data.size(); ++g) {
        FkppProblem p = problem;
        p.initial = data[g];
        const auto sol = solve_parabolic(p, settings.t, settings.pde_dt);
        for (double x : xs) reports[g].points.push_back({x, interpolate(grid, sol.fields.back(), x), {}, 0.0});
    }

    const auto motion = problem.motion();
    BmpConfig cfg;
    cfg.dt = settings.particle_dt;
    cfg.horizon = settings.t;
    cfg.cap = std::uint64_t{1} << 40;
    cfg.replicas = settings.replicas;
    cfg.record_interval = settings.t;
    const RandomSource base(settings.seed);
    for (std::size_t k = 0; k < xs.size(); ++k) {
        std::vector<std::vector<double>> values(data.size(), std::vector<double>(settings.replicas));
        for_each_replica(
            motion, problem.branch, xs[k], cfg, base.replica(k),
            [&](std::size_t i, BmpRun&& run) {
                for (std::size_t g = 0; g < data.size(); ++g) {
                    double none = 1.0;
                    for (const auto& particle : run.final.particles) none *= 1.0 - data[g](particle.x);
                    values[g][i] = 1.0 - none;
                }
            },
            nullptr, threads);
        for (std::size_t g = 0; g < data.size(); ++g) {
            auto& pt = reports[g].points[k];
            pt.mc = sample_mean(values[g]);
            const double se = std::max(pt.mc.standard_error, 1.0 / static_cast<double>(settings.replicas));
            pt.standardized = std::abs(pt.pde - pt.mc.estimate) / se;
            reports[g].max_standardized = std::max(reports[g].max_standardized, pt.standardized);
        }
    }
    return reports;
}

EigenvalueEstimate principal_eigenvalue_1d(const FkppProblem& problem, const ScalarField& potential) {
    auto eigen_on = [&](const Grid1D& grid) {
        const DiscreteOperator op(grid, problem.diffusion, problem.drift, problem.left, problem.right,
                                  problem.radial_dimension);
        return dominant_eigenvalue(op.with_potential(op.sample_active(potential)));
    };
    const double coarse = eigen_on(problem.grid);
    const double fine = eigen_on(problem.grid.refined());
    EigenvalueEstimate e;
    e.method = EigenMethod::discretized_operator;
    e.value = (4.0 * fine - coarse) / 3.0;
    e.lower = std::min({coarse, fine, e.value});
    e.upper = std::max({coarse, fine, e.value});
    e.metadata = {{"coarse", coarse},
                  {"fine", fine},
                  {"cells", {problem.grid.n_cells(), 2 * problem.grid.n_cells()}},
                  {"extrapolation", "richardson"}};
    return e;
}

}  // namespace branchlab
