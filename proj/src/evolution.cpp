#include "wke/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "wke/fields.hpp"

namespace wke {

std::pair<Field, Field> project(const Grid& grid, const std::vector<Field>& basis, const Field& g) {
    Field pi(g.size(), 0.0);
    for (const Field& b : basis) {
        const double c = grid.inner(g, b);
        for (std::size_t i = 0; i < g.size(); ++i) pi[i] += c * b[i];
    }
    Field perp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) perp[i] = g[i] - pi[i];
    return {std::move(pi), std::move(perp)};
}

std::string to_string(Scheme s) { return s == Scheme::RK4 ? "rk4" : "euler"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "rk4") return Scheme::RK4;
    if (name == "euler") return Scheme::Euler;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected rk4 or euler)");
}

Diagnostics diagnose(const CollisionEngine& engine, const std::vector<Field>& null_basis, double t, const Field& g) {
    const Grid& grid = engine.grid();
    Field n(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) n[i] = engine.equilibrium()[i] * (1.0 + g[i]);
    Diagnostics d;
    d.t = t;
    const Moments m = conserved_quantities(engine.spec(), grid, n);
    d.mass = m.mass;
    d.momentum = m.momentum;
    d.energy = m.energy;
    d.entropy = entropy(grid, n);
    const auto [pi, perp] = project(grid, null_basis, g);
    d.norm = grid.norm(g);
    d.norm_pi = grid.norm(pi);
    d.norm_piperp = grid.norm(perp);
    return d;
}

namespace {

void axpy(Field& y, double a, const Field& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

int step_count(double T, double dt) {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("integrate: T and dt must be positive");
    return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

}  // namespace

Trajectory integrate(const CollisionEngine& engine, const std::vector<Field>& null_basis, const Field& g0,
                     const IntegrateOptions& opt) {
    const Grid& grid = engine.grid();
    if (static_cast<int>(g0.size()) != grid.size()) throw std::invalid_argument("integrate: g0 size mismatch");
    const int steps = step_count(opt.T, opt.dt);
    const double h = opt.T / steps;
    auto rhs = [&](const Field& g) { return opt.linear_only ? engine.linear(g) : engine.rhs(g); };
    const Field pi0 = project(grid, null_basis, g0).first;

    Trajectory tr;
    Field g = g0;
    auto record = [&](double t) {
        tr.times.push_back(t);
        if (opt.store_fields) tr.fields.push_back(g);
    };
    auto check = [&](double t) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (!(1.0 + g[i] > 0.0)) {
                std::ostringstream msg;
                msg << "density not positive at node " << i << " at t = " << t;
                tr.aborted = true;
                tr.abort_reason = msg.str();
                tr.abort_time = t;
                return false;
            }
        if (opt.ball_radius > 0.0 && grid.norm(g) > 10.0 * opt.ball_radius) {
            std::ostringstream msg;
            msg << "blow-up: ||g|| = " << grid.norm(g) << " exceeds 10 * ball radius at t = " << t;
            tr.aborted = true;
            tr.abort_reason = msg.str();
            tr.abort_time = t;
            return false;
        }
        return true;
    };
    if (!check(0.0)) return tr;
    record(0.0);
    tr.diagnostics.push_back(diagnose(engine, null_basis, 0.0, g));
    for (int s = 1; s <= steps; ++s) {
        if (opt.scheme == Scheme::Euler) {
            axpy(g, h, rhs(g));
        } else {
            const Field k1 = rhs(g);
            Field tmp = g;
            axpy(tmp, 0.5 * h, k1);
            const Field k2 = rhs(tmp);
            tmp = g;
            axpy(tmp, 0.5 * h, k2);
            const Field k3 = rhs(tmp);
            tmp = g;
            axpy(tmp, h, k3);
            const Field k4 = rhs(tmp);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (opt.strict) {
            const Field perp = project(grid, null_basis, g).second;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = perp[i] + pi0[i];
        }
        const double t = s * h;
        if (!check(t)) return tr;
        record(t);
        tr.diagnostics.push_back(diagnose(engine, null_basis, t, g));
    }
    return tr;
}

double ball_radius(double lambda, double C) {
    if (!(lambda > 0.0) || !(C > 0.0)) throw std::invalid_argument("ball_radius: lambda and C must be positive");
    return std::sqrt(lambda) / (2.0 * std::sqrt(2.0 * C));
}

FixedPointConfig make_fixed_point_config(double lambda, double C, int max_iter, double contraction_tol) {
    FixedPointConfig fp;
    fp.lambda = lambda;
    fp.C = C;
    fp.ball_radius = ball_radius(lambda, C);
    fp.max_iter = max_iter;
    fp.contraction_tol = contraction_tol;
    return fp;
}

namespace {

// Weights of the exponential trapezoid rule: int_0^h exp(-l (h - s)) [N0 (1 - s/h) + N1 s/h] ds = h (a N0 + b N1).
void etd_weights(double z, double& decay, double& a, double& b) {
    decay = std::exp(-z);
    if (z < 1e-3) {
        a = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
        b = 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0;
        return;
    }
    const double phi1 = -std::expm1(-z) / z;
    a = (1.0 - decay * (1.0 + z)) / (z * z);
    b = phi1 - a;
}

}  // namespace

PicardResult picard(const CollisionEngine& engine, const Eigensystem& es, const std::vector<Field>& null_basis,
                    const Field& g0, const FixedPointConfig& fp, double T, double dt) {
    const Grid& grid = engine.grid();
    const int N = grid.size();
    if (static_cast<int>(g0.size()) != N) throw std::invalid_argument("picard: g0 size mismatch");
    if (!(fp.ball_radius > 0.0)) throw std::invalid_argument("picard: ball radius must be positive");
    const double n0 = grid.norm(g0);
    if (n0 > 0.5 * fp.ball_radius) {
        std::ostringstream msg;
        msg << "picard: ||g0|| = " << n0 << " exceeds half the ball radius " << 0.5 * fp.ball_radius;
        throw std::invalid_argument(msg.str());
    }
    const int steps = step_count(T, dt);
    const double h = T / steps;
    const Eigen::MatrixXd& V = es.vectors;
    const Eigen::VectorXd& lam = es.values;
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i) w[i] = grid.weight(i);
    auto to_modes = [&](const Field& x) -> Eigen::VectorXd {
        const Eigen::Map<const Eigen::VectorXd> v(x.data(), N);
        return V.transpose() * (w.asDiagonal() * v);
    };
    auto to_field = [&](const Eigen::VectorXd& y) {
        const Eigen::VectorXd v = V * y;
        return Field(v.data(), v.data() + N);
    };
    Eigen::VectorXd decay(N), wa(N), wb(N);
    for (int m = 0; m < N; ++m) {
        double d = 0.0, a = 0.0, b = 0.0;
        etd_weights(std::max(0.0, lam[m]) * h, d, a, b);
        decay[m] = d;
        wa[m] = h * a;
        wb[m] = h * b;
    }

    // Initial iterate: the linear flow S^t g0.
    const Eigen::VectorXd y0 = to_modes(g0);
    std::vector<Field> iterate(steps + 1);
    {
        Eigen::VectorXd y = y0;
        iterate[0] = to_field(y);
        for (int s = 1; s <= steps; ++s) {
            y = decay.cwiseProduct(y);
            iterate[s] = to_field(y);
        }
    }
    PicardResult res;
    auto sup_norm = [&](const std::vector<Field>& traj) {
        double m = 0.0;
        for (const Field& f : traj) m = std::max(m, grid.norm(f));
        return m;
    };
    for (int it = 1; it <= fp.max_iter; ++it) {
        const double sup = sup_norm(iterate);
        if (sup > fp.ball_radius) {
            std::ostringstream msg;
            msg << "picard: iterate " << it - 1 << " left the ball: sup_t ||g|| = " << sup << " > c(lambda) = "
                << fp.ball_radius;
            throw std::runtime_error(msg.str());
        }
        std::vector<Field> next(steps + 1);
        Eigen::VectorXd y = y0;
        next[0] = g0;
        Eigen::VectorXd n_prev = to_modes(engine.nonlinear(iterate[0]));
        for (int s = 1; s <= steps; ++s) {
            const Eigen::VectorXd n_cur = to_modes(engine.nonlinear(iterate[s]));
            y = decay.cwiseProduct(y) + wa.cwiseProduct(n_prev) + wb.cwiseProduct(n_cur);
            next[s] = to_field(y);
            n_prev = n_cur;
        }
        double diff = 0.0;
        for (int s = 0; s <= steps; ++s) {
            Field d(N);
            for (int i = 0; i < N; ++i) d[i] = next[s][i] - iterate[s][i];
            diff = std::max(diff, grid.norm(d));
        }
        res.report.differences.push_back(diff);
        res.report.iterations = it;
        const auto& dif = res.report.differences;
        if (dif.size() >= 2 && dif[dif.size() - 2] > 0.0)
            res.report.contraction_factor = std::max(res.report.contraction_factor, dif.back() / dif[dif.size() - 2]);
        iterate = std::move(next);
        if (diff < fp.contraction_tol) {
            res.report.converged = true;
            break;
        }
    }
    if (!res.report.converged) {
        std::ostringstream msg;
        msg << "picard: no convergence in " << fp.max_iter << " iterations; differences:";
        for (double d : res.report.differences) msg << ' ' << d;
        throw std::runtime_error(msg.str());
    }
    Trajectory& tr = res.trajectory;
    for (int s = 0; s <= steps; ++s) {
        tr.times.push_back(s * h);
        tr.diagnostics.push_back(diagnose(engine, null_basis, s * h, iterate[s]));
    }
    tr.fields = std::move(iterate);
    return res;
}

DecayReport decay_check(const Trajectory& traj, double lambda, double slack) {
    DecayReport r;
    if (traj.diagnostics.empty()) return r;
    const Diagnostics& d0 = traj.diagnostics.front();
    for (const Diagnostics& d : traj.diagnostics) {
        const double e = std::exp(-0.5 * lambda * d.t);
        const double env = e * d0.norm_piperp + (1.0 - e) * d0.norm_pi;
        const bool ok = d.norm_piperp <= slack * env + 1e-300;
        r.pass.push_back(ok ? 1 : 0);
        r.all_pass = r.all_pass && ok;
        if (env > 0.0) r.worst_ratio = std::max(r.worst_ratio, d.norm_piperp / env);
    }
    // Least squares of log ||Pi_perp g_t|| against t on [0.2 T, T].
    const double T = traj.diagnostics.back().t;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const Diagnostics& d : traj.diagnostics) {
        if (d.t < 0.2 * T || !(d.norm_piperp > 0.0)) continue;
        const double y = std::log(d.norm_piperp);
        sx += d.t;
        sy += y;
        sxx += d.t * d.t;
        sxy += d.t * y;
        ++n;
    }
    if (n >= 2) {
        const double den = n * sxx - sx * sx;
        if (den > 0.0) r.fitted_rate = -(n * sxy - sx * sy) / den;
    }
    return r;
}

double estimate_C(const CollisionEngine& engine, int n_samples, unsigned long long seed) {
    if (n_samples < 10) throw std::invalid_argument("estimate_C: n_samples must be at least 10");
    const Grid& grid = engine.grid();
    std::mt19937_64 rng(seed);
    double C = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const Field g = normalized(grid, rough_random_field(grid, rng));
        const double ng = grid.norm(engine.gamma(g, g));
        const double nq = grid.norm(engine.q_pieces(g, g, g).total());
        C = std::max({C, ng, nq});
    }
    return C;
}

}  // namespace wke
