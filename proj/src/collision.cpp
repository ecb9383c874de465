#include "wke/collision.hpp"

#include <cmath>
#include <stdexcept>

#include "engine_eval.hpp"

namespace wke {

using detail::Slots;

void QuadratureConfig::validate() const {
    if (n_k3 < 2 || n_k3 > TensorBasis::max_n) throw std::invalid_argument("quadrature: n_k3 must be in [2, 16]");
    if (n_alpha < 2 || n_alpha > 96) throw std::invalid_argument("quadrature: n_alpha must be in [2, 96]");
    if (n_theta < 4 || n_theta > 96) throw std::invalid_argument("quadrature: n_theta must be in [4, 96]");
    if (!(tol > 0.0)) throw std::invalid_argument("quadrature: tol must be positive");
}

ChartOptions QuadratureConfig::chart_options() const {
    ChartOptions o;
    o.n_alpha = n_alpha;
    o.n_theta = n_theta;
    o.alpha_rule = alpha_rule;
    o.theta_rule = theta_rule;
    o.domain = Domain::Box;
    o.tol = tol;
    return o;
}

Field QPieces::total() const {
    Field t(q1_plus.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = q1_plus[i] + q2_plus[i] - q1_minus[i] - q2_minus[i];
    return t;
}

CollisionEngine::CollisionEngine(const DispersionSpec& spec, const Grid& grid, const QuadratureConfig& qc,
                                 const EquilibriumCoeffs& coeffs)
    : spec_(spec), grid_(grid), qc_(qc), coeffs_(coeffs) {
    qc_.validate();
    if (std::abs(grid_.k_cut() - spec_.k_cut) > 1e-14 * spec_.k_cut)
        throw std::invalid_argument("CollisionEngine: grid and dispersion cut-offs differ");
    if (!equilibrium_is_admissible(spec_, coeffs_))
        throw std::domain_error("CollisionEngine: equilibrium denominator not positive on the box");
    const int N = grid_.size();
    f_.resize(N);
    for (int i = 0; i < N; ++i) f_[i] = coeffs_(spec_, grid_.node(i));

    same_grid_ = qc_.n_k3 == grid_.n_per_axis();
    if (same_grid_) {
        k3_nodes_ = grid_.nodes();
        k3_weights_ = grid_.weights();
        f3_ = f_;
    } else {
        const Grid g3(qc_.n_k3, grid_.k_cut());
        k3_nodes_ = g3.nodes();
        k3_weights_ = g3.weights();
        f3_.resize(k3_nodes_.size());
        for (std::size_t j = 0; j < k3_nodes_.size(); ++j) f3_[j] = coeffs_(spec_, k3_nodes_[j]);
    }
    const int N3 = static_cast<int>(k3_nodes_.size());
    for (int i = 0; i < N; ++i) {
        for (int j = same_grid_ ? i : 0; j < N3; ++j) {
            Pair p;
            p.i = i;
            p.j = j;
            p.w_out = grid_.weight(i);
            p.w_k3 = k3_weights_[j];
            p.mult = (same_grid_ && i != j) ? 2.0 : 1.0;
            pairs_.push_back(p);
        }
    }

    // Charts in fixed chunks of pairs, concatenated in pair order.
    const ChartOptions opt = qc_.chart_options();
    const int build_chunks = 64;
    std::vector<std::vector<ManifoldPoint>> chunk_points(build_chunks);
    std::vector<std::vector<std::size_t>> chunk_counts(build_chunks);
    std::vector<int> chunk_failures(build_chunks, 0);
    const std::size_t np = pairs_.size();
    for_each_chunk(build_chunks, [&](int c) {
        const std::size_t b = np * c / build_chunks;
        const std::size_t e = np * (c + 1) / build_chunks;
        for (std::size_t p = b; p < e; ++p) {
            const ManifoldStats st =
                manifold_points(spec_, grid_.node(pairs_[p].i), k3_nodes_[pairs_[p].j], opt, chunk_points[c]);
            chunk_counts[c].push_back(static_cast<std::size_t>(st.points));
            chunk_failures[c] += st.bracket_failures;
        }
    });
    std::size_t total = 0;
    for (const auto& v : chunk_points) total += v.size();
    points_.reserve(total);
    std::size_t p = 0;
    std::vector<std::size_t> prefix(1, 0);
    prefix.reserve(np + 1);
    for (int c = 0; c < build_chunks; ++c) {
        points_.insert(points_.end(), chunk_points[c].begin(), chunk_points[c].end());
        for (std::size_t cnt : chunk_counts[c]) {
            pairs_[p].begin = prefix.back();
            pairs_[p].end = prefix.back() + cnt;
            // cost model: points plus a per-pair overhead
            prefix.push_back(prefix.back() + cnt);
            ++p;
        }
        bracket_failures_ += chunk_failures[c];
        std::vector<ManifoldPoint>().swap(chunk_points[c]);
    }
    std::vector<std::size_t> cost(np + 1, 0);
    for (std::size_t q = 0; q < np; ++q) cost[q + 1] = cost[q] + (pairs_[q].end - pairs_[q].begin) + 4;
    chunk_bounds_ = balanced_chunks(cost, 64);
}

double CollisionEngine::equilibrium_at(const Vec3& x) const { return coeffs_(spec_, x); }

void CollisionEngine::require_beta_zero(const char* op) const {
    if (qc_.beta != 0.0) throw std::invalid_argument(std::string(op) + ": requires beta = 0");
}

namespace {

// Each integrand returns H(q): the flux entering the equation for n at slot 0 (for perturbation
// operators H = f(k) times the g-equation integrand).

struct CollisionIntegrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* n = s.v[0];
        const double p = n[0] * n[2] * n[3] + n[0] * n[1] * n[3] - n[0] * n[1] * n[2] - n[1] * n[2] * n[3];
        return {-p * s.cs};
    }
};

inline double bracket(const double* f, const double* g) {
    return g[1] / f[1] + g[2] / f[2] - g[3] / f[3] - g[0] / f[0];
}

struct LinearIntegrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* f = s.f;
        return {f[0] * f[1] * f[2] * f[3] * s.cs * bracket(f, s.v[0])};
    }
};

// Quadratic part of P(f(1+g)) with polarized products pol(a, b).
template <class Pol>
inline double quadratic_flux(const double* f, Pol&& pol) {
    const double f012 = f[0] * f[1] * f[2];
    const double f013 = f[0] * f[1] * f[3];
    const double f023 = f[0] * f[2] * f[3];
    const double f123 = f[1] * f[2] * f[3];
    return (f013 - f012) * pol(0, 1) + (f023 - f012) * pol(0, 2) + (f023 + f013) * pol(0, 3) +
           (-f012 - f123) * pol(1, 2) + (f013 - f123) * pol(1, 3) + (f023 - f123) * pol(2, 3);
}

struct GammaIntegrand {
    std::array<double, 1> operator()(const Slots<2>& s) const {
        const double* g = s.v[0];
        const double* h = s.v[1];
        auto pol = [&](int a, int b) { return 0.5 * (g[a] * h[b] + h[a] * g[b]); };
        return {s.cs * quadratic_flux(s.f, pol)};
    }
};

struct QIntegrand {
    std::array<double, 4> operator()(const Slots<3>& s) const {
        const double* a = s.v[0];
        const double* b = s.v[1];
        const double* c = s.v[2];
        auto sym = [&](int p, int q, int r) {
            return (a[p] * b[q] * c[r] + a[p] * c[q] * b[r] + b[p] * a[q] * c[r] + b[p] * c[q] * a[r] +
                    c[p] * a[q] * b[r] + c[p] * b[q] * a[r]) /
                   6.0;
        };
        const double* f = s.f;
        return {s.cs * f[0] * f[2] * f[3] * sym(0, 2, 3), s.cs * f[0] * f[1] * f[3] * sym(0, 1, 3),
                s.cs * f[0] * f[1] * f[2] * sym(0, 1, 2), s.cs * f[1] * f[2] * f[3] * sym(1, 2, 3)};
    }
};

struct RhsIntegrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* f = s.f;
        const double* g = s.v[0];
        const double lin = f[0] * f[1] * f[2] * f[3] * bracket(f, g);
        auto pol = [&](int a, int b) { return g[a] * g[b]; };
        const double quad = quadratic_flux(f, pol);
        const double cubic = f[0] * f[2] * f[3] * g[0] * g[2] * g[3] + f[0] * f[1] * f[3] * g[0] * g[1] * g[3] -
                             f[0] * f[1] * f[2] * g[0] * g[1] * g[2] - f[1] * f[2] * f[3] * g[1] * g[2] * g[3];
        return {s.cs * (lin - quad - cubic)};
    }
};

struct NonlinearIntegrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* f = s.f;
        const double* g = s.v[0];
        auto pol = [&](int a, int b) { return g[a] * g[b]; };
        const double quad = quadratic_flux(f, pol);
        const double cubic = f[0] * f[2] * f[3] * g[0] * g[2] * g[3] + f[0] * f[1] * f[3] * g[0] * g[1] * g[3] -
                             f[0] * f[1] * f[2] * g[0] * g[1] * g[2] - f[1] * f[2] * f[3] * g[1] * g[2] * g[3];
        return {-s.cs * (quad + cubic)};
    }
};

struct MultiplicationIntegrand {
    std::array<double, 1> operator()(const Slots<0>& s) const { return {s.cs * s.f[1] * s.f[2] * s.f[3]}; }
};

struct K1Integrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* f = s.f;
        const double* g = s.v[0];
        return {s.cs * f[0] * (f[2] * f[3] * g[1] + f[1] * f[3] * g[2])};
    }
};

struct K2Integrand {
    std::array<double, 1> operator()(const Slots<1>& s) const {
        const double* f = s.f;
        return {s.cs * f[0] * f[1] * f[2] * s.v[0][3]};
    }
};

}  // namespace

Field CollisionEngine::collision(const Field& n, Form form, DensityGauge gauge, Exec exec) const {
    const int transform = gauge == DensityGauge::Reciprocal ? detail::kReciprocal : detail::kEquilibrium;
    return evaluate<1, 1>({&n}, transform, false, form, exec, CollisionIntegrand{})[0];
}

Field CollisionEngine::linear(const Field& g, Form form, Exec exec) const {
    require_beta_zero("apply_L");
    return evaluate<1, 1>({&g}, detail::kPerturbation, true, form, exec, LinearIntegrand{})[0];
}

Field CollisionEngine::gamma(const Field& g, const Field& h, Form form, Exec exec) const {
    require_beta_zero("gamma");
    return evaluate<2, 1>({&g, &h}, detail::kPerturbation, true, form, exec, GammaIntegrand{})[0];
}

QPieces CollisionEngine::q_pieces(const Field& a, const Field& b, const Field& c, Form form, Exec exec) const {
    require_beta_zero("q_cubic");
    auto r = evaluate<3, 4>({&a, &b, &c}, detail::kPerturbation, true, form, exec, QIntegrand{});
    return QPieces{std::move(r[0]), std::move(r[1]), std::move(r[2]), std::move(r[3])};
}

Field CollisionEngine::rhs(const Field& g, Form form, Exec exec) const {
    require_beta_zero("rhs_perturbation");
    return evaluate<1, 1>({&g}, detail::kPerturbation, true, form, exec, RhsIntegrand{})[0];
}

Field CollisionEngine::nonlinear(const Field& g, Form form, Exec exec) const {
    require_beta_zero("nonlinear");
    return evaluate<1, 1>({&g}, detail::kPerturbation, true, form, exec, NonlinearIntegrand{})[0];
}

Field CollisionEngine::multiplication_coefficient(Exec exec) const {
    return evaluate<0, 1>({}, detail::kPerturbation, true, Form::Pointwise, exec, MultiplicationIntegrand{})[0];
}

Field CollisionEngine::apply_K1(const Field& g, Exec exec) const {
    require_beta_zero("apply_K1");
    return evaluate<1, 1>({&g}, detail::kPerturbation, true, Form::Pointwise, exec, K1Integrand{})[0];
}

Field CollisionEngine::apply_K2(const Field& g, Exec exec) const {
    require_beta_zero("apply_K2");
    return evaluate<1, 1>({&g}, detail::kPerturbation, true, Form::Pointwise, exec, K2Integrand{})[0];
}

Field collision_operator(const CollisionEngine& engine, const Field& n, Form form, DensityGauge gauge) {
    return engine.collision(n, form, gauge);
}

Field gamma(const CollisionEngine& engine, const Field& g, const Field& h, Form form) {
    return engine.gamma(g, h, form);
}

QPieces q_cubic(const CollisionEngine& engine, const Field& a, const Field& b, const Field& c, Form form) {
    return engine.q_pieces(a, b, c, form);
}

Field rhs_perturbation(const CollisionEngine& engine, const Field& g, Form form) { return engine.rhs(g, form); }

Moments conserved_quantities(const DispersionSpec& spec, const Grid& grid, const Field& n) {
    Moments m;
    for (int i = 0; i < grid.size(); ++i) {
        const double wn = grid.weight(i) * n[i];
        const Vec3& k = grid.node(i);
        m.mass += wn;
        m.momentum += wn * k;
        m.energy += wn * omega(spec, k);
    }
    return m;
}

double entropy(const Grid& grid, const Field& n) {
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        if (!(n[i] > 0.0)) throw std::domain_error("entropy: non-positive density at node " + std::to_string(i));
        s += grid.weight(i) * std::log(n[i]);
    }
    return s;
}

double entropy_production(const Grid& grid, const Field& n, const Field& collision) {
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) s += grid.weight(i) * collision[i] / n[i];
    return s;
}

}  // namespace wke
