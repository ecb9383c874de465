#pragma once

// Evaluation driver of CollisionEngine. Included only by the operator sources.

#include <cmath>
#include <exception>
#include <sstream>

#include "wke/collision.hpp"

namespace wke {

namespace detail {

enum Transform : int {
    kPerturbation = 0,  // nodal g, interpolate g/f, value f(x) I[g/f](x)
    kReciprocal = 1,    // nodal n, interpolate 1/n, value 1 / I[1/n](x)
    kEquilibrium = 2,   // nodal n, interpolate (n-f)/f^2, value f + f^2 I[.](x)
};

template <int NF>
struct Slots {
    double f[4];
    double v[NF > 0 ? NF : 1][4];
    double cs;
};

template <int NF>
inline Slots<NF> permute(const Slots<NF>& s, const int (&p)[4]) {
    Slots<NF> t;
    for (int a = 0; a < 4; ++a) {
        t.f[a] = s.f[p[a]];
        for (int q = 0; q < NF; ++q) t.v[q][a] = s.v[q][p[a]];
    }
    t.cs = s.cs;
    return t;
}

// The three non-trivial elements of the symmetry group of the resonant measure,
// and the literal relabelling used for the folded pair (k3, k) in the pointwise form.
inline constexpr int kSigma1[4] = {3, 2, 1, 0};
inline constexpr int kSigma2[4] = {1, 0, 3, 2};
inline constexpr int kSigma3[4] = {2, 3, 0, 1};
inline constexpr int kSwapOuter[4] = {3, 1, 2, 0};

inline double cross_section(double beta, const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    if (beta == 0.0) return 1.0;
    return std::pow(norm(a) * norm(b) * norm(c) * norm(d), -0.5 * beta);
}

}  // namespace detail

template <int NF, int NO, class Integrand>
std::array<Field, NO> CollisionEngine::evaluate(const std::array<const Field*, NF>& fields, int transform,
                                                bool perturbation_gauge, Form form, Exec exec,
                                                Integrand&& integrand) const {
    using namespace detail;
    const int N = grid_.size();
    const int N3 = static_cast<int>(k3_nodes_.size());
    const Lagrange1D& lag = grid_.lagrange();

    // Interpolation data and nodal slot values per field.
    std::array<Field, NF> interp;
    std::array<Field, NF> at_k3;
    for (int q = 0; q < NF; ++q) {
        const Field& src = *fields[q];
        if (static_cast<int>(src.size()) != N) throw std::invalid_argument("field size does not match the grid");
        interp[q].resize(N);
        for (int i = 0; i < N; ++i) {
            switch (transform) {
                case kPerturbation: interp[q][i] = src[i] / f_[i]; break;
                case kReciprocal:
                    if (!(src[i] > 0.0)) {
                        std::ostringstream msg;
                        msg << "collision: non-positive density " << src[i] << " at node " << i;
                        throw DensityError(msg.str());
                    }
                    interp[q][i] = 1.0 / src[i];
                    break;
                default: interp[q][i] = (src[i] - f_[i]) / (f_[i] * f_[i]); break;
            }
        }
    }
    auto value_at = [&](int q, const TensorBasis& tb, double fx, const Vec3& x) {
        const double iv = tb.contract(interp[q].data());
        switch (transform) {
            case kPerturbation: return fx * iv;
            case kReciprocal: {
                if (!(iv > 0.0)) {
                    std::ostringstream msg;
                    msg << "collision: interpolated density not positive at (" << x.x << ", " << x.y << ", " << x.z
                        << ")";
                    throw DensityError(msg.str());
                }
                return 1.0 / iv;
            }
            default: return fx + fx * fx * iv;
        }
    };
    std::vector<TensorBasis> tb_k3;
    if (!same_grid_) {
        tb_k3.resize(N3);
        for (int j = 0; j < N3; ++j) tb_k3[j].set(lag, k3_nodes_[j]);
        for (int q = 0; q < NF; ++q) {
            at_k3[q].resize(N3);
            for (int j = 0; j < N3; ++j) at_k3[q][j] = value_at(q, tb_k3[j], f3_[j], k3_nodes_[j]);
        }
    }

    const bool weak = form == Form::Conservative;
    const double beta = qc_.beta;

    auto process_pair = [&](const Pair& pr, const std::array<double*, NO>& acc) {
        const Vec3& k = grid_.node(pr.i);
        const Vec3& k3 = k3_nodes_[pr.j];
        const Vec3 axis = k + k3;
        Slots<NF> s;
        s.f[0] = f_[pr.i];
        s.f[3] = same_grid_ ? f_[pr.j] : f3_[pr.j];
        for (int q = 0; q < NF; ++q) {
            s.v[q][0] = (*fields[q])[pr.i];
            s.v[q][3] = same_grid_ ? (*fields[q])[pr.j] : at_k3[q][pr.j];
        }
        TensorBasis tb_u;
        TensorBasis tb_z;
        for (std::size_t p = pr.begin; p < pr.end; ++p) {
            const Vec3& z = points_[p].z;
            const Vec3 u = axis - z;
            tb_u.set(lag, u);
            tb_z.set(lag, z);
            s.f[1] = equilibrium_at(u);
            s.f[2] = equilibrium_at(z);
            for (int q = 0; q < NF; ++q) {
                s.v[q][1] = value_at(q, tb_u, s.f[1], u);
                s.v[q][2] = value_at(q, tb_z, s.f[2], z);
            }
            s.cs = cross_section(beta, k, u, z, k3);
            const double om = points_[p].weight;
            if (!weak) {
                const std::array<double, NO> h0 = integrand(s);
                for (int o = 0; o < NO; ++o) acc[o][pr.i] += pr.w_k3 * om * h0[o];
                if (same_grid_ && pr.i != pr.j) {
                    const std::array<double, NO> h1 = integrand(permute(s, kSwapOuter));
                    for (int o = 0; o < NO; ++o) acc[o][pr.j] += pr.w_out * om * h1[o];
                }
                continue;
            }
            const double W = pr.mult * pr.w_out * pr.w_k3 * om;
            const std::array<double, NO> h0 = integrand(s);
            const std::array<double, NO> h1 = integrand(permute(s, kSigma1));
            const std::array<double, NO> h2 = integrand(permute(s, kSigma2));
            const std::array<double, NO> h3 = integrand(permute(s, kSigma3));
            for (int o = 0; o < NO; ++o) {
                acc[o][pr.i] += W * h0[o];
                if (same_grid_) {
                    acc[o][pr.j] += W * h1[o];
                } else {
                    tb_k3[pr.j].spread(W * h1[o], acc[o]);
                }
                tb_u.spread(W * h2[o], acc[o]);
                tb_z.spread(W * h3[o], acc[o]);
            }
        }
    };

    std::array<Field, NO> out;
    for (auto& o : out) o.assign(N, 0.0);
    if (exec == Exec::Serial) {
        std::array<double*, NO> acc;
        for (int o = 0; o < NO; ++o) acc[o] = out[o].data();
        for (const Pair& pr : pairs_) process_pair(pr, acc);
    } else {
        const int chunks = static_cast<int>(chunk_bounds_.size()) - 1;
        std::vector<Field> partial(static_cast<std::size_t>(chunks) * NO);
        std::vector<std::exception_ptr> errors(chunks);
        for_each_chunk(chunks, [&](int c) {
            try {
                std::array<double*, NO> acc;
                for (int o = 0; o < NO; ++o) {
                    partial[c * NO + o].assign(N, 0.0);
                    acc[o] = partial[c * NO + o].data();
                }
                for (std::size_t p = chunk_bounds_[c]; p < chunk_bounds_[c + 1]; ++p) process_pair(pairs_[p], acc);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (int c = 0; c < chunks; ++c)
            for (int o = 0; o < NO; ++o) {
                const Field& part = partial[c * NO + o];
                for (int i = 0; i < N; ++i) out[o][i] += part[i];
            }
    }

    for (int o = 0; o < NO; ++o)
        for (int i = 0; i < N; ++i) {
            const double gauge = perturbation_gauge ? f_[i] : 1.0;
            out[o][i] /= weak ? 4.0 * grid_.weight(i) * gauge : gauge;
        }
    return out;
}

}  // namespace wke
