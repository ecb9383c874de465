#include "wke/linear_op.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace wke {

std::vector<Field> paper_null_vectors(const DispersionSpec& spec, const Grid& grid) {
    std::vector<Field> v(5, Field(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
        const Vec3& k = grid.node(i);
        v[0][i] = 1.0;
        v[1][i] = k.x;
        v[2][i] = k.y;
        v[3][i] = k.z;
        v[4][i] = omega(spec, k);
    }
    return v;
}

std::vector<Field> weighted_null_vectors(const CollisionEngine& engine) {
    std::vector<Field> v = paper_null_vectors(engine.spec(), engine.grid());
    for (auto& x : v)
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= engine.equilibrium()[i];
    return v;
}

std::vector<Field> orthonormalize(const Grid& grid, std::vector<Field> vectors) {
    for (std::size_t a = 0; a < vectors.size(); ++a) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t b = 0; b < a; ++b) {
                const double c = grid.inner(vectors[a], vectors[b]);
                for (std::size_t i = 0; i < vectors[a].size(); ++i) vectors[a][i] -= c * vectors[b][i];
            }
        const double nrm = grid.norm(vectors[a]);
        if (!(nrm > 0.0)) throw std::invalid_argument("orthonormalize: linearly dependent vectors");
        for (double& x : vectors[a]) x /= nrm;
    }
    return vectors;
}

NullBasis null_bases(const CollisionEngine& engine) {
    NullBasis nb;
    nb.paper = orthonormalize(engine.grid(), paper_null_vectors(engine.spec(), engine.grid()));
    nb.weighted = orthonormalize(engine.grid(), weighted_null_vectors(engine));
    return nb;
}

namespace {

// Fills column `col` of V with sqrt(c) * br(e_a / f) for one manifold point.
struct ColumnBuilder {
    const CollisionEngine& eng;
    const Lagrange1D& lag;
    const Field& inv_f;
    int N;

    void operator()(const CollisionEngine::Pair& pr, const TensorBasis* tb_k3, const Vec3& u, const Vec3& z, double om,
                    double* col) const {
        TensorBasis tu;
        TensorBasis tz;
        tu.set(lag, u);
        tz.set(lag, z);
        const double f0 = eng.equilibrium()[pr.i];
        const double f3 = tb_k3 ? eng.equilibrium_at(eng.k3_node(pr.j)) : eng.equilibrium()[pr.j];
        const double F = f0 * eng.equilibrium_at(u) * eng.equilibrium_at(z) * f3;
        const double c = std::sqrt(0.25 * pr.mult * pr.w_out * pr.w_k3 * om * F);
        std::fill(col, col + N, 0.0);
        tu.spread(c, col);
        tz.spread(c, col);
        if (tb_k3)
            tb_k3->spread(-c, col);
        else
            col[pr.j] -= c;
        col[pr.i] -= c;
        for (int m = 0; m < N; ++m) col[m] *= inv_f[m];
    }
};

}  // namespace

OperatorMatrix assemble_dirichlet(const CollisionEngine& engine, Exec exec) {
    if (engine.quadrature().beta != 0.0) throw std::invalid_argument("assemble_dirichlet: requires beta = 0");
    const Grid& grid = engine.grid();
    const int N = grid.size();
    Field inv_f(N);
    for (int i = 0; i < N; ++i) inv_f[i] = 1.0 / engine.equilibrium()[i];
    const ColumnBuilder build{engine, grid.lagrange(), inv_f, N};
    const auto& pairs = engine.pairs();
    const auto& points = engine.points();
    const bool same = engine.k3_on_grid();
    std::vector<TensorBasis> tb_k3;
    if (!same) {
        int n3 = 0;
        for (const auto& p : pairs) n3 = std::max(n3, p.j + 1);
        tb_k3.resize(n3);
        for (int j = 0; j < n3; ++j) tb_k3[j].set(grid.lagrange(), engine.k3_node(j));
    }

    OperatorMatrix out;
    out.weights = grid.weights();
    out.B = Eigen::MatrixXd::Zero(N, N);
    const int eigen_threads = Eigen::nbThreads();
    Eigen::setNbThreads(1);

    if (exec == Exec::Serial) {
        // Reference path: one rank-one update per manifold point.
        std::vector<double> col(N);
        for (const auto& pr : pairs) {
            const Vec3 axis = grid.node(pr.i) + engine.k3_node(pr.j);
            for (std::size_t p = pr.begin; p < pr.end; ++p) {
                const Vec3& z = points[p].z;
                build(pr, same ? nullptr : &tb_k3[pr.j], axis - z, z, points[p].weight, col.data());
                for (int b = 0; b < N; ++b) {
                    const double cb = col[b];
                    if (cb == 0.0) continue;
                    for (int a = b; a < N; ++a) out.B(a, b) += col[a] * cb;
                }
            }
        }
    } else {
        const auto& bounds = engine.chunk_bounds();
        const int chunks = static_cast<int>(bounds.size()) - 1;
        const int groups = std::min(16, chunks);
        constexpr int batch = 256;
        std::vector<Eigen::MatrixXd> acc(groups);
        for_each_chunk(groups, [&](int g) {
            acc[g] = Eigen::MatrixXd::Zero(N, N);
            Eigen::MatrixXd V(N, batch);
            int filled = 0;
            auto flush = [&]() {
                if (filled == 0) return;
                acc[g].selfadjointView<Eigen::Lower>().rankUpdate(V.leftCols(filled));
                filled = 0;
            };
            for (int c = g; c < chunks; c += groups) {
                for (std::size_t q = bounds[c]; q < bounds[c + 1]; ++q) {
                    const auto& pr = pairs[q];
                    const Vec3 axis = grid.node(pr.i) + engine.k3_node(pr.j);
                    for (std::size_t p = pr.begin; p < pr.end; ++p) {
                        const Vec3& z = points[p].z;
                        build(pr, same ? nullptr : &tb_k3[pr.j], axis - z, z, points[p].weight, V.col(filled).data());
                        if (++filled == batch) flush();
                    }
                }
            }
            flush();
        });
        for (int g = 0; g < groups; ++g) out.B.triangularView<Eigen::Lower>() += acc[g];
    }
    Eigen::setNbThreads(eigen_threads);
    out.B.triangularView<Eigen::StrictlyUpper>() = out.B.transpose();
    return out;
}

Field apply_L(const CollisionEngine& engine, const Field& g, Form form) { return engine.linear(g, form); }

Field apply_matrix_L(const OperatorMatrix& m, const Field& g) {
    const Eigen::Map<const Eigen::VectorXd> x(g.data(), static_cast<Eigen::Index>(g.size()));
    const Eigen::VectorXd y = m.B * x;
    Field out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = -y[static_cast<Eigen::Index>(i)] / m.weights[i];
    return out;
}

double rayleigh_quotient(const OperatorMatrix& m, const Field& x) {
    const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
    double wn = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) wn += m.weights[i] * x[i] * x[i];
    if (!(wn > 0.0)) throw std::invalid_argument("rayleigh_quotient: zero vector");
    return v.dot(m.B * v) / wn;
}

NullReport null_residuals(const OperatorMatrix& m, const NullBasis& basis, double tolerance) {
    if (basis.paper.size() != 5 || basis.weighted.size() != 5)
        throw std::invalid_argument("null_residuals: expected five vectors per basis");
    NullReport r;
    r.tolerance = tolerance;
    for (int a = 0; a < 5; ++a) {
        r.paper_quotients[a] = rayleigh_quotient(m, basis.paper[a]);
        r.weighted_quotients[a] = rayleigh_quotient(m, basis.weighted[a]);
        if (std::abs(r.paper_quotients[a]) <= tolerance) ++r.paper_below;
        if (std::abs(r.weighted_quotients[a]) <= tolerance) ++r.weighted_below;
    }
    const bool w = r.weighted_below == 5;
    const bool p = r.paper_below == 5;
    r.null_basis = w && p ? "both" : w ? "weighted" : p ? "paper" : "none";
    return r;
}

namespace {
constexpr char kMatrixMagic[8] = {'W', 'K', 'E', 'M', 'A', 'T', '0', '1'};
}

void write_matrix_binary(const std::string& path, const OperatorMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::int32_t n = m.dim();
    out.write(kMatrixMagic, 8);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(m.weights.data()), static_cast<std::streamsize>(n * sizeof(double)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double v = m.B(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

OperatorMatrix read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    char magic[8];
    std::int32_t n = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0 || n <= 0) throw std::runtime_error(path + ": not a matrix file");
    OperatorMatrix m;
    m.weights.resize(n);
    in.read(reinterpret_cast<char*>(m.weights.data()), static_cast<std::streamsize>(n * sizeof(double)));
    m.B.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) in.read(reinterpret_cast<char*>(&m.B(i, j)), sizeof(double));
    if (!in) throw std::runtime_error(path + ": truncated payload");
    return m;
}

void write_matrix_csv(const std::string& path, const OperatorMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << std::setprecision(17);
    for (int i = 0; i < m.dim(); ++i) {
        for (int j = 0; j < m.dim(); ++j) out << (j ? "," : "") << m.B(i, j);
        out << '\n';
    }
}

}  // namespace wke
