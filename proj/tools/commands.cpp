#include "commands.hpp"

#include <openssl/evp.h>

#include <Eigen/Core>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "wke/collision.hpp"
#include "wke/dispersion.hpp"
#include "wke/evolution.hpp"
#include "wke/fields.hpp"
#include "wke/isotropic.hpp"
#include "wke/linear_op.hpp"
#include "wke/oracle.hpp"
#include "wke/parallel.hpp"
#include "wke/resonance.hpp"
#include "wke/spectral.hpp"

namespace wke::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string num(double x) {
    std::ostringstream o;
    o << std::setprecision(17) << x;
    return o.str();
}

// Doubles are written with 17 significant digits so reruns are byte-identical.
class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row(header);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }
    void values(const std::vector<double>& cells) {
        std::vector<std::string> s;
        for (double v : cells) s.push_back(num(v));
        row(s);
    }

private:
    std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

DispersionSpec spec_of(const RunConfig& cfg) { return cfg.dispersion; }

struct Setup {
    DispersionSpec spec;
    Grid grid;
    CollisionEngine engine;
    NullBasis basis;

    explicit Setup(const RunConfig& cfg)
        : spec(spec_of(cfg)),
          grid(cfg.n_per_axis, cfg.dispersion.k_cut),
          engine(spec, grid, cfg.quadrature, cfg.equilibrium),
          basis(null_bases(engine)) {}
};

void write_field(Context& ctx, const std::string& stem, const Grid& grid, const Field& values) {
    const std::string& f = ctx.cfg.output.field_format;
    if (f == "csv" || f == "both") write_field_csv(ctx.artifact(stem + ".csv").string(), grid, values);
    if (f == "binary" || f == "both") write_field_binary(ctx.artifact(stem + ".bin").string(), grid, values);
}

Field read_field_file(const std::string& path, const Grid& grid) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".bin") return read_field_binary(path, grid);
    return read_field_csv(path, grid);
}

[[noreturn]] void abort_run(Context& ctx, const std::string& message, const json& details) {
    const fs::path diag = ctx.artifact("diagnostics.json");
    json j;
    j["subcommand"] = ctx.subcommand;
    j["error"] = message;
    j["details"] = details;
    write_json(diag, j);
    throw NumericalAbort(message, diag);
}

// Initial perturbation per experiment.g0, scaled to discrete L2 norm `target`.
Field initial_perturbation(const Setup& s, const RunConfig& cfg, double target) {
    const std::string& g0 = cfg.experiment.g0;
    if (g0.rfind("preset:", 0) != 0) {
        Field g;
        try {
            g = read_field_file(g0, s.grid);
        } catch (const std::exception& e) {
            throw ConfigError(cfg.source, cfg.lines.count("experiment.g0") ? cfg.lines.at("experiment.g0") : 0,
                              std::string("experiment.g0: ") + e.what());
        }
        return g;
    }
    const std::string preset = g0.substr(7);
    std::mt19937_64 rng(cfg.seed);
    const std::vector<Field>& basis = s.basis.weighted;
    const Field h = smooth_random_field(s.grid, rng);
    Field perp = normalized(s.grid, project(s.grid, basis, h).second);
    Field pi(s.grid.size(), 0.0);
    for (const Field& b : basis) {
        const double c = uniform(rng, -1.0, 1.0);
        for (int i = 0; i < s.grid.size(); ++i) pi[i] += c * b[i];
    }
    pi = normalized(s.grid, pi);
    Field g(s.grid.size(), 0.0);
    for (int i = 0; i < s.grid.size(); ++i) {
        if (preset == "null-free-random") g[i] = perp[i];
        else if (preset == "null-only") g[i] = pi[i];
        else g[i] = (perp[i] + pi[i]) / std::sqrt(2.0);
    }
    for (double& v : g) v *= target;
    return g;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& traj) {
    CsvWriter csv(path, {"t", "mass", "px", "py", "pz", "energy", "entropy", "norm", "norm_pi", "norm_piperp"});
    for (const Diagnostics& d : traj.diagnostics)
        csv.values({d.t, d.mass, d.momentum.x, d.momentum.y, d.momentum.z, d.energy, d.entropy, d.norm, d.norm_pi,
                    d.norm_piperp});
}

json spectrum_json(const Setup& s, const RunConfig& cfg, const SpectrumReport& rep, const WeylReport& weyl) {
    json j;
    j["n_per_axis"] = cfg.n_per_axis;
    j["dimension"] = s.grid.size();
    j["gap"] = rep.gap;
    j["null_count"] = rep.null_count;
    j["null_tolerance"] = rep.null_tolerance;
    j["largest"] = rep.largest;
    j["coercivity_scale"] = coercivity_scale(s.spec, cfg.equilibrium, cfg.quadrature.beta);
    j["a_floor"] = weyl.a_floor;
    j["a_max"] = weyl.a_max;
    j["eigenvalues_below_a_floor"] = weyl.below_floor;
    return j;
}

// ---------------------------------------------------------------- subcommands

void check_dispersion(Context& ctx) {
    const AssumptionReport rep = verify_assumptions(ctx.cfg.dispersion, ctx.cfg.experiment.assumption_samples);
    json j;
    j["perturbation"] = to_string(ctx.cfg.dispersion.perturbation.kind);
    j["k_cut"] = ctx.cfg.dispersion.k_cut;
    j["samples"] = rep.n_samples;
    j["all_pass"] = rep.all_pass();
    json clauses = json::array();
    for (const AssumptionClause& c : rep.clauses)
        clauses.push_back({{"name", c.name},
                           {"checked", c.checked},
                           {"pass", c.pass},
                           {"worst_margin", c.worst_margin},
                           {"observed_min", c.observed_min},
                           {"observed_max", c.observed_max}});
    j["clauses"] = clauses;
    write_json(ctx.artifact("assumptions.json"), j);
}

void chart_resonance(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ResonanceChart ch = chart(cfg.dispersion, cfg.experiment.chart_k, cfg.experiment.chart_k3,
                                    cfg.quadrature.n_alpha, cfg.quadrature.n_theta, AlphaRule::PaperInterval,
                                    Domain::Box, cfg.quadrature.tol);
    CsvWriter csv(ctx.artifact("chart.csv"), {"alpha", "r_sq", "jac", "masked_fraction"});
    for (std::size_t a = 0; a < ch.alpha_nodes.size(); ++a)
        csv.values({ch.alpha_nodes[a], ch.r_sq[a], ch.jac[a], ch.masked_fraction(a)});
    json j;
    j["k"] = vec_json(ch.k);
    j["k3"] = vec_json(ch.k3);
    j["P"] = ch.P;
    j["empty"] = ch.empty;
    j["bracket_failures"] = ch.bracket_failures;
    write_json(ctx.artifact("chart.json"), j);
}

void assemble(Context& ctx) {
    const Setup s(ctx.cfg);
    const OperatorMatrix m = assemble_dirichlet(s.engine);
    write_matrix_binary(ctx.artifact("matrix.bin").string(), m);
    if (ctx.cfg.output.matrix_csv) write_matrix_csv(ctx.artifact("matrix.csv").string(), m);
    const SpectrumReport rep = eigen(m, s.basis.weighted);
    const NullReport nr = null_residuals(m, s.basis, rep.null_tolerance);
    json j;
    j["dimension"] = m.dim();
    j["pairs"] = s.engine.pair_count();
    j["manifold_points"] = s.engine.point_count();
    j["bracket_failures"] = s.engine.bracket_failures();
    j["symmetric"] = m.B.isApprox(m.B.transpose(), 0.0);
    j["null_tolerance"] = nr.tolerance;
    j["paper_quotients"] = nr.paper_quotients;
    j["weighted_quotients"] = nr.weighted_quotients;
    j["paper_below"] = nr.paper_below;
    j["weighted_below"] = nr.weighted_below;
    j["null_basis"] = nr.null_basis;
    write_json(ctx.artifact("null_report.json"), j);
}

void spectrum(Context& ctx) {
    const Setup s(ctx.cfg);
    const OperatorMatrix m = assemble_dirichlet(s.engine);
    const SpectrumReport rep = eigen(m, s.basis.weighted);
    const WeylReport weyl = weyl_report(s.engine, rep);
    {
        CsvWriter csv(ctx.artifact("eigenvalues.csv"), {"index", "eigenvalue"});
        for (std::size_t i = 0; i < rep.eigenvalues.size(); ++i) csv.row({std::to_string(i), num(rep.eigenvalues[i])});
    }
    {
        CsvWriter csv(ctx.artifact("deflated.csv"), {"index", "eigenvalue"});
        for (std::size_t i = 0; i < rep.deflated.size(); ++i) csv.row({std::to_string(i), num(rep.deflated[i])});
    }
    write_json(ctx.artifact("spectrum.json"), spectrum_json(s, ctx.cfg, rep, weyl));
}

void evolve(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Setup s(cfg);
    const Field g0 = initial_perturbation(s, cfg, cfg.experiment.g0_norm);
    IntegrateOptions opt;
    opt.T = cfg.experiment.T;
    opt.dt = cfg.experiment.dt;
    opt.scheme = scheme_from_string(cfg.experiment.scheme);
    opt.strict = cfg.experiment.strict;
    opt.linear_only = cfg.experiment.linear_only;
    write_field(ctx, "g0", s.grid, g0);
    const Trajectory traj = integrate(s.engine, s.basis.weighted, g0, opt);
    write_trajectory_csv(ctx.artifact("trajectory.csv"), traj);
    if (traj.aborted)
        abort_run(ctx, "evolve aborted: " + traj.abort_reason,
                  {{"abort_time", traj.abort_time}, {"steps_completed", traj.times.size() - 1}});
}

void iso_evolve(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.dispersion.perturbation.kind != PerturbationKind::Zero && cfg.dispersion.perturbation.eps != 0.0)
        throw ConfigError(cfg.source, cfg.lines.count("dispersion.perturbation") ? cfg.lines.at("dispersion.perturbation") : 0,
                          "iso-evolve: the isotropic reduction requires perturbation = zero");
    const RadialGrid grid(cfg.radial_points, cfg.dispersion.k_cut);
    const double kc = cfg.dispersion.k_cut;
    const double a = cfg.equilibrium.a, c = cfg.equilibrium.c;
    RadialField f0(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.node(i);
        const double bump = std::exp(-std::pow((x - 0.5 * kc) / (0.15 * kc), 2.0));
        f0[i] = (1.0 + cfg.experiment.iso_amplitude * bump) / (a + c * x * x);
    }
    IsoOptions opt;
    opt.beta = cfg.quadrature.beta;
    opt.order = cfg.experiment.iso_order;
    const IsoTrajectory tr = iso_integrate(grid, f0, cfg.experiment.T, cfg.experiment.dt, opt);
    {
        CsvWriter csv(ctx.artifact("iso_trajectory.csv"), {"t", "mass", "energy", "entropy", "distance"});
        for (const IsoDiagnostics& d : tr.diagnostics) csv.values({d.t, d.mass, d.energy, d.entropy, d.distance});
    }
    {
        CsvWriter csv(ctx.artifact("iso_final.csv"), {"x", "f0", "f", "f_matched"});
        for (int i = 0; i < grid.size(); ++i)
            csv.values({grid.node(i), f0[i], tr.final_state[i], tr.target.values[i]});
    }
    json j;
    j["matched_a"] = tr.target.a;
    j["matched_c"] = tr.target.c;
    j["steps"] = tr.diagnostics.size() - 1;
    j["aborted"] = tr.aborted;
    write_json(ctx.artifact("iso.json"), j);
    if (tr.aborted) abort_run(ctx, "iso-evolve aborted: " + tr.abort_reason, {{"steps_completed", tr.diagnostics.size() - 1}});
}

void picard_cmd(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Setup s(cfg);
    const OperatorMatrix m = assemble_dirichlet(s.engine);
    const SpectrumReport rep = eigen(m, s.basis.weighted);
    const Eigensystem es = decompose(m.B, m.weights);
    const double C = estimate_C(s.engine, cfg.experiment.c_samples, cfg.seed);
    const FixedPointConfig fp =
        make_fixed_point_config(rep.gap, C, cfg.experiment.picard_max_iter, cfg.experiment.picard_tol);
    const Field g0 = initial_perturbation(s, cfg, cfg.experiment.g0_ball_fraction * fp.ball_radius);
    json j;
    j["lambda"] = rep.gap;
    j["C"] = C;
    j["ball_radius"] = fp.ball_radius;
    j["g0_norm"] = s.grid.norm(g0);
    PicardResult res;
    try {
        res = picard(s.engine, es, s.basis.weighted, g0, fp, cfg.experiment.T, cfg.experiment.dt);
    } catch (const std::exception& e) {
        abort_run(ctx, std::string("picard failed: ") + e.what(), j);
    }
    j["iterations"] = res.report.iterations;
    j["differences"] = res.report.differences;
    j["contraction_factor"] = res.report.contraction_factor;
    j["converged"] = res.report.converged;
    write_json(ctx.artifact("picard.json"), j);
    write_trajectory_csv(ctx.artifact("picard_trajectory.csv"), res.trajectory);
}

void validate_oracle(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ExperimentConfig& e = cfg.experiment;
    QuadratureConfig qc = cfg.quadrature;
    qc.n_k3 = e.oracle_n_k3;
    const Grid grid(cfg.n_per_axis, cfg.dispersion.k_cut);
    const CollisionEngine engine(cfg.dispersion, grid, qc, cfg.equilibrium);
    std::mt19937_64 rng(cfg.seed);
    const Field n = random_density(engine, rng, e.oracle_amplitude);
    OracleOptions opt;
    opt.n_k3 = e.oracle_n_k3;
    opt.z_panels = e.oracle_z_panels;
    opt.z_order = e.oracle_z_order;
    opt.band_order = e.oracle_band_order;
    opt.beta = qc.beta;
    opt.node_budget = e.oracle_budget;
    const std::vector<double> eps = eps_schedule(grid);
    const Field reference = engine.collision(n, Form::Pointwise, DensityGauge::Reciprocal);
    const std::vector<Field> values = mollified_collision(cfg.dispersion, grid, eps, n, opt);
    const OracleComparison cmp = compare_with_reference(grid, eps, values, reference);
    const std::vector<Field> eq_values = mollified_collision(cfg.dispersion, grid, eps, engine.equilibrium(), opt);
    json table = json::array();
    for (std::size_t i = 0; i < eps.size(); ++i)
        table.push_back({{"eps", eps[i]},
                         {"relative_l2_error", cmp.errors[i]},
                         {"equilibrium_norm", grid.norm(eq_values[i])},
                         {"mollifier_mass", Mollifier(eps[i]).mass()}});
    json j;
    j["n_per_axis"] = cfg.n_per_axis;
    j["n_k3"] = opt.n_k3;
    j["table"] = table;
    j["extrapolated_error"] = cmp.extrapolated_error;
    j["observed_order"] = cmp.observed_order;
    j["tolerance"] = e.oracle_tolerance;
    j["pass"] = cmp.extrapolated_error < e.oracle_tolerance;
    write_json(ctx.artifact("oracle.json"), j);
    CsvWriter csv(ctx.artifact("oracle_fields.csv"), {"index", "manifold", "extrapolated"});
    for (int i = 0; i < grid.size(); ++i) csv.row({std::to_string(i), num(reference[i]), num(cmp.extrapolated[i])});
}

void sweep(Context& ctx) {
    const ExperimentConfig& e = ctx.cfg.experiment;
    CsvWriter csv(ctx.artifact("sweep.csv"), {"parameter", "value", "dimension", "gap", "null_count", "largest",
                                              "a_floor", "coercivity_scale"});
    for (double v : e.sweep_values) {
        RunConfig cfg = ctx.cfg;
        std::ostringstream assignment;
        assignment << std::setprecision(17);
        if (e.sweep_parameter == "k_cut") assignment << "dispersion.k_cut=" << v;
        else if (e.sweep_parameter == "eps") assignment << "dispersion.eps=" << v;
        else assignment << "grid.n_per_axis=" << static_cast<int>(std::lround(v));
        apply_override(cfg, assignment.str());
        validate(cfg);
        const Setup s(cfg);
        const OperatorMatrix m = assemble_dirichlet(s.engine);
        const SpectrumReport rep = eigen(m, s.basis.weighted);
        const WeylReport weyl = weyl_report(s.engine, rep);
        csv.row({e.sweep_parameter, num(v), std::to_string(m.dim()), num(rep.gap), std::to_string(rep.null_count),
                 num(rep.largest), num(weyl.a_floor), num(coercivity_scale(s.spec, cfg.equilibrium, cfg.quadrature.beta))});
    }
}

const std::map<std::string, std::function<void(Context&)>>& table() {
    static const std::map<std::string, std::function<void(Context&)>> t = {
        {"check-dispersion", check_dispersion}, {"chart-resonance", chart_resonance}, {"assemble", assemble},
        {"spectrum", spectrum},                 {"evolve", evolve},                   {"iso-evolve", iso_evolve},
        {"picard", picard_cmd},                 {"validate-oracle", validate_oracle}, {"sweep", sweep},
    };
    return t;
}

void write_manifest(const Context& ctx, double wall_seconds, int status, const std::string& error) {
    json j;
    j["subcommand"] = ctx.subcommand;
    j["status"] = status;
    if (!error.empty()) j["error"] = error;
    j["config_source"] = ctx.cfg.source;
    j["config"] = to_ini(ctx.cfg);
    j["seed"] = ctx.cfg.seed;
    j["threads"] = ctx.threads;
    j["versions"] = {{"wke", kVersion},
                     {"compiler", __VERSION__},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"openmp", _OPENMP}};
    j["wall_time_seconds"] = wall_seconds;
    json arts = json::array();
    for (const fs::path& p : ctx.artifacts) {
        const fs::path full = ctx.out_dir / p;
        if (!fs::exists(full)) continue;
        arts.push_back({{"file", p.generic_string()}, {"bytes", fs::file_size(full)}, {"sha256", sha256_file(full)}});
    }
    j["artifacts"] = arts;
    write_json(ctx.out_dir / "manifest.json", j);
}

}  // namespace

fs::path Context::artifact(const std::string& name) {
    artifacts.emplace_back(name);
    return out_dir / name;
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : table()) v.push_back(k);
        return v;
    }();
    return names;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* md = EVP_MD_CTX_new();
    EVP_DigestInit_ex(md, EVP_sha256(), nullptr);
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(md, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(md, digest, &len);
    EVP_MD_CTX_free(md);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

int run(Context& ctx) {
    const auto it = table().find(ctx.subcommand);
    if (it == table().end()) throw std::invalid_argument("unknown subcommand " + ctx.subcommand);
    fs::create_directories(ctx.out_dir);
    set_thread_count(ctx.threads);
    Eigen::setNbThreads(1);
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
    try {
        it->second(ctx);
    } catch (const ConfigError& e) {
        write_manifest(ctx, elapsed(), 2, e.what());
        throw;
    } catch (const NumericalAbort& e) {
        write_manifest(ctx, elapsed(), 3, e.what());
        throw;
    } catch (const std::exception& e) {
        // Anything else after validation is a numerical failure; record it before reporting.
        try {
            abort_run(ctx, e.what(), json::object());
        } catch (const NumericalAbort& a) {
            write_manifest(ctx, elapsed(), 3, a.what());
            throw;
        }
    }
    write_manifest(ctx, elapsed(), 0, "");
    std::cout << ctx.subcommand << ": wrote " << ctx.artifacts.size() + 1 << " files to " << ctx.out_dir.string()
              << "\n";
    return 0;
}

}  // namespace wke::cli
