#include "wke/fields.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace wke {

namespace {

constexpr char kMagic[8] = {'W', 'K', 'E', 'F', 'L', 'D', '0', '1'};

void check_size(const Grid& grid, const Field& values) {
    if (static_cast<int>(values.size()) != grid.size()) throw std::invalid_argument("field size does not match the grid");
}

}  // namespace

void write_field_csv(const std::string& path, const Grid& grid, const Field& values) {
    check_size(grid, values);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "index,kx,ky,kz,value\n" << std::setprecision(17);
    for (int i = 0; i < grid.size(); ++i) {
        const Vec3& k = grid.node(i);
        out << i << ',' << k.x << ',' << k.y << ',' << k.z << ',' << values[i] << '\n';
    }
}

Field read_field_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("index,", 0) != 0) throw std::runtime_error(path + ": missing header");
    Field values(grid.size(), 0.0);
    std::vector<char> seen(grid.size(), 0);
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell[5];
        for (auto& c : cell) std::getline(ss, c, ',');
        try {
            const int idx = std::stoi(cell[0]);
            if (idx < 0 || idx >= grid.size()) throw std::out_of_range("index");
            values[idx] = std::stod(cell[4]);
            seen[idx] = 1;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    for (int i = 0; i < grid.size(); ++i)
        if (!seen[i]) throw std::runtime_error(path + ": node " + std::to_string(i) + " missing");
    return values;
}

void write_field_binary(const std::string& path, const Grid& grid, const Field& values) {
    check_size(grid, values);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::int32_t n = grid.n_per_axis();
    const double kc = grid.k_cut();
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&kc), sizeof kc);
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
}

Field read_field_binary(const std::string& path, const Grid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    char magic[8];
    std::int32_t n = 0;
    double kc = 0.0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&kc), sizeof kc);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error(path + ": not a field file");
    if (n != grid.n_per_axis() || kc != grid.k_cut()) throw std::runtime_error(path + ": grid mismatch");
    Field values(grid.size());
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated payload");
    return values;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

Field smooth_random_field(const Grid& grid, std::mt19937_64& rng, int modes, int max_wavenumber) {
    Field out(grid.size(), 0.0);
    const int span = 2 * max_wavenumber + 1;
    for (int m = 0; m < modes; ++m) {
        Vec3 wave;
        for (int d = 0; d < 3; ++d)
            wave[d] = static_cast<double>(static_cast<int>(rng() % span) - max_wavenumber);
        const double coef = uniform(rng, -1.0, 1.0);
        const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        for (int i = 0; i < grid.size(); ++i)
            out[i] += coef * std::cos(std::numbers::pi * dot(wave, grid.node(i)) / grid.k_cut() + phase);
    }
    return out;
}

Field rough_random_field(const Grid& grid, std::mt19937_64& rng) {
    Field out(grid.size());
    for (double& v : out) v = uniform(rng, -1.0, 1.0);
    return out;
}

Field random_density(const CollisionEngine& engine, std::mt19937_64& rng, double amplitude) {
    Field h = smooth_random_field(engine.grid(), rng);
    double sup = 0.0;
    for (double v : h) sup = std::max(sup, std::abs(v));
    if (sup == 0.0) sup = 1.0;
    Field n(h.size());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = engine.equilibrium()[i] * (1.0 + amplitude * h[i] / sup);
    return n;
}

Field normalized(const Grid& grid, Field g) {
    const double nrm = grid.norm(g);
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot normalize the zero field");
    for (double& v : g) v /= nrm;
    return g;
}

}  // namespace wke
