#include "rda/grid.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "rda/io.hpp"

namespace rda {

Grid Grid::make(int dim, double half_width, int n) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid: dim must be 1, 2 or 3");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw std::invalid_argument("grid: half width L must be positive");
    }
    if (n < 3) throw std::invalid_argument("grid: need at least 3 nodes per axis");
    return Grid{dim, half_width, n};
}

double Grid::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

std::size_t Grid::stride(int axis) const {
    std::size_t s = 1;
    for (int a = 0; a < axis; ++a) s *= static_cast<std::size_t>(n);
    return s;
}

std::array<int, 3> Grid::multi_index(std::size_t idx) const {
    std::array<int, 3> m{0, 0, 0};
    const auto nn = static_cast<std::size_t>(n);
    for (int a = 0; a < dim; ++a) {
        m[static_cast<std::size_t>(a)] = static_cast<int>(idx % nn);
        idx /= nn;
    }
    return m;
}

double Grid::radius_sq(std::size_t idx) const {
    const auto m = multi_index(idx);
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) {
        const double x = coord(m[static_cast<std::size_t>(a)]);
        r2 += x * x;
    }
    return r2;
}

double Grid::laplacian_spectral_radius() const {
    const double h = spacing();
    const double s = std::sin(std::numbers::pi * n / (2.0 * (n + 1)));
    return dim * 4.0 / (h * h) * s * s;
}

Field::Field(const Grid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
    if (v_.size() != g.size()) throw std::invalid_argument("field: value count does not match grid");
}

bool Field::all_finite() const {
    for (double x : v_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

Field sample(const Grid& grid, const FieldSpec& spec) {
    Field f(grid);
    std::array<double, 3> x{};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto m = grid.multi_index(i);
        for (int a = 0; a < grid.dim; ++a) {
            x[static_cast<std::size_t>(a)] = grid.coord(m[static_cast<std::size_t>(a)]);
        }
        f[i] = spec(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim)));
    }
    return f;
}

namespace {

void require_same_grid(const Field& f, const Field& g) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("fields live on different grids");
}

// Calls fn(line_start, stride) once per grid line along `axis`.
template <class Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn) {
    const std::size_t st = grid.stride(axis);
    const auto nn = static_cast<std::size_t>(grid.n);
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if ((idx / st) % nn == 0) fn(idx, st);
    }
}

}  // namespace

Field laplacian(const Field& f) {
    const Grid& g = f.grid();
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    const auto nn = static_cast<std::size_t>(g.n);
    Field out(g);
    for (int a = 0; a < g.dim; ++a) {
        for_each_line(g, a, [&](std::size_t start, std::size_t st) {
            for (std::size_t j = 0; j < nn; ++j) {
                const std::size_t idx = start + j * st;
                const double left = j > 0 ? f[idx - st] : 0.0;
                const double right = j + 1 < nn ? f[idx + st] : 0.0;
                out[idx] += (left - 2.0 * f[idx] + right) * inv_h2;
            }
        });
    }
    return out;
}

double inner(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.grid().cell_volume();
}

double norm_l2(const Field& f) { return std::sqrt(inner(f, f)); }

double grad_inner(const Field& f, const Field& g) {
    require_same_grid(f, g);
    const Grid& gr = f.grid();
    const double h = gr.spacing();
    const auto nn = static_cast<std::size_t>(gr.n);
    double s = 0.0;
    for (int a = 0; a < gr.dim; ++a) {
        for_each_line(gr, a, [&](std::size_t start, std::size_t st) {
            for (std::size_t j = 0; j <= nn; ++j) {
                const double fl = j > 0 ? f[start + (j - 1) * st] : 0.0;
                const double fr = j < nn ? f[start + j * st] : 0.0;
                const double gl = j > 0 ? g[start + (j - 1) * st] : 0.0;
                const double gr_ = j < nn ? g[start + j * st] : 0.0;
                s += (fr - fl) * (gr_ - gl);
            }
        });
    }
    return s * gr.cell_volume() / (h * h);
}

double grad_norm_sq(const Field& f) { return grad_inner(f, f); }

double norm_h1(const Field& f) { return std::sqrt(inner(f, f) + grad_norm_sq(f)); }

double cutoff_rho(double s) {
    const double a = std::abs(s);
    if (a <= 1.0) return 0.0;
    if (a >= 2.0) return 1.0;
    const double t = a - 1.0;
    return t * t * (3.0 - 2.0 * t);
}

double cutoff_rho_derivative(double s) {
    const double a = std::abs(s);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    const double t = a - 1.0;
    const double d = 6.0 * t * (1.0 - t);
    return s < 0.0 ? -d : d;
}

TailWeights tail_weights(const Grid& grid, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("tail weights: k must be positive");
    TailWeights w;
    w.truncated = std::sqrt(2.0) * k >= grid.half_width;
    const double inv_k2 = 1.0 / (k * k);
    w.node.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) w.node[i] = cutoff_rho(grid.radius_sq(i) * inv_k2);

    const auto nn = static_cast<std::size_t>(grid.n);
    const double L = grid.half_width;
    for (int a = 0; a < grid.dim; ++a) {
        auto& edges = w.edge[static_cast<std::size_t>(a)];
        edges.reserve(grid.size() / nn * (nn + 1));
        for_each_line(grid, a, [&](std::size_t start, std::size_t st) {
            // Ghost nodes sit at -L and +L along this axis.
            const double r2_line = grid.radius_sq(start) - grid.coord(0) * grid.coord(0);
            const double ghost = cutoff_rho((r2_line + L * L) * inv_k2);
            for (std::size_t j = 0; j <= nn; ++j) {
                const double wl = j > 0 ? w.node[start + (j - 1) * st] : ghost;
                const double wr = j < nn ? w.node[start + j * st] : ghost;
                edges.push_back(0.5 * (wl + wr));
            }
        });
    }
    return w;
}

double weighted_grad_norm_sq(const Field& f, const TailWeights& w) {
    const Grid& gr = f.grid();
    const double h = gr.spacing();
    const auto nn = static_cast<std::size_t>(gr.n);
    double s = 0.0;
    for (int a = 0; a < gr.dim; ++a) {
        const auto& edges = w.edge[static_cast<std::size_t>(a)];
        std::size_t e = 0;
        for_each_line(gr, a, [&](std::size_t start, std::size_t st) {
            for (std::size_t j = 0; j <= nn; ++j, ++e) {
                const double fl = j > 0 ? f[start + (j - 1) * st] : 0.0;
                const double fr = j < nn ? f[start + j * st] : 0.0;
                s += edges[e] * (fr - fl) * (fr - fl);
            }
        });
    }
    return s * gr.cell_volume() / (h * h);
}

TailNorms tail_weighted_norms(const Field& u, const Field& v, double k) {
    require_same_grid(u, v);
    const TailWeights w = tail_weights(u.grid(), k);
    TailNorms t;
    t.truncated = w.truncated;
    double su = 0.0;
    double sv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        su += w.node[i] * u[i] * u[i];
        sv += w.node[i] * v[i] * v[i];
    }
    const double vol = u.grid().cell_volume();
    t.u_l2_sq = su * vol;
    t.v_l2_sq = sv * vol;
    t.grad_u_sq = weighted_grad_norm_sq(u, w);
    return t;
}

void write_field_csv(std::ostream& os, const Field& f, const std::string& name,
                     const std::string& config_hash) {
    const Grid& g = f.grid();
    static const char* axes[] = {"x", "y", "z"};
    std::vector<std::string> cols;
    for (int a = 0; a < g.dim; ++a) cols.emplace_back(axes[a]);
    cols.emplace_back("value");
    io::CsvWriter csv(config_hash, cols);
    csv.comment("field=" + name);
    csv.comment("grid {\"dim\":" + std::to_string(g.dim) + ",\"L\":" + io::format_double(g.half_width) +
                ",\"n\":" + std::to_string(g.n) + ",\"spacing\":" + io::format_double(g.spacing()) +
                "}");
    std::vector<double> row(static_cast<std::size_t>(g.dim) + 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto m = g.multi_index(i);
        for (int a = 0; a < g.dim; ++a) {
            row[static_cast<std::size_t>(a)] = g.coord(m[static_cast<std::size_t>(a)]);
        }
        row.back() = f[i];
        csv.row(row);
    }
    os << csv.text();
}

}  // namespace rda
