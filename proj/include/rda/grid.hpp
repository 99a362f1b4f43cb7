#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rda/model.hpp"

namespace rda {

/// Uniform box [-L, L]^dim with n interior nodes per axis and homogeneous
/// Dirichlet ghosts on the boundary. Node i on an axis sits at -L + (i+1) h.
struct Grid {
    int dim = 1;
    double half_width = 1.0;
    int n = 3;

    static Grid make(int dim, double half_width, int n);

    double spacing() const { return 2.0 * half_width / (n + 1); }
    double cell_volume() const;
    std::size_t size() const;
    std::size_t stride(int axis) const;
    double coord(int i) const { return -half_width + (i + 1) * spacing(); }
    std::array<int, 3> multi_index(std::size_t idx) const;
    /// Squared distance of node idx from the origin.
    double radius_sq(std::size_t idx) const;
    /// Largest eigenvalue magnitude of the discrete Laplacian.
    double laplacian_spectral_radius() const;

    bool operator==(const Grid&) const = default;
};

/// Discrete function on the interior nodes of a grid.
class Field {
public:
    explicit Field(const Grid& g) : grid_(g), v_(g.size(), 0.0) {}
    Field(const Grid& g, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::span<double> values() { return v_; }
    std::span<const double> values() const { return v_; }
    bool all_finite() const;

private:
    Grid grid_;
    std::vector<double> v_;
};

Field sample(const Grid& grid, const FieldSpec& spec);

/// Second-order (2 dim + 1)-point Laplacian with zero ghosts.
Field laplacian(const Field& f);

double inner(const Field& f, const Field& g);
double norm_l2(const Field& f);
/// (grad f, grad g) with forward differences over all n+1 edges per line
/// (boundary-facing edges use the zero ghost). -(lap f, g) equals this.
double grad_inner(const Field& f, const Field& g);
double grad_norm_sq(const Field& f);
double norm_h1(const Field& f);

/// Smoothstep cutoff: 0 for |s| <= 1, 1 for |s| >= 2, 3t^2 - 2t^3 (t = |s| - 1) between.
double cutoff_rho(double s);
double cutoff_rho_derivative(double s);
inline constexpr double kCutoffDerivativeBound = 1.5;

/// Node weights rho(|x|^2 / k^2) and edge weights (mean of the two endpoint
/// weights, ghosts included) per axis, used by every tail functional.
struct TailWeights {
    std::vector<double> node;
    std::array<std::vector<double>, 3> edge;  // edge[a][line * (n+1) + j]
    bool truncated = false;                   // sqrt(2) k >= L
};
TailWeights tail_weights(const Grid& grid, double k);

/// Weighted sum of squared forward differences along every axis.
double weighted_grad_norm_sq(const Field& f, const TailWeights& w);

struct TailNorms {
    double u_l2_sq = 0.0;
    double grad_u_sq = 0.0;
    double v_l2_sq = 0.0;
    bool truncated = false;
};
TailNorms tail_weighted_norms(const Field& u, const Field& v, double k);

/// Columns x[,y[,z]],value with a JSON grid header comment.
void write_field_csv(std::ostream& os, const Field& f, const std::string& name,
                     const std::string& config_hash);

}  // namespace rda
