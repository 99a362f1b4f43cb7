#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rda {

/// A realized two-sided Wiener path sampled on the grid t_k = k * dt,
/// k = -n_neg .. n_pos, and linearly interpolated in between.
/// Immutable; copies share the node storage.
class SamplePath {
public:
    /// `values[origin]` is the node at t = 0 and must be exactly 0.
    static SamplePath from_nodes(std::size_t origin, double dt, std::vector<double> values,
                                 std::uint64_t seed = 0);

    double t_min() const { return -static_cast<double>(origin_) * dt_; }
    double t_max() const { return static_cast<double>(size() - 1 - origin_) * dt_; }
    double dt() const { return dt_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return values_->size(); }
    std::size_t origin() const { return origin_; }
    const std::vector<double>& values() const { return *values_; }
    double node_time(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(origin_)) * dt_;
    }

    /// Largest |omega| over the stored nodes.
    double max_abs() const { return std::max(max_, -min_); }
    double min_value() const { return min_; }
    double max_value() const { return max_; }

    /// Linear interpolation; exact (bit-identical) at nodes.
    /// Throws std::out_of_range outside [t_min, t_max].
    double at(double t) const;

    bool covers(double t) const;

private:
    SamplePath() = default;
    std::shared_ptr<const std::vector<double>> values_;
    std::size_t origin_ = 0;
    double dt_ = 0.0;
    std::uint64_t seed_ = 0;
    double min_ = 0.0;
    double max_ = 0.0;
};

/// theta_s omega: t -> omega(t + s) - omega(s).
class ShiftedView {
public:
    ShiftedView(SamplePath base, double s);

    const SamplePath& base() const { return base_; }
    double shift_s() const { return s_; }
    double t_min() const { return base_.t_min() - s_; }
    double t_max() const { return base_.t_max() - s_; }

    double at(double t) const;
    bool covers(double t) const { return base_.covers(t + s_); }

    /// Largest |theta_s omega| over the base path's nodes.
    double max_abs() const;

private:
    SamplePath base_;
    double s_;
    double anchor_;  // omega(s)
};

/// Draws a discrete Brownian path on [t_min, t_max] (extended outward to the
/// nearest multiple of dt). The positive branch uses stream 0, the negative
/// branch an independent stream 1 walked leftward from 0.
SamplePath generate_path(std::uint64_t seed, double t_min, double t_max, double dt_path);

double evaluate(const SamplePath& path, double t);
double evaluate(const ShiftedView& view, double t);

ShiftedView shift(const SamplePath& path, double s);
/// theta_r theta_s = theta_{s+r}: composing collapses into one view.
ShiftedView shift(const ShiftedView& view, double r);

struct TemperedIntegral {
    double value = 0.0;       // trapezoid over [t_cut, 0], 4 panels per path interval
    double tail_bound = 0.0;  // e^{sigma t_cut} (1 + M^2 + M^{gamma+1}) / sigma, reported only
};

/// Truncated  int_{t_cut}^0 e^{sigma xi} (1 + |w|^2 + |w|^{gamma+1}) dxi  on the path grid.
TemperedIntegral tempered_integral(const SamplePath& path, double sigma, double gamma,
                                   double t_cut);
TemperedIntegral tempered_integral(const ShiftedView& view, double sigma, double gamma,
                                   double t_cut);

/// Pointwise noise omega(t) as consumed by the solver: a sample path, a
/// shifted view, or a frozen deterministic function (for order studies).
class NoiseSignal {
public:
    NoiseSignal(SamplePath path);  // NOLINT(google-explicit-constructor)
    NoiseSignal(ShiftedView view);  // NOLINT(google-explicit-constructor)
    static NoiseSignal smooth(std::function<double(double)> fn, double t_lo, double t_hi);

    double operator()(double t) const;
    double t_lo() const;
    double t_hi() const;
    bool covers(double a, double b) const;

    /// Node spacing and phase of the underlying grid: nodes sit at
    /// k * step - phase. Empty for smooth signals.
    std::optional<double> grid_step() const;
    double grid_phase() const;

private:
    struct Smooth {
        std::function<double(double)> fn;
        double lo, hi;
    };
    std::variant<SamplePath, ShiftedView, Smooth> src_;
};

/// CSV columns `t,omega`.
void write_path_csv(std::ostream& os, const SamplePath& path, const std::string& config_hash);

}  // namespace rda
