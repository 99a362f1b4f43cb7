#include "rda/path.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rda/io.hpp"
#include "rda/rng.hpp"

namespace rda {

namespace {

// Times within this many grid units of a node are treated as the node, so that
// t = k*dt reproduces the stored value even after rounding in t/dt.
double snap_tolerance(double p) { return 1e-9 + 1e-13 * std::abs(p); }

constexpr std::size_t kMaxNodes = std::size_t{1} << 32;

}  // namespace

SamplePath SamplePath::from_nodes(std::size_t origin, double dt, std::vector<double> values,
                                  std::uint64_t seed) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("path: dt_path must be positive");
    if (origin >= values.size()) throw std::invalid_argument("path: origin index outside node array");
    if (values[origin] != 0.0) throw std::invalid_argument("path: value at t = 0 must be exactly 0");
    SamplePath p;
    p.min_ = 0.0;
    p.max_ = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("path: non-finite node value");
        p.min_ = std::min(p.min_, v);
        p.max_ = std::max(p.max_, v);
    }
    p.values_ = std::make_shared<const std::vector<double>>(std::move(values));
    p.origin_ = origin;
    p.dt_ = dt;
    p.seed_ = seed;
    return p;
}

bool SamplePath::covers(double t) const {
    const double p = t / dt_ + static_cast<double>(origin_);
    const double tol = snap_tolerance(p);
    return p >= -tol && p <= static_cast<double>(size() - 1) + tol;
}

double SamplePath::at(double t) const {
    const auto& v = *values_;
    const double p = t / dt_ + static_cast<double>(origin_);
    const double last = static_cast<double>(v.size() - 1);
    const double k = std::nearbyint(p);
    if (std::abs(p - k) <= snap_tolerance(p)) {
        if (k < 0.0 || k > last) {
            throw std::out_of_range("path: t = " + io::format_double(t) + " outside [" +
                                    io::format_double(t_min()) + ", " +
                                    io::format_double(t_max()) + "]");
        }
        return v[static_cast<std::size_t>(k)];
    }
    if (!(p > 0.0 && p < last)) {
        throw std::out_of_range("path: t = " + io::format_double(t) + " outside [" +
                                io::format_double(t_min()) + ", " + io::format_double(t_max()) +
                                "]");
    }
    const double fl = std::floor(p);
    const auto i = static_cast<std::size_t>(fl);
    const double w = p - fl;
    return (1.0 - w) * v[i] + w * v[i + 1];
}

ShiftedView::ShiftedView(SamplePath base, double s)
    : base_(std::move(base)), s_(s), anchor_(base_.at(s)) {}

double ShiftedView::at(double t) const { return base_.at(t + s_) - anchor_; }

double ShiftedView::max_abs() const {
    return std::max(base_.max_value() - anchor_, anchor_ - base_.min_value());
}

SamplePath generate_path(std::uint64_t seed, double t_min, double t_max, double dt_path) {
    if (!(dt_path > 0.0) || !std::isfinite(dt_path)) {
        throw std::invalid_argument("generate_path: dt_path must be positive");
    }
    if (!(t_min <= 0.0 && t_max >= 0.0) || !std::isfinite(t_min) || !std::isfinite(t_max)) {
        throw std::invalid_argument("generate_path: need t_min <= 0 <= t_max");
    }
    const double neg = std::ceil(-t_min / dt_path - 1e-9);
    const double pos = std::ceil(t_max / dt_path - 1e-9);
    if (neg + pos + 1.0 > static_cast<double>(kMaxNodes)) {
        throw std::length_error("generate_path: grid of " + io::format_double(neg + pos + 1.0) +
                                " nodes exceeds the supported size");
    }
    const auto n_neg = static_cast<std::size_t>(std::max(0.0, neg));
    const auto n_pos = static_cast<std::size_t>(std::max(0.0, pos));

    std::vector<double> values(n_neg + n_pos + 1, 0.0);
    const double scale = std::sqrt(dt_path);
    const CounterRng forward(seed, 0);
    const CounterRng backward(seed, 1);
    for (std::size_t k = 1; k <= n_pos; ++k) {
        values[n_neg + k] = values[n_neg + k - 1] + scale * forward.normal(k - 1);
    }
    for (std::size_t k = 1; k <= n_neg; ++k) {
        values[n_neg - k] = values[n_neg - k + 1] + scale * backward.normal(k - 1);
    }
    return SamplePath::from_nodes(n_neg, dt_path, std::move(values), seed);
}

double evaluate(const SamplePath& path, double t) { return path.at(t); }
double evaluate(const ShiftedView& view, double t) { return view.at(t); }

ShiftedView shift(const SamplePath& path, double s) { return ShiftedView(path, s); }
ShiftedView shift(const ShiftedView& view, double r) {
    return ShiftedView(view.base(), view.shift_s() + r);
}

namespace {

template <class Eval>
TemperedIntegral tempered_impl(const Eval& eval, double dt, double t_lo, double m_abs,
                               double sigma, double gamma, double t_cut) {
    if (!(sigma > 0.0)) throw std::invalid_argument("tempered_integral: sigma must be positive");
    if (!(gamma >= 1.0 && gamma <= 3.0)) {
        throw std::invalid_argument("tempered_integral: gamma must lie in [1, 3]");
    }
    if (!(t_cut <= 0.0)) throw std::invalid_argument("tempered_integral: t_cut must be <= 0");
    if (t_cut < t_lo - snap_tolerance(t_lo / dt) * dt) {
        throw std::out_of_range("tempered_integral: t_cut below path range");
    }
    auto integrand = [&](double xi) {
        const double w = std::abs(eval(xi));
        return std::exp(sigma * xi) * (1.0 + w * w + std::pow(w, gamma + 1.0));
    };
    // Each path interval is split into kPanels trapezoid panels: |w|^{gamma+1} is
    // strongly curved inside an interval when the increment is large.
    constexpr int kPanels = 4;
    const double hp = dt / kPanels;
    const auto steps = static_cast<std::size_t>(std::floor(-t_cut / dt + 1e-9));
    double sum = 0.0;
    double prev = integrand(0.0);
    for (std::size_t j = 0; j < steps; ++j) {
        const double right = -static_cast<double>(j) * dt;
        double inner_sum = 0.5 * prev;
        for (int k = 1; k < kPanels; ++k) inner_sum += integrand(right - k * hp);
        const double cur = integrand(-static_cast<double>(j + 1) * dt);
        inner_sum += 0.5 * cur;
        sum += hp * inner_sum;
        prev = cur;
    }
    const double left = -static_cast<double>(steps) * dt;
    const double rem = left - t_cut;
    if (rem > 1e-12 * dt) {
        const double hr = rem / kPanels;
        double inner_sum = 0.5 * (prev + integrand(t_cut));
        for (int k = 1; k < kPanels; ++k) inner_sum += integrand(left - k * hr);
        sum += hr * inner_sum;
    }

    TemperedIntegral out;
    out.value = sum;
    out.tail_bound =
        std::exp(sigma * t_cut) * (1.0 + m_abs * m_abs + std::pow(m_abs, gamma + 1.0)) / sigma;
    return out;
}

}  // namespace

TemperedIntegral tempered_integral(const SamplePath& path, double sigma, double gamma,
                                   double t_cut) {
    return tempered_impl([&](double t) { return path.at(t); }, path.dt(), path.t_min(),
                         path.max_abs(), sigma, gamma, t_cut);
}

TemperedIntegral tempered_integral(const ShiftedView& view, double sigma, double gamma,
                                   double t_cut) {
    return tempered_impl([&](double t) { return view.at(t); }, view.base().dt(), view.t_min(),
                         view.max_abs(), sigma, gamma, t_cut);
}

NoiseSignal::NoiseSignal(SamplePath path) : src_(std::move(path)) {}
NoiseSignal::NoiseSignal(ShiftedView view) : src_(std::move(view)) {}

NoiseSignal NoiseSignal::smooth(std::function<double(double)> fn, double t_lo, double t_hi) {
    NoiseSignal s(SamplePath::from_nodes(0, 1.0, {0.0}));
    s.src_ = Smooth{std::move(fn), t_lo, t_hi};
    return s;
}

double NoiseSignal::operator()(double t) const {
    return std::visit(
        [t](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Smooth>) {
                if (t < s.lo || t > s.hi) throw std::out_of_range("noise: t outside signal range");
                return s.fn(t);
            } else {
                return s.at(t);
            }
        },
        src_);
}

double NoiseSignal::t_lo() const {
    return std::visit(
        [](const auto& s) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Smooth>) return s.lo;
            else return s.t_min();
        },
        src_);
}

double NoiseSignal::t_hi() const {
    return std::visit(
        [](const auto& s) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Smooth>) return s.hi;
            else return s.t_max();
        },
        src_);
}

bool NoiseSignal::covers(double a, double b) const {
    return std::visit(
        [a, b](const auto& s) -> bool {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Smooth>) {
                return a >= s.lo && b <= s.hi;
            } else {
                return s.covers(a) && s.covers(b);
            }
        },
        src_);
}

std::optional<double> NoiseSignal::grid_step() const {
    if (const auto* p = std::get_if<SamplePath>(&src_)) return p->dt();
    if (const auto* v = std::get_if<ShiftedView>(&src_)) return v->base().dt();
    return std::nullopt;
}

double NoiseSignal::grid_phase() const {
    if (const auto* v = std::get_if<ShiftedView>(&src_)) return v->shift_s();
    return 0.0;
}

void write_path_csv(std::ostream& os, const SamplePath& path, const std::string& config_hash) {
    io::CsvWriter csv(config_hash, {"t", "omega"});
    csv.comment("seed=" + std::to_string(path.seed()) + " dt_path=" + io::format_double(path.dt()));
    const auto& v = path.values();
    for (std::size_t i = 0; i < v.size(); ++i) csv.row({path.node_time(i), v[i]});
    os << csv.text();
}

}  // namespace rda
