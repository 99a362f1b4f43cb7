#include "rda/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "rda/io.hpp"

namespace rda {

ModelConfig RunConfig::model() const { return make_model(phys, Nonlinearity::power(nl), delta); }

Grid RunConfig::grid() const { return Grid::make(dim, L, n); }

DiscreteProblem RunConfig::problem() const { return DiscreteProblem::make(grid(), model()); }

std::string ConfigError::to_string() const {
    std::string s;
    if (line > 0) s += "line " + std::to_string(line) + ": ";
    if (!key.empty()) s += key + ": ";
    return s + message;
}

namespace {

std::string join_errors(const std::vector<ConfigError>& errors) {
    std::string s = "invalid configuration";
    for (const auto& e : errors) s += "\n  " + e.to_string();
    return s;
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<ConfigError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys{
        {"model.alpha", ""},
        {"model.lambda", ""},
        {"model.delta", "auto"},
        {"model.a", "1"},
        {"model.gamma", "3"},
        {"model.b", "0"},
        {"model.g.profile", "zero"},
        {"model.g.amplitude", "1"},
        {"model.g.width", "1"},
        {"model.g.center", "0"},
        {"model.h.profile", "zero"},
        {"model.h.amplitude", "1"},
        {"model.h.width", "1"},
        {"model.h.center", "0"},
        {"grid.dim", "1"},
        {"grid.L", ""},
        {"grid.n", ""},
        {"solver.dt", ""},
        {"solver.scheme", "semi_implicit"},
        {"solver.record_every", "10"},
        {"solver.stability_factor", "1"},
        {"path.seeds", "1-32"},
        {"path.dt_path", "solver.dt"},
        {"path.t_min", "auto"},
        {"path.t_max", "auto"},
        {"experiment.tau_list", "-2,-4,-8,-16,-32,-64"},
        {"experiment.radii", "1"},
        {"experiment.family", "fixed_ball"},
        {"experiment.growth_beta", "0"},
        {"experiment.edge_concentrated", "false"},
        {"experiment.k_list", "5,10,15,20"},
        {"experiment.epsilon", "0.001"},
        {"experiment.splits", "0:1,1:0,0.5:0.5,1:1,0.25:2,2:0.25,1.5:2.5,3:1"},
        {"experiment.cocycle_tolerance", "1e-10"},
        {"experiment.t_start", "0"},
        {"experiment.t_end", "10"},
        {"experiment.burn_in", "2"},
        {"experiment.band", "1"},
        {"experiment.calibration_c", "1"},
        {"experiment.r_truncation", "160"},
        {"experiment.probe_temperedness", "true"},
        {"experiment.betas", "0.01,0.1,1"},
        {"experiment.probe_t_max", "100"},
        {"experiment.probe_t_step", "1"},
        {"experiment.oracle_mode", "20"},
        {"experiment.oracle_eta", "1"},
        {"experiment.oracle_dts", "0.01,0.005,0.0025"},
        {"experiment.oracle_t_final", "10"},
        {"output.dir", "out"},
    };
    return keys;
}

namespace {

struct Entry {
    int line = 0;
    std::string value;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string collapse_spaces(const std::string& s) {
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            space = true;
            continue;
        }
        if (space && !out.empty()) out += ' ';
        space = false;
        out += c;
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
    return parts;
}

std::optional<double> to_double(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    const char* begin = s.data();
    if (begin != end && *begin == '+') ++begin;
    auto [p, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x)) return std::nullopt;
    return x;
}

std::optional<long long> to_int(const std::string& s) {
    long long x = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return x;
}

bool on_lattice(double x, double step) {
    const double p = x / step;
    return std::abs(p - std::nearbyint(p)) <= 1e-9 + 1e-13 * std::abs(p);
}

struct Entries {
    std::map<std::string, Entry> items;
};

Entries read_entries(std::string_view text, const std::map<std::string, std::string>& overrides,
                     std::vector<ConfigError>& errors) {
    Entries out;
    std::set<std::string> known;
    for (const auto& [k, d] : config_keys()) known.insert(k);
    std::istringstream is{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({lineno, "", "expected 'section.key = value'"});
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = collapse_spaces(trim(line.substr(eq + 1)));
        if (!known.count(key)) {
            errors.push_back({lineno, key, "unknown key"});
            continue;
        }
        if (value.empty()) {
            errors.push_back({lineno, key, "missing value"});
            continue;
        }
        if (out.items.count(key)) {
            errors.push_back({lineno, key, "duplicate key (first set on line " +
                                               std::to_string(out.items[key].line) + ")"});
            continue;
        }
        out.items[key] = {lineno, value};
    }
    for (const auto& [key, value] : overrides) {
        if (!known.count(key)) {
            errors.push_back({0, key, "unknown key"});
            continue;
        }
        out.items[key] = {0, collapse_spaces(trim(value))};
    }
    return out;
}

std::string canonical_text(const Entries& e) {
    std::string s;
    for (const auto& [k, v] : e.items) s += k + " = " + v.value + "\n";
    return s;
}

class Reader {
public:
    Reader(const Entries& e, std::vector<ConfigError>& errors) : e_(e), errors_(errors) {}

    bool has(const std::string& key) const { return e_.items.count(key) > 0; }
    int line(const std::string& key) const {
        const auto it = e_.items.find(key);
        return it == e_.items.end() ? 0 : it->second.line;
    }
    void error(const std::string& key, const std::string& msg) { errors_.push_back({line(key), key, msg}); }

    std::optional<std::string> raw(const std::string& key, bool required = false) {
        const auto it = e_.items.find(key);
        if (it == e_.items.end()) {
            if (required) errors_.push_back({0, key, "required key is missing"});
            return std::nullopt;
        }
        return it->second.value;
    }

    /// Reads a real; `check` returns an error message or "".
    void real(const std::string& key, double& out, bool required = false,
              const std::function<std::string(double)>& check = {}) {
        const auto v = raw(key, required);
        if (!v) return;
        const auto x = to_double(*v);
        if (!x) return error(key, "expected a real number, got '" + *v + "'");
        if (check) {
            const std::string msg = check(*x);
            if (!msg.empty()) return error(key, msg);
        }
        out = *x;
    }

    void optional_real(const std::string& key, std::optional<double>& out,
                       const std::function<std::string(double)>& check = {}) {
        const auto v = raw(key);
        if (!v || *v == "auto") return;
        double x = 0.0;
        bool ok = true;
        const auto parsed = to_double(*v);
        if (!parsed) {
            error(key, "expected a real number or 'auto', got '" + *v + "'");
            ok = false;
        } else {
            x = *parsed;
            if (check) {
                const std::string msg = check(x);
                if (!msg.empty()) {
                    error(key, msg);
                    ok = false;
                }
            }
        }
        if (ok) out = x;
    }

    void integer(const std::string& key, int& out, bool required, long long lo, long long hi,
                 const std::string& range_msg) {
        const auto v = raw(key, required);
        if (!v) return;
        const auto x = to_int(*v);
        if (!x) return error(key, "expected an integer, got '" + *v + "'");
        if (*x < lo || *x > hi) return error(key, range_msg);
        out = static_cast<int>(*x);
    }

    void boolean(const std::string& key, bool& out) {
        const auto v = raw(key);
        if (!v) return;
        if (*v == "true") out = true;
        else if (*v == "false") out = false;
        else error(key, "expected true or false, got '" + *v + "'");
    }

    void reals(const std::string& key, std::vector<double>& out,
               const std::function<std::string(double)>& check = {}) {
        const auto v = raw(key);
        if (!v) return;
        std::vector<double> xs;
        for (const auto& part : split(*v, ',')) {
            const auto x = to_double(part);
            if (!x) return error(key, "expected a comma-separated list of reals, got '" + part + "'");
            if (check) {
                const std::string msg = check(*x);
                if (!msg.empty()) return error(key, msg);
            }
            xs.push_back(*x);
        }
        if (xs.empty()) return error(key, "list is empty");
        out = std::move(xs);
    }

private:
    const Entries& e_;
    std::vector<ConfigError>& errors_;
};

std::string positive(const char* name, double x) {
    return x > 0.0 ? "" : std::string(name) + " must be positive";
}

std::string nonnegative(const char* name, double x) {
    return x >= 0.0 ? "" : std::string(name) + " must be nonnegative";
}

void read_profile(Reader& r, const std::string& prefix, FieldSpec& f) {
    if (const auto v = r.raw(prefix + ".profile")) {
        try {
            f.kind = profile_from_string(*v);
        } catch (const std::invalid_argument&) {
            r.error(prefix + ".profile", "expected zero, gaussian or bump, got '" + *v + "'");
        }
    }
    r.real(prefix + ".amplitude", f.amplitude);
    r.real(prefix + ".width", f.width, false, [](double x) { return positive("width", x); });
    r.real(prefix + ".center", f.center);
}

std::vector<std::uint64_t> parse_seeds(Reader& r, const std::string& key) {
    std::vector<std::uint64_t> seeds;
    const auto v = r.raw(key);
    if (!v) {
        for (std::uint64_t s = 1; s <= 32; ++s) seeds.push_back(s);
        return seeds;
    }
    for (const auto& part : split(*v, ',')) {
        const auto dash = part.find('-', 1);
        if (dash == std::string::npos) {
            const auto x = to_int(part);
            if (!x || *x < 0) {
                r.error(key, "expected seeds like '1-32' or '1,5,9', got '" + part + "'");
                return {};
            }
            seeds.push_back(static_cast<std::uint64_t>(*x));
        } else {
            const auto a = to_int(trim(part.substr(0, dash)));
            const auto b = to_int(trim(part.substr(dash + 1)));
            if (!a || !b || *a < 0 || *b < *a || *b - *a > 100000) {
                r.error(key, "invalid seed range '" + part + "'");
                return {};
            }
            for (long long s = *a; s <= *b; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
    if (uniq.size() != seeds.size()) r.error(key, "seeds must be distinct");
    if (seeds.empty()) r.error(key, "seed list is empty");
    return seeds;
}

std::vector<CocycleSplit> parse_splits(Reader& r, const std::string& key) {
    const auto v = r.raw(key);
    const std::string text = v ? *v : "0:1,1:0,0.5:0.5,1:1,0.25:2,2:0.25,1.5:2.5,3:1";
    std::vector<CocycleSplit> out;
    for (const auto& part : split(text, ',')) {
        const auto colon = part.find(':');
        std::optional<double> s, t;
        if (colon != std::string::npos) {
            s = to_double(trim(part.substr(0, colon)));
            t = to_double(trim(part.substr(colon + 1)));
        }
        if (!s || !t || *s < 0.0 || *t < 0.0) {
            r.error(key, "expected 's:t' pairs with s, t >= 0, got '" + part + "'");
            return {};
        }
        out.push_back({*s, *t});
    }
    return out;
}

}  // namespace

std::string config_hash(std::string_view text, const std::map<std::string, std::string>& overrides) {
    std::vector<ConfigError> ignored;
    return io::fnv1a_hex(canonical_text(read_entries(text, overrides, ignored)));
}

RunConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides) {
    std::vector<ConfigError> errors;
    const Entries entries = read_entries(text, overrides, errors);
    Reader r(entries, errors);
    RunConfig c;
    c.canonical = canonical_text(entries);
    c.hash = io::fnv1a_hex(c.canonical);

    r.real("model.alpha", c.phys.alpha, true, [](double x) { return positive("alpha", x); });
    r.real("model.lambda", c.phys.lambda, true, [](double x) { return positive("lambda", x); });
    r.optional_real("model.delta", c.delta, [](double x) { return positive("delta", x); });
    r.real("model.a", c.nl.a, false, [](double x) { return nonnegative("a", x); });
    r.real("model.gamma", c.nl.gamma, false,
           [](double x) { return x >= 1.0 && x <= 3.0 ? "" : "gamma must lie in [1, 3]"; });
    r.real("model.b", c.nl.b, false, [](double x) { return nonnegative("b", x); });
    read_profile(r, "model.g", c.phys.g);
    read_profile(r, "model.h", c.phys.h);

    r.integer("grid.dim", c.dim, false, 1, 3, "dim must be 1, 2 or 3");
    r.real("grid.L", c.L, true, [](double x) { return positive("L", x); });
    r.integer("grid.n", c.n, true, 3, 1 << 24, "n must be at least 3");

    r.real("solver.dt", c.solve.dt, true, [](double x) { return positive("dt", x); });
    if (const auto v = r.raw("solver.scheme")) {
        try {
            c.solve.scheme = scheme_from_string(*v);
        } catch (const std::invalid_argument&) {
            r.error("solver.scheme", "expected semi_implicit or crank_nicolson_linear, got '" + *v + "'");
        }
    }
    c.solve.record_every = 10;
    r.integer("solver.record_every", c.solve.record_every, false, 1, 1 << 30, "record_every must be >= 1");
    r.real("solver.stability_factor", c.solve.stability_factor, false,
           [](double x) { return positive("stability_factor", x); });

    c.seeds = parse_seeds(r, "path.seeds");
    c.dt_path = c.solve.dt;
    r.real("path.dt_path", c.dt_path, false, [](double x) { return positive("dt_path", x); });
    r.optional_real("path.t_min", c.t_min, [](double x) { return x <= 0.0 ? "" : "t_min must be <= 0"; });
    r.optional_real("path.t_max", c.t_max, [](double x) { return x >= 0.0 ? "" : "t_max must be >= 0"; });

    c.tau_list = {-2.0, -4.0, -8.0, -16.0, -32.0, -64.0};
    if (c.t_min && !r.has("experiment.tau_list")) {
        c.tau_list.clear();
        for (double tau = -2.0; tau >= *c.t_min; tau *= 2.0) c.tau_list.push_back(tau);
    }
    r.reals("experiment.tau_list", c.tau_list, [](double x) { return x <= 0.0 ? "" : "tau values must be <= 0"; });
    r.reals("experiment.radii", c.radii, [](double x) { return nonnegative("radius", x); });
    if (const auto v = r.raw("experiment.family")) {
        try {
            c.family.kind = family_kind_from_string(*v);
        } catch (const std::invalid_argument&) {
            r.error("experiment.family", "expected fixed_ball or subexponential_growth, got '" + *v + "'");
        }
    }
    r.real("experiment.growth_beta", c.family.growth_beta, false,
           [](double x) { return nonnegative("growth_beta", x); });
    r.boolean("experiment.edge_concentrated", c.family.edge_concentrated);
    r.reals("experiment.k_list", c.k_list, [](double x) { return positive("k", x); });
    r.real("experiment.epsilon", c.epsilon, false, [](double x) { return positive("epsilon", x); });
    c.splits = parse_splits(r, "experiment.splits");
    r.real("experiment.cocycle_tolerance", c.cocycle_tolerance, false,
           [](double x) { return positive("cocycle_tolerance", x); });
    r.real("experiment.t_start", c.t_start);
    r.real("experiment.t_end", c.t_end);
    int burn_in = static_cast<int>(c.absorb.burn_in);
    r.integer("experiment.burn_in", burn_in, false, 0, 1 << 20, "burn_in must be >= 0");
    c.absorb.burn_in = static_cast<std::size_t>(burn_in);
    r.real("experiment.band", c.absorb.band, false, [](double x) { return nonnegative("band", x); });
    r.real("experiment.calibration_c", c.absorb.calibration_c, false,
           [](double x) { return positive("calibration_c", x); });
    r.real("experiment.r_truncation", c.absorb.r_truncation, false,
           [](double x) { return positive("r_truncation", x); });
    c.tempered.calibration_c = c.absorb.calibration_c;
    c.tempered.truncation = c.absorb.r_truncation;
    r.boolean("experiment.probe_temperedness", c.probe_temperedness);
    r.reals("experiment.betas", c.tempered.betas, [](double x) { return positive("beta", x); });
    r.real("experiment.probe_t_max", c.tempered.t_max, false, [](double x) { return positive("probe_t_max", x); });
    r.real("experiment.probe_t_step", c.tempered.t_step, false,
           [](double x) { return positive("probe_t_step", x); });
    r.integer("experiment.oracle_mode", c.oracle_mode, false, 1, 1 << 24, "oracle_mode must be >= 1");
    r.real("experiment.oracle_eta", c.oracle_eta);
    r.reals("experiment.oracle_dts", c.oracle_dts, [](double x) { return positive("dt", x); });
    r.real("experiment.oracle_t_final", c.oracle_t_final, false,
           [](double x) { return positive("oracle_t_final", x); });
    if (const auto v = r.raw("output.dir")) c.output_dir = *v;

    // Cross-constraints, checked only when the keys involved parsed cleanly.
    auto keys_ok = [&](std::initializer_list<const char*> keys) {
        for (const auto& e : errors) {
            for (const char* k : keys) {
                if (e.key == k) return false;
            }
        }
        return true;
    };
    const bool model_ok = keys_ok({"model.alpha", "model.lambda", "model.delta", "model.a", "model.gamma",
                                   "model.b", "model.g.width", "model.h.width"});
    const bool grid_ok = keys_ok({"grid.dim", "grid.L", "grid.n"});
    const bool dt_ok = keys_ok({"solver.dt", "path.dt_path"});
    std::optional<ModelConfig> model;
    if (model_ok) {
        try {
            model = c.model();
        } catch (const std::invalid_argument& e) {
            errors.push_back({r.line("model.delta"), "model.delta", e.what()});
        }
    }
    if (grid_ok) {
        const double kmax = *std::max_element(c.k_list.begin(), c.k_list.end());
        if (!(kmax * std::numbers::sqrt2 < c.L)) {
            errors.push_back({r.line("experiment.k_list"), "experiment.k_list",
                              "sqrt(2) * max(k) must be below grid.L"});
        }
        for (std::size_t i = 1; i < c.k_list.size(); ++i) {
            if (!(c.k_list[i] > c.k_list[i - 1])) {
                errors.push_back({r.line("experiment.k_list"), "experiment.k_list", "k_list must be increasing"});
                break;
            }
        }
        if (model && dt_ok) {
            const double limit = c.solve.stability_factor /
                                 std::sqrt(c.grid().laplacian_spectral_radius() + model->derived.lambda_prime);
            if (c.solve.dt > limit) {
                errors.push_back({r.line("solver.dt"), "solver.dt",
                                  "dt exceeds the stability limit " + io::format_double(limit)});
            }
        }
    }
    if (dt_ok) {
        const double big = std::max(c.solve.dt, c.dt_path);
        const double small = std::min(c.solve.dt, c.dt_path);
        const double ratio = big / small;
        if (std::abs(ratio - std::nearbyint(ratio)) > 1e-9 * ratio) {
            errors.push_back({r.line("path.dt_path"), "path.dt_path",
                              "solver.dt and path.dt_path must be in integer ratio"});
        }
        auto aligned = [&](double x) { return on_lattice(x, c.solve.dt) && on_lattice(x, c.dt_path); };
        for (std::size_t i = 0; i < c.tau_list.size(); ++i) {
            if (!aligned(c.tau_list[i])) {
                errors.push_back({r.line("experiment.tau_list"), "experiment.tau_list",
                                  "tau " + io::format_double(c.tau_list[i]) + " is not on the dt and path grids"});
            }
            if (i > 0 && !(c.tau_list[i] < c.tau_list[i - 1])) {
                errors.push_back({r.line("experiment.tau_list"), "experiment.tau_list",
                                  "tau_list must be strictly decreasing"});
            }
        }
        for (const auto& sp : c.splits) {
            if (!aligned(sp.s) || !aligned(sp.t)) {
                errors.push_back({r.line("experiment.splits"), "experiment.splits",
                                  "split " + io::format_double(sp.s) + ":" + io::format_double(sp.t) +
                                      " is not on the dt and path grids"});
            }
        }
        if (!aligned(c.t_start) || !(c.t_end > c.t_start)) {
            errors.push_back({r.line("experiment.t_start"), "experiment.t_start",
                              "t_start must lie on the dt grid and precede t_end"});
        }
    }
    if (c.oracle_dts.size() < 2) {
        errors.push_back({r.line("experiment.oracle_dts"), "experiment.oracle_dts", "need at least two dt values"});
    }
    if (!errors.empty()) throw ConfigErrors(std::move(errors));
    return c;
}

}  // namespace rda
