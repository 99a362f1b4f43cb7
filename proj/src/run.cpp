#include "rda/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include "rda/energy.hpp"
#include "rda/io.hpp"

namespace rda {

namespace fs = std::filesystem;

std::map<std::string, std::string> flag_overrides(const RunOptions& opt) {
    std::map<std::string, std::string> o;
    if (opt.seed_panel) o["path.seeds"] = "1-" + std::to_string(*opt.seed_panel);
    return o;
}

std::pair<double, double> required_path_range(const RunConfig& cfg, const std::string& command) {
    double lo = 0.0;
    double hi = 0.0;
    const double tau_min = *std::min_element(cfg.tau_list.begin(), cfg.tau_list.end());
    if (command == "simulate") {
        lo = std::min(cfg.t_start, 0.0);
        hi = std::max(cfg.t_end, 0.0);
    } else if (command == "absorb") {
        lo = std::min(tau_min, -cfg.absorb.r_truncation);
        if (cfg.probe_temperedness) lo = std::min(lo, -(cfg.tempered.t_max + cfg.tempered.truncation));
    } else if (command == "tails" || command == "pullback") {
        lo = tau_min;
    } else if (command == "cocycle") {
        for (const auto& sp : cfg.splits) hi = std::max(hi, sp.s + sp.t);
    }
    std::vector<ConfigError> errors;
    if (cfg.t_min) {
        if (*cfg.t_min > lo + 1e-12) {
            errors.push_back({0, "path.t_min",
                              command + " needs the path to reach " + io::format_double(lo)});
        }
        lo = std::min(lo, *cfg.t_min);
    }
    if (cfg.t_max) {
        if (*cfg.t_max < hi - 1e-12) {
            errors.push_back({0, "path.t_max",
                              command + " needs the path to reach " + io::format_double(hi)});
        }
        hi = std::max(hi, *cfg.t_max);
    }
    if (!errors.empty()) throw ConfigErrors(std::move(errors));
    return {lo, hi};
}

namespace {

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string seed_tag(std::uint64_t seed) { return "seed" + std::to_string(seed); }

/// Collects artifacts in memory and writes them in insertion order.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}
    void add(const std::string& name, std::string text) { files_.emplace_back(name, std::move(text)); }
    void flush() const {
        fs::create_directories(dir_);
        for (const auto& [name, text] : files_) io::write_text_file(dir_ / name, text);
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

SamplePath path_for(const RunConfig& cfg, const std::string& command, std::uint64_t seed) {
    const auto [lo, hi] = required_path_range(cfg, command);
    return generate_path(seed, lo, hi, cfg.dt_path);
}

TemperedFamilySpec family_with_radius(const RunConfig& cfg, double radius) {
    TemperedFamilySpec f = cfg.family;
    f.radius_0 = radius;
    return f;
}

ExperimentReport base_report(const RunConfig& cfg, const std::string& id) {
    ExperimentReport rep;
    rep.experiment = id;
    rep.config_hash = cfg.hash;
    rep.seeds = cfg.seeds;
    return rep;
}

void run_simulate(const RunConfig& cfg, const DiscreteProblem& prob, ExperimentReport& rep, Artifacts& art) {
    std::vector<std::string> traj_cols{"t", "norm_u_h1", "norm_v_l2", "norm_z_l2", "E", "Psi"};
    for (double k : cfg.k_list) traj_cols.push_back("tail_k" + io::format_double(k));
    std::vector<std::string> energy_cols{"t", "E", "Psi"};
    for (std::size_t i = 1; i <= kPsiTerms; ++i) energy_cols.push_back((i < 10 ? "term_0" : "term_") + std::to_string(i));
    energy_cols.push_back("residual_diff");
    energy_cols.push_back("residual_int");

    double worst_int = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
        const SamplePath path = path_for(cfg, "simulate", seed);
        const NoiseSignal noise(path);
        const StateUV init = initial_on_sphere(prob, family_with_radius(cfg, cfg.radii.front()), cfg.t_start, seed);

        io::CsvWriter traj(cfg.hash, traj_cols);
        traj.comment("seed=" + std::to_string(seed));
        std::vector<EnergyRecord> records;
        const Observer obs = [&](const StateUV& s) {
            records.push_back(record_energy(s, noise, prob, cfg.k_list));
            const EnergyRecord& r = records.back();
            const Field z = reconstruct_z(s, noise, prob);
            std::vector<double> row{s.t, norm_h1(s.u), norm_l2(s.v), norm_l2(z), r.E, r.Psi};
            for (double k : cfg.k_list) row.push_back(r.tail.at(k));
            traj.row(row);
        };
        const StateUV fin = evolve(init, cfg.t_start, cfg.t_end, noise, prob, cfg.solve, std::span(&obs, 1));

        // The final record can be off the recording grid; residuals use the equally spaced prefix.
        std::size_t usable = records.size();
        if (usable >= 3) {
            const double step = records[1].t - records[0].t;
            const double last = records[usable - 1].t - records[usable - 2].t;
            if (std::abs(last - step) > 1e-9 * step) --usable;
        }
        EnergyResiduals res;
        if (usable >= 2) {
            res = energy_identity_residual(std::span(records.data(), usable), prob.model.derived.sigma);
        }
        io::CsvWriter energy(cfg.hash, energy_cols);
        energy.comment("seed=" + std::to_string(seed));
        const double nan = std::nan("");
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            std::vector<double> row{r.t, r.E, r.Psi};
            row.insert(row.end(), r.terms.begin(), r.terms.end());
            row.push_back(i > 0 && i < usable ? res.differential[i - 1] : nan);
            row.push_back(i < usable && !res.integral.empty() ? res.integral[i] : nan);
            energy.row_with_blanks(row);
        }
        const std::string tag = seed_tag(seed);
        art.add("trajectory_" + tag + ".csv", traj.text());
        art.add("energy_" + tag + ".csv", energy.text());
        std::ostringstream ps;
        write_path_csv(ps, path, cfg.hash);
        art.add("path_" + tag + ".csv", ps.str());
        std::ostringstream us, vs;
        write_field_csv(us, fin.u, "u", cfg.hash);
        write_field_csv(vs, fin.v, "v", cfg.hash);
        art.add("u_final_" + tag + ".csv", us.str());
        art.add("v_final_" + tag + ".csv", vs.str());

        const double mi = res.integral.empty() ? 0.0 : res.max_abs_integral();
        worst_int = std::max(worst_int, mi);
        rep.per_seed.push_back({{"seed", seed},
                                {"t_end", fin.t},
                                {"E_final", records.back().E},
                                {"max_residual_diff", res.differential.empty() ? 0.0 : res.max_abs_differential()},
                                {"max_residual_int", mi}});
    }
    rep.summary["max_residual_int"] = worst_int;
    rep.checks.push_back({"trajectories_finite", true, 0.0, true});
}

void run_absorb(const RunConfig& cfg, const DiscreteProblem& prob, ExperimentReport& rep, Artifacts& art) {
    double absorbed_margin = std::numeric_limits<double>::infinity();
    double worst_ratio = 0.0;
    double forgetting_dev = 0.0;
    double worst_slope = -std::numeric_limits<double>::infinity();
    bool all_absorbed = true, all_bounded = true, all_integral = true, all_tempered = true;
    io::CsvWriter tempered(cfg.hash, {"seed", "beta", "slope"});
    for (std::uint64_t seed : cfg.seeds) {
        const SamplePath path = path_for(cfg, "absorb", seed);
        io::CsvWriter csv(cfg.hash, {"radius_0", "tau", "radius", "uv_norm_sq", "uz_norm_sq", "integral_bound"});
        csv.comment("seed=" + std::to_string(seed));
        nlohmann::json runs = nlohmann::json::array();
        std::vector<double> limits;
        for (double r0 : cfg.radii) {
            const AbsorptionResult r =
                absorption_experiment(family_with_radius(cfg, r0), cfg.tau_list, path, prob, cfg.solve, cfg.absorb);
            for (std::size_t i = 0; i < r.taus.size(); ++i) {
                csv.row({r0, r.taus[i], r.radius[i], r.uv_norm_sq[i], r.uz_norm_sq[i], r.integral_bound[i]});
            }
            limits.push_back(r.limit_value);
            all_absorbed = all_absorbed && r.absorbed;
            all_bounded = all_bounded && r.R_estimate > 0.0 && r.fitted_bound <= r.R_estimate;
            worst_ratio = std::max(worst_ratio, r.R_estimate > 0.0 ? r.bound_over_R : INFINITY);
            all_integral = all_integral && r.integral_bounded;
            if (r.limit_value > 0.0) {
                absorbed_margin = std::min(absorbed_margin,
                                           ((1.0 + cfg.absorb.band) * r.limit_value - r.fitted_bound) / r.limit_value);
            } else {
                absorbed_margin = std::min(absorbed_margin, r.fitted_bound == 0.0 ? 0.0 : -1.0);
            }
            nlohmann::json j = to_json(r);
            j["radius_0"] = r0;
            runs.push_back(j);
        }
        for (std::size_t i = 1; i < limits.size(); ++i) {
            const double scale = std::max(std::abs(limits[0]), std::abs(limits[i]));
            if (scale > 0.0) forgetting_dev = std::max(forgetting_dev, std::abs(limits[i] - limits[0]) / scale);
        }
        nlohmann::json entry{{"seed", seed}, {"runs", runs}};
        if (cfg.probe_temperedness) {
            const TemperednessResult t = temperedness_probe(path, prob.model, cfg.tempered);
            for (std::size_t i = 0; i < t.betas.size(); ++i) {
                tempered.row({static_cast<double>(seed), t.betas[i], t.slopes[i]});
                worst_slope = std::max(worst_slope, t.slopes[i]);
            }
            all_tempered = all_tempered && t.all_negative;
            entry["temperedness"] = {{"betas", t.betas}, {"slopes", t.slopes}, {"all_negative", t.all_negative}};
        }
        rep.per_seed.push_back(entry);
        art.add("absorb_" + seed_tag(seed) + ".csv", csv.text());
    }
    rep.checks.push_back({"bounded_by_R_beyond_burn_in", all_bounded, 1.0 - worst_ratio, true});
    rep.checks.push_back({"settled_within_band", all_absorbed, absorbed_margin, false});
    if (cfg.radii.size() > 1) {
        rep.checks.push_back({"initial_data_forgotten_5pct", forgetting_dev <= 0.05, 0.05 - forgetting_dev, true});
    }
    rep.checks.push_back({"integral_bound_settles", all_integral, 0.0, false});
    if (cfg.probe_temperedness) {
        rep.checks.push_back({"temperedness_slopes_negative", all_tempered, -worst_slope, true});
        art.add("temperedness.csv", tempered.text());
    }
}

void run_tails(const RunConfig& cfg, const DiscreteProblem& prob, ExperimentReport& rep, Artifacts& art) {
    std::size_t attained = 0, strict = 0, noninc = 0;
    std::vector<std::string> cols{"tau", "t"};
    for (double k : cfg.k_list) cols.push_back("tail_k" + io::format_double(k));
    for (std::uint64_t seed : cfg.seeds) {
        const SamplePath path = path_for(cfg, "tails", seed);
        const TailResult r = tail_experiment(cfg.epsilon, cfg.k_list, cfg.tau_list,
                                             family_with_radius(cfg, cfg.radii.front()), path, prob, cfg.solve);
        attained += r.attained.k.has_value();
        strict += r.strictly_decreasing_in_k;
        noninc += r.nonincreasing_in_k;
        io::CsvWriter csv(cfg.hash, cols);
        csv.comment("seed=" + std::to_string(seed));
        for (const auto& ser : r.series) {
            for (std::size_t t = 0; t < ser.times.size(); ++t) {
                std::vector<double> row{ser.tau, ser.times[t]};
                for (const auto& col : ser.tail) row.push_back(col[t]);
                csv.row(row);
            }
        }
        rep.per_seed.push_back(to_json(r));
        art.add("tails_" + seed_tag(seed) + ".csv", csv.text());
    }
    const auto n = static_cast<double>(cfg.seeds.size());
    rep.checks.push_back({"attained_k_exists", attained == cfg.seeds.size(), static_cast<double>(attained) - n, true});
    rep.checks.push_back({"tail_strictly_decreasing_in_k", strict == cfg.seeds.size(), static_cast<double>(strict) - n, true});
    rep.checks.push_back({"tail_nonincreasing_in_k", noninc == cfg.seeds.size(), static_cast<double>(noninc) - n, true});
}

void run_pullback(const RunConfig& cfg, const DiscreteProblem& prob, ExperimentReport& rep, Artifacts& art) {
    bool all_trend = true;
    double margin = std::numeric_limits<double>::infinity();
    std::size_t flagged = 0;
    for (std::uint64_t seed : cfg.seeds) {
        const SamplePath path = path_for(cfg, "pullback", seed);
        const PullbackResult r = pullback_convergence_experiment(family_with_radius(cfg, cfg.radii.front()),
                                                                 cfg.tau_list, path, prob, cfg.solve);
        all_trend = all_trend && r.decreasing_trend;
        const double first = r.distances.front();
        margin = std::min(margin, first > 0.0 ? (first - r.distances.back()) / first : 0.0);
        flagged += r.non_monotone_at.size();
        io::CsvWriter csv(cfg.hash, {"tau_n", "tau_next", "distance"});
        csv.comment("seed=" + std::to_string(seed));
        for (std::size_t i = 0; i < r.distances.size(); ++i) csv.row({r.taus[i], r.taus[i + 1], r.distances[i]});
        rep.per_seed.push_back(to_json(r));
        art.add("pullback_" + seed_tag(seed) + ".csv", csv.text());
    }
    rep.checks.push_back({"distances_decreasing_trend", all_trend, margin, true});
    rep.checks.push_back({"monotone_decrements", flagged == 0, 0.0 - static_cast<double>(flagged), false});
}

void run_cocycle(const RunConfig& cfg, const DiscreteProblem& prob, ExperimentReport& rep, Artifacts& art) {
    double worst = 0.0;
    io::CsvWriter csv(cfg.hash, {"seed", "s", "t", "defect"});
    for (std::uint64_t seed : cfg.seeds) {
        const SamplePath path = path_for(cfg, "cocycle", seed);
        const StateUV init = initial_on_sphere(prob, family_with_radius(cfg, cfg.radii.front()), 0.0, seed);
        const StateUZ x0{init.u, reconstruct_z(init, NoiseSignal(path), prob)};
        const CocycleResult r = cocycle_experiment(cfg.splits, path, x0, prob, cfg.solve, cfg.cocycle_tolerance);
        for (std::size_t i = 0; i < r.splits.size(); ++i) {
            csv.row({static_cast<double>(seed), r.splits[i].s, r.splits[i].t, r.defects[i]});
        }
        worst = std::max(worst, r.max_defect);
        rep.per_seed.push_back(to_json(r));
    }
    art.add("cocycle_defects.csv", csv.text());
    rep.summary["max_defect"] = worst;
    rep.checks.push_back({"cocycle_defect_within_tolerance", worst <= cfg.cocycle_tolerance,
                          cfg.cocycle_tolerance - worst, true});
}

void run_oracle(const RunConfig& cfg, ExperimentReport& rep, Artifacts& art) {
    const Grid grid = cfg.grid();
    if (grid.dim != 1) throw ConfigErrors({{0, "grid.dim", "the oracle study needs a 1-D grid"}});
    io::CsvWriter csv(cfg.hash, {"scheme_id", "eta", "dt", "max_error", "max_residual_diff", "max_residual_int"});
    csv.comment("scheme_id 0=semi_implicit 1=crank_nicolson_linear");
    rep.seeds.clear();
    struct Case {
        Scheme scheme;
        double eta;
        double order;
    };
    for (const Case& c : {Case{Scheme::semi_implicit, 0.0, 0.9}, Case{Scheme::crank_nicolson_linear, cfg.oracle_eta, 1.8}}) {
        const ModeStudy st = mode_convergence_study(grid, cfg.phys.alpha, cfg.phys.lambda, cfg.oracle_mode, c.eta,
                                                    c.scheme, cfg.oracle_dts, cfg.oracle_t_final);
        for (const auto& row : st.rows) {
            csv.row({c.scheme == Scheme::semi_implicit ? 0.0 : 1.0, c.eta, row.dt, row.max_error,
                     row.max_residual_diff, row.max_residual_int});
        }
        const double e = *std::min_element(st.error_orders.begin(), st.error_orders.end());
        const double r = *std::min_element(st.residual_orders.begin(), st.residual_orders.end());
        const std::string name = to_string(c.scheme);
        rep.checks.push_back({name + "_error_order", e >= c.order, e - c.order, true});
        rep.checks.push_back({name + "_energy_residual_order", r >= c.order, r - c.order, true});
        rep.per_seed.push_back(to_json(st));
    }
    art.add("oracle_convergence.csv", csv.text());
}

}  // namespace

ExperimentReport run_experiment(const RunConfig& cfg, const std::string& command, bool deterministic) {
    ExperimentReport rep = base_report(cfg, command);
    Artifacts art(cfg.output_dir);
    if (command == "oracle") {
        run_oracle(cfg, rep, art);
    } else {
        required_path_range(cfg, command);
        const DiscreteProblem prob = cfg.problem();
        if (command == "simulate") run_simulate(cfg, prob, rep, art);
        else if (command == "absorb") run_absorb(cfg, prob, rep, art);
        else if (command == "tails") run_tails(cfg, prob, rep, art);
        else if (command == "pullback") run_pullback(cfg, prob, rep, art);
        else if (command == "cocycle") run_cocycle(cfg, prob, rep, art);
        else throw std::invalid_argument("unknown experiment '" + command + "'");
    }
    nlohmann::json j = rep.to_json();
    std::string text = rep.to_text();
    if (!deterministic) {
        const std::string ts = timestamp();
        j["generated_at"] = ts;
        text = "generated_at " + ts + "\n" + text;
    }
    art.add(command + "_report.json", j.dump(2) + "\n");
    art.add(command + "_summary.txt", text);
    art.flush();
    return rep;
}

bool check_outputs(const fs::path& dir, const std::string& hash, std::ostream& out) {
    if (!fs::is_directory(dir)) {
        out << "no output directory " << dir.string() << "\n";
        return false;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        out << "no output files in " << dir.string() << "\n";
        return false;
    }
    static const std::regex pattern(R"(config_hash["=:\s]+"?([0-9a-f]{16}))");
    bool ok = true;
    for (const auto& f : files) {
        const std::string text = io::read_text_file(f);
        std::smatch m;
        std::string status;
        if (!std::regex_search(text, m, pattern)) {
            status = "MISSING";
            ok = false;
        } else if (m[1] != hash) {
            status = "MISMATCH (" + m[1].str() + ")";
            ok = false;
        } else {
            status = "ok";
        }
        out << f.filename().string() << "  " << status << "\n";
    }
    return ok;
}

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
    static const std::vector<std::string> commands{"simulate", "absorb", "tails", "pullback",
                                                   "cocycle", "oracle", "check"};
    if (std::find(commands.begin(), commands.end(), opt.command) == commands.end()) {
        err << "unknown subcommand '" << opt.command << "'\n";
        return kExitUsage;
    }
    try {
        const std::string text = io::read_text_file(opt.config_path);
        RunConfig cfg = parse_config(text, flag_overrides(opt));
        if (opt.out_dir) cfg.output_dir = opt.out_dir->string();
        if (opt.command == "check") {
            const bool ok = check_outputs(cfg.output_dir, cfg.hash, out);
            out << "config_hash " << cfg.hash << ": " << (ok ? "all outputs match" : "mismatch") << "\n";
            return ok ? kExitPass : kExitAssertionFailed;
        }
        const ExperimentReport rep = run_experiment(cfg, opt.command, opt.deterministic);
        out << rep.to_text() << "outputs      " << cfg.output_dir << "\n";
        return rep.all_pass() ? kExitPass : kExitAssertionFailed;
    } catch (const ConfigErrors& e) {
        err << e.what() << "\n";
        return kExitUsage;
    } catch (const DivergenceError& e) {
        err << e.what() << "\n";
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace rda
