#include "fdiff/cli.hpp"

#include "fdiff/errors.hpp"
#include "fdiff/moments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

namespace fdiff {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T read(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
    }
}

template <class T>
void read_if(const json& obj, const std::string& key, const std::string& where, T& out) {
    if (obj.contains(key)) out = read<T>(obj, key, where);
}

double finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw ConfigError(what + " must be finite");
    return x;
}

// A scalar or a list of numbers; null stands for an infinite focusing length.
std::vector<double> number_list(const json& value, const std::string& what, bool allow_null) {
    std::vector<json> items = value.is_array() ? value.get<std::vector<json>>() : std::vector<json>{value};
    if (items.empty()) throw ConfigError(what + " must not be empty");
    std::vector<double> out;
    for (const auto& item : items) {
        if (item.is_null() && allow_null) {
            out.push_back(std::numeric_limits<double>::infinity());
        } else if (item.is_number()) {
            out.push_back(item.get<double>());
        } else {
            throw ConfigError(what + " entries must be numbers");
        }
    }
    return out;
}

ScatteringSetup setup_for(const RunConfig& c, double xi) {
    try {
        return ScatteringSetup::from_xi(c.v, c.dcoeff, xi);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid model parameters: ") + e.what());
    }
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

double single_xi(const RunConfig& c) {
    if (c.xi.size() != 1) throw ConfigError(mode_name(*c.mode) + " mode takes a single xi value");
    return c.xi.front();
}

std::string with_error(const StatEstimate& e) { return format_double(e.value) + " +- " + format_double(e.se); }

int run_coeffs(const RunConfig& c, std::ostream& log) {
    auto path = c.out_dir / "coeffs.csv";
    auto out = open_output(path);
    out << "xi,kappa_z,kappa_zz_bw,kappa_zz_wq,kappa_tz,kappa_tzz,kappa_dv,err_max\n";
    Series dv;
    for (double xi : c.xi) {
        CoefficientReport r = evaluate_coefficients(setup_for(c, xi), c.coefficients);
        out << format_double(xi) << ',' << format_double(r.kappa_z.value) << ',' << format_double(r.kappa_zz_bw.value)
            << ',' << format_double(r.kappa_zz_wq.value) << ',' << format_double(r.kappa_tz.value) << ','
            << format_double(r.kappa_tzz.value) << ',' << format_double(r.kappa_dv.value) << ','
            << format_double(r.err_max()) << '\n';
        dv.emplace_back(xi, r.kappa_dv.value);
    }
    close_output(out, path);
    log << path.string() << ": " << c.xi.size() << " rows\n";
    auto plot = c.out_dir / "kappa_dv.dat";
    emit_plotdata(dv, plot);
    log << plot.string() << ": kappa_dv against xi, " << dv.size() << " points\n";
    return 0;
}

int run_series(const RunConfig& c, std::ostream& log) {
    struct Quantity {
        const char* name;
        Parity parity;
        std::function<double(double)> fn;
    };
    std::vector<Quantity> quantities = {
        {"kappa_z", Parity::Odd, [&](double xi) { return kappa_z(setup_for(c, xi)).value; }},
        {"kappa_tz", Parity::Odd, [&](double xi) { return kappa_tz(setup_for(c, xi), c.coefficients).value; }},
        {"kappa_tzz", Parity::Even, [&](double xi) { return kappa_tzz(setup_for(c, xi), c.coefficients).value; }},
        {"kappa_zz_bw", Parity::Even, [&](double xi) { return kappa_zz_bw(setup_for(c, xi), c.coefficients).value; }},
        {"kappa_dv", Parity::Even, [&](double xi) { return kappa_dv_formula(setup_for(c, xi), c.coefficients).value; }},
    };
    auto path = c.out_dir / "series.csv";
    auto out = open_output(path);
    out << "quantity,power,coefficient,standard_error\n";
    for (const auto& q : quantities) {
        SeriesFit fit = series_fit(q.fn, c.series_grid, q.parity, c.series_terms);
        int p = q.parity == Parity::Odd ? 1 : 0;
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
            out << q.name << ',' << p + 2 * static_cast<int>(j) << ',' << format_double(fit.coefficients[j]) << ','
                << format_double(fit.standard_errors[j]) << '\n';
        }
    }
    close_output(out, path);
    log << path.string() << ": " << quantities.size() << " series fits\n";

    NtzTable table = ntz_leading_table(c.v, c.dcoeff, c.ntz_max, c.series_grid, c.coefficients);
    auto npath = c.out_dir / "ntz.csv";
    auto nout = open_output(npath);
    nout << "n,leading,ratio\n";
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        nout << table.entries[i].first << ',' << format_double(table.entries[i].second) << ',';
        if (i < table.ratios.size()) nout << format_double(table.ratios[i]);
        nout << '\n';
    }
    close_output(nout, npath);
    log << npath.string() << ": " << table.entries.size() << " leading coefficients, " << table.ratios.size()
        << " ratios\n";
    return 0;
}

int run_dio(const RunConfig& c, std::ostream& log, std::ostream& err) {
    std::vector<NamedScript> scripts;
    auto catalog = dio_catalog();
    if (c.dio_scripts.empty() && c.dio_steps.empty()) scripts = catalog;
    for (const auto& name : c.dio_scripts) {
        bool found = false;
        for (const auto& s : catalog) {
            if (s.name == name) {
                scripts.push_back(s);
                found = true;
            }
        }
        if (!found) throw ConfigError("unknown DIO script '" + name + "'");
    }
    if (!c.dio_steps.empty()) {
        NamedScript custom{"custom script", c.dio_max_weight, c.dio_steps, false};
        for (const auto& s : c.dio_steps) custom.mutates_fick = custom.mutates_fick || (s.family == DioFamily::PzI && s.b == 1);
        scripts.push_back(custom);
    }

    std::vector<DioReportRow> rows;
    try {
        rows = dio_report(scripts);
    } catch (const AlgebraError& e) {
        throw ConfigError(std::string("DIO script cannot be applied: ") + e.what());
    }
    auto path = c.out_dir / "dio_report.txt";
    auto out = open_output(path);
    out << format_dio_report(rows);
    out << "\nBGK round trip (W = 2)\n";
    for (const auto& entry : gombosi_roundtrip()) out << "  " << entry.label << ": " << entry.eidf.to_string() << '\n';
    close_output(out, path);

    int violations = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].dv_invariant) {
            err << "invariant violation: displacement-variance coefficient changed under " << rows[i].name << '\n';
            ++violations;
        }
        if (rows[i].fick_changed != scripts[i].mutates_fick) {
            err << "invariant violation: Fick coefficient " << (rows[i].fick_changed ? "changed" : "unchanged")
                << " under " << rows[i].name << '\n';
            ++violations;
        }
    }
    log << path.string() << ": " << rows.size() << " scripts, " << violations << " violations\n";
    return violations == 0 ? 0 : 3;
}

int run_mc(const RunConfig& c, std::ostream& log, std::ostream& err) {
    SimConfig sim = c.mc;
    sim.setup = setup_for(c, single_xi(c));
    EnsembleStats stats = run_ensemble(sim);
    for (const auto& w : stats.warnings) err << "warning: " << w << '\n';
    StatEstimate k = estimate_kappa_dv(stats, sim);
    auto path = c.out_dir / "mc.csv";
    auto out = open_output(path);
    out << "t,mean_dz,var_dz,running_kdv,se_var\n";
    Series variance;
    for (std::size_t i = 0; i < stats.times.size(); ++i) {
        out << format_double(stats.times[i]) << ',' << format_double(stats.mean_dz[i]) << ','
            << format_double(stats.variance[i]) << ',' << format_double(stats.running_kdv[i]) << ','
            << format_double(stats.se_var[i]) << '\n';
        variance.emplace_back(stats.times[i], stats.variance[i]);
    }
    close_output(out, path);
    log << path.string() << ": " << stats.times.size() << " snapshots, kappa_dv = " << with_error(k) << '\n';
    auto plot = c.out_dir / "variance.dat";
    emit_plotdata(variance, plot);
    log << plot.string() << ": variance against t\n";
    return 0;
}

int run_tgk(const RunConfig& c, std::ostream& log) {
    SimConfig sim = c.mc;
    sim.setup = setup_for(c, single_xi(c));
    TgkResult r = estimate_kappa_tgk(sim);
    auto path = c.out_dir / "tgk.csv";
    auto out = open_output(path);
    out << "lag,vacf,cumulative\n";
    Series vacf;
    for (std::size_t i = 0; i < r.vacf.lags.size(); ++i) {
        out << format_double(r.vacf.lags[i]) << ',' << format_double(r.vacf.vacf[i]) << ','
            << format_double(r.vacf.cumulative[i]) << '\n';
        vacf.emplace_back(r.vacf.lags[i], r.vacf.vacf[i]);
    }
    close_output(out, path);
    log << path.string() << ": " << r.vacf.n_samples << " trajectories, kappa_tgk = " << with_error(r.kappa) << '\n';
    auto plot = c.out_dir / "vacf.dat";
    emit_plotdata(vacf, plot);
    log << plot.string() << ": vacf against lag\n";
    return 0;
}

int run_report(const RunConfig& c, std::ostream& log, std::ostream& err) {
    SimConfig sim = c.mc;
    sim.setup = setup_for(c, single_xi(c));
    Estimate dv_formula = kappa_dv_formula(sim.setup, c.coefficients);
    Estimate tgk_formula = kappa_zz_bw(sim.setup, c.coefficients);
    EnsembleStats stats = run_ensemble(sim);
    for (const auto& w : stats.warnings) err << "warning: " << w << '\n';
    StatEstimate dv_mc = estimate_kappa_dv(stats, sim);
    TgkResult tgk_mc = estimate_kappa_tgk(sim);
    StatEstimate gap{tgk_mc.kappa.value - dv_mc.value, std::hypot(tgk_mc.kappa.se, dv_mc.se)};

    auto rel = [](double a, double b) { return (a - b) / b; };
    auto path = c.out_dir / "report.txt";
    auto out = open_output(path);
    out << "xi = " << format_double(sim.setup.xi()) << ", v = " << format_double(c.v)
        << ", D = " << format_double(c.dcoeff) << "\n";
    out << "quantity     quadrature              monte_carlo                                  rel_diff\n";
    out << "kappa_dv     " << format_double(dv_formula.value) << "  " << with_error(dv_mc) << "  "
        << format_double(rel(dv_mc.value, dv_formula.value)) << '\n';
    out << "kappa_tgk    " << format_double(tgk_formula.value) << "  " << with_error(tgk_mc.kappa) << "  "
        << format_double(rel(tgk_mc.kappa.value, tgk_formula.value)) << '\n';
    out << "tgk - dv     " << format_double(tgk_formula.value - dv_formula.value) << "  " << with_error(gap) << "  "
        << "significance " << format_double(gap.se > 0.0 ? gap.value / gap.se : 0.0) << " sigma\n";
    close_output(out, path);
    log << path.string() << ": kappa_dv mc/quadrature = " << format_double(dv_mc.value / dv_formula.value)
        << ", kappa_tgk mc/quadrature = " << format_double(tgk_mc.kappa.value / tgk_formula.value) << '\n';
    return 0;
}

}  // namespace

std::optional<Mode> parse_mode(const std::string& text) {
    for (Mode m : {Mode::Coeffs, Mode::Series, Mode::Dio, Mode::Mc, Mode::Tgk, Mode::Report}) {
        if (mode_name(m) == text) return m;
    }
    return std::nullopt;
}

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Coeffs:
            return "coeffs";
        case Mode::Series:
            return "series";
        case Mode::Dio:
            return "dio";
        case Mode::Mc:
            return "mc";
        case Mode::Tgk:
            return "tgk";
        case Mode::Report:
            return "report";
    }
    return "?";
}

RunConfig parse_config(const json& doc) {
    check_keys(doc, "config", {"mode", "model", "coefficients", "series", "dio", "mc", "seed", "threads", "out_dir"});
    RunConfig c;
    if (doc.contains("mode")) {
        auto m = parse_mode(read<std::string>(doc, "mode", "config"));
        if (!m) throw ConfigError("unknown mode '" + doc.at("mode").get<std::string>() + "'");
        c.mode = m;
    }
    c.xi = {0.0};
    if (doc.contains("model")) {
        const json& m = doc.at("model");
        check_keys(m, "model", {"v", "D", "xi", "L"});
        read_if(m, "v", "model", c.v);
        read_if(m, "D", "model", c.dcoeff);
        finite(c.v, "model.v");
        finite(c.dcoeff, "model.D");
        if (!(c.v > 0.0 && c.dcoeff > 0.0)) throw ConfigError("model.v and model.D must be positive");
        if (m.contains("xi") && m.contains("L")) throw ConfigError("give either model.xi or model.L, not both");
        if (m.contains("xi")) {
            c.xi = number_list(m.at("xi"), "model.xi", false);
            for (double x : c.xi) finite(x, "model.xi");
        } else if (m.contains("L")) {
            c.xi.clear();
            for (double l : number_list(m.at("L"), "model.L", true)) {
                if (l == 0.0 || std::isnan(l)) throw ConfigError("model.L must be nonzero");
                c.xi.push_back(std::isinf(l) ? 0.0 : c.v / (2.0 * c.dcoeff * l));
            }
        }
    }
    if (doc.contains("coefficients")) {
        const json& q = doc.at("coefficients");
        check_keys(q, "coefficients", {"grid_size", "mu0", "tolerance"});
        read_if(q, "grid_size", "coefficients", c.coefficients.grid_size);
        read_if(q, "mu0", "coefficients", c.coefficients.mu0);
        read_if(q, "tolerance", "coefficients", c.coefficients.tolerance);
        if (c.coefficients.grid_size < 8) throw ConfigError("coefficients.grid_size must be at least 8");
        if (!(std::abs(c.coefficients.mu0) < 1.0)) throw ConfigError("coefficients.mu0 must lie in (-1, 1)");
        if (!(c.coefficients.tolerance > 0.0)) throw ConfigError("coefficients.tolerance must be positive");
    }
    if (doc.contains("series")) {
        const json& s = doc.at("series");
        check_keys(s, "series", {"xi_grid", "terms", "ntz_max"});
        if (s.contains("xi_grid")) c.series_grid = number_list(s.at("xi_grid"), "series.xi_grid", false);
        for (double x : c.series_grid) finite(x, "series.xi_grid");
        read_if(s, "terms", "series", c.series_terms);
        read_if(s, "ntz_max", "series", c.ntz_max);
        if (c.series_terms < 1) throw ConfigError("series.terms must be positive");
        if (c.ntz_max < 3) throw ConfigError("series.ntz_max must be at least 3");
    }
    if (doc.contains("dio")) {
        const json& d = doc.at("dio");
        check_keys(d, "dio", {"max_weight", "scripts", "steps"});
        read_if(d, "max_weight", "dio", c.dio_max_weight);
        if (c.dio_max_weight < 2 || c.dio_max_weight > 6) throw ConfigError("dio.max_weight must lie in [2, 6]");
        if (d.contains("scripts")) {
            const json& s = d.at("scripts");
            if (!(s.is_string() && s.get<std::string>() == "all")) {
                c.dio_scripts = read<std::vector<std::string>>(d, "scripts", "dio");
            }
        }
        if (d.contains("steps")) {
            if (!d.at("steps").is_array()) throw ConfigError("dio.steps must be a list");
            for (const auto& step : d.at("steps")) {
                check_keys(step, "dio.steps", {"family", "a", "b", "target"});
                auto fam = parse_family(read<std::string>(step, "family", "dio.steps"));
                if (!fam) throw ConfigError("unknown DIO family '" + step.at("family").get<std::string>() + "'");
                DioStep ds;
                ds.family = *fam;
                ds.a = read<int>(step, "a", "dio.steps");
                ds.b = read<int>(step, "b", "dio.steps");
                try {
                    ds.target = MultiIndex::parse(read<std::string>(step, "target", "dio.steps"));
                } catch (const AlgebraError& e) {
                    throw ConfigError(e.what());
                }
                c.dio_steps.push_back(ds);
            }
        }
    }
    if (doc.contains("mc")) {
        const json& m = doc.at("mc");
        check_keys(m, "mc", {"n_particles", "dt", "t_max", "n_snapshots", "fit_window", "vacf_cutoff",
                             "vacf_lag_stride", "n_batches", "integrator", "vacf_control_variates"});
        read_if(m, "n_particles", "mc", c.mc.n_particles);
        read_if(m, "dt", "mc", c.mc.dt);
        read_if(m, "t_max", "mc", c.mc.t_max);
        read_if(m, "n_snapshots", "mc", c.mc.n_snapshots);
        read_if(m, "fit_window", "mc", c.mc.fit_window);
        read_if(m, "vacf_cutoff", "mc", c.mc.vacf_cutoff);
        read_if(m, "vacf_lag_stride", "mc", c.mc.vacf_lag_stride);
        read_if(m, "n_batches", "mc", c.mc.n_batches);
        read_if(m, "vacf_control_variates", "mc", c.mc.vacf_control_variates);
        if (m.contains("integrator")) {
            auto integrator = parse_integrator(read<std::string>(m, "integrator", "mc"));
            if (!integrator) throw ConfigError("mc.integrator must be \"geodesic\" or \"euler\"");
            c.mc.integrator = *integrator;
        }
    }
    read_if(doc, "seed", "config", c.mc.seed);
    read_if(doc, "threads", "config", c.mc.threads);
    if (doc.contains("out_dir")) c.out_dir = read<std::string>(doc, "out_dir", "config");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

void apply_overrides(RunConfig& config, const Overrides& o) {
    if (o.mode) config.mode = o.mode;
    if (o.seed) config.mc.seed = *o.seed;
    if (o.out_dir) config.out_dir = *o.out_dir;
    if (o.threads) config.mc.threads = *o.threads;
}

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
    try {
        if (!config.mode) throw ConfigError("no mode given in the config or on the command line");
        bool needs_mc = *config.mode == Mode::Mc || *config.mode == Mode::Tgk || *config.mode == Mode::Report;
        if (needs_mc) validate(config.mc);
        std::error_code ec;
        std::filesystem::create_directories(config.out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory '" + config.out_dir.string() + "': " + ec.message());
        switch (*config.mode) {
            case Mode::Coeffs:
                return run_coeffs(config, log);
            case Mode::Series:
                return run_series(config, log);
            case Mode::Dio:
                return run_dio(config, log, err);
            case Mode::Mc:
                return run_mc(config, log, err);
            case Mode::Tgk:
                return run_tgk(config, log);
            case Mode::Report:
                return run_report(config, log, err);
        }
        return 1;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const ModelError& e) {
        err << "invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& log, std::ostream& err) {
    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
    apply_overrides(config, overrides);
    return run(config, log, err);
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void emit_plotdata(const Series& series, const std::filesystem::path& path) {
    if (series.empty()) throw ConfigError("refusing to write empty plot data to '" + path.string() + "'");
    auto out = open_output(path);
    for (const auto& [x, y] : series) out << format_double(x) << ' ' << format_double(y) << '\n';
    close_output(out, path);
}

}  // namespace fdiff
