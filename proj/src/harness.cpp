#include "lvfb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>

namespace lvfb {

std::string to_string(Scenario scenario)
{
    switch (scenario) {
    case Scenario::SemiWaveTable: return "SemiWaveTable";
    case Scenario::SpeedSelection: return "SpeedSelection";
    case Scenario::SpreadingVerification: return "SpreadingVerification";
    case Scenario::MuSweep: return "MuSweep";
    case Scenario::ConvergenceStudy: return "ConvergenceStudy";
    }
    return "?";
}

std::optional<Scenario> scenario_from_string(const std::string& name)
{
    static const std::pair<const char*, Scenario> table[] = {
        {"semiwave", Scenario::SemiWaveTable},
        {"speed", Scenario::SpeedSelection},
        {"simulate", Scenario::SpreadingVerification},
        {"sweep", Scenario::MuSweep},
        {"converge", Scenario::ConvergenceStudy},
    };
    for (const auto& [alias, sc] : table) {
        if (name == alias || name == to_string(sc)) {
            return sc;
        }
    }
    return std::nullopt;
}

void ExperimentSpec::validate() const
{
    model.validate();
    grid.validate();
    if (!(tol_s > 0.0)) {
        throw DomainError("tol_s must be positive");
    }
    auto strictly_increasing = [](const std::vector<double>& x) {
        return std::adjacent_find(x.begin(), x.end(), std::greater_equal<>()) == x.end();
    };
    switch (scenario) {
    case Scenario::SemiWaveTable:
        if (s_list.empty()) {
            throw DomainError("SemiWaveTable needs s_list");
        }
        for (double s : s_list) {
            if (!(s >= 0.0)) {
                throw DomainError("s_list entries must be nonnegative");
            }
        }
        break;
    case Scenario::MuSweep:
        if (!strictly_increasing(mu_list)) {
            throw DomainError("mu_list must be strictly increasing");
        }
        for (double mu : mu_list) {
            if (!(mu > 0.0)) {
                throw DomainError("mu_list entries must be positive");
            }
        }
        break;
    case Scenario::ConvergenceStudy:
        if (refinements < 2) {
            throw DomainError("ConvergenceStudy needs refinements >= 2");
        }
        if (!(s_probe >= 0.0)) {
            throw DomainError("s_probe must be nonnegative");
        }
        if (dt_study && !(dt_study_t_end > 0.0)) {
            throw DomainError("dt_study_t_end must be positive");
        }
        break;
    case Scenario::SpreadingVerification:
        if (!(h0 > 0.0) || !(t_end > 0.0) || !(dt > 0.0) || Ny < 2 || !(dr > 0.0)) {
            throw DomainError("SpreadingVerification needs h0, t_end, dt, dr > 0 and Ny >= 2");
        }
        if (!(u_amplitude > 0.0) || !(v_const >= 0.0)) {
            throw DomainError("u_amplitude must be positive and v0 nonnegative");
        }
        if (!(window_fraction > 0.0) || window_fraction > 1.0) {
            throw DomainError("window_fraction must lie in (0, 1]");
        }
        break;
    case Scenario::SpeedSelection:
        break;
    }
}

namespace {

std::string join(const std::vector<double>& x)
{
    std::ostringstream out;
    out << std::setprecision(10);
    for (std::size_t k = 0; k < x.size(); ++k) {
        out << (k ? ";" : "") << x[k];
    }
    return out.str();
}

std::vector<double> default_mu_list() { return {0.1, 1.0, 10.0, 100.0}; }

}  // namespace

std::string ExperimentSpec::fingerprint() const
{
    std::ostringstream out;
    out << std::setprecision(10);
    out << to_string(scenario) << ":a=" << model.a << ",b=" << model.b << ",d=" << model.d << ",r=" << model.r
        << ",N=" << model.N;
    if (scenario != Scenario::MuSweep) {
        out << ",mu=" << model.mu;
    }
    switch (scenario) {
    case Scenario::SpreadingVerification:
        out << ",h0=" << h0 << ",t_end=" << t_end << ",dt=" << dt << ",Ny=" << Ny << ",dr=" << dr
            << ",amp=" << u_amplitude << ",v0=" << v_const;
        break;
    default:
        out << ",L=" << grid.L_left << "/" << grid.L_right << ",hxi=" << grid.spacing();
        break;
    }
    if (scenario == Scenario::SemiWaveTable) {
        out << ",s=" << join(s_list);
    }
    if (scenario == Scenario::MuSweep) {
        out << ",mu=" << join(mu_list.empty() ? default_mu_list() : mu_list);
    }
    if (scenario == Scenario::ConvergenceStudy) {
        out << ",s=" << s_probe << ",levels=" << refinements;
    }
    return out.str();
}

const std::vector<std::string>& known_config_keys()
{
    static const std::vector<std::string> keys = {
        // model
        "d", "r", "a", "b", "mu", "N", "h0",
        "d1", "d2", "a1", "a2", "b1", "b2", "c1", "c2", "mu_hat", "H0",
        // grids and tolerances
        "L_left", "L_right", "h_xi", "tol_s",
        // scenarios
        "scenario", "s_list", "mu_list", "s_probe", "refinements", "dt_study", "dt_study_t_end",
        "t_end", "dt", "Ny", "dr", "u_amplitude", "v0", "R_max", "sample_interval", "window_fraction",
        "snapshot_times",
        // classification
        "theta", "theta_u", "eps_h", "growth_factor", "min_duration", "classify_window",
    };
    return keys;
}

ExperimentSpec spec_from_config(const KeyValueConfig& cfg, Scenario scenario)
{
    const auto& keys = known_config_keys();
    for (const auto& [key, value] : cfg.entries()) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    ExperimentSpec spec;
    spec.scenario = scenario;
    const ConfiguredModel cm = model_from_config(cfg);
    spec.model = cm.model;
    spec.h0 = cm.h0;

    const double h_xi = cfg.get_double_or("h_xi", spec.grid.spacing());
    spec.grid = XiGrid::with_spacing(cfg.get_double_or("L_left", spec.grid.L_left),
                                     cfg.get_double_or("L_right", spec.grid.L_right), h_xi);
    spec.tol_s = cfg.get_double_or("tol_s", spec.tol_s);

    spec.s_list = cfg.get_doubles("s_list").value_or(spec.s_list);
    spec.mu_list = cfg.get_doubles("mu_list").value_or(spec.mu_list);
    spec.s_probe = cfg.get_double_or("s_probe", spec.s_probe);
    spec.refinements = cfg.get_int_or("refinements", spec.refinements);
    spec.dt_study = cfg.get_bool("dt_study").value_or(spec.dt_study);
    spec.dt_study_t_end = cfg.get_double_or("dt_study_t_end", spec.dt_study_t_end);

    spec.t_end = cfg.get_double_or("t_end", spec.t_end);
    spec.dt = cfg.get_double_or("dt", spec.dt);
    spec.Ny = cfg.get_int_or("Ny", spec.Ny);
    spec.dr = cfg.get_double_or("dr", spec.dr);
    spec.u_amplitude = cfg.get_double_or("u_amplitude", spec.u_amplitude);
    spec.v_const = cfg.get_double_or("v0", spec.v_const);
    if (auto R = cfg.get_double("R_max")) {
        spec.R_max = *R;
    }
    spec.sample_interval = cfg.get_double_or("sample_interval", spec.sample_interval);
    spec.window_fraction = cfg.get_double_or("window_fraction", spec.window_fraction);
    spec.snapshot_times = cfg.get_doubles("snapshot_times").value_or(spec.snapshot_times);

    auto& th = spec.thresholds;
    th.theta = cfg.get_double_or("theta", th.theta);
    th.theta_u = cfg.get_double_or("theta_u", th.theta_u);
    th.eps_h = cfg.get_double_or("eps_h", th.eps_h);
    th.growth_factor = cfg.get_double_or("growth_factor", th.growth_factor);
    th.min_duration = cfg.get_double_or("min_duration", th.min_duration);
    th.window_fraction = cfg.get_double_or("classify_window", th.window_fraction);
    return spec;
}

std::optional<double> Report::metric(const std::string& key) const
{
    for (const auto& [k, v] : metrics) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

std::string Report::summary_line() const
{
    std::ostringstream out;
    out << std::setprecision(8) << "RESULT " << to_string(scenario) << " status=" << status;
    for (const auto& [k, v] : metrics) {
        out << ' ' << k << '=' << v;
    }
    return out.str();
}

namespace {

[[noreturn]] void rethrow_with_context(const std::string& ctx)
{
    try {
        throw;
    } catch (const NonConverged& e) {
        throw NonConverged(ctx + e.what(), e.speed(), e.time(), e.update_rate(), e.probe_value());
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(ctx + e.what(), e.trace());
    } catch (const StabilityError& e) {
        throw StabilityError(ctx + e.what(), e.trace());
    } catch (const SolverError& e) {
        throw SolverError(ctx + e.what(), e.trace());
    } catch (const DomainError& e) {
        throw DomainError(ctx + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(ctx + e.what());
    }
}

class Writer {
public:
    explicit Writer(const ExperimentSpec& spec, Report& report) : spec_(spec), report_(report)
    {
        if (enabled()) {
            std::filesystem::create_directories(spec.out_dir);
        }
    }

    bool enabled() const { return !spec_.out_dir.empty(); }

    std::filesystem::path path(const std::string& name)
    {
        auto p = spec_.out_dir / name;
        report_.files.push_back(p);
        return p;
    }

    std::ofstream open(const std::string& name)
    {
        const auto p = path(name);
        std::ofstream out(p);
        if (!out) {
            throw std::runtime_error("cannot write '" + p.string() + "'");
        }
        out << std::setprecision(12);
        return out;
    }

private:
    const ExperimentSpec& spec_;
    Report& report_;
};

std::string number_tag(double x)
{
    std::ostringstream out;
    out << std::setprecision(6) << x;
    return out.str();
}

SpeedOptions speed_options(const ExperimentSpec& spec)
{
    SpeedOptions opts;
    opts.tol_s = spec.tol_s;
    return opts;
}

void run_semiwave_table(const ExperimentSpec& spec, Report& rep, Writer& w)
{
    std::ofstream table;
    if (w.enabled()) {
        table = w.open("semiwave_table.csv");
        table << "s,status,dpsi0,residual,t_relax\n";
    }
    RelaxOptions ro;
    ro.tol = 1e-10;
    long degenerate = 0;
    for (std::size_t k = 0; k < spec.s_list.size(); ++k) {
        const double s = spec.s_list[k];
        const RelaxOutcome out = relax_semiwave(spec.model, s, {}, spec.grid, ro);
        if (const auto* prof = std::get_if<SemiWaveProfile>(&out)) {
            rep.metrics.emplace_back("dpsi0[" + number_tag(s) + "]", prof->dpsi0);
            if (w.enabled()) {
                table << s << ",exists," << prof->dpsi0 << ',' << prof->residual << ','
                      << prof->diagnostics.t_final << '\n';
                write_profile_csv(*prof, w.path("profile_s" + number_tag(s) + ".csv").string());
            }
        } else {
            const auto& deg = std::get<Degenerate>(out);
            ++degenerate;
            if (w.enabled()) {
                table << s << ",degenerate,nan,nan," << deg.diagnostics.t_final << '\n';
            }
        }
    }
    rep.metrics.emplace_back("degenerate", static_cast<double>(degenerate));
}

void run_speed_selection(const ExperimentSpec& spec, Report& rep, Writer& w)
{
    const SpeedResult res = solve_s_mu(spec.model, spec.grid, speed_options(spec));
    rep.metrics.emplace_back("s0_lower", res.s0_lower);
    rep.metrics.emplace_back("s0_upper", res.s0_upper);
    rep.metrics.emplace_back("s0_est", res.s0_est);
    rep.metrics.emplace_back("s_mu", res.s_mu);
    rep.metrics.emplace_back("dpsi0", res.dpsi0);
    rep.metrics.emplace_back("eta_residual", res.eta_residual);
    if (res.profile) {
        rep.metrics.emplace_back("relax_monotone_violations",
                                 static_cast<double>(res.profile->diagnostics.monotone_violations));
    }
    if (res.s0_marginal) {
        rep.status = "marginal";
    }
    if (w.enabled()) {
        auto out = w.open("speed.csv");
        out << SpeedResult::csv_header() << '\n' << res.csv_row(spec.model) << '\n';
        if (res.profile) {
            write_profile_csv(*res.profile, w.path("profile_s_mu.csv").string());
        }
    }
}

void run_mu_sweep(const ExperimentSpec& spec, Report& rep, Writer& w)
{
    const auto mus = spec.mu_list.empty() ? default_mu_list() : spec.mu_list;
    const SpeedOptions opts = speed_options(spec);
    const S0Estimate s0 = estimate_s0(spec.model, spec.grid, opts.s0);
    std::ofstream out;
    if (w.enabled()) {
        out = w.open("sweep.csv");
        out << SpeedResult::csv_header() << '\n';
    }
    double prev = -1.0;
    bool monotone = true;
    for (double mu : mus) {
        const SpeedResult res = solve_s_mu(spec.model, mu, spec.grid, s0, opts);
        rep.metrics.emplace_back("s_mu[" + number_tag(mu) + "]", res.s_mu);
        monotone = monotone && res.s_mu > prev;
        prev = res.s_mu;
        if (w.enabled()) {
            out << res.csv_row(spec.model) << '\n';
        }
    }
    rep.metrics.emplace_back("s0_est", s0.value);
    rep.metrics.emplace_back("monotone", monotone ? 1.0 : 0.0);
    rep.metrics.emplace_back("last_over_s0", prev / s0.value);
    if (s0.marginal) {
        rep.status = "marginal";
    }
}

void run_convergence(const ExperimentSpec& spec, Report& rep, Writer& w)
{
    RelaxOptions ro;
    ro.tol = 1e-12;
    ro.t_max = 4e4;
    std::vector<double> hs, d;
    long relax_violations = 0;
    const SemiWaveProfile* warm = nullptr;
    for (int k = 0; k <= spec.refinements; ++k) {
        const XiGrid g = k == 0 ? spec.grid : spec.grid.refined(1 << k);
        const RelaxOutcome out = relax_semiwave(spec.model, spec.s_probe, {}, g, ro, warm);
        const auto* prof = std::get_if<SemiWaveProfile>(&out);
        if (!prof) {
            throw SolverError("no semi-wave at s_probe = " + number_tag(spec.s_probe));
        }
        hs.push_back(g.spacing());
        d.push_back(prof->dpsi0);
        relax_violations += prof->diagnostics.monotone_violations;
    }
    const std::size_t n = d.size();
    const double ratio = (d[n - 3] - d[n - 2]) / (d[n - 2] - d[n - 1]);
    const double extrapolated = d[n - 1] + (d[n - 1] - d[n - 2]) / 3.0;
    rep.metrics.emplace_back("dpsi0_fine", d[n - 1]);
    rep.metrics.emplace_back("dpsi0_richardson", extrapolated);
    rep.metrics.emplace_back("ratio", ratio);
    rep.metrics.emplace_back("relax_monotone_violations", static_cast<double>(relax_violations));
    if (w.enabled()) {
        auto out = w.open("converge.csv");
        out << "h_xi,dpsi0\n";
        for (std::size_t k = 0; k < n; ++k) {
            out << hs[k] << ',' << d[k] << '\n';
        }
    }

    if (spec.dt_study) {
        const double T = spec.dt_study_t_end;
        const double R = spec.h0 + 2.0 * std::sqrt(spec.model.r * spec.model.d) * T + 30.0;
        const auto init = InitialData::cosine_bump(spec.h0, spec.u_amplitude, spec.v_const, R, spec.Ny, spec.dr);
        double h[3];
        long violations = 0;
        std::ofstream out;
        if (w.enabled()) {
            out = w.open("converge_dt.csv");
            out << "dt,h_end\n";
        }
        for (int k = 0; k < 3; ++k) {
            SimulationOptions so;
            so.dt = spec.dt / (1 << k);
            so.sample_interval = T;
            const Trajectory traj = simulate(init, spec.model, T, so);
            h[k] = traj.final_state->h;
            violations += traj.counters.total();
            if (w.enabled()) {
                out << so.dt << ',' << h[k] << '\n';
            }
        }
        rep.metrics.emplace_back("h_end_fine", h[2]);
        rep.metrics.emplace_back("dt_ratio", (h[0] - h[1]) / (h[1] - h[2]));
        rep.metrics.emplace_back("invariant_violations", static_cast<double>(violations));
    }
}

void run_spreading(const ExperimentSpec& spec, Report& rep, Writer& w)
{
    const SimulationOptions defaults;
    const double R = spec.R_max.value_or(spec.h0 + 2.0 * std::sqrt(spec.model.r * spec.model.d) * spec.t_end
                                         + defaults.travel_margin + 10.0);
    const auto init = InitialData::cosine_bump(spec.h0, spec.u_amplitude, spec.v_const, R, spec.Ny, spec.dr);
    SimulationOptions so;
    so.dt = spec.dt;
    so.sample_interval = spec.sample_interval;
    so.snapshot_times = spec.snapshot_times;
    const Trajectory traj = simulate(init, spec.model, spec.t_end, so);
    const Outcome outcome = classify_outcome(traj, spec.thresholds);
    rep.status = to_string(outcome);
    rep.undetermined = outcome == Outcome::Undetermined;

    const auto& last = traj.samples.back();
    rep.metrics.emplace_back("h_end", last.h);
    rep.metrics.emplace_back("u_max", last.u_max);
    rep.metrics.emplace_back("v_max_compact", last.v_max_compact);
    rep.metrics.emplace_back("v_min_compact", last.v_min_compact);
    rep.metrics.emplace_back("invariant_violations", static_cast<double>(traj.counters.total()));

    if (w.enabled()) {
        write_front_csv(traj, w.path("front.csv").string());
        for (const auto& snap : traj.snapshots) {
            write_snapshot_csv(snap, w.path("snapshot_" + number_tag(snap.t) + ".csv").string());
        }
    }

    if (outcome == Outcome::Spreading && classify(spec.model) == CompetitionRegime::SuperiorU) {
        const SpeedFit fit = measure_speed(traj, spec.window_fraction);
        const SpeedResult res = solve_s_mu(spec.model, spec.grid, speed_options(spec));
        rep.metrics.emplace_back("slope", fit.slope);
        rep.metrics.emplace_back("slope_stderr", fit.stderr_);
        rep.metrics.emplace_back("s_mu", res.s_mu);
        rep.metrics.emplace_back("eta_residual", res.eta_residual);
        rep.metrics.emplace_back("gap", std::abs(fit.slope - res.s_mu) / res.s_mu);
        if (res.profile) {
            const SupErrors err = compare_with_semiwave(*traj.final_state, *res.profile);
            rep.metrics.emplace_back("u_error", err.u_error);
            rep.metrics.emplace_back("v_error", err.v_error);
        }
        if (w.enabled()) {
            auto out = w.open("speed.csv");
            out << SpeedResult::csv_header() << '\n' << res.csv_row(spec.model) << '\n';
        }
    }
}

}  // namespace

Report run(const ExperimentSpec& spec)
{
    Report rep;
    rep.scenario = spec.scenario;
    try {
        spec.validate();
        rep.fingerprint = spec.fingerprint();
        Writer w(spec, rep);
        switch (spec.scenario) {
        case Scenario::SemiWaveTable: run_semiwave_table(spec, rep, w); break;
        case Scenario::SpeedSelection: run_speed_selection(spec, rep, w); break;
        case Scenario::MuSweep: run_mu_sweep(spec, rep, w); break;
        case Scenario::ConvergenceStudy: run_convergence(spec, rep, w); break;
        case Scenario::SpreadingVerification: run_spreading(spec, rep, w); break;
        }
    } catch (const std::exception&) {
        rethrow_with_context("[" + to_string(spec.scenario) + " " + spec.fingerprint() + "] ");
    }
    return rep;
}

std::vector<Report> run_batch(const std::vector<ExperimentSpec>& specs)
{
    std::vector<std::future<Report>> tasks;
    tasks.reserve(specs.size());
    for (const auto& spec : specs) {
        tasks.push_back(std::async(std::launch::async, [&spec] { return run(spec); }));
    }
    std::vector<Report> out;
    out.reserve(specs.size());
    for (auto& t : tasks) {
        out.push_back(t.get());
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line)
{
    // Fields never contain commas except the trailing note, which may be quoted.
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quoted) {
            if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
                field += '"';
                ++k;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw StoreError("unterminated quote");
    }
    out.push_back(field);
    return out;
}

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c;
        if (c == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

double parse_number(const std::string& s, const std::string& where)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw StoreError(where + ": bad number '" + s + "'");
    }
}

}  // namespace

FrozenStore FrozenStore::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw StoreError("cannot read frozen store '" + path.string() + "'");
    }
    FrozenStore store;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (!header) {
            if (line != "fingerprint,value,tolerance,note") {
                throw StoreError(where + ": expected header 'fingerprint,value,tolerance,note'");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        try {
            f = split_csv_line(line);
        } catch (const StoreError& e) {
            throw StoreError(where + ": " + e.what());
        }
        if (f.size() != 4) {
            throw StoreError(where + ": expected 4 fields");
        }
        FrozenReference ref{f[0], parse_number(f[1], where), parse_number(f[2], where), f[3]};
        if (ref.fingerprint.empty()) {
            throw StoreError(where + ": empty fingerprint");
        }
        if (!(ref.tolerance > 0.0)) {
            throw StoreError(where + ": tolerance must be positive");
        }
        if (!seen.insert(ref.fingerprint).second) {
            throw StoreError(where + ": duplicate fingerprint '" + ref.fingerprint + "'");
        }
        store.entries_.push_back(std::move(ref));
    }
    if (!header) {
        throw StoreError("frozen store '" + path.string() + "' has no header");
    }
    return store;
}

FrozenStore FrozenStore::load_or_empty(const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) {
        return {};
    }
    return load(path);
}

void FrozenStore::save(const std::filesystem::path& path) const
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw StoreError("cannot write frozen store '" + path.string() + "'");
    }
    out << "fingerprint,value,tolerance,note\n" << std::setprecision(17);
    for (const auto& e : entries_) {
        out << quote(e.fingerprint) << ',' << e.value << ',' << e.tolerance << ',' << quote(e.note) << '\n';
    }
}

const FrozenReference* FrozenStore::find(const std::string& fingerprint) const
{
    for (const auto& e : entries_) {
        if (e.fingerprint == fingerprint) {
            return &e;
        }
    }
    return nullptr;
}

void FrozenStore::upsert(FrozenReference ref)
{
    if (!(ref.tolerance > 0.0)) {
        throw StoreError("tolerance must be positive for '" + ref.fingerprint + "'");
    }
    for (auto& e : entries_) {
        if (e.fingerprint == ref.fingerprint) {
            e = std::move(ref);
            return;
        }
    }
    entries_.push_back(std::move(ref));
}

std::vector<FrozenResult> frozen_results(const Report& report)
{
    std::vector<FrozenResult> out;
    for (const auto& [k, v] : report.metrics) {
        out.push_back({report.fingerprint + "#" + k, v});
    }
    return out;
}

std::string to_string(CheckStatus status)
{
    switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::New: return "new";
    }
    return "?";
}

bool CheckReport::passed() const { return count(CheckStatus::Fail) == 0; }

long CheckReport::count(CheckStatus status) const
{
    return std::count_if(entries.begin(), entries.end(), [&](const CheckEntry& e) { return e.status == status; });
}

std::string CheckReport::to_text() const
{
    std::ostringstream out;
    out << std::setprecision(12);
    for (const auto& e : entries) {
        out << to_string(e.status) << ' ' << e.fingerprint << " value=" << e.value;
        if (e.frozen) {
            out << " frozen=" << *e.frozen << " tol=" << e.tolerance;
        } else {
            out << " (warning: no frozen value, recorded as new)";
        }
        out << '\n';
    }
    return out.str();
}

CheckReport check_frozen(const FrozenStore& store, const std::vector<FrozenResult>& results)
{
    CheckReport rep;
    for (const auto& r : results) {
        CheckEntry e;
        e.fingerprint = r.fingerprint;
        e.value = r.value;
        if (const auto* ref = store.find(r.fingerprint)) {
            e.frozen = ref->value;
            e.tolerance = ref->tolerance;
            e.status = std::abs(r.value - ref->value) <= ref->tolerance ? CheckStatus::Pass : CheckStatus::Fail;
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

void freeze(FrozenStore& store, const std::vector<FrozenResult>& results, double rel_tol, double abs_tol,
            const std::string& note)
{
    for (const auto& r : results) {
        store.upsert({r.fingerprint, r.value, std::max(abs_tol, rel_tol * std::abs(r.value)), note});
    }
}

}  // namespace lvfb
