#include "cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <ostream>
#include <sstream>

#include "lvfb/config.hpp"
#include "lvfb/harness.hpp"

#ifndef LVFB_VERSION
#define LVFB_VERSION "0.0.0"
#endif
#ifndef LVFB_DATA_DIR
#define LVFB_DATA_DIR "data"
#endif

namespace lvfb::cli {

std::string version_text()
{
    const SpeedOptions so;
    const S0Options s0;
    const ClassifyThresholds th;
    const SimulationOptions sim;
    const XiGrid grid;
    std::ostringstream out;
    out << "lvfb " << LVFB_VERSION << '\n'
        << "default tolerances:\n"
        << "  tol_s=" << so.tol_s << " eta_rel_tol=" << so.eta_rel_tol << " relax_tol=" << so.relax.tol << '\n'
        << "  s0_tol_s=" << s0.tol_s << " s0_relax_tol=" << s0.relax.tol << '\n'
        << "  theta=" << th.theta << " theta_u=" << th.theta_u << " eps_h=" << th.eps_h
        << " growth_factor=" << th.growth_factor << '\n'
        << "  h_xi=" << grid.spacing() << " L=" << grid.L_left << "/" << grid.L_right << " dt=" << sim.dt
        << " Ny=400 dr=0.1";
    return out.str();
}

ParseResult parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Invocation inv;
    inv.store = std::filesystem::path(LVFB_DATA_DIR) / "frozen.csv";

    CLI::App app{"Competition model with a free boundary: semi-waves, spreading speeds, simulations"};
    app.name("lvfb");
    app.set_version_flag("--version", version_text());
    app.require_subcommand(1);
    app.fallthrough();

    std::string config;
    app.add_option("--config", config, "key = value parameter file");
    app.add_option("--out", inv.out_dir, "output directory for CSV artifacts");
    app.add_flag("--quiet", inv.quiet, "only print the RESULT line");

    auto* semiwave = app.add_subcommand("semiwave", "semi-wave profiles for a list of speeds");
    semiwave->add_option("--s", inv.s_list, "speeds (overrides s_list)")->delimiter(',');
    app.add_subcommand("speed", "minimal speed s0 and spreading speed s_mu");
    app.add_subcommand("simulate", "free-boundary run, classification and speed check");
    app.add_subcommand("sweep", "s_mu over a list of mu");
    app.add_subcommand("converge", "grid and step refinement study");
    for (const char* name : {"freeze", "check"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "freeze" ? "record results in the frozen store"
                                                                            : "compare results with the frozen store");
        sub->add_option("--scenario", inv.scenarios, "semiwave|speed|simulate|sweep|converge (repeatable)");
        sub->add_option("--store", inv.store, "frozen store CSV");
        if (std::string(name) == "freeze") {
            sub->add_option("--rel-tol", inv.rel_tol, "relative tolerance stored with each value");
            sub->add_option("--abs-tol", inv.abs_tol, "absolute tolerance floor");
            sub->add_option("--note", inv.note, "provenance note");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return {std::nullopt, app.exit(e, out, err)};
    } catch (const CLI::CallForAllHelp& e) {
        return {std::nullopt, app.exit(e, out, err)};
    } catch (const CLI::CallForVersion& e) {
        return {std::nullopt, app.exit(e, out, err)};
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return {std::nullopt, kUsage};
    }

    inv.subcommand = app.get_subcommands().front()->get_name();
    if (!config.empty()) {
        inv.config = config;
    }
    for (const auto& s : inv.scenarios) {
        if (!scenario_from_string(s)) {
            err << "unknown scenario '" << s << "'\n";
            return {std::nullopt, kUsage};
        }
    }
    return {inv, kOk};
}

namespace {

KeyValueConfig load_config(const Invocation& inv)
{
    if (!inv.config) {
        return {};
    }
    return KeyValueConfig::load(*inv.config);
}

ExperimentSpec make_spec(const Invocation& inv, const KeyValueConfig& cfg, Scenario sc)
{
    ExperimentSpec spec = spec_from_config(cfg, sc);
    spec.out_dir = inv.out_dir;
    spec.quiet = inv.quiet;
    if (sc == Scenario::SemiWaveTable && !inv.s_list.empty()) {
        spec.s_list = inv.s_list;
    }
    if (sc == Scenario::SemiWaveTable && spec.s_list.empty()) {
        spec.s_list = {0.0, 0.5, 1.0};
    }
    return spec;
}

std::vector<Scenario> batch_scenarios(const Invocation& inv, const KeyValueConfig& cfg)
{
    std::vector<std::string> names = inv.scenarios;
    if (names.empty()) {
        names.push_back(cfg.get_string("scenario").value_or("speed"));
    }
    std::vector<Scenario> out;
    for (const auto& n : names) {
        auto sc = scenario_from_string(n);
        if (!sc) {
            throw ConfigError("unknown scenario '" + n + "'");
        }
        out.push_back(*sc);
    }
    return out;
}

void print_report(const Report& rep, const Invocation& inv, std::ostream& out)
{
    if (!inv.quiet) {
        out << to_string(rep.scenario) << ": " << rep.fingerprint << '\n';
        for (const auto& f : rep.files) {
            out << "  wrote " << f.string() << '\n';
        }
    }
    out << rep.summary_line() << '\n';
}

int run_frozen(const Invocation& inv, const KeyValueConfig& cfg, std::ostream& out)
{
    std::vector<ExperimentSpec> specs;
    for (Scenario sc : batch_scenarios(inv, cfg)) {
        specs.push_back(make_spec(inv, cfg, sc));
    }
    FrozenStore store = FrozenStore::load_or_empty(inv.store);
    const auto reports = run_batch(specs);
    std::vector<FrozenResult> results;
    for (const auto& rep : reports) {
        print_report(rep, inv, out);
        auto r = frozen_results(rep);
        results.insert(results.end(), r.begin(), r.end());
    }
    if (inv.subcommand == "freeze") {
        freeze(store, results, inv.rel_tol, inv.abs_tol, inv.note.empty() ? "frozen by lvfb freeze" : inv.note);
        store.save(inv.store);
        out << "RESULT freeze status=ok stored=" << results.size() << " store=" << inv.store.string() << '\n';
        return kOk;
    }
    const CheckReport check = check_frozen(store, results);
    if (!inv.quiet) {
        out << check.to_text();
    }
    out << "RESULT check status=" << (check.passed() ? "pass" : "fail") << " pass=" << check.count(CheckStatus::Pass)
        << " fail=" << check.count(CheckStatus::Fail) << " new=" << check.count(CheckStatus::New) << '\n';
    return check.passed() ? kOk : kSolverFailure;
}

}  // namespace

int execute(const Invocation& inv, std::ostream& out, std::ostream& err)
{
    try {
        const KeyValueConfig cfg = load_config(inv);
        if (inv.subcommand == "freeze" || inv.subcommand == "check") {
            return run_frozen(inv, cfg, out);
        }
        const auto sc = scenario_from_string(inv.subcommand);
        if (!sc) {
            err << "unknown subcommand '" << inv.subcommand << "'\n";
            return kUsage;
        }
        const Report rep = run(make_spec(inv, cfg, *sc));
        print_report(rep, inv, out);
        return rep.undetermined ? kUndetermined : kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const StoreError& e) {
        err << "frozen store error: " << e.what() << '\n';
        return kConfig;
    } catch (const DomainError& e) {
        err << "invalid parameters: " << e.what() << '\n';
        return kConfig;
    } catch (const NonConverged& e) {
        err << "not converged: " << e.what() << " (s=" << e.speed() << ", t=" << e.time()
            << ", rate=" << e.update_rate() << ")\n";
        return kSolverFailure;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        for (const auto& line : e.trace()) {
            err << "  " << line << '\n';
        }
        return kSolverFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kSolverFailure;
    }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    const ParseResult parsed = parse_args(argc, argv, out, err);
    if (!parsed.invocation) {
        return parsed.exit_code;
    }
    return execute(*parsed.invocation, out, err);
}

}  // namespace lvfb::cli
