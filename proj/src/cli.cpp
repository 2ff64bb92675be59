#include "ia/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ia/channel.hpp"
#include "ia/csit_allocation.hpp"
#include "ia/experiments.hpp"
#include "ia/feasibility.hpp"
#include "ia/json_io.hpp"
#include "ia/precoding.hpp"
#include "ia/rng.hpp"
#include "ia/version.hpp"

namespace ia {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitGuard = 3;

/// Config arguments are accepted inline or as a path to a file holding one.
AntennaConfig load_config(const std::string& arg) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(arg, ec)) {
        std::ifstream in(arg);
        std::stringstream buffer;
        buffer << in.rdbuf();
        std::string text = buffer.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        return AntennaConfig::parse(text);
    }
    return AntennaConfig::parse(arg);
}

std::string format_subic(const SubIC& s) {
    auto set = [](const std::vector<int>& ids) {
        std::string out = "{";
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(ids[i]);
        }
        return out + "}";
    };
    return "(" + set(s.rx) + "," + set(s.tx) + ")";
}

int cmd_feasibility(const std::string& config_arg, bool brute, bool as_json, std::ostream& out) {
    const AntennaConfig config = load_config(config_arg);
    const FeasibilityReport report = brute ? is_feasible_bruteforce(config) : is_feasible(config);
    if (as_json) {
        out << feasibility_to_json(config, report).dump(2) << '\n';
    } else {
        out << config.to_string() << ": " << to_cstring(report.classification);
        if (report.witness) {
            out << "  witness " << format_subic(*report.witness);
            if (report.counts) out << " [n_var=" << report.counts->n_var << ", n_eq=" << report.counts->n_eq << "]";
        }
        out << '\n';
    }
    return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_allocate(const std::string& config_arg, const std::string& mode, bool as_json,
                 std::ostream& out, std::ostream& err) {
    const AntennaConfig config = load_config(config_arg);
    const FeasibilityReport report = is_feasible(config);
    if (!report.feasible) {
        err << "error: " << config.to_string() << " is infeasible; no CSIT allocation exists\n";
        return kExitInfeasible;
    }
    const SuperMode super_mode = mode == "exhaustive" ? SuperMode::Exhaustive : SuperMode::Heuristic;
    const SuperAllocation result = allocate_super(config, super_mode);

    if (as_json) {
        out << allocation_to_json(config, result.plan, result.alloc).dump(2) << '\n';
        return kExitOk;
    }
    out << config.to_string() << ": " << to_cstring(report.classification) << '\n';
    if (!result.plan.empty()) {
        out << "  removals: rx=";
        for (int i : result.plan.rx_removals) out << ' ' << i;
        out << "  tx=";
        for (int j : result.plan.tx_removals) out << ' ' << j;
        out << "\n  reduced: " << result.plan.reduced_config.to_string() << '\n';
    }
    for (const CsitMask& m : result.alloc.masks) {
        out << "  A(" << m.owner_tx << ") = ";
        if (m.kind == CsitMask::Kind::Complete)
            out << "COMPLETE";
        else if (m.sets.empty())
            out << "(empty)";
        else
            out << format_subic(m.sets);
        out << '\n';
    }
    const long size = allocation_size(result.plan.reduced_config, result.alloc);
    const long complete = complete_size(config);
    out << "  size " << size << " of complete " << complete;
    if (complete > 0)
        out << " (" << std::fixed << std::setprecision(1)
            << 100.0 * static_cast<double>(size) / static_cast<double>(complete) << "%)";
    out << '\n';
    return kExitOk;
}

int cmd_precode(const std::string& config_arg, const std::string& alloc_arg, std::uint64_t seed,
                double tol, int max_iter, bool as_json, std::ostream& out, std::ostream& err) {
    const AntennaConfig config = load_config(config_arg);
    const FeasibilityReport report = is_feasible(config);
    if (!report.feasible) {
        err << "error: " << config.to_string() << " is infeasible\n";
        return kExitInfeasible;
    }

    RemovalPlan plan{{}, {}, config};
    CsitAllocation alloc;
    if (alloc_arg == "auto") {
        SuperAllocation sa = allocate_super(config, SuperMode::Heuristic);
        plan = std::move(sa.plan);
        alloc = std::move(sa.alloc);
    } else {
        std::ifstream in(alloc_arg);
        if (!in) throw UsageError("cannot open allocation file '" + alloc_arg + "'");
        AllocationReport loaded = allocation_from_json(nlohmann::json::parse(in));
        if (!(loaded.config == config))
            throw UsageError("allocation file was produced for " + loaded.config.to_string());
        plan = std::move(loaded.plan);
        alloc = std::move(loaded.alloc);
    }

    const ChannelMatrix channel = draw_channel(config, seed);
    SolverOptions opts{tol, max_iter, seed};
    const PrecodeResult result = distributed_precode(config, alloc, &plan, channel, opts);

    if (as_json) {
        out << precode_to_json(config, result, opts, seed).dump(2) << '\n';
    } else {
        out << config.to_string() << ": " << (result.converged ? "converged" : "NOT converged")
            << ", residual leakage " << std::scientific << std::setprecision(3)
            << result.residual_leakage << '\n';
        for (const SolveLog& log : result.solves)
            out << "  solve " << format_subic(log.sub_ic) << ": " << log.trace.iterations_used
                << " iterations, leakage " << log.trace.final_leakage() << '\n';
    }
    return kExitOk;
}

template <typename Spec, typename Runner>
int cmd_simulate(const std::string& spec_path, const std::string& out_path, int workers, bool as_json,
                 Runner runner, Spec (*parser)(std::istream&), std::ostream& out) {
    std::ifstream in(spec_path);
    if (!in) throw UsageError("cannot open spec file '" + spec_path + "'");
    const Spec spec = parser(in);
    const ResultTable table = runner(spec, workers);

    if (!out_path.empty()) {
        std::ofstream csv(out_path);
        if (!csv) throw UsageError("cannot write '" + out_path + "'");
        table.write_csv(csv);
        std::ofstream js(out_path + ".json");
        js << table.to_json().dump(2) << '\n';
        out << "wrote " << table.rows.size() << " rows to " << out_path << " and " << out_path
            << ".json\n";
        if (!table.failures.empty())
            out << table.failures.size() << " non-converged trials recorded\n";
    } else if (as_json) {
        out << table.to_json().dump(2) << '\n';
    } else {
        table.write_csv(out);
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interference-alignment feasibility, incomplete-CSIT allocation and link simulation"};
    app.set_version_flag("--version", std::string("ia ") + std::string(kVersion) + " (rng " +
                                          std::string(rng::kStreamId) + ")");
    app.require_subcommand(0, 1);

    std::string config_arg, mode = "heuristic", alloc_arg = "auto", spec_path, out_path;
    bool as_json = false, brute = false;
    std::uint64_t seed = 1;
    double tol = 1e-10;
    int max_iter = 5000;
    int workers = 0;

    CLI::App* feas = app.add_subcommand("feasibility", "Decide IA feasibility of a configuration");
    feas->add_option("config", config_arg, "antenna configuration, e.g. [(2,2)^3], or a file")->required();
    feas->add_flag("--brute-force", brute, "use the exhaustive subset oracle");
    feas->add_flag("--json", as_json, "machine-readable report");

    CLI::App* alloc = app.add_subcommand("allocate", "Compute a minimal-size incomplete CSIT allocation");
    alloc->add_option("config", config_arg)->required();
    alloc->add_option("--mode", mode, "heuristic|exhaustive antenna removal for super-feasible inputs")
        ->check(CLI::IsMember({"heuristic", "exhaustive"}));
    alloc->add_flag("--json", as_json);

    CLI::App* precode = app.add_subcommand("precode", "Run distributed IA precoding on a random channel");
    precode->add_option("config", config_arg)->required();
    precode->add_option("--alloc", alloc_arg, "'auto' or a JSON file from `allocate --json`");
    precode->add_option("--seed", seed, "channel and initialization seed")->required();
    precode->add_option("--tol", tol, "leakage tolerance");
    precode->add_option("--max-iter", max_iter, "iteration cap per solve");
    precode->add_flag("--json", as_json);

    CLI::App* sim_rate = app.add_subcommand("simulate-rate", "Average rate vs SNR experiment");
    sim_rate->add_option("spec", spec_path, "experiment spec file")->required();
    sim_rate->add_option("--out", out_path, "CSV output path (JSON written alongside)");
    sim_rate->add_option("--workers", workers, "worker threads (0 = all)")->envname("IA_WORKERS");
    sim_rate->add_flag("--json", as_json);

    CLI::App* sim_fb = app.add_subcommand("simulate-feedback", "Average CSIT size vs antenna budget");
    sim_fb->add_option("spec", spec_path)->required();
    sim_fb->add_option("--out", out_path);
    sim_fb->add_option("--workers", workers)->envname("IA_WORKERS");
    sim_fb->add_flag("--json", as_json);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (feas->parsed()) return cmd_feasibility(config_arg, brute, as_json, out);
        if (alloc->parsed()) return cmd_allocate(config_arg, mode, as_json, out, err);
        if (precode->parsed())
            return cmd_precode(config_arg, alloc_arg, seed, tol, max_iter, as_json, out, err);
        if (sim_rate->parsed())
            return cmd_simulate<RateSweepSpec>(
                spec_path, out_path, workers, as_json,
                [](const RateSweepSpec& s, int w) { return rate_vs_snr(s, w); }, &parse_rate_spec, out);
        if (sim_fb->parsed())
            return cmd_simulate<FeedbackSweepSpec>(
                spec_path, out_path, workers, as_json,
                [](const FeedbackSweepSpec& s, int w) { return feedback_size_sweep(s, w); },
                &parse_feedback_spec, out);
        out << app.help();
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const GuardError& e) {
        err << "error: " << e.what() << '\n';
        return kExitGuard;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitGuard;
    }
}

}  // namespace ia
