#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "tilevote/bench.hpp"
#include "tilevote/scenario.hpp"
#include "tilevote/simulator.hpp"

namespace {

using namespace tilevote;

struct CliParsed {
    int code;
};

bool env_seed(std::uint64_t& seed) {
    const char* raw = std::getenv("TILEVOTE_SEED");
    if (raw == nullptr)
        return false;
    try {
        seed = std::stoull(raw);
        return true;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid,
                    std::string("TILEVOTE_SEED is not a number: '") + raw + "'");
    }
}

FaultSchedule load_faults(const std::string& path, std::uint32_t state_buffer_size) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ConfigInvalid, "cannot open fault schedule '" + path + "'");
    FaultSchedule schedule = parse_fault_schedule(in);
    schedule.validate(state_buffer_size);
    return schedule;
}

std::string resolve_relative(const std::string& base_file, const std::string& ref) {
    const std::filesystem::path p(ref);
    if (p.is_absolute())
        return ref;
    return (std::filesystem::path(base_file).parent_path() / p).string();
}

std::unique_ptr<Simulator> build_and_run(Scenario& sc, const std::string& scenario_path,
                                          const std::string& fault_override,
                                          bool seed_overridden, std::uint64_t seed) {
    if (seed_overridden)
        sc.sim.seed = seed;
    auto sim = std::make_unique<Simulator>(sc.sim, scenario_factory(sc));
    std::string fault_path = fault_override;
    if (fault_path.empty() && !sc.fault_file.empty())
        fault_path = resolve_relative(scenario_path, sc.fault_file);
    if (!fault_path.empty())
        sim->set_fault_schedule(load_faults(fault_path, sc.sim.state_buffer_size));
    sim->run(scenario_ticks(sc));
    return sim;
}

void print_inject_stats(std::ostream& os, const Simulator& sim) {
    std::map<std::string, std::uint64_t> injected, verdicts, actions;
    std::uint64_t checkpoints = 0, voted = 0, non_agreement = 0;
    for (const LogRecord& r : sim.log().records()) {
        switch (r.type) {
        case LogRecord::Type::Injection:
            ++injected[fault_kind_name(r.fault_kind)];
            break;
        case LogRecord::Type::Checkpoint:
            ++checkpoints;
            if (r.verdict) {
                ++voted;
                ++verdicts[verdict_kind_name(r.verdict->kind)];
                if (r.verdict->kind != Verdict::Kind::Agreement)
                    ++non_agreement;
            }
            for (const RecoveryAction& a : r.actions)
                ++actions[recovery_action_name(a.kind)];
            break;
        case LogRecord::Type::Lifecycle:
            for (const RecoveryAction& a : r.actions)
                ++actions[recovery_action_name(a.kind)];
            break;
        }
    }
    std::uint64_t total_injected = 0;
    for (const auto& [k, v] : injected)
        total_injected += v;

    os << "injected faults:        " << total_injected;
    if (total_injected) {
        os << " (";
        bool first = true;
        for (const auto& [k, v] : injected) {
            os << (first ? "" : ", ") << k << " " << v;
            first = false;
        }
        os << ")";
    }
    os << "\n";
    os << "checkpoints logged:     " << checkpoints << " (" << voted << " voted)\n";
    os << "non-agreement verdicts: " << non_agreement;
    if (voted) {
        os << " (";
        bool first = true;
        for (const auto& [k, v] : verdicts) {
            os << (first ? "" : ", ") << k << " " << v;
            first = false;
        }
        os << ")";
    }
    os << "\n";
    os << "recovery actions:       ";
    if (actions.empty()) {
        os << "none";
    } else {
        bool first = true;
        for (const auto& [k, v] : actions) {
            os << (first ? "" : ", ") << k << " " << v;
            first = false;
        }
    }
    os << "\n";
    const auto view = sim.supervisor_poll();
    os << "final disagree matrix:  " << (view.matrix.zero() ? "zero" : view.matrix.to_string())
       << "\n";
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(tok);
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"tilevote: replicated-tile self-validation simulator and benchmark"};
    app.require_subcommand(1);

    std::string scenario_path, fault_path, out_path;

    auto* simulate = app.add_subcommand("simulate", "run a scenario and print its checkpoint log");
    simulate->add_option("scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--out", out_path, "write the log to this file instead of stdout");

    auto* inject =
        app.add_subcommand("inject", "run a scenario with a fault schedule and report "
                                     "detection and recovery statistics");
    inject->add_option("scenario", scenario_path, "scenario file")->required();
    inject->add_option("faults", fault_path, "fault schedule file")->required();
    bool inject_log = false;
    inject->add_flag("--log", inject_log, "also print the checkpoint log");

    auto* bench_cmd = app.add_subcommand("bench", "timed protected vs unprotected sweep");
    std::string modes_csv, periods_csv = "1,5,15", scale = "desk", runtime = "concurrent";
    std::string bench_out = "results.csv";
    std::uint32_t reps = 10;
    std::uint64_t seed = 1;
    bool parallel_kernels = false;
    bench_cmd->add_option("--modes", modes_csv,
                          "comma-separated workload modes (default: all six)");
    bench_cmd->add_option("--periods", periods_csv, "comma-separated checking periods");
    bench_cmd->add_option("--reps", reps, "measurements per cell");
    bench_cmd->add_option("--scale", scale, "desk (60 frames 256x256) or paper (600 frames 1024x1024)")
        ->check(CLI::IsMember({"desk", "paper"}));
    bench_cmd->add_option("--runtime", runtime, "concurrent or deterministic tile runtime")
        ->check(CLI::IsMember({"concurrent", "deterministic"}));
    auto* seed_opt = bench_cmd->add_option("--seed", seed, "experiment seed");
    bench_cmd->add_option("--out", bench_out, "CSV output file, or - for stdout");
    bench_cmd->add_flag("--parallel-kernels", parallel_kernels,
                        "use the OpenMP pixel kernels inside each replica");

    auto* report = app.add_subcommand("report", "summary statistics for a bench CSV");
    std::string csv_path;
    report->add_option("csv", csv_path, "CSV file produced by bench")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        // config/usage problems exit 1; --help and --version exit 0
        throw CliParsed{code == 0 ? 0 : 1};
    }

    std::uint64_t env = 0;
    const bool have_env_seed = env_seed(env);

    if (simulate->parsed()) {
        Scenario sc = load_scenario(scenario_path);
        const auto sim = build_and_run(sc, scenario_path, "", have_env_seed, env);
        if (out_path.empty()) {
            sim->log().write(std::cout);
        } else {
            std::ofstream out(out_path);
            if (!out)
                throw Error(ErrorCode::ConfigInvalid, "cannot write '" + out_path + "'");
            sim->log().write(out);
        }
        return 0;
    }

    if (inject->parsed()) {
        Scenario sc = load_scenario(scenario_path);
        const auto sim = build_and_run(sc, scenario_path, fault_path, have_env_seed, env);
        if (inject_log) {
            sim->log().write(std::cout);
            std::cout << "\n";
        }
        print_inject_stats(std::cout, *sim);
        return 0;
    }

    if (bench_cmd->parsed()) {
        bench::ExperimentConfig cfg;
        if (modes_csv.empty())
            for (const auto& m : workload::standard_modes())
                cfg.modes.push_back(m.name);
        else
            cfg.modes = split_list(modes_csv);
        for (const std::string& p : split_list(periods_csv)) {
            try {
                cfg.periods.push_back(static_cast<std::uint32_t>(std::stoul(p)));
            } catch (const std::exception&) {
                throw Error(ErrorCode::ConfigInvalid, "bad period '" + p + "'");
            }
        }
        cfg.reps = reps;
        cfg.scale = scale == "desk" ? bench::ExperimentConfig::Scale::Desk
                                    : bench::ExperimentConfig::Scale::Paper;
        cfg.runtime = runtime == "concurrent" ? RunMode::Concurrent : RunMode::Deterministic;
        cfg.seed = seed_opt->count() ? seed : (have_env_seed ? env : seed);
        cfg.parallel_kernels = parallel_kernels;

        const bench::ExperimentResult result = bench::run_experiment(cfg);
        if (!bench::outputs_equivalent(result))
            throw Error(ErrorCode::InternalInvariant,
                        "protected and unprotected outputs differ");

        if (bench_out == "-") {
            bench::write_csv(std::cout, result.records);
        } else {
            std::ofstream out(bench_out);
            if (!out)
                throw Error(ErrorCode::ConfigInvalid, "cannot write '" + bench_out + "'");
            bench::write_csv(out, result.records);
            bench::print_summary(std::cout, bench::summarize(result.records));
        }
        return 0;
    }

    if (report->parsed()) {
        std::ifstream in(csv_path);
        if (!in)
            throw Error(ErrorCode::ConfigInvalid, "cannot open '" + csv_path + "'");
        const auto records = bench::parse_csv(in);
        bench::print_summary(std::cout, bench::summarize(records));
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CliParsed& p) {
        return p.code;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        const bool config_error = e.code() == ErrorCode::ConfigInvalid ||
                                  e.code() == ErrorCode::MissingReferenceArm;
        return config_error ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
