#include "tilevote/bench.hpp"

#include <algorithm>
#include <chrono>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "tilevote/crc32.hpp"

namespace tilevote::bench {

using workload::MiriApp;
using workload::MiriConfig;

workload::FrameDims ExperimentConfig::dims() const {
    return scale == Scale::Desk ? workload::FrameDims{256, 256}
                                : workload::FrameDims{1024, 1024};
}

std::uint64_t ExperimentConfig::frames() const { return scale == Scale::Desk ? 60 : 600; }

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point t0, Clock::time_point t1) {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
}

std::uint32_t output_fingerprint(const MiriApp& app) {
    const auto means = app.final_output();
    std::uint32_t state = crc32_init();
    for (const auto& chan : means)
        state = crc32_update(state, {reinterpret_cast<const std::uint8_t*>(chan.data()),
                                     chan.size() * sizeof(std::uint16_t)});
    const std::uint32_t digest = app.counters().postprocess_digest;
    const std::uint8_t tail[8] = {
        static_cast<std::uint8_t>(digest),
        static_cast<std::uint8_t>(digest >> 8),
        static_cast<std::uint8_t>(digest >> 16),
        static_cast<std::uint8_t>(digest >> 24),
        static_cast<std::uint8_t>(app.counters().frames_processed),
        static_cast<std::uint8_t>(app.counters().frames_processed >> 8),
        static_cast<std::uint8_t>(app.counters().frames_processed >> 16),
        static_cast<std::uint8_t>(app.counters().frames_processed >> 24),
    };
    state = crc32_update(state, tail);
    return crc32_final(state);
}

MiriConfig app_config(const ExperimentConfig& cfg, const workload::WorkloadMode& mode) {
    MiriConfig app;
    app.seed = mix64(cfg.seed ^ mix64(mode.postprocessing_runs));
    app.dims = cfg.dims();
    app.total_frames = cfg.frames();
    app.postprocess_total_runs = mode.postprocessing_runs;
    app.parallel_kernels = cfg.parallel_kernels;
    return app;
}

// Reference arm: the same replicas, no validation machinery. Concurrent
// runtime uses one worker per replica, mirroring the protected arm's tile
// workers.
std::pair<std::uint64_t, std::uint32_t> run_unprotected(const ExperimentConfig& cfg,
                                                        const MiriConfig& app_cfg) {
    std::vector<MiriApp> replicas(cfg.tile_count, MiriApp(app_cfg));
    const std::uint64_t frames = app_cfg.total_frames;

    const auto t0 = Clock::now();
    if (cfg.runtime == RunMode::Deterministic) {
        for (auto& app : replicas)
            app.run_tick(static_cast<std::uint32_t>(frames));
    } else {
        std::vector<std::thread> threads;
        threads.reserve(replicas.size());
        for (auto& app : replicas)
            threads.emplace_back(
                [&app, frames] { app.run_tick(static_cast<std::uint32_t>(frames)); });
        for (auto& th : threads)
            th.join();
    }
    const auto t1 = Clock::now();

    const std::uint32_t fp = output_fingerprint(replicas[0]);
    for (const auto& app : replicas)
        if (output_fingerprint(app) != fp)
            throw Error(ErrorCode::InternalInvariant, "unprotected replicas diverged");
    return {elapsed_ns(t0, t1), fp};
}

std::pair<std::uint64_t, std::uint32_t> run_protected(const ExperimentConfig& cfg,
                                                      const MiriConfig& app_cfg,
                                                      std::uint32_t period) {
    SimulatorConfig sim_cfg;
    sim_cfg.tile_count = cfg.tile_count;
    sim_cfg.mode = cfg.runtime;
    sim_cfg.seed = cfg.seed;
    ThreadGroup g;
    g.group_id = 0;
    g.members.resize(cfg.tile_count);
    for (TileId t = 0; t < cfg.tile_count; ++t)
        g.members[t] = t;
    g.period = period;
    g.slot = 0;
    sim_cfg.groups.push_back(g);

    Simulator sim(sim_cfg, [&app_cfg](const ThreadGroup&, TileId) {
        return std::make_unique<MiriApp>(app_cfg);
    });
    const std::uint64_t ticks = MiriApp::ticks_to_complete(app_cfg.total_frames, period);

    const auto t0 = Clock::now();
    sim.run(ticks);
    const auto t1 = Clock::now();

    // fault-free run: anything but agreements is a harness defect
    for (const auto& rec : sim.log().records())
        if (rec.verdict && rec.verdict->kind != Verdict::Kind::Agreement)
            throw Error(ErrorCode::InternalInvariant, "protected run saw a fault verdict");

    const auto& app0 = dynamic_cast<const MiriApp&>(sim.app(0, 0));
    if (!app0.complete())
        throw Error(ErrorCode::InternalInvariant, "protected run finished early");
    const std::uint32_t fp = output_fingerprint(app0);
    for (TileId t = 1; t < cfg.tile_count; ++t)
        if (output_fingerprint(dynamic_cast<const MiriApp&>(sim.app(t, 0))) != fp)
            throw Error(ErrorCode::InternalInvariant, "protected replicas diverged");
    return {elapsed_ns(t0, t1), fp};
}

} // namespace

bool outputs_equivalent(const ExperimentResult& result) {
    std::map<std::string, std::uint32_t> expected;
    for (const RunOutput& out : result.outputs) {
        auto [it, inserted] = expected.emplace(out.mode, out.fingerprint);
        if (!inserted && it->second != out.fingerprint)
            return false;
    }
    return true;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.reps < 1)
        throw Error(ErrorCode::ConfigInvalid, "reps must be >= 1");
    if (config.modes.empty())
        throw Error(ErrorCode::ConfigInvalid, "no workload modes selected");
    if (config.periods.empty())
        throw Error(ErrorCode::ConfigInvalid, "no checking periods selected");
    if (config.tile_count < 2)
        throw Error(ErrorCode::ConfigInvalid, "tile_count must be >= 2");
    for (std::uint32_t p : config.periods)
        if (p < 1)
            throw Error(ErrorCode::ConfigInvalid, "checking period must be >= 1");

    std::vector<const workload::WorkloadMode*> modes;
    for (const std::string& name : config.modes) {
        const workload::WorkloadMode* m = workload::find_mode(name);
        if (m == nullptr)
            throw Error(ErrorCode::ConfigInvalid, "unknown workload mode '" + name + "'");
        modes.push_back(m);
    }

    ExperimentResult result;
    // settle frequency scaling and caches before anything is timed
    run_unprotected(config, app_config(config, *modes.front()));

    for (const workload::WorkloadMode* mode : modes) {
        const MiriConfig app_cfg = app_config(config, *mode);

        // arms interleave per rep so ambient load drifts hit both equally
        for (std::uint32_t rep = 0; rep < config.reps; ++rep) {
            auto [ns, fp] = run_unprotected(config, app_cfg);
            result.records.push_back({mode->name, mode->postprocessing_runs, 0, false, rep, ns,
                                      app_cfg.total_frames});
            result.outputs.push_back({mode->name, 0, false, rep, fp});
            for (std::uint32_t period : config.periods) {
                auto [pns, pfp] = run_protected(config, app_cfg, period);
                result.records.push_back({mode->name, mode->postprocessing_runs, period, true,
                                          rep, pns, app_cfg.total_frames});
                result.outputs.push_back({mode->name, period, true, rep, pfp});
            }
        }
    }
    return result;
}

SummaryStats summarize(std::span<const BenchRecord> records) {
    if (records.empty())
        throw Error(ErrorCode::ConfigInvalid, "no records");

    struct Key {
        std::string mode;
        std::uint32_t period;
        bool protected_run;
        bool operator<(const Key& other) const {
            return std::tie(mode, period, protected_run) <
                   std::tie(other.mode, other.period, other.protected_run);
        }
    };
    std::map<Key, std::vector<double>> cells;
    std::map<Key, std::uint32_t> runs_of;
    for (const BenchRecord& r : records) {
        const Key key{r.mode, r.check_period, r.protected_run};
        cells[key].push_back(static_cast<double>(r.wall_ns));
        runs_of[key] = r.postproc_runs;
    }

    SummaryStats summary;
    for (auto& [key, values] : cells) {
        CellStats cs;
        cs.mode = key.mode;
        cs.postproc_runs = runs_of[key];
        cs.check_period = key.period;
        cs.protected_run = key.protected_run;
        cs.runs = values.size();
        cs.wall_ns = stats::quartiles(values);
        summary.cells.push_back(std::move(cs));
    }

    for (const CellStats& cs : summary.cells) {
        if (!cs.protected_run)
            continue;
        const auto ref = std::find_if(summary.cells.begin(), summary.cells.end(),
                                      [&](const CellStats& c) {
                                          return !c.protected_run && c.mode == cs.mode;
                                      });
        if (ref == summary.cells.end())
            throw Error(ErrorCode::MissingReferenceArm,
                        "mode '" + cs.mode + "' has no unprotected runs");
        DegradationRow row;
        row.mode = cs.mode;
        row.postproc_runs = cs.postproc_runs;
        row.check_period = cs.check_period;
        row.median_protected_ns = cs.wall_ns.median;
        row.median_unprotected_ns = ref->wall_ns.median;
        row.degradation =
            (cs.wall_ns.median - ref->wall_ns.median) / ref->wall_ns.median;
        summary.degradation.push_back(std::move(row));
    }
    return summary;
}

void write_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << kCsvHeader << "\n";
    for (const BenchRecord& r : records) {
        out << r.mode << ',' << r.postproc_runs << ',' << r.check_period << ','
            << (r.protected_run ? 1 : 0) << ',' << r.run_index << ',' << r.wall_ns << ','
            << r.frames << "\n";
    }
}

std::vector<BenchRecord> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw Error(ErrorCode::ConfigInvalid, "bad or missing CSV header");
    std::vector<BenchRecord> records;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ','))
            fields.push_back(field);
        if (fields.size() != 7)
            throw Error(ErrorCode::ConfigInvalid,
                        "CSV line " + std::to_string(lineno) + " has " +
                            std::to_string(fields.size()) + " fields, want 7");
        try {
            BenchRecord r;
            r.mode = fields[0];
            r.postproc_runs = static_cast<std::uint32_t>(std::stoul(fields[1]));
            r.check_period = static_cast<std::uint32_t>(std::stoul(fields[2]));
            r.protected_run = std::stoul(fields[3]) != 0;
            r.run_index = static_cast<std::uint32_t>(std::stoul(fields[4]));
            r.wall_ns = std::stoull(fields[5]);
            r.frames = std::stoull(fields[6]);
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigInvalid, "bad CSV line " + std::to_string(lineno));
        }
    }
    return records;
}

void print_summary(std::ostream& out, const SummaryStats& summary) {
    out << "cell statistics (wall ms)\n";
    out << "  mode                     runs  period  arm     n   min      q1      median  q3      max\n";
    char buf[256];
    for (const CellStats& c : summary.cells) {
        std::snprintf(buf, sizeof(buf),
                      "  %-24s %6u %6u  %-5s %4zu  %-8.2f %-7.2f %-7.2f %-7.2f %-7.2f\n",
                      c.mode.c_str(), c.postproc_runs, c.check_period,
                      c.protected_run ? "prot" : "ref", c.runs, c.wall_ns.min / 1e6,
                      c.wall_ns.q1 / 1e6, c.wall_ns.median / 1e6, c.wall_ns.q3 / 1e6,
                      c.wall_ns.max / 1e6);
        out << buf;
    }
    out << "\nrelative degradation (median protected vs median unprotected)\n";
    out << "  mode                     runs  period  degradation\n";
    for (const DegradationRow& d : summary.degradation) {
        std::snprintf(buf, sizeof(buf), "  %-24s %6u %6u  %+.1f%%\n", d.mode.c_str(),
                      d.postproc_runs, d.check_period, d.degradation * 100.0);
        out << buf;
    }
    out << "\nreference bands from the original measurement campaign (Sandy Bridge, -O0,\n"
           "600 1-Mpx frames): median degradation 9% best / 26% worst; mean performance\n"
           "95% best / 80% worst of the unprotected runtime. Hardware-dependent, shown\n"
           "for orientation only.\n";
}

} // namespace tilevote::bench
