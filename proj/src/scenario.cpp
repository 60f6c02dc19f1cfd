#include "tilevote/scenario.hpp"

#include <fstream>
#include <sstream>

namespace tilevote {

namespace {

std::uint64_t parse_u64(const std::string& value, const std::string& what) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size())
            throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "bad value '" + value + "' for " + what);
    }
}

ThreadGroup parse_group_line(std::istringstream& ls, std::size_t lineno) {
    ThreadGroup g;
    bool have_id = false, have_members = false, have_period = false;
    std::string field;
    auto context = [&] { return " (scenario line " + std::to_string(lineno) + ")"; };
    while (ls >> field) {
        const auto sep = field.find('=');
        if (sep == std::string::npos)
            throw Error(ErrorCode::ConfigInvalid, "bad group field '" + field + "'" + context());
        const std::string name = field.substr(0, sep);
        const std::string value = field.substr(sep + 1);
        if (name == "id") {
            g.group_id = static_cast<GroupId>(parse_u64(value, "group id"));
            have_id = true;
        } else if (name == "members") {
            std::istringstream ms(value);
            std::string tok;
            while (std::getline(ms, tok, ','))
                g.members.push_back(static_cast<TileId>(parse_u64(tok, "group member")));
            have_members = true;
        } else if (name == "period") {
            g.period = static_cast<std::uint32_t>(parse_u64(value, "group period"));
            have_period = true;
        } else if (name == "slot") {
            g.slot = static_cast<std::uint32_t>(parse_u64(value, "group slot"));
        } else if (name == "replication") {
            // redundant with the member list; verified, not stored
            if (parse_u64(value, "replication") != 0 &&
                have_members && parse_u64(value, "replication") != g.members.size())
                throw Error(ErrorCode::ConfigInvalid,
                            "replication does not match member count" + context());
        } else {
            throw Error(ErrorCode::ConfigInvalid,
                        "unknown group field '" + name + "'" + context());
        }
    }
    if (!have_id || !have_members || !have_period)
        throw Error(ErrorCode::ConfigInvalid,
                    "group needs id, members and period" + context());
    return g;
}

} // namespace

Scenario parse_scenario(std::istream& in) {
    Scenario sc;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key, eq;
        if (!(ls >> key))
            continue;
        if (!(ls >> eq) || eq != "=")
            throw Error(ErrorCode::ConfigInvalid,
                        "expected 'key = value' at scenario line " + std::to_string(lineno));
        if (key == "group") {
            sc.sim.groups.push_back(parse_group_line(ls, lineno));
            continue;
        }
        std::string value;
        if (!(ls >> value))
            throw Error(ErrorCode::ConfigInvalid,
                        "missing value at scenario line " + std::to_string(lineno));
        if (key == "tile_count") {
            sc.sim.tile_count = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "mode") {
            if (value == "deterministic")
                sc.sim.mode = RunMode::Deterministic;
            else if (value == "concurrent")
                sc.sim.mode = RunMode::Concurrent;
            else
                throw Error(ErrorCode::ConfigInvalid, "unknown mode '" + value + "'");
        } else if (key == "seed") {
            sc.sim.seed = parse_u64(value, key);
        } else if (key == "barrier_deadline_ms") {
            sc.sim.barrier_deadline = std::chrono::milliseconds(parse_u64(value, key));
        } else if (key == "repair_latency") {
            sc.sim.repair_latency = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "broken_threshold") {
            sc.sim.broken_threshold = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "num_threads") {
            sc.sim.num_threads = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "state_buffer_size") {
            sc.sim.state_buffer_size = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "ticks") {
            sc.ticks = parse_u64(value, key);
        } else if (key == "workload") {
            if (value == "miri")
                sc.workload = Scenario::Workload::Miri;
            else if (value == "counter")
                sc.workload = Scenario::Workload::Counter;
            else
                throw Error(ErrorCode::ConfigInvalid, "unknown workload '" + value + "'");
        } else if (key == "frames") {
            sc.frames = parse_u64(value, key);
        } else if (key == "width") {
            sc.width = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "height") {
            sc.height = static_cast<std::uint32_t>(parse_u64(value, key));
        } else if (key == "postproc_runs") {
            sc.postproc_runs = parse_u64(value, key);
        } else if (key == "faults") {
            sc.fault_file = value;
        } else {
            throw Error(ErrorCode::ConfigInvalid, "unknown scenario key '" + key + "' at line " +
                                                      std::to_string(lineno));
        }
    }
    if (sc.sim.groups.empty())
        throw Error(ErrorCode::ConfigInvalid, "scenario defines no thread groups");
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ConfigInvalid, "cannot open scenario file '" + path + "'");
    return parse_scenario(in);
}

AppFactory scenario_factory(const Scenario& scenario) {
    if (scenario.workload == Scenario::Workload::Counter) {
        const std::uint64_t seed = scenario.sim.seed;
        return [seed](const ThreadGroup& g, TileId) {
            return std::make_unique<CounterApp>(mix64(seed ^ g.group_id));
        };
    }
    workload::MiriConfig base;
    base.dims = {scenario.width, scenario.height};
    base.total_frames = scenario.frames;
    base.postprocess_total_runs = scenario.postproc_runs;
    base.saturated_fraction = scenario.saturated_fraction;
    const std::uint64_t seed = scenario.sim.seed;
    return [base, seed](const ThreadGroup& g, TileId) {
        workload::MiriConfig cfg = base;
        cfg.seed = mix64(seed ^ g.group_id);
        return std::make_unique<workload::MiriApp>(cfg);
    };
}

std::uint64_t scenario_ticks(const Scenario& scenario) {
    if (scenario.ticks != 0)
        return scenario.ticks;
    if (scenario.workload == Scenario::Workload::Counter)
        return 30;
    std::uint32_t system_freq = 0;
    for (const ThreadGroup& g : scenario.sim.groups)
        system_freq = system_freq == 0 ? g.period : gcd(system_freq, g.period);
    if (system_freq == 0)
        system_freq = 1;
    return workload::MiriApp::ticks_to_complete(scenario.frames, system_freq);
}

} // namespace tilevote
