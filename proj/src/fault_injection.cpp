#include "tilevote/fault_injection.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "tilevote/apps.hpp"
#include "tilevote/simulator.hpp"

namespace tilevote {

void FaultSchedule::validate(std::uint32_t state_buffer_size) const {
    std::uint64_t prev = 1;
    for (const FaultSpec& f : faults) {
        if (f.trigger_tick < 1)
            throw Error(ErrorCode::ConfigInvalid, "fault trigger_tick must be >= 1");
        if (f.trigger_tick < prev)
            throw Error(ErrorCode::ConfigInvalid, "fault schedule not sorted by trigger_tick");
        if (f.kind == FaultKind::StateBitFlip &&
            f.payload >= 8ull * state_buffer_size)
            throw Error(ErrorCode::ConfigInvalid, "flip bit index exceeds state buffer");
        prev = f.trigger_tick;
    }
}

LogRecord apply_fault(Simulator& sim, const FaultSpec& spec) {
    const ValidationMemory& vm = sim.bank().read(spec.target_tile);
    if (!vm.is(TILE_ACTIVE) || vm.is(TILE_BROKEN) || sim.tile_dead(spec.target_tile))
        throw Error(ErrorCode::TargetInactive,
                    "tile " + std::to_string(spec.target_tile) + " cannot take a fault");

    switch (spec.kind) {
    case FaultKind::StateBitFlip:
        sim.inject_state_bit_flip(spec.target_tile, spec.target_slot, spec.payload, spec.seed);
        break;
    case FaultKind::ChecksumCorrupt:
        sim.inject_checksum_corrupt(spec.target_tile, spec.target_slot);
        break;
    case FaultKind::Hang:
        sim.inject_hang(spec.target_tile, spec.target_slot);
        break;
    case FaultKind::Crash:
        sim.inject_crash(spec.target_tile, spec.target_slot);
        break;
    case FaultKind::PermanentDeath:
        sim.inject_permanent_death(spec.target_tile);
        break;
    }
    sim.record_injection(spec);
    return sim.log().records().back();
}

FaultSchedule random_schedule(std::uint64_t seed, std::uint64_t horizon, double rate,
                              std::span<const ThreadGroup> groups,
                              std::uint32_t state_buffer_size) {
    if (rate < 0.0 || rate > 1.0)
        throw Error(ErrorCode::ConfigInvalid, "rate must be in [0, 1]");
    FaultSchedule schedule;
    schedule.seed = seed;
    if (groups.empty() || rate == 0.0 || horizon == 0)
        return schedule;

    std::uint32_t system_freq = 0;
    for (const ThreadGroup& g : groups)
        system_freq = system_freq == 0 ? g.period : gcd(system_freq, g.period);

    constexpr FaultKind kTransient[] = {FaultKind::StateBitFlip, FaultKind::ChecksumCorrupt,
                                        FaultKind::Hang, FaultKind::Crash};

    // Bernoulli draw per tick, then an exclusion window of one checkpoint
    // interval per group so that no group sees two faults between
    // consecutive checks.
    std::map<GroupId, std::uint64_t> group_blocked_until;
    std::uint64_t stream = mix64(seed ^ 0x66A0E5D1C2B39784ull);
    auto draw = [&stream](std::uint64_t bound) {
        stream = mix64(stream);
        return stream % bound;
    };
    const std::uint64_t threshold =
        static_cast<std::uint64_t>(rate * 18446744073709551615.0);

    for (std::uint64_t tick = 1; tick <= horizon; ++tick) {
        stream = mix64(stream);
        if (stream > threshold)
            continue;
        const ThreadGroup& g = groups[draw(groups.size())];
        const std::uint32_t interval = g.period / system_freq;
        FaultSpec f;
        f.kind = kTransient[draw(4)];
        f.target_tile = g.members[draw(g.members.size())];
        f.target_slot = g.slot;
        f.trigger_tick = tick;
        if (f.kind == FaultKind::ChecksumCorrupt) {
            // only a published checksum can be corrupted: align to the
            // slot's next checkpoint tick
            const std::uint64_t rem = tick % interval;
            f.trigger_tick = rem == 0 ? tick : tick + (interval - rem);
            if (f.trigger_tick > horizon)
                continue;
        }
        if (f.kind == FaultKind::StateBitFlip) {
            f.payload = draw(8ull * state_buffer_size);
            f.seed = mix64(stream ^ tick);
        }
        if (group_blocked_until[g.group_id] >= f.trigger_tick)
            continue;
        schedule.faults.push_back(f);
        group_blocked_until[g.group_id] = f.trigger_tick + interval;
    }
    std::stable_sort(schedule.faults.begin(), schedule.faults.end(),
                     [](const FaultSpec& a, const FaultSpec& b) {
                         return a.trigger_tick < b.trigger_tick;
                     });
    return schedule;
}

namespace {

FaultKind fault_kind_from_name(const std::string& name) {
    for (FaultKind k : {FaultKind::StateBitFlip, FaultKind::ChecksumCorrupt, FaultKind::Hang,
                        FaultKind::Crash, FaultKind::PermanentDeath})
        if (name == fault_kind_name(k))
            return k;
    throw Error(ErrorCode::ConfigInvalid, "unknown fault kind '" + name + "'");
}

} // namespace

FaultSchedule parse_fault_schedule(std::istream& in) {
    FaultSchedule schedule;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        auto context = [&] { return " (fault schedule line " + std::to_string(lineno) + ")"; };
        if (key == "seed") {
            std::string eq;
            if (!(ls >> eq >> schedule.seed) || eq != "=")
                throw Error(ErrorCode::ConfigInvalid, "bad seed line" + context());
            continue;
        }
        if (key != "fault")
            throw Error(ErrorCode::ConfigInvalid, "unknown key '" + key + "'" + context());
        std::string eq;
        ls >> eq;
        if (eq != "=")
            throw Error(ErrorCode::ConfigInvalid, "expected 'fault = ...'" + context());
        FaultSpec f;
        bool have_kind = false, have_tile = false, have_tick = false;
        std::string field;
        while (ls >> field) {
            const auto sep = field.find('=');
            if (sep == std::string::npos)
                throw Error(ErrorCode::ConfigInvalid, "bad field '" + field + "'" + context());
            const std::string name = field.substr(0, sep);
            const std::string value = field.substr(sep + 1);
            try {
                if (name == "kind") {
                    f.kind = fault_kind_from_name(value);
                    have_kind = true;
                } else if (name == "tile") {
                    f.target_tile = static_cast<TileId>(std::stoul(value));
                    have_tile = true;
                } else if (name == "slot") {
                    f.target_slot = static_cast<std::uint32_t>(std::stoul(value));
                } else if (name == "tick") {
                    f.trigger_tick = std::stoull(value);
                    have_tick = true;
                } else if (name == "bit") {
                    f.payload = std::stoull(value);
                } else if (name == "seed") {
                    f.seed = std::stoull(value);
                } else {
                    throw Error(ErrorCode::ConfigInvalid, "unknown field '" + name + "'");
                }
            } catch (const std::invalid_argument&) {
                throw Error(ErrorCode::ConfigInvalid,
                            "bad value in '" + field + "'" + context());
            } catch (const std::out_of_range&) {
                throw Error(ErrorCode::ConfigInvalid,
                            "value out of range in '" + field + "'" + context());
            }
        }
        if (!have_kind || !have_tile || !have_tick)
            throw Error(ErrorCode::ConfigInvalid,
                        "fault needs at least kind, tile and tick" + context());
        schedule.faults.push_back(f);
    }
    return schedule;
}

void write_fault_schedule(std::ostream& out, const FaultSchedule& schedule) {
    out << "seed = " << schedule.seed << "\n";
    for (const FaultSpec& f : schedule.faults) {
        out << "fault = tick=" << f.trigger_tick << " kind=" << fault_kind_name(f.kind)
            << " tile=" << f.target_tile << " slot=" << f.target_slot;
        if (f.kind == FaultKind::StateBitFlip)
            out << " bit=" << f.payload << " seed=" << f.seed;
        out << "\n";
    }
}

} // namespace tilevote
