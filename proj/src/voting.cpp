#include "tilevote/voting.hpp"

#include <algorithm>
#include <map>

namespace tilevote {

namespace {

// A member takes part in the vote when its tile is alive in the group:
// ACTIVE and not BROKEN. ADDED members participate by publishing but are
// not counted toward a majority.
bool participating(const MemberSnapshot& s) {
    return s.tile_is(TILE_ACTIVE) && !s.tile_is(TILE_BROKEN);
}

bool counted(const MemberSnapshot& s) {
    return participating(s) && !s.tile_is(TILE_ADDED);
}

bool has_valid_checksum(const MemberSnapshot& s) {
    return s.info.cs_valid() && !s.info.failed();
}

} // namespace

const char* verdict_kind_name(Verdict::Kind kind) {
    switch (kind) {
    case Verdict::Kind::Agreement: return "agreement";
    case Verdict::Kind::MinorityFault: return "minority_fault";
    case Verdict::Kind::NoMajority: return "no_majority";
    }
    return "?";
}

std::vector<MemberSnapshot> snapshot_members(const ValidationMemoryBank& bank,
                                             const ThreadGroup& group) {
    std::vector<MemberSnapshot> out;
    out.reserve(group.members.size());
    for (TileId t : group.members) {
        const ValidationMemory& vm = bank.read(t);
        if (group.slot >= vm.threads.size())
            throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(group.slot));
        out.push_back({t, vm.status, vm.threads[group.slot]});
    }
    return out;
}

bool DisagreeMatrix::zero() const {
    return std::all_of(rows.begin(), rows.end(), [](std::uint32_t r) { return r == 0; });
}

std::string DisagreeMatrix::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) s += ' ';
        for (std::size_t j = 0; j < rows.size(); ++j)
            s += ((rows[i] >> j) & 1u) ? '1' : '0';
    }
    return s;
}

std::uint32_t compare_and_mark(ValidationMemoryBank& bank, TileId owner, const ThreadGroup& group,
                               std::span<const MemberSnapshot> snapshots) {
    const MemberSnapshot* own = nullptr;
    for (const auto& s : snapshots) {
        if (std::find(group.members.begin(), group.members.end(), s.tile) == group.members.end())
            throw Error(ErrorCode::ConfigInvalid,
                        "snapshot of tile " + std::to_string(s.tile) + " is not a group member");
        if (s.tile == owner) own = &s;
    }
    if (own == nullptr || !own->info.cs_valid())
        throw Error(ErrorCode::OwnChecksumMissing,
                    "tile " + std::to_string(owner) + " has no valid checksum to compare");

    ValidationMemory& vm = bank.writable(owner, owner);
    for (const auto& s : snapshots) {
        if (s.tile == owner)
            continue; // never self-disagree
        const std::uint32_t bit = 1u << s.tile;
        bool disagree;
        if (!participating(s)) {
            disagree = false; // out of the running, not in disagreement
        } else if (!has_valid_checksum(s)) {
            disagree = true; // missed the deadline or crashed
        } else {
            disagree = s.info.csum != own->info.csum || s.info.len != own->info.len;
        }
        if (disagree)
            vm.disagree |= bit;
        else
            vm.disagree &= ~bit;
    }
    return vm.disagree;
}

std::uint32_t result_bus_select(const ValidationMemoryBank& bank, TileId sel) {
    return bank.read(sel).disagree;
}

Verdict vote(const ThreadGroup& group, std::span<const MemberSnapshot> snapshots) {
    if (group.replication() < 2)
        throw Error(ErrorCode::ReplicationOne,
                    "group " + std::to_string(group.group_id) + " is unreplicated");

    std::vector<const MemberSnapshot*> voters;
    for (const auto& s : snapshots)
        if (counted(s))
            voters.push_back(&s);

    // Partition by (csum, len). Invalid members stay in singleton classes.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<TileId>> classes;
    std::size_t invalid = 0;
    for (const auto* s : voters) {
        if (has_valid_checksum(*s))
            classes[{s->info.csum, s->info.len}].push_back(s->tile);
        else
            ++invalid;
    }

    const std::size_t n = voters.size();
    const auto majority_it =
        std::find_if(classes.begin(), classes.end(),
                     [n](const auto& kv) { return kv.second.size() * 2 > n; });
    if (majority_it == classes.end()) {
        Verdict v;
        v.kind = Verdict::Kind::NoMajority;
        return v;
    }

    Verdict v;
    v.majority_csum = majority_it->first.first;
    v.majority_len = majority_it->first.second;
    if (majority_it->second.size() == n && invalid == 0) {
        v.kind = Verdict::Kind::Agreement;
        return v;
    }
    v.kind = Verdict::Kind::MinorityFault;
    for (const auto* s : voters) {
        bool in_majority = has_valid_checksum(*s) && s->info.csum == v.majority_csum &&
                           s->info.len == v.majority_len;
        if (!in_majority)
            v.faulty.push_back(s->tile);
    }
    std::sort(v.faulty.begin(), v.faulty.end());
    return v;
}

std::vector<TileId> mark_deadline_failures(ValidationMemoryBank& bank, const ThreadGroup& group,
                                           bool deadline_reached) {
    std::vector<TileId> marked;
    if (!deadline_reached)
        return marked;
    for (TileId t : group.members) {
        const ValidationMemory& vm = bank.read(t);
        const ThreadInfo& info = vm.threads[group.slot];
        if (info.cs_valid() || info.failed())
            continue;
        // The member's own runtime notices the miss and flags its slot.
        ValidationMemory& own = bank.writable(t, t);
        own.threads[group.slot].status |= THREAD_FAILURE;
        marked.push_back(t);
    }
    return marked;
}

} // namespace tilevote
