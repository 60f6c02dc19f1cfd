#ifndef TILEVOTE_VOTING_HPP
#define TILEVOTE_VOTING_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tilevote/validation_memory.hpp"

namespace tilevote {

// Outcome of one group checkpoint vote.
//   Agreement     - every counted member published the same (csum, len)
//   MinorityFault - a strict majority agrees; `faulty` names the rest
//   NoMajority    - no class holds a strict majority (detection only)
struct Verdict {
    enum class Kind { Agreement, MinorityFault, NoMajority };

    Kind kind = Kind::Agreement;
    std::vector<TileId> faulty;     // MinorityFault only; sorted
    std::uint32_t majority_csum = 0;
    std::uint32_t majority_len = 0;

    bool operator==(const Verdict&) const = default;
};

const char* verdict_kind_name(Verdict::Kind kind);

// One member's view at a checkpoint barrier: tile status plus the slot
// record, both copied out of validation memory.
struct MemberSnapshot {
    TileId tile = 0;
    std::uint32_t tile_status = 0;
    ThreadInfo info;

    bool tile_is(std::uint32_t flag) const { return (tile_status & flag) != 0; }
};

// Snapshot every member of `group` from the bank (read-only).
std::vector<MemberSnapshot> snapshot_members(const ValidationMemoryBank& bank,
                                             const ThreadGroup& group);

// The full n x n disagreement view a supervisor assembles from the result
// bus: row i is tile i's disagree mask. The diagonal is always clear, and
// among healthy tiles the relation is symmetric.
struct DisagreeMatrix {
    std::vector<std::uint32_t> rows;

    bool bit(TileId i, TileId j) const { return (rows[i] >> j) & 1u; }
    bool zero() const;
    std::string to_string() const; // rows as bit strings, LSB = tile 0

    bool operator==(const DisagreeMatrix&) const = default;
};

// Recomputes the owner's disagree bits for `group` from the sibling
// snapshots taken at the current barrier: a sibling disagrees if its
// (csum, len) differs from the owner's, if it carries FAILURE, or if it has
// no valid checksum at the deadline. Bits for tiles outside the group are
// left untouched; members sitting out the vote (BROKEN or inactive) are
// cleared. Throws OwnChecksumMissing when the owner itself has nothing to
// compare.
std::uint32_t compare_and_mark(ValidationMemoryBank& bank, TileId owner, const ThreadGroup& group,
                               std::span<const MemberSnapshot> snapshots);

// What a supervisor reading the result-bus multiplexer sees for `sel`:
// that tile's current disagree mask.
std::uint32_t result_bus_select(const ValidationMemoryBank& bank, TileId sel);

// Majority vote over one group's snapshots. Members are partitioned by
// (csum, len); FAILURE or missing-checksum members form singleton classes
// that can never join a majority; ADDED and BROKEN/inactive members are not
// counted (a rejoiner reads along but does not vote until its first clean
// checkpoint). Requires replication >= 2.
Verdict vote(const ThreadGroup& group, std::span<const MemberSnapshot> snapshots);

// Barrier-timeout bookkeeping: every member that failed to publish a valid
// checksum by the deadline gets FAILURE set in its own slot. Idempotent.
// Returns the tiles marked this call.
std::vector<TileId> mark_deadline_failures(ValidationMemoryBank& bank, const ThreadGroup& group,
                                           bool deadline_reached);

} // namespace tilevote

#endif
