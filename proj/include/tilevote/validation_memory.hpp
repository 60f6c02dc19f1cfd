#ifndef TILEVOTE_VALIDATION_MEMORY_HPP
#define TILEVOTE_VALIDATION_MEMORY_HPP

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tilevote/errors.hpp"

namespace tilevote {

using TileId = std::uint32_t;
using GroupId = std::uint32_t;

// Tile status flags. BROKEN and ACTIVE are mutually exclusive; ADDED marks a
// freshly (re)joined tile whose dynamic thread data is untrusted until its
// first clean checkpoint.
enum TileStatusFlag : std::uint32_t {
    TILE_ACTIVE = 1u << 0,
    TILE_ADDED  = 1u << 1,
    TILE_RESET  = 1u << 2,
    TILE_BROKEN = 1u << 3,
};

// Per-thread status flags. CS_VALID means csum/len describe the current
// checkpoint round. FAILURE marks a crashed or deadline-missing thread and
// is incompatible with CS_VALID.
enum ThreadStatusFlag : std::uint32_t {
    THREAD_CS_VALID = 1u << 0,
    THREAD_FAILURE  = 1u << 1,
};

// Per-replicated-thread checkpoint record, one per slot in a tile's
// validation memory.
//
// checkpoint_interval counts global checkpoints between checks of this
// thread: interval = group period / global_checkpoint_freq (always exact,
// the global frequency is the GCD of all registered periods). next_check is
// the countdown to the next check; it is reloaded with checkpoint_interval
// whenever the thread is checked. A free slot has checkpoint_interval == 0.
struct ThreadInfo {
    std::uint32_t checkpoint_interval = 0;
    std::uint32_t next_check = 0;
    std::uint32_t status = 0;
    std::uint32_t csum = 0;
    std::uint32_t len = 0;            // byte length of the checksummed data
    std::vector<std::uint8_t> state;  // capacity = state buffer size

    bool cs_valid() const { return (status & THREAD_CS_VALID) != 0; }
    bool failed() const { return (status & THREAD_FAILURE) != 0; }
    bool registered() const { return checkpoint_interval != 0; }
};

// One tile's validation memory. Writable by the owning tile only; every
// other tile gets read-only snapshots through the shared interconnect.
struct ValidationMemory {
    std::uint32_t status = 0;
    std::uint32_t member_of_thread_group = 0; // bit g set <=> runs group g
    std::uint32_t disagree = 0;               // bit j set <=> disagreed with tile j
    std::vector<ThreadInfo> threads;
    std::uint32_t global_checkpoint_freq = 0; // GCD of registered periods, 0 = none

    // Trailing dynamic region: opaque scratch, not used by the protocol.
    std::unordered_map<std::string, std::string> dynamic;

    bool is(std::uint32_t flag) const { return (status & flag) != 0; }
};

// A replicated application thread: the same slot on every member tile runs
// one replica, cross-checked every `period` base-time units. Replication is
// the member count: 3 identifies a faulty minority, 2 detects only, 1 runs
// unvalidated (non-critical work under mixed criticality).
struct ThreadGroup {
    GroupId group_id = 0;
    std::vector<TileId> members;
    std::uint32_t period = 1;
    std::uint32_t slot = 0;

    std::size_t replication() const { return members.size(); }
};

constexpr std::uint32_t kMaxTiles = 32;
constexpr std::uint32_t kMaxGroups = 32;

struct BankConfig {
    std::uint32_t tile_count = 3;
    std::uint32_t num_threads = 16;          // thread slots per tile
    std::uint32_t state_buffer_size = 4096;  // bytes per slot state buffer
};

// Actor identity for the mutation audit. Tiles are their own ids; the
// supervisor (lifecycle transitions) and the fault injector (modeled
// physical upsets) get reserved ids so that every mutation of tile i's
// memory is attributable and no tile ever writes a sibling's memory.
constexpr TileId kSupervisorActor = 0xFFFFFFFEu;
constexpr TileId kInjectorActor = 0xFFFFFFFDu;

// Holds every tile's validation memory and enforces the single-writer
// discipline: mutable access is granted only to the owning tile (or the
// supervisor / injector channels), and each grant is counted so a test can
// audit a whole simulation for cross-tile writes.
class ValidationMemoryBank {
public:
    explicit ValidationMemoryBank(const BankConfig& config = {});

    std::uint32_t tile_count() const { return static_cast<std::uint32_t>(memories_.size()); }
    std::uint32_t num_threads() const { return config_.num_threads; }
    std::uint32_t state_buffer_size() const { return config_.state_buffer_size; }

    // Read-only view of any tile's memory.
    const ValidationMemory& read(TileId tile) const;

    // Mutable access; throws NotOwner unless actor is the owning tile, the
    // supervisor, or the injector. Every grant is recorded in the audit.
    ValidationMemory& writable(TileId actor, TileId tile);

    // (actor, target) write-grant counts; actor kMaxTiles rows are folded
    // into supervisor/injector entries.
    struct Audit {
        std::uint64_t tile_writes[kMaxTiles][kMaxTiles] = {};
        std::uint64_t supervisor_writes = 0;
        std::uint64_t injector_writes = 0;
        std::uint64_t rejected = 0;

        std::uint64_t cross_tile_writes() const;
    };
    const Audit& audit() const { return audit_; }

private:
    BankConfig config_;
    std::vector<ValidationMemory> memories_;
    Audit audit_;
};

// Greatest common divisor of two positive integers; the reduction step for
// the global checkpoint frequency.
std::uint32_t gcd(std::uint32_t a, std::uint32_t b);

// Registers `group` on each of its member tiles: sets the membership bit,
// folds the group period into global_checkpoint_freq via gcd(), recomputes
// every registered slot's checkpoint_interval against the new global
// frequency, and clamps next_check to the (possibly shrunk) interval. The
// new slot starts with next_check = checkpoint_interval.
void register_thread_group(ValidationMemoryBank& bank, const ThreadGroup& group);

// Publishes a checkpoint into the caller's own slot: copies the state bytes,
// records the length, computes the CRC-32, sets CS_VALID and clears FAILURE.
// `actor` must equal `tile`; anything else is a NotOwner violation.
ThreadInfo& publish_checkpoint(ValidationMemoryBank& bank, TileId actor, TileId tile,
                               std::uint32_t slot, std::span<const std::uint8_t> state);

// Copies another tile's slot record out of its validation memory. Callers in
// the concurrent runtime may only do this inside a checkpoint barrier.
ThreadInfo read_sibling(const ValidationMemoryBank& bank, TileId tile, std::uint32_t slot);

} // namespace tilevote

#endif
