#ifndef TILEVOTE_FAULT_INJECTION_HPP
#define TILEVOTE_FAULT_INJECTION_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tilevote/log.hpp"
#include "tilevote/validation_memory.hpp"

namespace tilevote {

class Simulator;

// One fault to inject, covering the conditions the validation protocol must
// catch: wrong checksum (StateBitFlip, ChecksumCorrupt), missing checksum
// (Hang), flagged failure (Crash), and the BROKEN lifecycle (PermanentDeath).
struct FaultSpec {
    FaultKind kind = FaultKind::StateBitFlip;
    TileId target_tile = 0;
    std::uint32_t target_slot = 0;
    std::uint64_t trigger_tick = 1; // ticks start at 1
    std::uint64_t payload = 0;      // bit index for StateBitFlip
    std::uint64_t seed = 0;         // spreads the flip over large live states

    bool operator==(const FaultSpec&) const = default;
};

struct FaultSchedule {
    std::vector<FaultSpec> faults; // sorted by trigger_tick
    std::uint64_t seed = 0;

    // Throws ConfigInvalid on unsorted ticks, trigger_tick < 1, or a flip
    // payload outside the state buffer's bit range.
    void validate(std::uint32_t state_buffer_size) const;
};

// Applies one fault to the running simulation and appends the injection
// record to its checkpoint log. Pre-publish kinds corrupt state the next
// execution will carry; ChecksumCorrupt flips the already-published csum.
// Throws TargetInactive when the target tile is broken, dead, or inactive.
LogRecord apply_fault(Simulator& sim, const FaultSpec& spec);

// Builds a reproducible schedule of transient faults (StateBitFlip,
// ChecksumCorrupt, Hang, Crash) over `horizon` ticks with expected count
// rate * horizon. Two faults never land in the same group within one
// checkpoint interval, so single-fault masking stays testable; checksum
// corruptions are aligned to their slot's checkpoint ticks (corrupting an
// unpublished checksum would be a no-op).
FaultSchedule random_schedule(std::uint64_t seed, std::uint64_t horizon, double rate,
                              std::span<const ThreadGroup> groups,
                              std::uint32_t state_buffer_size = 4096);

// Fault schedule file: one `fault = ...` line per record, mirroring the
// FaultSpec fields. See README for the schema.
FaultSchedule parse_fault_schedule(std::istream& in);
void write_fault_schedule(std::ostream& out, const FaultSchedule& schedule);

} // namespace tilevote

#endif
