#ifndef TILEVOTE_LOG_HPP
#define TILEVOTE_LOG_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tilevote/voting.hpp"

namespace tilevote {

enum class FaultKind {
    StateBitFlip,
    ChecksumCorrupt,
    Hang,
    Crash,
    PermanentDeath,
};

const char* fault_kind_name(FaultKind kind);

// Recovery and lifecycle actions taken by the runtime, recorded per
// checkpoint for auditability.
struct RecoveryAction {
    enum class Kind {
        ResetSync,     // tile reset and resynced from `source`
        ResetFailed,   // reset ordered but the tile is unresponsive
        Rollback,      // group rolled back and re-executed its segment
        GroupFailed,   // second consecutive no-majority
        MarkedBroken,  // consecutive-fault threshold reached
        Rejoined,      // repaired tile re-added (ADDED|ACTIVE)
        AddedCleared,  // rejoiner passed its first clean checkpoint
    };

    Kind kind;
    TileId tile = 0;
    TileId source = 0; // ResetSync only
    GroupId group = 0;

    bool operator==(const RecoveryAction&) const = default;
};

const char* recovery_action_name(RecoveryAction::Kind kind);

// Append-only simulation audit log with monotone tick ordering. Checkpoint
// records carry the verdict (absent for unreplicated groups), the full
// disagreement matrix at vote time, and any recovery actions; injection
// records document every applied fault.
struct LogRecord {
    enum class Type { Checkpoint, Injection, Lifecycle };

    Type type = Type::Checkpoint;
    std::uint64_t tick = 0;

    // Checkpoint fields
    GroupId group = 0;
    std::optional<Verdict> verdict;
    DisagreeMatrix matrix;
    std::vector<RecoveryAction> actions;

    // Injection fields
    FaultKind fault_kind = FaultKind::StateBitFlip;
    TileId tile = 0;
    std::uint32_t slot = 0;

    std::string to_string() const;
};

class CheckpointLog {
public:
    void append(LogRecord record);

    const std::vector<LogRecord>& records() const { return records_; }
    std::uint64_t last_tick() const { return last_tick_; }

    // Deterministic text serialization, one record per line.
    void write(std::ostream& os) const;
    std::string to_string() const;

private:
    std::vector<LogRecord> records_;
    std::uint64_t last_tick_ = 0;
};

} // namespace tilevote

#endif
