#include "tilevote/log.hpp"

#include <ostream>
#include <sstream>

namespace tilevote {

const char* fault_kind_name(FaultKind kind) {
    switch (kind) {
    case FaultKind::StateBitFlip: return "state_bit_flip";
    case FaultKind::ChecksumCorrupt: return "checksum_corrupt";
    case FaultKind::Hang: return "hang";
    case FaultKind::Crash: return "crash";
    case FaultKind::PermanentDeath: return "permanent_death";
    }
    return "?";
}

const char* recovery_action_name(RecoveryAction::Kind kind) {
    switch (kind) {
    case RecoveryAction::Kind::ResetSync: return "reset_sync";
    case RecoveryAction::Kind::ResetFailed: return "reset_failed";
    case RecoveryAction::Kind::Rollback: return "rollback";
    case RecoveryAction::Kind::GroupFailed: return "group_failed";
    case RecoveryAction::Kind::MarkedBroken: return "marked_broken";
    case RecoveryAction::Kind::Rejoined: return "rejoined";
    case RecoveryAction::Kind::AddedCleared: return "added_cleared";
    }
    return "?";
}

std::string LogRecord::to_string() const {
    std::ostringstream os;
    os << "tick " << tick;
    if (type == Type::Injection) {
        os << " inject kind=" << fault_kind_name(fault_kind) << " tile=" << tile
           << " slot=" << slot;
        return os.str();
    }
    if (type == Type::Lifecycle) {
        os << " lifecycle";
        for (const auto& a : actions)
            os << " " << recovery_action_name(a.kind) << " tile=" << a.tile;
        return os.str();
    }
    os << " group " << group << " verdict=";
    if (!verdict) {
        os << "none";
    } else {
        os << verdict_kind_name(verdict->kind);
        if (verdict->kind == Verdict::Kind::MinorityFault) {
            os << " faulty={";
            for (std::size_t i = 0; i < verdict->faulty.size(); ++i)
                os << (i ? "," : "") << verdict->faulty[i];
            os << "} majority=" << std::hex << verdict->majority_csum << std::dec << "/"
               << verdict->majority_len;
        }
    }
    os << " matrix=[" << matrix.to_string() << "]";
    if (!actions.empty()) {
        os << " actions=[";
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const auto& a = actions[i];
            os << (i ? " " : "") << recovery_action_name(a.kind);
            switch (a.kind) {
            case RecoveryAction::Kind::ResetSync:
                os << " tile=" << a.tile << " source=" << a.source;
                break;
            case RecoveryAction::Kind::Rollback:
            case RecoveryAction::Kind::GroupFailed:
                os << " group=" << a.group;
                break;
            default:
                os << " tile=" << a.tile;
                break;
            }
        }
        os << "]";
    }
    return os.str();
}

void CheckpointLog::append(LogRecord record) {
    if (record.tick < last_tick_)
        throw Error(ErrorCode::ConfigInvalid, "log records must have monotone ticks");
    last_tick_ = record.tick;
    records_.push_back(std::move(record));
}

void CheckpointLog::write(std::ostream& os) const {
    for (const auto& r : records_)
        os << r.to_string() << '\n';
}

std::string CheckpointLog::to_string() const {
    std::ostringstream os;
    write(os);
    return os.str();
}

} // namespace tilevote
