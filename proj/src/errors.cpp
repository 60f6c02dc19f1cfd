#include "tilevote/errors.hpp"

namespace tilevote {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotOwner: return "NotOwner";
    case ErrorCode::SlotOccupied: return "SlotOccupied";
    case ErrorCode::GroupIdInUse: return "GroupIdInUse";
    case ErrorCode::TooManyGroups: return "TooManyGroups";
    case ErrorCode::BufferOverflow: return "BufferOverflow";
    case ErrorCode::NoSuchTile: return "NoSuchTile";
    case ErrorCode::NoSuchSlot: return "NoSuchSlot";
    case ErrorCode::OwnChecksumMissing: return "OwnChecksumMissing";
    case ErrorCode::ReplicationOne: return "ReplicationOne";
    case ErrorCode::SourceInvalid: return "SourceInvalid";
    case ErrorCode::RepairPending: return "RepairPending";
    case ErrorCode::TargetInactive: return "TargetInactive";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyAccumulator: return "EmptyAccumulator";
    case ErrorCode::MissingReferenceArm: return "MissingReferenceArm";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BarrierTimeout: return "BarrierTimeout";
    case ErrorCode::InternalInvariant: return "InternalInvariant";
    }
    return "UnknownError";
}

} // namespace tilevote
