#ifndef TILEVOTE_ERRORS_HPP
#define TILEVOTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tilevote {

enum class ErrorCode {
    NotOwner,
    SlotOccupied,
    GroupIdInUse,
    TooManyGroups,
    BufferOverflow,
    NoSuchTile,
    NoSuchSlot,
    OwnChecksumMissing,
    ReplicationOne,
    SourceInvalid,
    RepairPending,
    TargetInactive,
    DimensionMismatch,
    EmptyAccumulator,
    MissingReferenceArm,
    ConfigInvalid,
    BarrierTimeout,
    InternalInvariant,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace tilevote

#endif
