#include "tilevote/validation_memory.hpp"

#include "tilevote/crc32.hpp"

namespace tilevote {

ValidationMemoryBank::ValidationMemoryBank(const BankConfig& config) : config_(config) {
    if (config.tile_count < 1 || config.tile_count > kMaxTiles)
        throw Error(ErrorCode::ConfigInvalid,
                    "tile_count must be in [1, " + std::to_string(kMaxTiles) + "]");
    if (config.num_threads < 1)
        throw Error(ErrorCode::ConfigInvalid, "num_threads must be >= 1");
    memories_.resize(config.tile_count);
    for (auto& vm : memories_) {
        vm.status = TILE_ACTIVE;
        vm.threads.resize(config.num_threads);
        for (auto& t : vm.threads)
            t.state.reserve(config.state_buffer_size);
    }
}

const ValidationMemory& ValidationMemoryBank::read(TileId tile) const {
    if (tile >= memories_.size())
        throw Error(ErrorCode::NoSuchTile, "tile " + std::to_string(tile));
    return memories_[tile];
}

ValidationMemory& ValidationMemoryBank::writable(TileId actor, TileId tile) {
    if (tile >= memories_.size())
        throw Error(ErrorCode::NoSuchTile, "tile " + std::to_string(tile));
    if (actor == kSupervisorActor) {
        ++audit_.supervisor_writes;
    } else if (actor == kInjectorActor) {
        ++audit_.injector_writes;
    } else if (actor == tile) {
        ++audit_.tile_writes[actor][tile];
    } else {
        // Rejected attempts never reach the memory, so they are not counted
        // as writes.
        ++audit_.rejected;
        throw Error(ErrorCode::NotOwner, "tile " + std::to_string(actor) +
                                             " may not write validation memory of tile " +
                                             std::to_string(tile));
    }
    return memories_[tile];
}

std::uint64_t ValidationMemoryBank::Audit::cross_tile_writes() const {
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < kMaxTiles; ++i)
        for (std::uint32_t j = 0; j < kMaxTiles; ++j)
            if (i != j)
                total += tile_writes[i][j];
    return total;
}

std::uint32_t gcd(std::uint32_t a, std::uint32_t b) {
    return std::gcd(a, b);
}

void register_thread_group(ValidationMemoryBank& bank, const ThreadGroup& group) {
    if (group.group_id >= kMaxGroups)
        throw Error(ErrorCode::TooManyGroups, "group id " + std::to_string(group.group_id));
    if (group.members.empty())
        throw Error(ErrorCode::ConfigInvalid, "group has no members");
    if (group.period < 1)
        throw Error(ErrorCode::ConfigInvalid, "group period must be >= 1");
    if (group.slot >= bank.num_threads())
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(group.slot));

    const std::uint32_t bit = 1u << group.group_id;
    for (TileId t : group.members) {
        const ValidationMemory& vm = bank.read(t);
        if (vm.member_of_thread_group & bit)
            throw Error(ErrorCode::GroupIdInUse, "group " + std::to_string(group.group_id) +
                                                     " already on tile " + std::to_string(t));
        if (vm.threads[group.slot].registered())
            throw Error(ErrorCode::SlotOccupied, "slot " + std::to_string(group.slot) +
                                                     " occupied on tile " + std::to_string(t));
    }
    // Global id collision check: the same id registered on a disjoint tile
    // set would still alias masks and the result bus.
    for (TileId t = 0; t < bank.tile_count(); ++t) {
        if (bank.read(t).member_of_thread_group & bit)
            throw Error(ErrorCode::GroupIdInUse, "group " + std::to_string(group.group_id));
    }

    // Each member tile updates its own memory (the registration runs on the
    // tile being configured).
    for (TileId t : group.members) {
        ValidationMemory& vm = bank.writable(t, t);
        const std::uint32_t old_freq = vm.global_checkpoint_freq;
        const std::uint32_t new_freq =
            old_freq == 0 ? group.period : gcd(old_freq, group.period);

        if (new_freq != old_freq && old_freq != 0) {
            // Re-derive every registered slot's interval. The slot's period
            // is recoverable exactly: period = interval * old global freq.
            for (auto& info : vm.threads) {
                if (!info.registered())
                    continue;
                const std::uint32_t period = info.checkpoint_interval * old_freq;
                info.checkpoint_interval = period / new_freq;
                if (info.next_check > info.checkpoint_interval)
                    info.next_check = info.checkpoint_interval;
            }
        }
        vm.global_checkpoint_freq = new_freq;
        vm.member_of_thread_group |= bit;

        ThreadInfo& slot = vm.threads[group.slot];
        slot.checkpoint_interval = group.period / new_freq;
        slot.next_check = slot.checkpoint_interval;
        slot.status = 0;
        slot.csum = 0;
        slot.len = 0;
        slot.state.clear();
    }
}

ThreadInfo& publish_checkpoint(ValidationMemoryBank& bank, TileId actor, TileId tile,
                               std::uint32_t slot, std::span<const std::uint8_t> state) {
    if (slot >= bank.num_threads())
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(slot));
    if (state.size() > bank.state_buffer_size())
        throw Error(ErrorCode::BufferOverflow,
                    std::to_string(state.size()) + " bytes > state buffer of " +
                        std::to_string(bank.state_buffer_size()));
    ValidationMemory& vm = bank.writable(actor, tile);
    ThreadInfo& info = vm.threads[slot];
    info.state.assign(state.begin(), state.end());
    info.len = static_cast<std::uint32_t>(state.size());
    info.csum = crc32(state);
    info.status |= THREAD_CS_VALID;
    info.status &= ~THREAD_FAILURE;
    return info;
}

ThreadInfo read_sibling(const ValidationMemoryBank& bank, TileId tile, std::uint32_t slot) {
    const ValidationMemory& vm = bank.read(tile);
    if (slot >= vm.threads.size())
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(slot));
    return vm.threads[slot];
}

} // namespace tilevote
