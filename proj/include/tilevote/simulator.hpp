#ifndef TILEVOTE_SIMULATOR_HPP
#define TILEVOTE_SIMULATOR_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "tilevote/apps.hpp"
#include "tilevote/fault_injection.hpp"
#include "tilevote/log.hpp"
#include "tilevote/validation_memory.hpp"
#include "tilevote/voting.hpp"

namespace tilevote {

enum class RunMode { Deterministic, Concurrent };

struct SimulatorConfig {
    std::uint32_t tile_count = 3;
    std::vector<ThreadGroup> groups;
    RunMode mode = RunMode::Deterministic;
    std::chrono::milliseconds barrier_deadline{5000};
    std::uint32_t repair_latency = 0;   // ticks from BROKEN to repaired
    std::uint32_t broken_threshold = 3; // consecutive faulty checkpoints
    std::uint64_t seed = 0;
    std::uint32_t num_threads = 16;
    std::uint32_t state_buffer_size = 4096;
};

// Builds the application replica that tile `tile` runs for `group`. Called
// once per (group, member) at construction; replicas of one group must be
// constructed identically regardless of the tile.
using AppFactory =
    std::function<std::unique_ptr<TileApp>(const ThreadGroup& group, TileId tile)>;

// Drives the replicated tiles through checkpoint rounds.
//
// One tick is one global checkpoint period: every registered slot advances
// by global_checkpoint_freq base-time units and decrements its countdown;
// slots reaching zero publish, cross-compare, and vote. The supervisor part
// of the tick handles verdicts: minority faults trigger reset-and-resync
// from a majority member, no-majority triggers a one-shot rollback and
// re-execution, and repeat offenders are retired as BROKEN until the
// (abstracted) tile repair completes and they rejoin.
//
// Deterministic mode runs everything on the calling thread in tile order
// and is the reference semantics; concurrent mode runs one worker per tile
// with a deadline barrier around each checkpoint phase and yields the same
// observable behavior at every barrier.
class Simulator {
public:
    Simulator(SimulatorConfig config, const AppFactory& factory);
    ~Simulator();

    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    // Advances one tick; returns the final verdict of every group voted
    // this tick, in ascending group order.
    std::vector<std::pair<GroupId, Verdict>> tick();

    void run(std::uint64_t ticks);

    // Completed ticks (during a tick: the tick being processed).
    std::uint64_t current_tick() const { return tick_; }

    // Faults applied at their trigger ticks; replaces any previous schedule.
    void set_fault_schedule(FaultSchedule schedule);

    const SimulatorConfig& config() const { return config_; }
    const ValidationMemoryBank& bank() const { return bank_; }
    // Mutable bank access for supervisor tooling and tests; the bank's own
    // ownership checks still apply to every write.
    ValidationMemoryBank& bank_mut() { return bank_; }
    const CheckpointLog& log() const { return log_; }
    const std::vector<ThreadGroup>& groups() const { return config_.groups; }
    std::uint32_t system_checkpoint_freq() const { return system_freq_; }

    // What external supervision sees over the result bus: every tile's
    // disagree vector plus the status flags.
    struct SupervisorView {
        DisagreeMatrix matrix;
        std::vector<std::uint32_t> tile_status;
    };
    SupervisorView supervisor_poll() const;

    // Copies `source`'s slot state (buffer and live application state) into
    // `target`. Source must be a clean member: valid checksum, not RESET,
    // not BROKEN, not dead.
    void sync(TileId target, TileId source, std::uint32_t slot);

    // Applies a verdict's recovery policy to `group_id` and returns the
    // actions taken. tick() calls this internally; it is exposed for
    // deterministic-mode scenario tests.
    std::vector<RecoveryAction> handle_verdict(GroupId group_id, const Verdict& verdict);

    // Re-adds a BROKEN tile once repair_latency ticks have elapsed:
    // ADDED|ACTIVE status, slots re-registered in phase with the survivors,
    // state resynced from them. Throws RepairPending before that.
    void rejoin_tile(TileId tile);

    TileApp& app(TileId tile, std::uint32_t slot);
    const TileApp& app(TileId tile, std::uint32_t slot) const;
    std::uint32_t fault_streak(TileId tile, std::uint32_t slot) const;
    bool tile_dead(TileId tile) const;

    // Injector surface, used by apply_fault(). Effects are phase-aware:
    // state/hang/crash/death land before execution, checksum corruption
    // lands on the freshly published record.
    void inject_state_bit_flip(TileId tile, std::uint32_t slot, std::uint64_t payload,
                               std::uint64_t seed);
    bool inject_checksum_corrupt(TileId tile, std::uint32_t slot);
    void inject_hang(TileId tile, std::uint32_t slot);
    void inject_crash(TileId tile, std::uint32_t slot);
    void inject_permanent_death(TileId tile);
    void record_injection(const FaultSpec& spec);

private:
    struct SlotRuntime {
        std::unique_ptr<TileApp> app;
        std::unique_ptr<TileApp> last_agreed;
        std::uint32_t fault_streak = 0;
        bool hung = false;    // skips execution and publish until next check
        bool crashed = false; // same, but FAILURE was raised at once
    };
    struct TileRuntime {
        std::vector<SlotRuntime> slots;
        bool dead = false; // PermanentDeath landed, not yet BROKEN/repaired
        std::uint64_t broken_since = 0;
    };

    class Barrier;

    static constexpr TileId kNoTile = 0xFFFFFFFFu;

    bool tile_alive(TileId t) const; // ACTIVE, not BROKEN, not dead
    const ThreadGroup& group_by_id(GroupId id) const;
    std::vector<GroupId> groups_due() const;
    void normalize_global_frequency();

    void phase_execute(TileId t);
    void phase_compare(TileId t, const std::vector<GroupId>& due);
    bool fault_eligible(const FaultSpec& spec) const;
    void apply_scheduled_faults(bool post_publish);
    void deadline_sweep(const std::vector<GroupId>& due);
    std::vector<std::pair<GroupId, Verdict>> supervise(const std::vector<GroupId>& due);
    std::pair<Verdict, std::vector<RecoveryAction>> handle_verdict_full(GroupId group_id,
                                                                        const Verdict& verdict);
    void clear_streaks(const ThreadGroup& group, const std::vector<TileId>& except);
    void recover_minority(const ThreadGroup& group, const Verdict& verdict,
                          std::vector<RecoveryAction>& actions);
    TileId pick_sync_source(const ThreadGroup& group, const Verdict& verdict,
                            TileId exclude) const;
    Verdict rollback_and_reexecute(const ThreadGroup& group,
                                   std::vector<RecoveryAction>& actions);
    void settle_added_members(const ThreadGroup& group, const Verdict& verdict,
                              std::vector<RecoveryAction>& actions);
    void refresh_agreed_snapshots(const ThreadGroup& group);
    void finish_round();
    void mark_broken(TileId t);
    void lifecycle_update();

    void run_tick_deterministic();
    void run_tick_concurrent();
    void start_workers();
    void stop_workers();
    void worker_main(TileId t);
    void check_worker_error();

    SimulatorConfig config_;
    ValidationMemoryBank bank_;
    CheckpointLog log_;
    std::vector<TileRuntime> tiles_;
    std::uint32_t system_freq_ = 1;
    std::uint64_t tick_ = 0;
    FaultSchedule schedule_;
    std::size_t schedule_cursor_ = 0;
    std::vector<FaultSpec> pending_post_faults_;
    std::vector<std::pair<GroupId, Verdict>> tick_verdicts_;
    std::vector<GroupId> tick_due_;

    // concurrent mode
    struct Workers;
    std::unique_ptr<Workers> workers_;
};

} // namespace tilevote

#endif
