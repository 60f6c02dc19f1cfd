#include "tilevote/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "tilevote/crc32.hpp"

namespace tilevote {

// Generation-counted rendezvous for tile_count workers plus the control
// thread. The timed wait realizes the checkpoint barrier deadline: a worker
// not arriving within it is a runtime defect (simulated hangs still arrive,
// they just publish nothing), so the control thread turns it into an error.
class Simulator::Barrier {
public:
    explicit Barrier(int parties) : parties_(parties) {}

    void wait() { wait_impl(nullptr); }

    void wait_for(std::chrono::milliseconds deadline) { wait_impl(&deadline); }

private:
    void wait_impl(const std::chrono::milliseconds* deadline) {
        std::unique_lock lock(mu_);
        const std::uint64_t gen = generation_;
        if (++waiting_ == parties_) {
            waiting_ = 0;
            ++generation_;
            cv_.notify_all();
            return;
        }
        auto arrived = [&] { return generation_ != gen; };
        if (deadline == nullptr) {
            cv_.wait(lock, arrived);
        } else if (!cv_.wait_for(lock, *deadline, arrived)) {
            throw Error(ErrorCode::BarrierTimeout, "checkpoint barrier deadline exceeded");
        }
    }

    std::mutex mu_;
    std::condition_variable cv_;
    int parties_;
    int waiting_ = 0;
    std::uint64_t generation_ = 0;
};

struct Simulator::Workers {
    explicit Workers(int parties) : barrier(parties) {}

    std::vector<std::thread> threads;
    Barrier barrier;
    std::atomic<bool> stop{false};
    std::mutex error_mu;
    std::exception_ptr error;
};

namespace {

BankConfig bank_config_from(const SimulatorConfig& cfg) {
    return BankConfig{cfg.tile_count, cfg.num_threads, cfg.state_buffer_size};
}

} // namespace

Simulator::Simulator(SimulatorConfig config, const AppFactory& factory)
    : config_(std::move(config)), bank_(bank_config_from(config_)) {
    if (config_.broken_threshold < 1)
        throw Error(ErrorCode::ConfigInvalid, "broken_threshold must be >= 1");
    if (!factory)
        throw Error(ErrorCode::ConfigInvalid, "no application factory");

    std::sort(config_.groups.begin(), config_.groups.end(),
              [](const ThreadGroup& a, const ThreadGroup& b) { return a.group_id < b.group_id; });
    for (const ThreadGroup& g : config_.groups)
        register_thread_group(bank_, g);
    normalize_global_frequency();

    tiles_.resize(config_.tile_count);
    for (auto& rt : tiles_)
        rt.slots.resize(config_.num_threads);
    for (const ThreadGroup& g : config_.groups) {
        for (TileId t : g.members) {
            SlotRuntime& sr = tiles_[t].slots[g.slot];
            sr.app = factory(g, t);
            if (!sr.app)
                throw Error(ErrorCode::ConfigInvalid, "factory returned no app");
            sr.last_agreed = sr.app->clone();
        }
    }

    if (config_.mode == RunMode::Concurrent)
        start_workers();
}

Simulator::~Simulator() { stop_workers(); }

void Simulator::normalize_global_frequency() {
    // Per-tile GCD folds can disagree when groups span different tile
    // subsets, but replicas of one group must advance in lockstep, so the
    // runtime settles every tile on the system-wide base period.
    system_freq_ = 0;
    for (const ThreadGroup& g : config_.groups)
        system_freq_ = system_freq_ == 0 ? g.period : gcd(system_freq_, g.period);
    if (system_freq_ == 0)
        system_freq_ = 1;

    // Re-phase every slot as well: registration-order clamping can leave a
    // countdown short of its interval, and all replicas must hit zero at
    // tick k * interval together.
    for (TileId t = 0; t < bank_.tile_count(); ++t) {
        if (bank_.read(t).member_of_thread_group == 0)
            continue;
        ValidationMemory& vm = bank_.writable(t, t);
        const std::uint32_t old_freq = vm.global_checkpoint_freq;
        for (auto& info : vm.threads) {
            if (!info.registered())
                continue;
            const std::uint32_t period = info.checkpoint_interval * old_freq;
            info.checkpoint_interval = period / system_freq_;
            info.next_check = info.checkpoint_interval;
        }
        vm.global_checkpoint_freq = system_freq_;
    }
}

bool Simulator::tile_alive(TileId t) const {
    const ValidationMemory& vm = bank_.read(t);
    return vm.is(TILE_ACTIVE) && !vm.is(TILE_BROKEN) && !tiles_[t].dead;
}

const ThreadGroup& Simulator::group_by_id(GroupId id) const {
    for (const ThreadGroup& g : config_.groups)
        if (g.group_id == id)
            return g;
    throw Error(ErrorCode::ConfigInvalid, "unknown group " + std::to_string(id));
}

std::vector<GroupId> Simulator::groups_due() const {
    std::vector<GroupId> due;
    for (const ThreadGroup& g : config_.groups) {
        const std::uint32_t interval = g.period / system_freq_;
        if (tick_ % interval == 0)
            due.push_back(g.group_id);
    }
    return due;
}

std::vector<std::pair<GroupId, Verdict>> Simulator::tick() {
    ++tick_;
    tick_due_ = groups_due();
    tick_verdicts_.clear();
    if (config_.mode == RunMode::Deterministic)
        run_tick_deterministic();
    else
        run_tick_concurrent();
    return tick_verdicts_;
}

void Simulator::run(std::uint64_t ticks) {
    for (std::uint64_t i = 0; i < ticks; ++i)
        tick();
}

void Simulator::run_tick_deterministic() {
    apply_scheduled_faults(false);
    for (TileId t = 0; t < config_.tile_count; ++t)
        phase_execute(t);
    apply_scheduled_faults(true);
    deadline_sweep(tick_due_);
    for (TileId t = 0; t < config_.tile_count; ++t)
        phase_compare(t, tick_due_);
    tick_verdicts_ = supervise(tick_due_);
    finish_round();
    lifecycle_update();
}

void Simulator::phase_execute(TileId t) {
    if (!tile_alive(t))
        return; // BROKEN or dead: slots are skipped, counters frozen
    ValidationMemory& vm = bank_.writable(t, t);
    TileRuntime& rt = tiles_[t];
    for (std::uint32_t slot = 0; slot < vm.threads.size(); ++slot) {
        ThreadInfo& info = vm.threads[slot];
        if (!info.registered())
            continue;
        SlotRuntime& sr = rt.slots[slot];
        const bool stuck = sr.hung || sr.crashed;
        if (!stuck)
            sr.app->run_tick(system_freq_);
        // the checkpoint countdown belongs to the tile, not the app thread,
        // so it keeps running for stuck slots
        assert(info.next_check > 0);
        --info.next_check;
        if (info.next_check == 0) {
            // new checkpoint round: the previous checksum is consumed
            info.status &= ~THREAD_CS_VALID;
            if (!stuck)
                publish_checkpoint(bank_, t, t, slot, sr.app->checkpoint_state());
        }
    }
}

bool Simulator::fault_eligible(const FaultSpec& spec) const {
    if (spec.target_tile >= config_.tile_count || !tile_alive(spec.target_tile))
        return false;
    if (spec.kind == FaultKind::PermanentDeath)
        return true;
    return spec.target_slot < config_.num_threads &&
           bank_.read(spec.target_tile).threads[spec.target_slot].registered();
}

void Simulator::apply_scheduled_faults(bool post_publish) {
    if (post_publish) {
        // checksum corruptions land on the freshly published records
        for (const FaultSpec& spec : pending_post_faults_)
            if (fault_eligible(spec))
                apply_fault(*this, spec);
        pending_post_faults_.clear();
        return;
    }
    while (schedule_cursor_ < schedule_.faults.size() &&
           schedule_.faults[schedule_cursor_].trigger_tick <= tick_) {
        const FaultSpec spec = schedule_.faults[schedule_cursor_++];
        if (spec.kind == FaultKind::ChecksumCorrupt)
            pending_post_faults_.push_back(spec);
        else if (fault_eligible(spec))
            // a fault aimed at a retired or dead tile fizzles silently
            apply_fault(*this, spec);
    }
}

void Simulator::deadline_sweep(const std::vector<GroupId>& due) {
    for (GroupId gid : due) {
        const ThreadGroup& g = group_by_id(gid);
        if (g.replication() < 2)
            continue;
        for (TileId m : g.members) {
            if (!tile_alive(m))
                continue;
            const ThreadInfo& info = bank_.read(m).threads[g.slot];
            if (info.cs_valid() || info.failed())
                continue;
            // the member's own runtime flags the missed deadline
            ValidationMemory& vm = bank_.writable(m, m);
            vm.threads[g.slot].status |= THREAD_FAILURE;
        }
    }
}

void Simulator::phase_compare(TileId t, const std::vector<GroupId>& due) {
    if (!tile_alive(t))
        return;
    for (GroupId gid : due) {
        const ThreadGroup& g = group_by_id(gid);
        if (g.replication() < 2)
            continue;
        if (std::find(g.members.begin(), g.members.end(), t) == g.members.end())
            continue;
        if (!bank_.read(t).threads[g.slot].cs_valid())
            continue; // nothing of our own to compare against
        compare_and_mark(bank_, t, g, snapshot_members(bank_, g));
    }
}

std::vector<std::pair<GroupId, Verdict>> Simulator::supervise(const std::vector<GroupId>& due) {
    std::vector<std::pair<GroupId, Verdict>> verdicts;
    for (GroupId gid : due) {
        const ThreadGroup& g = group_by_id(gid);
        LogRecord rec;
        rec.type = LogRecord::Type::Checkpoint;
        rec.tick = tick_;
        rec.group = gid;
        if (g.replication() >= 2) {
            const Verdict initial = vote(g, snapshot_members(bank_, g));
            auto [final_verdict, actions] = handle_verdict_full(gid, initial);
            rec.verdict = final_verdict;
            rec.actions = std::move(actions);
            verdicts.emplace_back(gid, final_verdict);
        }
        rec.matrix = supervisor_poll().matrix;
        log_.append(std::move(rec));
    }
    return verdicts;
}

std::pair<Verdict, std::vector<RecoveryAction>> Simulator::handle_verdict_full(
    GroupId group_id, const Verdict& verdict) {
    const ThreadGroup& g = group_by_id(group_id);
    std::vector<RecoveryAction> actions;
    Verdict final_verdict = verdict;

    if (verdict.kind == Verdict::Kind::NoMajority) {
        actions.push_back({RecoveryAction::Kind::Rollback, 0, 0, group_id});
        final_verdict = rollback_and_reexecute(g, actions);
        if (final_verdict.kind == Verdict::Kind::NoMajority) {
            // second consecutive no-majority: the group is beyond this
            // stage's repair capability
            actions.push_back({RecoveryAction::Kind::GroupFailed, 0, 0, group_id});
            return {final_verdict, actions};
        }
    }

    if (final_verdict.kind == Verdict::Kind::MinorityFault)
        recover_minority(g, final_verdict, actions);
    else
        clear_streaks(g, {});

    settle_added_members(g, final_verdict, actions);
    refresh_agreed_snapshots(g);
    return {final_verdict, actions};
}

std::vector<RecoveryAction> Simulator::handle_verdict(GroupId group_id, const Verdict& verdict) {
    return handle_verdict_full(group_id, verdict).second;
}

void Simulator::clear_streaks(const ThreadGroup& g, const std::vector<TileId>& except) {
    for (TileId m : g.members) {
        if (std::find(except.begin(), except.end(), m) != except.end())
            continue;
        if (tile_alive(m))
            tiles_[m].slots[g.slot].fault_streak = 0;
    }
}

void Simulator::recover_minority(const ThreadGroup& g, const Verdict& verdict,
                                 std::vector<RecoveryAction>& actions) {
    // a clean checkpoint breaks the majority members' fault streaks
    clear_streaks(g, verdict.faulty);

    for (TileId f : verdict.faulty) {
        SlotRuntime& sr = tiles_[f].slots[g.slot];
        ++sr.fault_streak;
        if (sr.fault_streak >= config_.broken_threshold) {
            mark_broken(f);
            actions.push_back({RecoveryAction::Kind::MarkedBroken, f, 0, g.group_id});
            continue;
        }
        if (!tile_alive(f)) {
            actions.push_back({RecoveryAction::Kind::ResetFailed, f, 0, g.group_id});
            continue;
        }
        const TileId source = pick_sync_source(g, verdict, f);
        if (source == kNoTile) {
            actions.push_back({RecoveryAction::Kind::ResetFailed, f, 0, g.group_id});
            continue;
        }
        ValidationMemory& vm = bank_.writable(f, f);
        vm.status |= TILE_RESET;
        sync(f, source, g.slot);
        bank_.writable(f, f).status &= ~TILE_RESET;
        actions.push_back({RecoveryAction::Kind::ResetSync, f, source, g.group_id});
    }
}

TileId Simulator::pick_sync_source(const ThreadGroup& g, const Verdict& verdict,
                                   TileId exclude) const {
    for (TileId m : g.members) {
        if (m == exclude || !tile_alive(m))
            continue;
        const ValidationMemory& vm = bank_.read(m);
        if (vm.is(TILE_RESET) || vm.is(TILE_ADDED))
            continue;
        const ThreadInfo& info = vm.threads[g.slot];
        if (info.cs_valid() && !info.failed() && info.csum == verdict.majority_csum &&
            info.len == verdict.majority_len)
            return m;
    }
    return kNoTile;
}

Verdict Simulator::rollback_and_reexecute(const ThreadGroup& g,
                                          std::vector<RecoveryAction>& actions) {
    (void)actions;
    const std::uint32_t interval = g.period / system_freq_;
    for (TileId m : g.members) {
        if (!tile_alive(m))
            continue;
        SlotRuntime& sr = tiles_[m].slots[g.slot];
        if (sr.hung || sr.crashed)
            continue; // a stuck thread cannot replay the segment
        sr.app = sr.last_agreed->clone();
        for (std::uint32_t k = 0; k < interval; ++k)
            sr.app->run_tick(system_freq_);
        publish_checkpoint(bank_, m, m, g.slot, sr.app->checkpoint_state());
    }
    for (TileId m : g.members) {
        if (!tile_alive(m) || !bank_.read(m).threads[g.slot].cs_valid())
            continue;
        compare_and_mark(bank_, m, g, snapshot_members(bank_, g));
    }
    return vote(g, snapshot_members(bank_, g));
}

void Simulator::settle_added_members(const ThreadGroup& g, const Verdict& verdict,
                                     std::vector<RecoveryAction>& actions) {
    if (verdict.kind == Verdict::Kind::NoMajority)
        return;
    for (TileId m : g.members) {
        if (!tile_alive(m) || !bank_.read(m).is(TILE_ADDED))
            continue;
        const ThreadInfo& info = bank_.read(m).threads[g.slot];
        const bool matches = info.cs_valid() && !info.failed() &&
                             info.csum == verdict.majority_csum &&
                             info.len == verdict.majority_len;
        if (matches) {
            // first clean checkpoint: the rejoiner is a full member again
            bank_.writable(m, m).status &= ~TILE_ADDED;
            actions.push_back({RecoveryAction::Kind::AddedCleared, m, 0, g.group_id});
        } else {
            const TileId source = pick_sync_source(g, verdict, m);
            if (source != kNoTile) {
                sync(m, source, g.slot);
                actions.push_back({RecoveryAction::Kind::ResetSync, m, source, g.group_id});
            }
        }
    }
}

void Simulator::refresh_agreed_snapshots(const ThreadGroup& g) {
    for (TileId m : g.members) {
        if (!tile_alive(m))
            continue;
        SlotRuntime& sr = tiles_[m].slots[g.slot];
        sr.last_agreed = sr.app->clone();
    }
}

void Simulator::sync(TileId target, TileId source, std::uint32_t slot) {
    if (source >= config_.tile_count)
        throw Error(ErrorCode::NoSuchTile, "source tile " + std::to_string(source));
    if (slot >= config_.num_threads)
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(slot));
    const ValidationMemory& svm = bank_.read(source);
    const ThreadInfo& sinfo = svm.threads[slot];
    if (svm.is(TILE_RESET) || svm.is(TILE_BROKEN) || tiles_[source].dead || !sinfo.cs_valid())
        throw Error(ErrorCode::SourceInvalid,
                    "tile " + std::to_string(source) + " is not a clean sync source");

    ValidationMemory& tvm = bank_.writable(target, target);
    ThreadInfo& tinfo = tvm.threads[slot];
    tinfo.state = sinfo.state;
    tinfo.len = sinfo.len;
    tinfo.csum = crc32(tinfo.state);
    tinfo.status |= THREAD_CS_VALID;
    tinfo.status &= ~THREAD_FAILURE;

    SlotRuntime& tslot = tiles_[target].slots[slot];
    SlotRuntime& sslot = tiles_[source].slots[slot];
    if (tslot.app && sslot.app)
        tslot.app->copy_state_from(*sslot.app);
}

void Simulator::finish_round() {
    for (TileId t = 0; t < config_.tile_count; ++t) {
        if (!tile_alive(t))
            continue;
        ValidationMemory& vm = bank_.writable(t, t);
        TileRuntime& rt = tiles_[t];
        for (std::uint32_t slot = 0; slot < vm.threads.size(); ++slot) {
            ThreadInfo& info = vm.threads[slot];
            if (!info.registered() || info.next_check != 0)
                continue;
            info.next_check = info.checkpoint_interval;
            rt.slots[slot].hung = false;
            rt.slots[slot].crashed = false;
        }
    }
}

void Simulator::mark_broken(TileId t) {
    ValidationMemory& vm = bank_.writable(kSupervisorActor, t);
    vm.status = (vm.status & ~(TILE_ACTIVE | TILE_RESET | TILE_ADDED)) | TILE_BROKEN;
    tiles_[t].broken_since = tick_;
}

void Simulator::lifecycle_update() {
    for (TileId t = 0; t < config_.tile_count; ++t) {
        if (!bank_.read(t).is(TILE_BROKEN))
            continue;
        const std::uint64_t elapsed = tick_ - tiles_[t].broken_since;
        if (elapsed >= config_.repair_latency && elapsed >= 1)
            rejoin_tile(t);
    }
}

void Simulator::rejoin_tile(TileId tile) {
    const ValidationMemory& ro = bank_.read(tile);
    if (!ro.is(TILE_BROKEN))
        throw Error(ErrorCode::ConfigInvalid, "tile " + std::to_string(tile) + " is not broken");
    const std::uint64_t elapsed = tick_ - tiles_[tile].broken_since;
    if (elapsed < config_.repair_latency || elapsed < 1)
        throw Error(ErrorCode::RepairPending,
                    "tile " + std::to_string(tile) + " still under repair");

    // Repair (the stage-2 reconfiguration this runtime abstracts) hands back
    // a blank tile; the supervisor re-registers it as freshly added.
    ValidationMemory& vm = bank_.writable(kSupervisorActor, tile);
    vm.status = TILE_ACTIVE | TILE_ADDED;
    vm.disagree = 0;
    vm.member_of_thread_group = 0;
    vm.global_checkpoint_freq = system_freq_;
    for (auto& info : vm.threads)
        info = ThreadInfo{};
    TileRuntime& rt = tiles_[tile];
    rt.dead = false;
    for (auto& sr : rt.slots) {
        sr.fault_streak = 0;
        sr.hung = false;
        sr.crashed = false;
    }

    for (const ThreadGroup& g : config_.groups) {
        if (std::find(g.members.begin(), g.members.end(), tile) == g.members.end())
            continue;
        vm.member_of_thread_group |= 1u << g.group_id;
        const std::uint32_t interval = g.period / system_freq_;
        ThreadInfo& info = vm.threads[g.slot];
        info.checkpoint_interval = interval;
        // back in phase with the survivors: hit zero at the next multiple
        const std::uint32_t rem = static_cast<std::uint32_t>(tick_ % interval);
        info.next_check = interval - rem;

        // live state comes from a full member before the first vote
        TileId source = kNoTile;
        for (TileId m : g.members) {
            if (m == tile || !tile_alive(m))
                continue;
            if (bank_.read(m).is(TILE_ADDED))
                continue;
            source = m;
            break;
        }
        SlotRuntime& sr = rt.slots[g.slot];
        if (source != kNoTile && sr.app && tiles_[source].slots[g.slot].app)
            sr.app->copy_state_from(*tiles_[source].slots[g.slot].app);
        if (sr.app)
            sr.last_agreed = sr.app->clone();
    }

    LogRecord rec;
    rec.type = LogRecord::Type::Lifecycle;
    rec.tick = tick_;
    rec.actions.push_back({RecoveryAction::Kind::Rejoined, tile, 0, 0});
    log_.append(std::move(rec));
}

Simulator::SupervisorView Simulator::supervisor_poll() const {
    SupervisorView view;
    view.matrix.rows.reserve(config_.tile_count);
    view.tile_status.reserve(config_.tile_count);
    for (TileId t = 0; t < config_.tile_count; ++t) {
        view.matrix.rows.push_back(result_bus_select(bank_, t));
        view.tile_status.push_back(bank_.read(t).status);
    }
    return view;
}

TileApp& Simulator::app(TileId tile, std::uint32_t slot) {
    if (tile >= config_.tile_count)
        throw Error(ErrorCode::NoSuchTile, "tile " + std::to_string(tile));
    if (slot >= config_.num_threads || !tiles_[tile].slots[slot].app)
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(slot));
    return *tiles_[tile].slots[slot].app;
}

const TileApp& Simulator::app(TileId tile, std::uint32_t slot) const {
    return const_cast<Simulator*>(this)->app(tile, slot);
}

std::uint32_t Simulator::fault_streak(TileId tile, std::uint32_t slot) const {
    return tiles_.at(tile).slots.at(slot).fault_streak;
}

bool Simulator::tile_dead(TileId tile) const { return tiles_.at(tile).dead; }

void Simulator::set_fault_schedule(FaultSchedule schedule) {
    schedule.validate(config_.state_buffer_size);
    schedule_ = std::move(schedule);
    schedule_cursor_ = 0;
}

void Simulator::inject_state_bit_flip(TileId tile, std::uint32_t slot, std::uint64_t payload,
                                      std::uint64_t seed) {
    app(tile, slot).flip_state_bit(payload, seed);
}

bool Simulator::inject_checksum_corrupt(TileId tile, std::uint32_t slot) {
    ValidationMemory& vm = bank_.writable(kInjectorActor, tile);
    if (slot >= vm.threads.size())
        throw Error(ErrorCode::NoSuchSlot, "slot " + std::to_string(slot));
    vm.threads[slot].csum ^= 1u;
    return vm.threads[slot].cs_valid();
}

void Simulator::inject_hang(TileId tile, std::uint32_t slot) {
    app(tile, slot); // bounds check
    tiles_[tile].slots[slot].hung = true;
}

void Simulator::inject_crash(TileId tile, std::uint32_t slot) {
    app(tile, slot);
    tiles_[tile].slots[slot].crashed = true;
    // the tile's crash handler flags the slot at once
    ValidationMemory& vm = bank_.writable(tile, tile);
    vm.threads[slot].status = (vm.threads[slot].status | THREAD_FAILURE) & ~THREAD_CS_VALID;
}

void Simulator::inject_permanent_death(TileId tile) {
    if (tile >= config_.tile_count)
        throw Error(ErrorCode::NoSuchTile, "tile " + std::to_string(tile));
    tiles_[tile].dead = true;
}

void Simulator::record_injection(const FaultSpec& spec) {
    LogRecord rec;
    rec.type = LogRecord::Type::Injection;
    rec.tick = tick_;
    rec.fault_kind = spec.kind;
    rec.tile = spec.target_tile;
    rec.slot = spec.target_slot;
    log_.append(std::move(rec));
}

// ---- concurrent mode ------------------------------------------------------

void Simulator::start_workers() {
    workers_ = std::make_unique<Workers>(static_cast<int>(config_.tile_count) + 1);
    for (TileId t = 0; t < config_.tile_count; ++t)
        workers_->threads.emplace_back([this, t] { worker_main(t); });
}

void Simulator::stop_workers() {
    if (!workers_)
        return;
    workers_->stop.store(true);
    workers_->barrier.wait(); // release parked workers so they can exit
    for (auto& th : workers_->threads)
        th.join();
    workers_.reset();
}

void Simulator::worker_main(TileId t) {
    Workers& w = *workers_;
    for (;;) {
        w.barrier.wait(); // tick start
        if (w.stop.load())
            return;
        try {
            phase_execute(t);
        } catch (...) {
            std::scoped_lock lock(w.error_mu);
            if (!w.error)
                w.error = std::current_exception();
        }
        w.barrier.wait(); // publishes done; control takes over
        w.barrier.wait(); // released into compare
        try {
            phase_compare(t, tick_due_);
        } catch (...) {
            std::scoped_lock lock(w.error_mu);
            if (!w.error)
                w.error = std::current_exception();
        }
        w.barrier.wait(); // compares done; control finishes the tick
    }
}

void Simulator::check_worker_error() {
    std::scoped_lock lock(workers_->error_mu);
    if (workers_->error) {
        std::exception_ptr e = workers_->error;
        workers_->error = nullptr;
        std::rethrow_exception(e);
    }
}

void Simulator::run_tick_concurrent() {
    Workers& w = *workers_;
    apply_scheduled_faults(false);
    w.barrier.wait(); // release workers into execute
    w.barrier.wait_for(config_.barrier_deadline); // checkpoint barrier
    check_worker_error();
    apply_scheduled_faults(true);
    deadline_sweep(tick_due_);
    w.barrier.wait(); // release into compare
    w.barrier.wait_for(config_.barrier_deadline);
    check_worker_error();
    tick_verdicts_ = supervise(tick_due_);
    finish_round();
    lifecycle_update();
}

} // namespace tilevote
