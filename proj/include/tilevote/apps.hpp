#ifndef TILEVOTE_APPS_HPP
#define TILEVOTE_APPS_HPP

#include <cstdint>
#include <memory>
#include <vector>

namespace tilevote {

// A replicated application thread as the runtime drives it. Instances with
// equal construction parameters must behave identically on every tile:
// run_tick and checkpoint_state may depend only on internal state, never on
// the clock, the tile id, or allocation addresses. That determinism is what
// makes checkpoint checksums comparable at all.
class TileApp {
public:
    virtual ~TileApp() = default;

    // Advance by `base_units` base-time units of work. A tick hands every
    // slot global_checkpoint_freq units.
    virtual void run_tick(std::uint32_t base_units) = 0;

    // Serialize the checkpointed state; must fit the slot's state buffer
    // and be identical across fault-free replicas at the same point.
    virtual std::vector<std::uint8_t> checkpoint_state() const = 0;

    // Full state adoption from a healthy replica (recovery resync).
    virtual void copy_state_from(const TileApp& source) = 0;

    virtual std::unique_ptr<TileApp> clone() const = 0;

    // Fault-injection surface: corrupt one bit of live state. `payload` is
    // the schedule's bit index, `seed` disambiguates the position for apps
    // whose live state is larger than the checkpoint buffer.
    virtual void flip_state_bit(std::uint64_t payload, std::uint64_t seed) = 0;
};

// Minimal deterministic app for protocol-level scenarios and tests: a
// 16-byte state evolved by an integer mix per base unit. Cheap enough to
// run thousands of seeded simulations per second.
class CounterApp : public TileApp {
public:
    explicit CounterApp(std::uint64_t seed);

    void run_tick(std::uint32_t base_units) override;
    std::vector<std::uint8_t> checkpoint_state() const override;
    void copy_state_from(const TileApp& source) override;
    std::unique_ptr<TileApp> clone() const override;
    void flip_state_bit(std::uint64_t payload, std::uint64_t seed) override;

    std::uint64_t value() const { return value_; }
    std::uint64_t steps() const { return steps_; }

private:
    std::uint64_t value_;
    std::uint64_t steps_ = 0;
};

// splitmix64 finalizer: the project's stateless pseudo-random mix, pinned
// here so generated data is stable across toolchains.
std::uint64_t mix64(std::uint64_t x);

} // namespace tilevote

#endif
