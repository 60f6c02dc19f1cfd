#include "tilevote/apps.hpp"

#include <cstring>

#include "tilevote/errors.hpp"

namespace tilevote {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

CounterApp::CounterApp(std::uint64_t seed) : value_(mix64(seed)) {}

void CounterApp::run_tick(std::uint32_t base_units) {
    for (std::uint32_t i = 0; i < base_units; ++i) {
        value_ = mix64(value_ + steps_);
        ++steps_;
    }
}

std::vector<std::uint8_t> CounterApp::checkpoint_state() const {
    std::vector<std::uint8_t> out(16);
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<std::uint8_t>(value_ >> (8 * i));
        out[8 + i] = static_cast<std::uint8_t>(steps_ >> (8 * i));
    }
    return out;
}

void CounterApp::copy_state_from(const TileApp& source) {
    const auto* src = dynamic_cast<const CounterApp*>(&source);
    if (src == nullptr)
        throw Error(ErrorCode::SourceInvalid, "resync source is not a CounterApp");
    value_ = src->value_;
    steps_ = src->steps_;
}

std::unique_ptr<TileApp> CounterApp::clone() const {
    return std::make_unique<CounterApp>(*this);
}

void CounterApp::flip_state_bit(std::uint64_t payload, std::uint64_t /*seed*/) {
    // 128 bits of live state; the payload addresses them directly.
    const std::uint64_t bit = payload % 128;
    if (bit < 64)
        value_ ^= 1ull << bit;
    else
        steps_ ^= 1ull << (bit - 64);
}

} // namespace tilevote
