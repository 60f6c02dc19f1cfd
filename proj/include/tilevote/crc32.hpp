#ifndef TILEVOTE_CRC32_HPP
#define TILEVOTE_CRC32_HPP

#include <cstddef>
#include <cstdint>
#include <span>

namespace tilevote {

// Reflected CRC-32: polynomial 0xEDB88320, init 0xFFFFFFFF, final xor
// 0xFFFFFFFF. Checksums published into validation memory must be
// bit-identical across every tile, so the algorithm is pinned here instead
// of delegating to whatever library a platform happens to ship.
std::uint32_t crc32(std::span<const std::uint8_t> data);

// Streaming form: feed `state` from crc32_init() through crc32_update() and
// finish with crc32_final(). Used for digesting large buffers piecewise.
std::uint32_t crc32_init();
std::uint32_t crc32_update(std::uint32_t state, std::span<const std::uint8_t> data);
std::uint32_t crc32_final(std::uint32_t state);

std::uint32_t crc32(const void* data, std::size_t len);

} // namespace tilevote

#endif
