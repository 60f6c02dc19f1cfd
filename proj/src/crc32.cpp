#include "tilevote/crc32.hpp"

#include <array>

namespace tilevote {
namespace {

constexpr std::uint32_t kPolynomial = 0xEDB88320u;

// Slice-by-8 tables. Table 0 is the classic byte table; table k folds a byte
// that sits k positions deeper into the window.
struct Tables {
    std::array<std::array<std::uint32_t, 256>, 8> t{};
};

Tables build_tables() {
    Tables tb;
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int bit = 0; bit < 8; ++bit)
            c = (c & 1u) ? (c >> 1) ^ kPolynomial : (c >> 1);
        tb.t[0][i] = c;
    }
    for (std::uint32_t i = 0; i < 256; ++i)
        for (std::size_t k = 1; k < 8; ++k)
            tb.t[k][i] = (tb.t[k - 1][i] >> 8) ^ tb.t[0][tb.t[k - 1][i] & 0xFFu];
    return tb;
}

const Tables& tables() {
    static const Tables tb = build_tables();
    return tb;
}

} // namespace

std::uint32_t crc32_init() { return 0xFFFFFFFFu; }

std::uint32_t crc32_update(std::uint32_t state, std::span<const std::uint8_t> data) {
    const Tables& tb = tables();
    const std::uint8_t* p = data.data();
    std::size_t n = data.size();
    std::uint32_t crc = state;

    while (n >= 8) {
        std::uint32_t lo = static_cast<std::uint32_t>(p[0]) |
                           (static_cast<std::uint32_t>(p[1]) << 8) |
                           (static_cast<std::uint32_t>(p[2]) << 16) |
                           (static_cast<std::uint32_t>(p[3]) << 24);
        lo ^= crc;
        crc = tb.t[7][lo & 0xFFu] ^ tb.t[6][(lo >> 8) & 0xFFu] ^
              tb.t[5][(lo >> 16) & 0xFFu] ^ tb.t[4][lo >> 24] ^
              tb.t[3][p[4]] ^ tb.t[2][p[5]] ^ tb.t[1][p[6]] ^ tb.t[0][p[7]];
        p += 8;
        n -= 8;
    }
    while (n--) {
        crc = (crc >> 8) ^ tb.t[0][(crc ^ *p++) & 0xFFu];
    }
    return crc;
}

std::uint32_t crc32_final(std::uint32_t state) { return state ^ 0xFFFFFFFFu; }

std::uint32_t crc32(std::span<const std::uint8_t> data) {
    return crc32_final(crc32_update(crc32_init(), data));
}

std::uint32_t crc32(const void* data, std::size_t len) {
    return crc32({static_cast<const std::uint8_t*>(data), len});
}

} // namespace tilevote
