#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tilevote/crc32.hpp"
#include "tilevote/validation_memory.hpp"

using namespace tilevote;

namespace {

ThreadGroup make_group(GroupId id, std::vector<TileId> members, std::uint32_t period,
                       std::uint32_t slot) {
    ThreadGroup g;
    g.group_id = id;
    g.members = std::move(members);
    g.period = period;
    g.slot = slot;
    return g;
}

} // namespace

TEST_CASE("gcd basics") {
    CHECK(gcd(12, 8) == 4);
    CHECK(gcd(7, 7) == 7);
    // operands from the workload mode table
    CHECK(gcd(60000, 150000) == 30000);
    CHECK(oracles::gcd_bruteforce(60000, 150000) == 30000);

    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const std::uint32_t a = 1 + rng() % 500;
        const std::uint32_t b = 1 + rng() % 500;
        CHECK(gcd(a, b) == oracles::gcd_bruteforce(a, b));
    }
}

TEST_CASE("registering a single group") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 10, 0));
    for (TileId t = 0; t < 3; ++t) {
        const ValidationMemory& vm = bank.read(t);
        CHECK(vm.global_checkpoint_freq == 10);
        CHECK(vm.threads[0].checkpoint_interval == 1);
        CHECK(vm.threads[0].next_check == 1);
        CHECK((vm.member_of_thread_group & 1u) != 0);
    }
}

TEST_CASE("second group recomputes intervals via the gcd") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 10, 0));
    register_thread_group(bank, make_group(1, {0, 1, 2}, 15, 1));
    const ValidationMemory& vm = bank.read(0);
    CHECK(vm.global_checkpoint_freq == 5);
    CHECK(vm.threads[0].checkpoint_interval == 2);
    CHECK(vm.threads[1].checkpoint_interval == 3);
    // the first slot's pending countdown was clamped to its new interval
    CHECK(vm.threads[0].next_check <= 2);
}

TEST_CASE("registration errors") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 10, 0));
    CHECK_THROWS_AS(register_thread_group(bank, make_group(0, {0, 1}, 10, 1)), Error);
    CHECK_THROWS_AS(register_thread_group(bank, make_group(1, {0, 1}, 10, 0)), Error); // slot
    CHECK_THROWS_AS(register_thread_group(bank, make_group(32, {0}, 10, 2)), Error);   // id cap

    try {
        register_thread_group(bank, make_group(0, {0}, 10, 3));
        FAIL("expected GroupIdInUse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GroupIdInUse);
    }
    try {
        register_thread_group(bank, make_group(2, {1}, 10, 0));
        FAIL("expected SlotOccupied");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SlotOccupied);
    }
    try {
        register_thread_group(bank, make_group(33, {1}, 10, 9));
        FAIL("expected TooManyGroups");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooManyGroups);
    }
}

TEST_CASE("global frequency equals the gcd fold of registered periods") {
    std::mt19937_64 rng(1234);
    for (int iter = 0; iter < 300; ++iter) {
        ValidationMemoryBank bank;
        const int n_groups = 1 + static_cast<int>(rng() % 6);
        std::uint32_t prev_freq = 0;
        std::vector<std::uint32_t> periods;
        for (int gi = 0; gi < n_groups; ++gi) {
            const std::uint32_t period = 1 + static_cast<std::uint32_t>(rng() % 120);
            periods.push_back(period);
            register_thread_group(
                bank, make_group(static_cast<GroupId>(gi), {0, 1, 2}, period,
                                 static_cast<std::uint32_t>(gi)));

            const ValidationMemory& vm = bank.read(0);
            const std::uint32_t folded =
                std::accumulate(periods.begin(), periods.end(), periods[0],
                                [](std::uint32_t a, std::uint32_t b) { return gcd(a, b); });
            CHECK(vm.global_checkpoint_freq == folded);
            // non-increasing across registrations
            if (prev_freq != 0)
                CHECK(vm.global_checkpoint_freq <= prev_freq);
            prev_freq = vm.global_checkpoint_freq;
            // every interval reconstructs its period exactly
            for (std::size_t s = 0; s < periods.size(); ++s) {
                CHECK(vm.threads[s].checkpoint_interval * vm.global_checkpoint_freq ==
                      periods[s]);
                CHECK(vm.threads[s].next_check <= vm.threads[s].checkpoint_interval);
                CHECK(vm.threads[s].next_check >= 1);
            }
        }
    }
}

TEST_CASE("publish_checkpoint") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 10, 0));

    SUBCASE("empty state") {
        const ThreadInfo& info = publish_checkpoint(bank, 0, 0, 0, {});
        CHECK(info.len == 0);
        CHECK(info.csum == 0x00000000u);
        CHECK(info.cs_valid());
    }
    SUBCASE("known checksum") {
        const std::uint8_t msg[] = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
        const ThreadInfo& info = publish_checkpoint(bank, 0, 0, 0, msg);
        CHECK(info.csum == 0xCBF43926u);
        CHECK(info.len == 9);
    }
    SUBCASE("publish clears a failure flag") {
        bank.writable(1, 1).threads[0].status |= THREAD_FAILURE;
        const std::uint8_t msg[] = {1};
        const ThreadInfo& info = publish_checkpoint(bank, 1, 1, 0, msg);
        CHECK(info.cs_valid());
        CHECK(!info.failed());
    }
    SUBCASE("non-owner publish is rejected and audited") {
        const std::uint8_t msg[] = {1};
        try {
            publish_checkpoint(bank, 1, 0, 0, msg);
            FAIL("expected NotOwner");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NotOwner);
        }
        CHECK(bank.audit().rejected == 1);
        CHECK(bank.audit().cross_tile_writes() == 0);
    }
    SUBCASE("oversized state") {
        std::vector<std::uint8_t> big(bank.state_buffer_size() + 1);
        try {
            publish_checkpoint(bank, 0, 0, 0, big);
            FAIL("expected BufferOverflow");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::BufferOverflow);
        }
    }
}

TEST_CASE("read_sibling") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 10, 0));
    const std::uint8_t msg[] = {9, 8, 7};
    publish_checkpoint(bank, 2, 2, 0, msg);

    SUBCASE("read-back equals published values") {
        const ThreadInfo snap = read_sibling(bank, 2, 0);
        CHECK(snap.len == 3);
        CHECK(snap.csum == crc32(msg, 3));
        CHECK(snap.cs_valid());
        CHECK(snap.state == std::vector<std::uint8_t>({9, 8, 7}));
    }
    SUBCASE("broken tile stays readable, status visible") {
        bank.writable(kSupervisorActor, 2).status = TILE_BROKEN;
        CHECK((bank.read(2).status & TILE_BROKEN) != 0);
        const ThreadInfo snap = read_sibling(bank, 2, 0);
        CHECK(snap.len == 3); // caller decides what to do with it
    }
    SUBCASE("bounds") {
        try {
            read_sibling(bank, 2, bank.num_threads());
            FAIL("expected NoSuchSlot");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoSuchSlot);
        }
        try {
            read_sibling(bank, 5, 0);
            FAIL("expected NoSuchTile");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NoSuchTile);
        }
    }
}

TEST_CASE("dynamic region is scratch space, untouched by the protocol") {
    ValidationMemoryBank bank;
    register_thread_group(bank, make_group(0, {0, 1, 2}, 4, 0));
    bank.writable(0, 0).dynamic["note"] = "local";
    publish_checkpoint(bank, 0, 0, 0, {});
    CHECK(bank.read(0).dynamic.at("note") == "local");
}
