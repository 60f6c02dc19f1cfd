#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>
#include <set>

#include "tilevote/crc32.hpp"
#include "tilevote/workload.hpp"

using namespace tilevote;
using namespace tilevote::workload;

namespace {

std::uint32_t frame_crc(const Frame& f) {
    std::uint32_t state = crc32_init();
    for (const auto& chan : f.channels)
        state = crc32_update(state, {reinterpret_cast<const std::uint8_t*>(chan.data()),
                                     chan.size() * sizeof(std::uint16_t)});
    return crc32_final(state);
}

} // namespace

TEST_CASE("frame generation is deterministic in (seed, index)") {
    const FrameDims dims{64, 64};
    CHECK(frame_crc(generate_frame(1, 0, dims)) == frame_crc(generate_frame(1, 0, dims)));
    CHECK(frame_crc(generate_frame(1, 0, dims)) != frame_crc(generate_frame(2, 0, dims)));
}

TEST_CASE("distinct frame indices give distinct frames") {
    const FrameDims dims{32, 32};
    std::set<std::uint32_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i)
        seen.insert(frame_crc(generate_frame(9, i, dims)));
    CHECK(seen.size() == 1000);
}

TEST_CASE("degenerate 1x1 frame") {
    const Frame f = generate_frame(3, 0, {1, 1});
    for (const auto& chan : f.channels)
        CHECK(chan.size() == 1);
}

TEST_CASE("forced saturation fraction is honored") {
    const FrameDims dims{256, 256};
    const Frame f = generate_frame(5, 0, dims, 0.01);
    std::uint64_t saturated = 0;
    for (const auto& chan : f.channels)
        for (std::uint16_t v : chan)
            if (v >= kSaturationThreshold)
                ++saturated;
    const double frac = static_cast<double>(saturated) / (3.0 * dims.pixels());
    CHECK(frac > 0.005);
    CHECK(frac < 0.02);

    const Frame none = generate_frame(5, 0, dims, 0.0);
    std::uint64_t forced = 0;
    for (const auto& chan : none.channels)
        for (std::uint16_t v : chan)
            if (v == kSaturationValue)
                ++forced;
    // only natural 0xFFFF draws remain, about 1 in 65536
    CHECK(forced < 32);
}

TEST_CASE("accumulate and finalize") {
    SUBCASE("constant frames average to the constant") {
        const FrameDims dims{4, 4};
        Accumulator acc(dims);
        Frame f;
        f.dims = dims;
        for (auto& chan : f.channels)
            chan.assign(dims.pixels(), 100);
        for (int i = 0; i < 5; ++i)
            accumulate(acc, f);
        const auto means = finalize_average(acc);
        for (const auto& chan : means)
            for (std::uint16_t m : chan)
                CHECK(m == 100);
    }
    SUBCASE("saturated samples are excluded from the mean") {
        const FrameDims dims{1, 1};
        Accumulator acc(dims);
        Frame f;
        f.dims = dims;
        for (auto& chan : f.channels)
            chan.assign(1, 100);
        accumulate(acc, f);
        for (auto& chan : f.channels)
            chan.assign(1, 0xFFFF);
        accumulate(acc, f);
        const auto means = finalize_average(acc);
        for (const auto& chan : means)
            CHECK(chan[0] == 100);
        CHECK(acc.counts[0][0] == 1);
    }
    SUBCASE("all-saturated pixel has count 0 and mean 0") {
        const FrameDims dims{1, 1};
        Accumulator acc(dims);
        Frame f;
        f.dims = dims;
        for (auto& chan : f.channels)
            chan.assign(1, 0xFFFF);
        accumulate(acc, f);
        CHECK(acc.counts[0][0] == 0);
        const auto means = finalize_average(acc);
        CHECK(means[0][0] == 0);
    }
    SUBCASE("integer division floors") {
        Accumulator acc({2, 1});
        acc.sums[0] = {3, 5};
        acc.counts[0] = {2, 2};
        acc.frames_accumulated = 2;
        const auto means = finalize_average(acc);
        CHECK(means[0][0] == 1);
        CHECK(means[0][1] == 2);
    }
    SUBCASE("single frame is the identity on unsaturated pixels") {
        const FrameDims dims{16, 16};
        const Frame f = generate_frame(77, 0, dims);
        Accumulator acc(dims);
        accumulate(acc, f);
        const auto means = finalize_average(acc);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < dims.pixels(); ++i) {
                if (f.channels[c][i] < kSaturationThreshold)
                    CHECK(means[c][i] == f.channels[c][i]);
                else
                    CHECK(means[c][i] == 0);
            }
    }
    SUBCASE("dimension mismatch") {
        Accumulator acc({4, 4});
        const Frame f = generate_frame(1, 0, {8, 8});
        CHECK_THROWS_AS(accumulate(acc, f), Error);
    }
    SUBCASE("empty accumulator") {
        Accumulator acc({4, 4});
        try {
            finalize_average(acc);
            FAIL("expected EmptyAccumulator");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyAccumulator);
        }
    }
}

TEST_CASE("saturation rule holds exhaustively on small frames") {
    const FrameDims dims{8, 8};
    std::mt19937_64 rng(14);
    for (int iter = 0; iter < 50; ++iter) {
        Accumulator acc(dims);
        std::array<std::vector<std::uint64_t>, 3> want_sums;
        std::array<std::vector<std::uint32_t>, 3> want_counts;
        for (int c = 0; c < 3; ++c) {
            want_sums[c].assign(dims.pixels(), 0);
            want_counts[c].assign(dims.pixels(), 0);
        }
        for (int fidx = 0; fidx < 4; ++fidx) {
            Frame f;
            f.dims = dims;
            for (int c = 0; c < 3; ++c) {
                f.channels[c].resize(dims.pixels());
                for (auto& v : f.channels[c])
                    v = static_cast<std::uint16_t>(rng());
            }
            accumulate(acc, f);
            for (int c = 0; c < 3; ++c)
                for (std::size_t i = 0; i < dims.pixels(); ++i)
                    if (f.channels[c][i] < kSaturationThreshold) {
                        want_sums[c][i] += f.channels[c][i];
                        want_counts[c][i] += 1;
                    }
        }
        CHECK(acc.sums == want_sums);
        CHECK(acc.counts == want_counts);
        // means stay within the contributing sample range by construction
        const auto means = finalize_average(acc);
        for (int c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < dims.pixels(); ++i) {
                if (want_counts[c][i] == 0) {
                    CHECK(means[c][i] == 0);
                } else {
                    CHECK(means[c][i] < kSaturationThreshold);
                    CHECK(std::uint64_t(means[c][i]) * want_counts[c][i] <= want_sums[c][i]);
                }
            }
    }
}

TEST_CASE("parallel kernels match the serial reference") {
    const FrameDims dims{96, 64};
    for (std::uint64_t i = 0; i < 4; ++i) {
        const Frame a = generate_frame(11, i, dims);
        const Frame b = generate_frame_parallel(11, i, dims);
        CHECK(a.channels == b.channels);
    }
    Accumulator s(dims), p(dims);
    for (std::uint64_t i = 0; i < 4; ++i) {
        accumulate(s, generate_frame(11, i, dims));
        accumulate_parallel(p, generate_frame(11, i, dims));
    }
    CHECK(s.sums == p.sums);
    CHECK(s.counts == p.counts);
    CHECK(finalize_average(s) == finalize_average_parallel(p));
}

TEST_CASE("postprocess") {
    const FrameDims dims{64, 64};
    Accumulator acc(dims);
    accumulate(acc, generate_frame(4, 0, dims));

    SUBCASE("zero runs returns the incoming digest") {
        CHECK(postprocess(acc, 0) == kPostprocessSeed);
        CHECK(postprocess(acc, 0, 123u) == 123u);
    }
    SUBCASE("deterministic") {
        CHECK(postprocess(acc, 500) == postprocess(acc, 500));
        CHECK(postprocess(acc, 500) != postprocess(acc, 501));
    }
    SUBCASE("chains across segments") {
        const std::uint32_t split = postprocess(acc, 300, postprocess(acc, 200));
        // chaining is not the same as one flat pass (row choice depends on
        // the digest), but both depend on every run
        CHECK(split != kPostprocessSeed);
    }
    SUBCASE("runtime grows linearly in runs") {
        using clock = std::chrono::steady_clock;
        const std::uint64_t runs[] = {15000, 30000, 60000, 120000};
        double t[4];
        for (int i = 0; i < 4; ++i) {
            double best = 1e300;
            for (int rep = 0; rep < 3; ++rep) {
                const auto t0 = clock::now();
                volatile std::uint32_t sink = postprocess(acc, runs[i]);
                (void)sink;
                const auto t1 = clock::now();
                best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
            }
            t[i] = best;
        }
        // least-squares fit t = a*runs + b, then R^2
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < 4; ++i) {
            sx += runs[i];
            sy += t[i];
            sxx += double(runs[i]) * runs[i];
            sxy += double(runs[i]) * t[i];
        }
        const double n = 4;
        const double a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double b = (sy - a * sx) / n;
        double ss_res = 0, ss_tot = 0;
        const double mean = sy / n;
        for (int i = 0; i < 4; ++i) {
            const double fit = a * runs[i] + b;
            ss_res += (t[i] - fit) * (t[i] - fit);
            ss_tot += (t[i] - mean) * (t[i] - mean);
        }
        const double r2 = 1.0 - ss_res / ss_tot;
        CAPTURE(t[0]);
        CAPTURE(t[3]);
        CHECK(r2 > 0.99);
    }
}

TEST_CASE("serialize_state") {
    const FrameDims dims{64, 64};
    MiriConfig cfg;
    cfg.seed = 6;
    cfg.dims = dims;
    cfg.total_frames = 8;
    cfg.postprocess_total_runs = 800;

    SUBCASE("identical replicas serialize identically at every checkpoint") {
        MiriApp a(cfg), b(cfg), c(cfg);
        for (int tick = 0; tick < 8; ++tick) {
            a.run_tick(1);
            b.run_tick(1);
            c.run_tick(1);
            const auto sa = a.checkpoint_state();
            CHECK(sa == b.checkpoint_state());
            CHECK(sa == c.checkpoint_state());
            CHECK(sa.size() == 32);
        }
    }
    SUBCASE("any single accumulator bit flip changes the bytes") {
        std::mt19937_64 rng(88);
        for (int trial = 0; trial < 1000; ++trial) {
            MiriApp a(cfg), b(cfg);
            a.run_tick(4);
            b.run_tick(4);
            b.flip_state_bit(rng(), rng());
            CHECK(a.checkpoint_state() != b.checkpoint_state());
        }
    }
}

TEST_CASE("the postprocessing budget is spent exactly, spread over frames") {
    MiriConfig cfg;
    cfg.seed = 2;
    cfg.dims = {16, 16};
    cfg.total_frames = 7;
    cfg.postprocess_total_runs = 100; // not divisible by 7
    MiriApp app(cfg);
    app.run_tick(7);
    CHECK(app.complete());
    CHECK(app.counters().postprocess_runs_done == 100);
    CHECK(app.counters().frames_processed == 7);
    // running past completion is a no-op
    app.run_tick(3);
    CHECK(app.counters().frames_processed == 7);
}
