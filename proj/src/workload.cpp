#include "tilevote/workload.hpp"

#include <bit>
#include <cstring>
#include <string>

#include "tilevote/crc32.hpp"

namespace tilevote::workload {

namespace {

constexpr std::uint64_t kFrameSalt = 0x243F6A8885A308D3ull;
constexpr std::uint64_t kSaturationSalt = 0x13198A2E03707344ull;
constexpr std::uint64_t kFlipSalt = 0xA4093822299F31D0ull;

std::uint64_t frame_key(std::uint64_t seed, std::uint64_t frame_index) {
    return mix64(mix64(seed ^ kFrameSalt) + frame_index);
}

// Samples come four per mix64 draw; group g covers pixels [4g, 4g+4). The
// saturation draw only feeds a percent-level threshold, so a single
// multiply-rotate of the same draw is plenty.
inline void fill_sample_group(std::uint16_t* out, std::uint64_t n, std::uint64_t g,
                              std::uint64_t chan_key, std::uint32_t sat16) {
    const std::uint64_t h = mix64(chan_key + g);
    const std::uint64_t s = std::rotr(h ^ kSaturationSalt, 23) * 0x9FB21C651E98DF25ull;
    const std::uint64_t base = 4 * g;
    const std::uint64_t lanes = n - base < 4 ? n - base : 4;
    for (std::uint64_t lane = 0; lane < lanes; ++lane) {
        const std::uint16_t sample = static_cast<std::uint16_t>(h >> (16 * lane));
        const std::uint32_t sat_draw = static_cast<std::uint16_t>(s >> (16 * lane));
        out[base + lane] = sat_draw < sat16 ? kSaturationValue : sample;
    }
}

std::uint32_t saturation_threshold16(double fraction) {
    if (fraction <= 0.0)
        return 0;
    if (fraction >= 1.0)
        return 65536;
    return static_cast<std::uint32_t>(fraction * 65536.0);
}

template <bool Parallel>
Frame generate_frame_impl(std::uint64_t seed, std::uint64_t frame_index, FrameDims dims,
                          double saturated_fraction) {
    if (dims.width < 1 || dims.height < 1)
        throw Error(ErrorCode::ConfigInvalid, "frame dimensions must be at least 1x1");
    const std::uint64_t n = dims.pixels();
    const std::uint64_t groups = (n + 3) / 4;
    const std::uint32_t sat16 = saturation_threshold16(saturated_fraction);
    const std::uint64_t key = frame_key(seed, frame_index);

    Frame frame;
    frame.dims = dims;
    for (int c = 0; c < 3; ++c) {
        auto& chan = frame.channels[c];
        chan.resize(n);
        const std::uint64_t chan_key = mix64(key + static_cast<std::uint64_t>(c));
        std::uint16_t* out = chan.data();
        if constexpr (Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (long long g = 0; g < static_cast<long long>(groups); ++g)
                fill_sample_group(out, n, static_cast<std::uint64_t>(g), chan_key, sat16);
        } else {
            for (std::uint64_t g = 0; g < groups; ++g)
                fill_sample_group(out, n, g, chan_key, sat16);
        }
    }
    return frame;
}

template <bool Parallel>
void accumulate_impl(Accumulator& acc, const Frame& frame, std::uint16_t threshold) {
    if (!(acc.dims == frame.dims))
        throw Error(ErrorCode::DimensionMismatch, "frame does not match accumulator");
    const std::uint64_t n = acc.dims.pixels();
    for (int c = 0; c < 3; ++c) {
        const std::uint16_t* in = frame.channels[c].data();
        std::uint64_t* sums = acc.sums[c].data();
        std::uint32_t* counts = acc.counts[c].data();
        if constexpr (Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (long long i = 0; i < static_cast<long long>(n); ++i) {
                const std::uint16_t v = in[i];
                if (v < threshold) {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
        } else {
            for (std::uint64_t i = 0; i < n; ++i) {
                const std::uint16_t v = in[i];
                if (v < threshold) {
                    sums[i] += v;
                    counts[i] += 1;
                }
            }
        }
    }
    ++acc.frames_accumulated;
}

template <bool Parallel>
std::array<std::vector<std::uint16_t>, 3> finalize_impl(const Accumulator& acc) {
    if (acc.frames_accumulated == 0)
        throw Error(ErrorCode::EmptyAccumulator, "no frames accumulated");
    const std::uint64_t n = acc.dims.pixels();
    std::array<std::vector<std::uint16_t>, 3> means;
    for (int c = 0; c < 3; ++c) {
        means[c].resize(n);
        const std::uint64_t* sums = acc.sums[c].data();
        const std::uint32_t* counts = acc.counts[c].data();
        std::uint16_t* out = means[c].data();
        if constexpr (Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
            for (long long i = 0; i < static_cast<long long>(n); ++i)
                out[i] = counts[i] ? static_cast<std::uint16_t>(sums[i] / counts[i]) : 0;
        } else {
            for (std::uint64_t i = 0; i < n; ++i)
                out[i] = counts[i] ? static_cast<std::uint16_t>(sums[i] / counts[i]) : 0;
        }
    }
    return means;
}

// One postprocessing run: a branchy integer pass over one accumulator row.
std::uint32_t postprocess_run(const Accumulator& acc, std::uint32_t d, std::uint64_t r) {
    const std::uint32_t W = acc.dims.width;
    const std::uint32_t H = acc.dims.height;
    const int c = static_cast<int>(r % 3);
    const std::uint32_t row = (d + static_cast<std::uint32_t>(r) * 2654435761u) % H;
    const std::uint64_t* sums = acc.sums[c].data() + static_cast<std::uint64_t>(row) * W;
    const std::uint32_t* counts = acc.counts[c].data() + static_cast<std::uint64_t>(row) * W;
    for (std::uint32_t x = 0; x < W; ++x) {
        const std::uint64_t s = sums[x];
        if (s & 1)
            d = std::rotl(d, 7) ^ static_cast<std::uint32_t>(s);
        else
            d = d * 2654435761u + static_cast<std::uint32_t>(s >> 21) + x;
        if ((x & 15u) == 0)
            d += counts[x] ^ (d >> 16);
    }
    return d ^ (d >> 13);
}

void store_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void store_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

} // namespace

Accumulator::Accumulator(FrameDims d) : dims(d) {
    if (dims.width < 1 || dims.height < 1)
        throw Error(ErrorCode::ConfigInvalid, "accumulator dimensions must be at least 1x1");
    const std::uint64_t n = dims.pixels();
    for (int c = 0; c < 3; ++c) {
        sums[c].assign(n, 0);
        counts[c].assign(n, 0);
    }
}

const std::array<WorkloadMode, 6>& standard_modes() {
    static const std::array<WorkloadMode, 6> modes = {{
        {"very_compute_heavy", 60000},
        {"compute_heavy", 75000},
        {"balanced_compute_heavy", 90000},
        {"balanced_data_heavy", 105000},
        {"data_heavy", 135000},
        {"very_data_heavy", 150000},
    }};
    return modes;
}

const WorkloadMode* find_mode(const std::string& name) {
    for (const WorkloadMode& m : standard_modes())
        if (name == m.name)
            return &m;
    return nullptr;
}

Frame generate_frame(std::uint64_t seed, std::uint64_t frame_index, FrameDims dims,
                     double saturated_fraction) {
    return generate_frame_impl<false>(seed, frame_index, dims, saturated_fraction);
}

Frame generate_frame_parallel(std::uint64_t seed, std::uint64_t frame_index, FrameDims dims,
                              double saturated_fraction) {
    return generate_frame_impl<true>(seed, frame_index, dims, saturated_fraction);
}

void accumulate(Accumulator& acc, const Frame& frame, std::uint16_t saturation_threshold) {
    accumulate_impl<false>(acc, frame, saturation_threshold);
}

void accumulate_parallel(Accumulator& acc, const Frame& frame,
                         std::uint16_t saturation_threshold) {
    accumulate_impl<true>(acc, frame, saturation_threshold);
}

std::array<std::vector<std::uint16_t>, 3> finalize_average(const Accumulator& acc) {
    return finalize_impl<false>(acc);
}

std::array<std::vector<std::uint16_t>, 3> finalize_average_parallel(const Accumulator& acc) {
    return finalize_impl<true>(acc);
}

std::uint32_t postprocess(const Accumulator& acc, std::uint64_t runs, std::uint32_t digest) {
    for (std::uint64_t r = 0; r < runs; ++r)
        digest = postprocess_run(acc, digest, r);
    return digest;
}

std::uint32_t accumulator_crc(const Accumulator& acc) {
    std::uint32_t state = crc32_init();
    for (int c = 0; c < 3; ++c) {
        state = crc32_update(
            state, {reinterpret_cast<const std::uint8_t*>(acc.sums[c].data()),
                    acc.sums[c].size() * sizeof(std::uint64_t)});
        state = crc32_update(
            state, {reinterpret_cast<const std::uint8_t*>(acc.counts[c].data()),
                    acc.counts[c].size() * sizeof(std::uint32_t)});
    }
    return crc32_final(state);
}

std::vector<std::uint8_t> serialize_state(const Accumulator& acc,
                                          const ProgressCounters& counters) {
    std::vector<std::uint8_t> out(32);
    store_u64(out.data(), counters.frames_processed);
    store_u64(out.data() + 8, counters.postprocess_runs_done);
    store_u32(out.data() + 16, counters.postprocess_digest);
    store_u32(out.data() + 20, accumulator_crc(acc));
    store_u32(out.data() + 24, acc.dims.width);
    store_u32(out.data() + 28, acc.dims.height);
    return out;
}

MiriApp::MiriApp(const MiriConfig& config) : config_(config), acc_(config.dims) {
    if (config_.total_frames < 1)
        throw Error(ErrorCode::ConfigInvalid, "total_frames must be >= 1");
}

void MiriApp::run_tick(std::uint32_t base_units) {
    for (std::uint32_t u = 0; u < base_units; ++u) {
        if (complete())
            return;
        step_frame();
    }
}

void MiriApp::step_frame() {
    const std::uint64_t i = counters_.frames_processed;
    const Frame frame =
        config_.parallel_kernels
            ? generate_frame_parallel(config_.seed, i, config_.dims, config_.saturated_fraction)
            : generate_frame(config_.seed, i, config_.dims, config_.saturated_fraction);
    if (config_.parallel_kernels)
        accumulate_parallel(acc_, frame);
    else
        accumulate(acc_, frame);

    // even split of the postprocessing budget, exact in total
    const std::uint64_t f = config_.total_frames;
    const std::uint64_t r = config_.postprocess_total_runs;
    const std::uint64_t quota = r * (i + 1) / f - r * i / f;
    counters_.postprocess_digest = postprocess(acc_, quota, counters_.postprocess_digest);
    counters_.postprocess_runs_done += quota;
    counters_.frames_processed = i + 1;
}

std::vector<std::uint8_t> MiriApp::checkpoint_state() const {
    return serialize_state(acc_, counters_);
}

void MiriApp::copy_state_from(const TileApp& source) {
    const auto* src = dynamic_cast<const MiriApp*>(&source);
    if (src == nullptr || !(src->config_.dims == config_.dims))
        throw Error(ErrorCode::SourceInvalid, "resync source is not a matching MiriApp");
    acc_ = src->acc_;
    counters_ = src->counters_;
}

std::unique_ptr<TileApp> MiriApp::clone() const { return std::make_unique<MiriApp>(*this); }

void MiriApp::flip_state_bit(std::uint64_t payload, std::uint64_t seed) {
    // Live state far exceeds the checkpoint buffer, so the (payload, seed)
    // pair is spread over the whole accumulator.
    const std::uint64_t n = acc_.dims.pixels();
    const std::uint64_t bytes_per_channel = n * (sizeof(std::uint64_t) + sizeof(std::uint32_t));
    const std::uint64_t total_bits = 8 * 3 * bytes_per_channel;
    const std::uint64_t bit = mix64(mix64(seed ^ kFlipSalt) + payload) % total_bits;

    const int c = static_cast<int>(bit / (8 * bytes_per_channel));
    std::uint64_t rem = bit % (8 * bytes_per_channel);
    std::uint8_t* base;
    if (rem < 8 * n * sizeof(std::uint64_t)) {
        base = reinterpret_cast<std::uint8_t*>(acc_.sums[c].data());
    } else {
        rem -= 8 * n * sizeof(std::uint64_t);
        base = reinterpret_cast<std::uint8_t*>(acc_.counts[c].data());
    }
    base[rem / 8] ^= static_cast<std::uint8_t>(1u << (rem % 8));
}

std::array<std::vector<std::uint16_t>, 3> MiriApp::final_output() const {
    return config_.parallel_kernels ? finalize_average_parallel(acc_) : finalize_average(acc_);
}

std::uint64_t MiriApp::ticks_to_complete(std::uint64_t total_frames, std::uint32_t base_units) {
    return (total_frames + base_units - 1) / base_units;
}

} // namespace tilevote::workload
