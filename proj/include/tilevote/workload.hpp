#ifndef TILEVOTE_WORKLOAD_HPP
#define TILEVOTE_WORKLOAD_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tilevote/apps.hpp"
#include "tilevote/errors.hpp"

namespace tilevote::workload {

struct FrameDims {
    std::uint32_t width = 256;
    std::uint32_t height = 256;

    std::uint64_t pixels() const {
        return static_cast<std::uint64_t>(width) * height;
    }
    bool operator==(const FrameDims&) const = default;
};

// One synthetic capture: three 16-bit false-color channels.
struct Frame {
    FrameDims dims;
    std::array<std::vector<std::uint16_t>, 3> channels;
};

// Per-pixel running sums and contribution counts, one pair per channel.
// Saturated samples are excluded, so counts differ per pixel.
struct Accumulator {
    explicit Accumulator(FrameDims dims);

    FrameDims dims;
    std::array<std::vector<std::uint64_t>, 3> sums;
    std::array<std::vector<std::uint32_t>, 3> counts;
    std::uint64_t frames_accumulated = 0;
};

// Samples at or above this value count as saturated and never contribute
// to the averages.
constexpr std::uint16_t kSaturationThreshold = 0xFFF0;
constexpr std::uint16_t kSaturationValue = 0xFFFF;

struct WorkloadMode {
    const char* name;
    std::uint32_t postprocessing_runs;
};

// The six benchmark modes, ordered by postprocessing volume. Data-heavy
// modes carry more postprocessing runs per experiment.
const std::array<WorkloadMode, 6>& standard_modes();
const WorkloadMode* find_mode(const std::string& name);

// Deterministic synthetic sensor frame: uniform 16-bit samples with
// `saturated_fraction` of the pixels forced to the saturation value. Pure
// in (seed, frame_index, dims), so replicas generate identical input.
Frame generate_frame(std::uint64_t seed, std::uint64_t frame_index, FrameDims dims,
                     double saturated_fraction = 0.01);

// Adds every unsaturated sample to the running sums. Throws
// DimensionMismatch when the frame does not match the accumulator.
void accumulate(Accumulator& acc, const Frame& frame,
                std::uint16_t saturation_threshold = kSaturationThreshold);

// floor(sum / count) per pixel and channel; 0 where every sample was
// saturated. Throws EmptyAccumulator before the first frame.
std::array<std::vector<std::uint16_t>, 3> finalize_average(const Accumulator& acc);

// OpenMP variants of the pixel kernels. Bit-identical to the serial forms
// (per-pixel work is independent); the serial forms stay as the reference
// the tests compare against.
Frame generate_frame_parallel(std::uint64_t seed, std::uint64_t frame_index, FrameDims dims,
                              double saturated_fraction = 0.01);
void accumulate_parallel(Accumulator& acc, const Frame& frame,
                         std::uint16_t saturation_threshold = kSaturationThreshold);
std::array<std::vector<std::uint16_t>, 3> finalize_average_parallel(const Accumulator& acc);

constexpr std::uint32_t kPostprocessSeed = 0x9E3779B9u;

// `runs` passes of a fixed integer kernel (adds, compares, branches) over
// the accumulator, chained through `digest` so no pass can be elided.
// Sequential by construction; runtime is linear in `runs`.
std::uint32_t postprocess(const Accumulator& acc, std::uint64_t runs,
                          std::uint32_t digest = kPostprocessSeed);

struct ProgressCounters {
    std::uint64_t frames_processed = 0;
    std::uint64_t postprocess_runs_done = 0;
    std::uint32_t postprocess_digest = kPostprocessSeed;

    bool operator==(const ProgressCounters&) const = default;
};

// Fixed 32-byte checkpoint digest: progress counters plus a rolling CRC
// over the accumulator contents. Identical across fault-free replicas at
// the same checkpoint; any single-bit divergence in the accumulator flips
// the CRC (CRC-32 detects all bursts up to 32 bits; wider corruption can
// collide with probability 2^-32).
std::vector<std::uint8_t> serialize_state(const Accumulator& acc,
                                          const ProgressCounters& counters);

std::uint32_t accumulator_crc(const Accumulator& acc);

struct MiriConfig {
    std::uint64_t seed = 1;
    FrameDims dims{256, 256};
    std::uint64_t total_frames = 60;
    std::uint64_t postprocess_total_runs = 0; // spread evenly over the frames
    double saturated_fraction = 0.01;
    bool parallel_kernels = false;
};

// The frame-processing application as a replicated tile thread: one frame
// per base-time unit, each followed by its share of the postprocessing
// budget, checkpointed as the 32-byte digest above.
class MiriApp : public TileApp {
public:
    explicit MiriApp(const MiriConfig& config);

    void run_tick(std::uint32_t base_units) override;
    std::vector<std::uint8_t> checkpoint_state() const override;
    void copy_state_from(const TileApp& source) override;
    std::unique_ptr<TileApp> clone() const override;
    void flip_state_bit(std::uint64_t payload, std::uint64_t seed) override;

    bool complete() const { return counters_.frames_processed >= config_.total_frames; }
    const Accumulator& accumulator() const { return acc_; }
    const ProgressCounters& counters() const { return counters_; }
    std::array<std::vector<std::uint16_t>, 3> final_output() const;

    // ticks to finish all frames at `base_units` per tick
    static std::uint64_t ticks_to_complete(std::uint64_t total_frames,
                                           std::uint32_t base_units);

private:
    void step_frame();

    MiriConfig config_;
    Accumulator acc_;
    ProgressCounters counters_;
};

} // namespace tilevote::workload

#endif
