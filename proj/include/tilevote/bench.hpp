#ifndef TILEVOTE_BENCH_HPP
#define TILEVOTE_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tilevote/simulator.hpp"
#include "tilevote/stats.hpp"
#include "tilevote/workload.hpp"

namespace tilevote::bench {

// One timed run. The reference arm (protected_run = false) executes the same
// three replicas with the validation machinery disabled, so the difference
// between the arms is the protection overhead itself; its check_period is
// recorded as 0.
struct BenchRecord {
    std::string mode;
    std::uint32_t postproc_runs = 0;
    std::uint32_t check_period = 0;
    bool protected_run = false;
    std::uint32_t run_index = 0;
    std::uint64_t wall_ns = 0;
    std::uint64_t frames = 0;
};

inline constexpr const char* kCsvHeader =
    "mode,postproc_runs,check_period,protected,run_idx,wall_ns,frames";

struct ExperimentConfig {
    std::vector<std::string> modes;        // names from workload::standard_modes
    std::vector<std::uint32_t> periods;    // checking periods, in frames
    std::uint32_t reps = 10;
    enum class Scale { Desk, Paper } scale = Scale::Desk;
    RunMode runtime = RunMode::Concurrent;
    std::uint64_t seed = 1;
    std::uint32_t tile_count = 3;
    bool parallel_kernels = false;

    workload::FrameDims dims() const;
    std::uint64_t frames() const;
};

// Output fingerprint of one run, for the protection-transparency check:
// every run of a mode, protected or not, at any period, must produce the
// same bits.
struct RunOutput {
    std::string mode;
    std::uint32_t check_period = 0;
    bool protected_run = false;
    std::uint32_t run_index = 0;
    std::uint32_t fingerprint = 0;
};

struct ExperimentResult {
    std::vector<BenchRecord> records;
    std::vector<RunOutput> outputs;
};

// True when all runs of each mode agree on the output fingerprint.
bool outputs_equivalent(const ExperimentResult& result);

// Full sweep: for every (mode, period) cell, `reps` timed protected runs
// under the tile runtime, plus `reps` unprotected reference runs per mode.
// Both arms use identical seeds. Timing covers the frame-processing region
// only. Throws ConfigInvalid on bad parameters.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct CellStats {
    std::string mode;
    std::uint32_t postproc_runs = 0;
    std::uint32_t check_period = 0;
    bool protected_run = false;
    std::size_t runs = 0;
    stats::Quartiles wall_ns;
};

struct DegradationRow {
    std::string mode;
    std::uint32_t postproc_runs = 0;
    std::uint32_t check_period = 0;
    double median_protected_ns = 0;
    double median_unprotected_ns = 0;
    double degradation = 0; // (median_prot - median_unprot) / median_unprot
};

struct SummaryStats {
    std::vector<CellStats> cells;
    std::vector<DegradationRow> degradation;
};

// Medians, quartiles and relative degradation per experiment cell. Throws
// MissingReferenceArm when a mode has protected runs but no reference arm.
SummaryStats summarize(std::span<const BenchRecord> records);

void write_csv(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> parse_csv(std::istream& in);

void print_summary(std::ostream& out, const SummaryStats& summary);

} // namespace tilevote::bench

#endif
