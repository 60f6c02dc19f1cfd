#ifndef TILEVOTE_SCENARIO_HPP
#define TILEVOTE_SCENARIO_HPP

#include <iosfwd>
#include <string>

#include "tilevote/simulator.hpp"
#include "tilevote/workload.hpp"

namespace tilevote {

// A simulation run as described by a key-value scenario file: tile count,
// thread groups, runtime mode, seed, workload parameters and an optional
// fault schedule reference. See README for the schema.
struct Scenario {
    SimulatorConfig sim;
    enum class Workload { Miri, Counter } workload = Workload::Miri;
    std::uint64_t frames = 60;
    std::uint32_t width = 256;
    std::uint32_t height = 256;
    std::uint64_t postproc_runs = 0;
    double saturated_fraction = 0.01;
    std::uint64_t ticks = 0;       // 0: derived from the workload
    std::string fault_file;        // as written in the file, not resolved
};

Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

// Application factory matching the scenario's workload; group g's replicas
// are seeded with mix64(sim.seed ^ group id).
AppFactory scenario_factory(const Scenario& scenario);

// Ticks to run: explicit `ticks`, or enough for the frame workload to
// complete (counter scenarios default to 30).
std::uint64_t scenario_ticks(const Scenario& scenario);

} // namespace tilevote

#endif
