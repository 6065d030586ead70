#pragma once

#include <map>
#include <string>
#include <vector>

#include "fogfleet/reliability.hpp"
#include "fogfleet/sim/scenario.hpp"

namespace fogfleet::sim {

// Runs the scenario once. Deterministic: identical config and seed produce
// an identical trace, bit for bit.
sim_result run(const scenario_config& config);

// Restriction of a scenario to one server (all interfaces kept), for
// single-server baselines. Faults referencing other servers are retained but
// have no effect.
scenario_config restrict_to_server(const scenario_config& config, std::size_t server_idx);

struct variant_summary {
    std::string name;
    reliability::latency_summary latency;       // over delivered requests
    double timeout_fraction = 0;
    std::uint64_t requests = 0;
    std::uint64_t egress_bytes = 0;
};

struct comparison {
    std::vector<variant_summary> variants;
    // improvement[v] of the replicated variant vs variant v: >1 means the
    // replicated deployment is faster.
    std::map<std::string, double> mean_improvement;
    std::map<std::string, double> p99_improvement;
};

// Runs every variant under the same seed and fault schedule (common random
// numbers) and summarizes.
comparison compare(const scenario_config& config, const std::vector<variant_spec>& variants);

variant_summary summarize_trace(const std::string& name, const std::vector<trace_record>& trace);

}  // namespace fogfleet::sim
