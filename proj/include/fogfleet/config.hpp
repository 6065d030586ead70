#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fogfleet/sim/scenario.hpp"

namespace fogfleet::config {

class config_error : public std::runtime_error {
public:
    config_error(const std::string& field, const std::string& problem)
        : std::runtime_error("config error at '" + field + "': " + problem), field_(field) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

sim::scenario_config load_scenario(const std::string& path);
sim::scenario_config parse_scenario(const std::string& json_text);

// Demo / launch configuration: local-process fleet over loopback UDP.
struct demo_script_step {
    std::uint64_t at_request = 0;
    std::string action;  // kill_server | relaunch_server | kill_directory
    std::size_t server = 0;
};

struct demo_config {
    std::string service_name = "echo";
    int replicas = 2;
    double deadline_ms = 1000;
    double request_interval_ms = 50;
    std::uint32_t payload_bytes = 32;
    int interfaces = 1;
    double compute_delay_ms = 0;  // synthetic service delay per request
    std::vector<demo_script_step> script;
};

demo_config load_demo(const std::string& path);
demo_config parse_demo(const std::string& json_text);

latency_distribution parse_latency(const std::string& json_text);  // for tests

}  // namespace fogfleet::config
