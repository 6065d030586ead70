#pragma once

#include <map>
#include <vector>

#include "fogfleet/bytes.hpp"
#include "fogfleet/wire.hpp"

namespace fogfleet::discovery {

// Forwarding tree rooted at the robot's proxy: interior nodes are gateways,
// leaves are service replicas.
struct topology_tree {
    peer_guid root{};
    std::map<peer_guid, std::vector<peer_guid>> children;  // parent -> children

    std::size_t node_count() const;
};

// Breadth-first order from the root; siblings ascending by guid.
// Throws on a cycle or an unreachable node.
std::vector<peer_guid> flatten(const topology_tree& tree);

const std::vector<peer_guid>& forward_targets(const topology_tree& tree, const peer_guid& at);

// Copy relayed downstream by a gateway: identical frame, gateway flag set.
wire::envelope mark_forwarded(wire::envelope e);

}  // namespace fogfleet::discovery
