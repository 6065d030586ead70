#include "fogfleet/topology.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <stdexcept>

namespace fogfleet::discovery {

std::size_t topology_tree::node_count() const {
    std::set<peer_guid> nodes;
    nodes.insert(root);
    for (const auto& [parent, kids] : children) {
        nodes.insert(parent);
        nodes.insert(kids.begin(), kids.end());
    }
    return nodes.size();
}

std::vector<peer_guid> flatten(const topology_tree& tree) {
    std::vector<peer_guid> order;
    std::set<peer_guid> visited;
    std::deque<peer_guid> frontier{tree.root};
    while (!frontier.empty()) {
        peer_guid node = frontier.front();
        frontier.pop_front();
        if (!visited.insert(node).second)
            throw std::runtime_error("topology: cycle detected (node " + node.hex() +
                                     " reachable twice)");
        order.push_back(node);
        auto it = tree.children.find(node);
        if (it == tree.children.end()) continue;
        std::vector<peer_guid> kids = it->second;
        std::sort(kids.begin(), kids.end());
        for (const auto& k : kids) frontier.push_back(k);
    }
    if (order.size() != tree.node_count())
        throw std::runtime_error("topology: nodes unreachable from root");
    return order;
}

const std::vector<peer_guid>& forward_targets(const topology_tree& tree, const peer_guid& at) {
    static const std::vector<peer_guid> none;
    auto it = tree.children.find(at);
    return it == tree.children.end() ? none : it->second;
}

wire::envelope mark_forwarded(wire::envelope e) {
    e.flags |= wire::flag_gateway_forwarded;
    return e;
}

}  // namespace fogfleet::discovery
