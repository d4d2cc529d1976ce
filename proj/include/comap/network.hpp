#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace comap {

enum class GraphKind { Full, Chain };

// Per-edge delivery policy: Bernoulli drops when period == 0, otherwise an
// exchange every `period` iterations (both model the paper-style lossy link;
// a message is delivered instantly or lost, never delayed).
struct EdgePolicy {
    double drop_prob = 0.0;
    int period = 0;
};

struct CommGraph {
    int n_agents = 0;
    std::vector<std::pair<int, int>> edges;  // unordered pairs, i < j
    EdgePolicy policy;

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (n_agents < 1) errors.push_back("comm.n_agents: must be >= 1");
        for (const auto& [i, j] : edges) {
            if (i == j) errors.push_back("comm.edges: self-edge not allowed");
            if (i < 0 || j < 0 || i >= n_agents || j >= n_agents) {
                errors.push_back("comm.edges: edge references unknown agent");
            }
        }
        if (policy.drop_prob < 0.0 || policy.drop_prob > 1.0) {
            errors.push_back("comm.drop_prob: must be in [0, 1]");
        }
        if (policy.period < 0) errors.push_back("comm.period: must be >= 0");
        return errors;
    }
};

inline CommGraph topology(GraphKind kind, int n_agents) {
    if (n_agents < 1) throw std::invalid_argument("topology: need n_agents >= 1");
    CommGraph g;
    g.n_agents = n_agents;
    if (kind == GraphKind::Full) {
        for (int i = 0; i < n_agents; ++i) {
            for (int j = i + 1; j < n_agents; ++j) g.edges.emplace_back(i, j);
        }
    } else {
        for (int i = 0; i + 1 < n_agents; ++i) g.edges.emplace_back(i, i + 1);
    }
    return g;
}

struct CommEvent {
    int from = 0;
    int to = 0;
    bool delivered = false;
    size_t bytes = 0;
};

// One synchronization point per iteration: every directed neighbor pair
// attempts a send; drops are sampled independently per direction. `deliver`
// is invoked for each successful transfer and is expected to move the
// sender's encoded snapshot into the receiver's cache.
template <class Deliver>
std::vector<CommEvent> broadcast_round(const CommGraph& graph, int64_t t,
                                       std::mt19937_64& rng, size_t message_bytes,
                                       Deliver&& deliver) {
    std::vector<CommEvent> events;
    events.reserve(graph.edges.size() * 2);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const auto& [i, j] : graph.edges) {
        for (const auto& [from, to] : {std::pair<int, int>{i, j}, {j, i}}) {
            bool delivered;
            if (graph.policy.period > 0) {
                delivered = (t % graph.policy.period) == 0;
            } else {
                delivered = uni(rng) >= graph.policy.drop_prob;
            }
            if (delivered) deliver(from, to, t);
            events.push_back({from, to, delivered, message_bytes});
        }
    }
    return events;
}

}  // namespace comap
