#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>

#include "comap/network.hpp"
#include "comap/rng.hpp"
#include "comap/serialize.hpp"

using namespace comap;

TEST_CASE("topology") {
    const CommGraph chain = topology(GraphKind::Chain, 4);
    REQUIRE(chain.edges.size() == 3);
    CHECK(chain.edges[0] == std::pair<int, int>{0, 1});
    CHECK(chain.edges[1] == std::pair<int, int>{1, 2});
    CHECK(chain.edges[2] == std::pair<int, int>{2, 3});

    CHECK(topology(GraphKind::Full, 3).edges.size() == 3);
    CHECK(topology(GraphKind::Chain, 1).edges.empty());
    CHECK_THROWS_AS(topology(GraphKind::Full, 0), std::invalid_argument);
}

TEST_CASE("broadcast delivery endpoints") {
    CommGraph g = topology(GraphKind::Full, 3);

    SECTION("no drops delivers every directed edge") {
        g.policy.drop_prob = 0.0;
        std::mt19937_64 rng(1);
        int delivered = 0;
        const auto events =
            broadcast_round(g, 0, rng, 100, [&](int, int, int64_t) { ++delivered; });
        CHECK(delivered == 6);
        CHECK(events.size() == 6);
        for (const CommEvent& e : events) CHECK(e.delivered);
    }

    SECTION("full drop delivers nothing") {
        g.policy.drop_prob = 1.0;
        std::mt19937_64 rng(1);
        int delivered = 0;
        const auto events =
            broadcast_round(g, 0, rng, 100, [&](int, int, int64_t) { ++delivered; });
        CHECK(delivered == 0);
        for (const CommEvent& e : events) CHECK_FALSE(e.delivered);
    }

    SECTION("event accounting covers both directions of every edge") {
        g.policy.drop_prob = 0.5;
        std::mt19937_64 rng(5);
        const auto events = broadcast_round(g, 0, rng, 100, [](int, int, int64_t) {});
        CHECK(events.size() == 2 * g.edges.size());
    }
}

TEST_CASE("seeded drops reproduce exactly") {
    CommGraph g = topology(GraphKind::Full, 5);  // 10 edges
    g.policy.drop_prob = 0.5;

    const auto run = [&](uint64_t seed) {
        std::vector<bool> outcome;
        std::mt19937_64 rng = seeded_rng(seed, Stream::Comm, 0, 0);
        for (const CommEvent& e :
             broadcast_round(g, 0, rng, 10, [](int, int, int64_t) {})) {
            outcome.push_back(e.delivered);
        }
        return outcome;
    };
    CHECK(run(7) == run(7));
    CHECK(run(7) != run(8));
}

TEST_CASE("drops are independent per direction") {
    CommGraph g = topology(GraphKind::Chain, 2);
    g.policy.drop_prob = 0.5;
    std::mt19937_64 rng(3);
    bool saw_asymmetric = false;
    for (int t = 0; t < 200 && !saw_asymmetric; ++t) {
        const auto events = broadcast_round(g, t, rng, 10, [](int, int, int64_t) {});
        saw_asymmetric = events[0].delivered != events[1].delivered;
    }
    CHECK(saw_asymmetric);
}

TEST_CASE("periodic exchange delivers on multiples only") {
    CommGraph g = topology(GraphKind::Chain, 2);
    g.policy.period = 30;
    std::mt19937_64 rng(3);
    for (int64_t t = 0; t < 91; ++t) {
        const auto events = broadcast_round(g, t, rng, 10, [](int, int, int64_t) {});
        for (const CommEvent& e : events) {
            CHECK(e.delivered == (t % 30 == 0));
        }
    }
}

TEST_CASE("caches keep the last delivered payload bitwise") {
    CommGraph g = topology(GraphKind::Chain, 2);
    g.policy.drop_prob = 0.0;

    // Sender parameters change every round; receipt at t0 then total loss.
    std::vector<double> sender{0.0, 0.0};
    std::vector<uint32_t> counts{0, 0};
    struct Cache {
        std::vector<uint8_t> payload;
        int64_t t_old = -1;
    };
    Cache cache;

    const auto deliver = [&](int from, int to, int64_t t) {
        if (from == 0 && to == 1) {
            cache.payload = encode_wire(sender, 1, counts);
            cache.t_old = t;
        }
    };

    std::mt19937_64 rng(9);
    for (int64_t t = 0; t < 3; ++t) {
        sender[0] = 0.25 * static_cast<double>(t + 1);
        counts[0] = static_cast<uint32_t>(t);
        broadcast_round(g, t, rng, wire_size(2, false), deliver);
    }
    const std::vector<uint8_t> at_t2 = cache.payload;
    REQUIRE(cache.t_old == 2);

    g.policy.drop_prob = 1.0;
    for (int64_t t = 3; t < 20; ++t) {
        sender[0] = static_cast<double>(t);
        broadcast_round(g, t, rng, wire_size(2, false), deliver);
        CHECK(cache.payload == at_t2);
        CHECK(cache.t_old == 2);
    }

    const WireMessage msg = decode_wire(cache.payload);
    CHECK(msg.theta[0] == 0.75);
    CHECK(msg.counts[0] == 2u);
}

TEST_CASE("graph validation") {
    CommGraph g = topology(GraphKind::Full, 3);
    CHECK(g.validate().empty());
    g.edges.emplace_back(1, 1);
    CHECK_FALSE(g.validate().empty());

    CommGraph bad = topology(GraphKind::Chain, 2);
    bad.policy.drop_prob = 1.5;
    CHECK_FALSE(bad.validate().empty());
}
