#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "comap/consensus.hpp"
#include "comap/uncertainty.hpp"

using namespace comap;

namespace {

std::mt19937_64 dummy_rng(0);

std::vector<double> ones(size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_CASE("consensus_target") {
    // Symmetric weights: plain average.
    std::vector<double> ti{1.0, -2.0, 0.5};
    std::vector<double> tj{3.0, 2.0, 0.5};
    std::vector<double> w{0.7, 0.3, 1.0};
    std::vector<double> z(3);
    consensus_target(ti, tj, w, w, z);
    for (size_t k = 0; k < 3; ++k) {
        CHECK(z[k] == Catch::Approx((ti[k] + tj[k]) / 2.0).epsilon(1e-15));
    }

    // Hand-evaluated weighted average.
    std::vector<double> z1(1);
    consensus_target(std::vector<double>{0.0}, std::vector<double>{4.0},
                     std::vector<double>{1.0}, std::vector<double>{3.0}, z1);
    CHECK(z1[0] == Catch::Approx(3.0));

    // Swapping (i, w_ij) with (j, w_ji) yields the identical target.
    std::vector<double> wij{0.2, 0.9, 0.4};
    std::vector<double> wji{1.0, 0.1, 0.4};
    std::vector<double> z_ij(3), z_ji(3);
    consensus_target(ti, tj, wij, wji, z_ij);
    consensus_target(tj, ti, wji, wij, z_ji);
    CHECK(z_ij == z_ji);  // bitwise

    CHECK_THROWS_AS(consensus_target(ti, tj, std::vector<double>{0.0, 0.0, 0.0},
                                     std::vector<double>{0.0, 0.0, 0.0}, z),
                    std::invalid_argument);
}

TEST_CASE("ramen_primal with no neighbors is plain SGD") {
    const QuadraticObjective quad = QuadraticObjective::scalar(1.5);
    ConsensusConfig cfg;
    cfg.steps = 7;
    cfg.lr = 0.1;

    std::vector<double> theta{0.0};
    std::vector<double> dual{0.0};
    PrimalScratch scratch;
    ramen_primal(theta, dual, cfg, {}, quad, dummy_rng, scratch);

    double expect = 0.0;
    for (int b = 0; b < cfg.steps; ++b) expect -= cfg.lr * 2.0 * (expect - 1.5);
    CHECK(theta[0] == Catch::Approx(expect).epsilon(1e-15));
}

TEST_CASE("ramen_primal approaches the closed-form penalized minimizer") {
    // argmin (theta - a)^2 + theta p + rho w (theta - z)^2
    const double a = 1.0, p = 0.3, rho = 2.0, w = 0.6, z = 4.0;
    const double expect = (2.0 * a - p + 2.0 * rho * w * z) / (2.0 + 2.0 * rho * w);

    QuadraticObjective quad = QuadraticObjective::scalar(a);
    ConsensusConfig cfg;
    cfg.rho = rho;
    cfg.steps = 4000;
    cfg.lr = 0.05;

    // One neighbor whose cached value produces the wanted target: with
    // theta^t = 0 and w_ji = w_ij, z = theta_j / 2, so theta_j = 2 z.
    std::vector<double> theta{0.0};
    std::vector<double> dual{p};
    std::vector<double> theta_j{2.0 * z};
    std::vector<double> w_ij{w}, w_ji{w};
    NeighborTerm nb{theta_j, w_ij, w_ji};
    PrimalScratch scratch;
    ramen_primal(theta, dual, cfg, std::span<const NeighborTerm>(&nb, 1), quad,
                 dummy_rng, scratch);
    CHECK(theta[0] == Catch::Approx(expect).epsilon(1e-10));
}

TEST_CASE("ramen updates are stationary at consensus with zero gradient") {
    QuadraticObjective quad = QuadraticObjective::scalar(2.0);
    ConsensusConfig cfg;
    std::vector<double> theta{2.0};
    std::vector<double> dual{0.0};
    std::vector<double> theta_j{2.0};
    std::vector<double> w_ij{0.8}, w_ji{0.3};
    NeighborTerm nb{theta_j, w_ij, w_ji};
    PrimalScratch scratch;
    ramen_primal(theta, dual, cfg, std::span<const NeighborTerm>(&nb, 1), quad,
                 dummy_rng, scratch);
    CHECK(theta[0] == 2.0);

    ramen_dual(dual, theta, cfg.rho, std::span<const NeighborTerm>(&nb, 1));
    CHECK(dual[0] == 0.0);
}

TEST_CASE("ramen_dual increments") {
    // Hand evaluation: one neighbor, w_ij=0.2, w_ji=1.0, rho=1, diff=1.
    std::vector<double> dual{0.0};
    std::vector<double> theta{1.0};
    std::vector<double> theta_j{0.0};
    std::vector<double> w_ij{0.2}, w_ji{1.0};
    NeighborTerm nb{theta_j, w_ij, w_ji};
    ramen_dual(dual, theta, 1.0, std::span<const NeighborTerm>(&nb, 1));
    CHECK(dual[0] == Catch::Approx(1.0 / 3.0).epsilon(1e-15));

    // Symmetric weights reduce to rho * w * (theta_i - theta_j).
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.1, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t n = 5;
        std::vector<double> d(n, 0.0), ti(n), tj(n), w(n);
        for (size_t k = 0; k < n; ++k) {
            ti[k] = uni(rng);
            tj[k] = uni(rng);
            w[k] = uni(rng);
        }
        const double rho = uni(rng);
        NeighborTerm term{tj, w, w};
        ramen_dual(d, ti, rho, std::span<const NeighborTerm>(&term, 1));
        for (size_t k = 0; k < n; ++k) {
            CHECK(std::abs(d[k] - rho * w[k] * (ti[k] - tj[k])) < 1e-12);
        }
    }
}

TEST_CASE("two-agent quadratic consensus converges to the joint optimum") {
    // Local objectives (theta-1)^2 and (theta-3)^2; the consensus optimum is 2.
    ConsensusConfig cfg;
    cfg.rho = 1.0;
    cfg.steps = 50;
    cfg.lr = 0.05;

    const QuadraticObjective f0 = QuadraticObjective::scalar(1.0);
    const QuadraticObjective f1 = QuadraticObjective::scalar(3.0);

    SECTION("vanilla consensus ADMM") {
        std::vector<double> th0{0.0}, th1{0.0}, p0{0.0}, p1{0.0};
        PrimalScratch scratch;
        for (int t = 0; t < 500; ++t) {
            const std::vector<double> c0 = th1, c1 = th0;  // synced caches
            std::span<const double> n0[] = {c0};
            std::span<const double> n1[] = {c1};
            cadmm_primal(th0, p0, cfg, n0, f0, dummy_rng, scratch);
            cadmm_primal(th1, p1, cfg, n1, f1, dummy_rng, scratch);
            const std::vector<double> u0 = th1, u1 = th0;  // post-primal exchange
            std::span<const double> m0[] = {u0};
            std::span<const double> m1[] = {u1};
            cadmm_dual(p0, th0, cfg.rho, m0);
            cadmm_dual(p1, th1, cfg.rho, m1);
        }
        CHECK(std::abs(th0[0] - 2.0) < 1e-3);
        CHECK(std::abs(th1[0] - 2.0) < 1e-3);
        CHECK(std::abs(th0[0] - th1[0]) < 1e-3);
    }

    SECTION("weighted consensus with uniform counts") {
        WeightBounds bounds;
        const UncertaintyCounts u(1, 0u);
        const WeightPair wp = compute_weights(u, u, bounds);  // degenerate uniform
        std::vector<double> th0{0.0}, th1{0.0}, p0{0.0}, p1{0.0};
        PrimalScratch scratch;
        for (int t = 0; t < 500; ++t) {
            const std::vector<double> c0 = th1, c1 = th0;
            NeighborTerm n0{c0, wp.w_ij, wp.w_ji};
            NeighborTerm n1{c1, wp.w_ji, wp.w_ij};
            ramen_primal(th0, p0, cfg, std::span<const NeighborTerm>(&n0, 1), f0,
                         dummy_rng, scratch);
            ramen_primal(th1, p1, cfg, std::span<const NeighborTerm>(&n1, 1), f1,
                         dummy_rng, scratch);
            const std::vector<double> u0 = th1, u1 = th0;
            NeighborTerm m0{u0, wp.w_ij, wp.w_ji};
            NeighborTerm m1{u1, wp.w_ji, wp.w_ij};
            ramen_dual(p0, th0, cfg.rho, std::span<const NeighborTerm>(&m0, 1));
            ramen_dual(p1, th1, cfg.rho, std::span<const NeighborTerm>(&m1, 1));
        }
        CHECK(std::abs(th0[0] - 2.0) < 1e-3);
        CHECK(std::abs(th1[0] - 2.0) < 1e-3);
    }
}

TEST_CASE("unit weights reproduce vanilla consensus ADMM bitwise") {
    // n = 3 quadratics with distinct targets per coordinate.
    QuadraticObjective f0, f1;
    f0.rows = f0.cols = 3;
    f0.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    f0.b = {1.0, -0.5, 2.0};
    f1 = f0;
    f1.b = {3.0, 0.5, -1.0};

    ConsensusConfig cfg;
    cfg.steps = 5;
    cfg.lr = 0.02;

    std::vector<double> rth0(3, 0.0), rth1(3, 0.0), rp0(3, 0.0), rp1(3, 0.0);
    std::vector<double> cth0(3, 0.0), cth1(3, 0.0), cp0(3, 0.0), cp1(3, 0.0);
    const std::vector<double> unit = ones(3);
    PrimalScratch scratch;

    for (int t = 0; t < 200; ++t) {
        {
            const std::vector<double> c0 = rth1, c1 = rth0;
            NeighborTerm n0{c0, unit, unit};
            NeighborTerm n1{c1, unit, unit};
            ramen_primal(rth0, rp0, cfg, std::span<const NeighborTerm>(&n0, 1), f0,
                         dummy_rng, scratch);
            ramen_primal(rth1, rp1, cfg, std::span<const NeighborTerm>(&n1, 1), f1,
                         dummy_rng, scratch);
            const std::vector<double> u0 = rth1, u1 = rth0;
            NeighborTerm m0{u0, unit, unit};
            NeighborTerm m1{u1, unit, unit};
            ramen_dual(rp0, rth0, cfg.rho, std::span<const NeighborTerm>(&m0, 1));
            ramen_dual(rp1, rth1, cfg.rho, std::span<const NeighborTerm>(&m1, 1));
        }
        {
            const std::vector<double> c0 = cth1, c1 = cth0;
            std::span<const double> n0[] = {std::span<const double>(c0)};
            std::span<const double> n1[] = {std::span<const double>(c1)};
            cadmm_primal(cth0, cp0, cfg, n0, f0, dummy_rng, scratch);
            cadmm_primal(cth1, cp1, cfg, n1, f1, dummy_rng, scratch);
            const std::vector<double> u0 = cth1, u1 = cth0;
            std::span<const double> m0[] = {std::span<const double>(u0)};
            std::span<const double> m1[] = {std::span<const double>(u1)};
            cadmm_dual(cp0, cth0, cfg.rho, m0);
            cadmm_dual(cp1, cth1, cfg.rho, m1);
        }
        for (size_t k = 0; k < 3; ++k) {
            REQUIRE(std::abs(rth0[k] - cth0[k]) <= 1e-10);
            REQUIRE(std::abs(rth1[k] - cth1[k]) <= 1e-10);
            REQUIRE(std::abs(rp0[k] - cp0[k]) <= 1e-10);
        }
    }
}

TEST_CASE("dual variables of a synchronized pair cancel") {
    QuadraticObjective f0 = QuadraticObjective::scalar(1.0);
    QuadraticObjective f1 = QuadraticObjective::scalar(3.0);
    f0.rows = f0.cols = 4;
    f0.a = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    f0.b = {1.0, 2.0, -1.0, 0.5};
    f1 = f0;
    f1.b = {3.0, 0.0, 2.0, 1.5};

    // Asymmetric, static counts give genuinely different weight vectors.
    WeightBounds bounds;
    const UncertaintyCounts u0{9, 0, 4, 2};
    const UncertaintyCounts u1{0, 7, 4, 1};
    const WeightPair wp = compute_weights(u0, u1, bounds);

    ConsensusConfig cfg;
    cfg.steps = 5;
    cfg.lr = 0.02;

    std::vector<double> th0(4, 0.0), th1(4, 0.0), p0(4, 0.0), p1(4, 0.0);
    PrimalScratch scratch;
    for (int t = 0; t < 200; ++t) {
        // z targets agree bitwise when computed from either side.
        std::vector<double> z01(4), z10(4);
        consensus_target(th0, th1, wp.w_ij, wp.w_ji, z01);
        consensus_target(th1, th0, wp.w_ji, wp.w_ij, z10);
        REQUIRE(z01 == z10);

        const std::vector<double> c0 = th1, c1 = th0;
        NeighborTerm n0{c0, wp.w_ij, wp.w_ji};
        NeighborTerm n1{c1, wp.w_ji, wp.w_ij};
        ramen_primal(th0, p0, cfg, std::span<const NeighborTerm>(&n0, 1), f0,
                     dummy_rng, scratch);
        ramen_primal(th1, p1, cfg, std::span<const NeighborTerm>(&n1, 1), f1,
                     dummy_rng, scratch);
        const std::vector<double> u0c = th1, u1c = th0;
        NeighborTerm m0{u0c, wp.w_ij, wp.w_ji};
        NeighborTerm m1{u1c, wp.w_ji, wp.w_ij};
        ramen_dual(p0, th0, cfg.rho, std::span<const NeighborTerm>(&m0, 1));
        ramen_dual(p1, th1, cfg.rho, std::span<const NeighborTerm>(&m1, 1));
        for (size_t k = 0; k < 4; ++k) {
            REQUIRE(std::abs(p0[k] + p1[k]) <= 1e-10);
        }
    }
}

TEST_CASE("dsgd") {
    GradReport report;
    std::vector<double> mixed;

    // Fixed point: zero gradient, neighbors equal to self.
    QuadraticObjective fixed = QuadraticObjective::scalar(2.0);
    std::vector<double> theta{2.0};
    const std::vector<double> same{2.0};
    std::span<const double> nbrs[] = {std::span<const double>(same)};
    dsgd_step(theta, 0.1, nbrs, fixed, dummy_rng, report, mixed);
    CHECK(theta[0] == 2.0);

    // Zero gradient: pure mixing average.
    theta = {4.0};
    const std::vector<double> other{0.0};
    std::span<const double> nbrs2[] = {std::span<const double>(other)};
    QuadraticObjective at4 = QuadraticObjective::scalar(4.0);
    dsgd_step(theta, 0.1, nbrs2, at4, dummy_rng, report, mixed);
    CHECK(theta[0] == Catch::Approx(2.0));

    // Two agents, full sync, diminishing step size.
    std::vector<double> th0{0.0}, th1{0.0};
    const QuadraticObjective f0 = QuadraticObjective::scalar(1.0);
    const QuadraticObjective f1 = QuadraticObjective::scalar(3.0);
    for (int t = 0; t < 2000; ++t) {
        const double lr = 0.5 / (1.0 + t);
        const std::vector<double> c0 = th1, c1 = th0;
        std::span<const double> m0[] = {std::span<const double>(c0)};
        std::span<const double> m1[] = {std::span<const double>(c1)};
        dsgd_step(th0, lr, m0, f0, dummy_rng, report, mixed);
        dsgd_step(th1, lr, m1, f1, dummy_rng, report, mixed);
    }
    CHECK(std::abs(th0[0] - 2.0) < 0.05);
    CHECK(std::abs(th1[0] - 2.0) < 0.05);
}

TEST_CASE("dsgt") {
    GradReport report;
    std::vector<double> mixed;

    // Single agent: reduces to SGD with the tracker equal to the gradient.
    {
        QuadraticObjective f = QuadraticObjective::scalar(1.5);
        std::vector<double> theta{0.0};
        DsgtState state;
        double ref = 0.0, ref_grad_prev = 2.0 * (0.0 - 1.5);
        for (int t = 0; t < 80; ++t) {
            dsgt_step(theta, state, 0.1, {}, {}, f, dummy_rng, report, mixed);
            ref -= 0.1 * ref_grad_prev;  // y == g for a single agent
            ref_grad_prev = 2.0 * (ref - 1.5);
            REQUIRE(theta[0] == Catch::Approx(ref).epsilon(1e-14));
        }
        CHECK(std::abs(theta[0] - 1.5) < 1e-4);
    }

    // Sum preservation under full sync and doubly stochastic mixing.
    {
        const QuadraticObjective f0 = QuadraticObjective::scalar(1.0);
        const QuadraticObjective f1 = QuadraticObjective::scalar(3.0);
        std::vector<double> th0{0.0}, th1{0.0};
        DsgtState s0, s1;
        // Pre-initialize both trackers with the iteration-0 gradients.
        f0(th0, dummy_rng, report);
        s0.tracker = s0.prev_grad = report.grad;
        s0.initialized = true;
        f1(th1, dummy_rng, report);
        s1.tracker = s1.prev_grad = report.grad;
        s1.initialized = true;

        for (int t = 0; t < 500; ++t) {
            const std::vector<double> c0 = th1, c1 = th0;
            const std::vector<double> y0 = s1.tracker, y1 = s0.tracker;
            std::span<const double> mt0[] = {std::span<const double>(c0)};
            std::span<const double> mt1[] = {std::span<const double>(c1)};
            std::span<const double> my0[] = {std::span<const double>(y0)};
            std::span<const double> my1[] = {std::span<const double>(y1)};
            dsgt_step(th0, s0, 0.05, mt0, my0, f0, dummy_rng, report, mixed);
            dsgt_step(th1, s1, 0.05, mt1, my1, f1, dummy_rng, report, mixed);

            const double tracker_sum = s0.tracker[0] + s1.tracker[0];
            const double grad_sum =
                2.0 * (th0[0] - 1.0) + 2.0 * (th1[0] - 3.0);
            REQUIRE(std::abs(tracker_sum - grad_sum) < 1e-12);
        }
        CHECK(std::abs(th0[0] - 2.0) < 1e-3);
        CHECK(std::abs(th1[0] - 2.0) < 1e-3);
    }
}

TEST_CASE("all optimizers hold a shared optimum fixed") {
    const QuadraticObjective f = QuadraticObjective::scalar(2.0);
    const std::vector<double> star{2.0};
    GradReport report;
    std::vector<double> mixed;
    PrimalScratch scratch;
    ConsensusConfig cfg;

    std::vector<double> theta = star, dual{0.0};
    const std::vector<double> w{0.6};
    NeighborTerm nb{star, w, w};
    ramen_primal(theta, dual, cfg, std::span<const NeighborTerm>(&nb, 1), f, dummy_rng,
                 scratch);
    ramen_dual(dual, theta, cfg.rho, std::span<const NeighborTerm>(&nb, 1));
    CHECK(theta[0] == 2.0);
    CHECK(dual[0] == 0.0);

    theta = star;
    dual = {0.0};
    std::span<const double> nbrs[] = {std::span<const double>(star)};
    cadmm_primal(theta, dual, cfg, nbrs, f, dummy_rng, scratch);
    cadmm_dual(dual, theta, cfg.rho, nbrs);
    CHECK(theta[0] == 2.0);
    CHECK(dual[0] == 0.0);

    theta = star;
    dsgd_step(theta, 0.1, nbrs, f, dummy_rng, report, mixed);
    CHECK(theta[0] == 2.0);

    theta = star;
    DsgtState state;
    state.tracker = {0.0};
    state.prev_grad = {0.0};
    state.initialized = true;
    std::vector<double> zero_tracker{0.0};
    std::span<const double> trackers[] = {std::span<const double>(zero_tracker)};
    dsgt_step(theta, state, 0.1, nbrs, trackers, f, dummy_rng, report, mixed);
    CHECK(theta[0] == 2.0);
    CHECK(state.tracker[0] == 0.0);
}
