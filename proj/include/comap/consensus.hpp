#pragma once

#include <concepts>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comap/objective.hpp"

namespace comap {

// Local objective interface: fills a GradReport with loss, gradient, and
// touched mask at the given parameters. Stochastic objectives draw their
// step from the supplied generator.
template <class F>
concept LocalObjective =
    std::invocable<F&, std::span<const double>, std::mt19937_64&, GradReport&>;

struct ConsensusConfig {
    double rho = 1.0;    // consensus penalty
    int steps = 5;       // SGD steps approximating the primal argmin
    double lr = 1e-2;
    double momentum = 0.0;  // 0 disables; 0.9 is the conventional setting

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(rho > 0.0)) errors.push_back("consensus.rho: must be > 0");
        if (steps < 1) errors.push_back("consensus.steps: must be >= 1");
        if (!(lr > 0.0)) errors.push_back("consensus.lr: must be > 0");
        if (momentum < 0.0 || momentum >= 1.0) {
            errors.push_back("consensus.momentum: must be in [0, 1)");
        }
        return errors;
    }
};

// One neighbor's contribution to an agent's update: the cached parameter
// snapshot and the diagonal weight vectors for both directions.
struct NeighborTerm {
    std::span<const double> theta;
    std::span<const double> w_ij;  // weight on this agent's side
    std::span<const double> w_ji;  // weight on the neighbor's side
};

// Elementwise weighted average of two parameter vectors; the consensus
// target shared by both endpoints of an edge.
inline void consensus_target(std::span<const double> theta_i,
                             std::span<const double> theta_j,
                             std::span<const double> w_ij, std::span<const double> w_ji,
                             std::span<double> z) {
    if (theta_i.size() != theta_j.size() || theta_i.size() != w_ij.size() ||
        theta_i.size() != w_ji.size() || theta_i.size() != z.size()) {
        throw std::invalid_argument("consensus_target: length mismatch");
    }
    for (size_t k = 0; k < z.size(); ++k) {
        const double den = w_ij[k] + w_ji[k];
        if (!(den > 0.0)) {
            throw std::invalid_argument("consensus_target: non-positive weight sum");
        }
        z[k] = (w_ij[k] * theta_i[k] + w_ji[k] * theta_j[k]) / den;
    }
}

struct PrimalScratch {
    std::vector<std::vector<double>> targets;
    std::vector<double> velocity;
    GradReport report;
};

// Weighted-consensus primal update: B SGD steps on
//   L_obj(theta) + theta . p + rho * sum_j ||theta - z_ij||^2_{W_ij}
// with z_ij frozen at its iteration-start value. The augmented term's
// per-step gradient is p + 2 rho sum_j w_ij (theta - z_ij).
template <LocalObjective F>
void ramen_primal(std::vector<double>& theta, std::span<const double> dual,
                  const ConsensusConfig& cfg, std::span<const NeighborTerm> neighbors,
                  F&& objective, std::mt19937_64& rng, PrimalScratch& scratch) {
    const size_t n = theta.size();
    scratch.targets.resize(neighbors.size());
    for (size_t j = 0; j < neighbors.size(); ++j) {
        scratch.targets[j].resize(n);
        consensus_target(theta, neighbors[j].theta, neighbors[j].w_ij,
                         neighbors[j].w_ji, scratch.targets[j]);
    }
    const bool use_momentum = cfg.momentum > 0.0;
    if (use_momentum) scratch.velocity.assign(n, 0.0);
    for (int b = 0; b < cfg.steps; ++b) {
        objective(std::span<const double>(theta), rng, scratch.report);
        std::vector<double>& g = scratch.report.grad;
        for (size_t k = 0; k < n; ++k) g[k] += dual[k];
        for (size_t j = 0; j < neighbors.size(); ++j) {
            const std::span<const double> w = neighbors[j].w_ij;
            const std::vector<double>& z = scratch.targets[j];
            for (size_t k = 0; k < n; ++k) {
                g[k] += 2.0 * cfg.rho * w[k] * (theta[k] - z[k]);
            }
        }
        if (use_momentum) {
            for (size_t k = 0; k < n; ++k) {
                scratch.velocity[k] = cfg.momentum * scratch.velocity[k] + g[k];
                theta[k] -= cfg.lr * scratch.velocity[k];
            }
        } else {
            for (size_t k = 0; k < n; ++k) theta[k] -= cfg.lr * g[k];
        }
    }
}

// Weighted-consensus dual ascent:
//   p += 2 rho sum_j w_ij w_ji / (w_ij + w_ji) * (theta_i - theta_j)
// evaluated with the latest cached neighbor snapshot.
inline void ramen_dual(std::span<double> dual, std::span<const double> theta,
                       double rho, std::span<const NeighborTerm> neighbors) {
    for (const NeighborTerm& nb : neighbors) {
        for (size_t k = 0; k < dual.size(); ++k) {
            const double den = nb.w_ij[k] + nb.w_ji[k];
            dual[k] += 2.0 * rho * nb.w_ij[k] * nb.w_ji[k] / den *
                       (theta[k] - nb.theta[k]);
        }
    }
}

// Unweighted consensus ADMM (the synchronous baseline run as-is under
// message loss): primal target is the plain average, dual ascent is
// p += rho * sum_j (theta_i - theta_j).
template <LocalObjective F>
void cadmm_primal(std::vector<double>& theta, std::span<const double> dual,
                  const ConsensusConfig& cfg,
                  std::span<const std::span<const double>> neighbor_thetas,
                  F&& objective, std::mt19937_64& rng, PrimalScratch& scratch) {
    const size_t n = theta.size();
    scratch.targets.resize(neighbor_thetas.size());
    for (size_t j = 0; j < neighbor_thetas.size(); ++j) {
        scratch.targets[j].resize(n);
        for (size_t k = 0; k < n; ++k) {
            scratch.targets[j][k] = (theta[k] + neighbor_thetas[j][k]) / 2.0;
        }
    }
    const bool use_momentum = cfg.momentum > 0.0;
    if (use_momentum) scratch.velocity.assign(n, 0.0);
    for (int b = 0; b < cfg.steps; ++b) {
        objective(std::span<const double>(theta), rng, scratch.report);
        std::vector<double>& g = scratch.report.grad;
        for (size_t k = 0; k < n; ++k) g[k] += dual[k];
        for (const std::vector<double>& z : scratch.targets) {
            for (size_t k = 0; k < n; ++k) {
                g[k] += 2.0 * cfg.rho * (theta[k] - z[k]);
            }
        }
        if (use_momentum) {
            for (size_t k = 0; k < n; ++k) {
                scratch.velocity[k] = cfg.momentum * scratch.velocity[k] + g[k];
                theta[k] -= cfg.lr * scratch.velocity[k];
            }
        } else {
            for (size_t k = 0; k < n; ++k) theta[k] -= cfg.lr * g[k];
        }
    }
}

inline void cadmm_dual(std::span<double> dual, std::span<const double> theta,
                       double rho,
                       std::span<const std::span<const double>> neighbor_thetas) {
    for (const std::span<const double>& nb : neighbor_thetas) {
        for (size_t k = 0; k < dual.size(); ++k) {
            dual[k] += rho * (theta[k] - nb[k]);
        }
    }
}

// Distributed SGD: mix cached neighbor parameters uniformly (neighbors plus
// self), then step on the local gradient evaluated at the pre-mix iterate.
template <LocalObjective F>
void dsgd_step(std::vector<double>& theta, double lr,
               std::span<const std::span<const double>> neighbor_thetas, F&& objective,
               std::mt19937_64& rng, GradReport& report, std::vector<double>& mixed) {
    const size_t n = theta.size();
    objective(std::span<const double>(theta), rng, report);
    const double a = 1.0 / static_cast<double>(neighbor_thetas.size() + 1);
    mixed.assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) mixed[k] = a * theta[k];
    for (const std::span<const double>& nb : neighbor_thetas) {
        for (size_t k = 0; k < n; ++k) mixed[k] += a * nb[k];
    }
    for (size_t k = 0; k < n; ++k) theta[k] = mixed[k] - lr * report.grad[k];
}

// Gradient-tracking state: the tracker estimates the network-average
// gradient; neighbors' trackers are cached alongside their parameters.
struct DsgtState {
    std::vector<double> tracker;
    std::vector<double> prev_grad;
    bool initialized = false;
};

template <LocalObjective F>
void dsgt_step(std::vector<double>& theta, DsgtState& state, double lr,
               std::span<const std::span<const double>> neighbor_thetas,
               std::span<const std::span<const double>> neighbor_trackers,
               F&& objective, std::mt19937_64& rng, GradReport& report,
               std::vector<double>& mixed) {
    const size_t n = theta.size();
    if (!state.initialized) {
        objective(std::span<const double>(theta), rng, report);
        state.tracker = report.grad;
        state.prev_grad = report.grad;
        state.initialized = true;
    }
    const double a = 1.0 / static_cast<double>(neighbor_thetas.size() + 1);
    mixed.assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) mixed[k] = a * theta[k];
    for (const std::span<const double>& nb : neighbor_thetas) {
        for (size_t k = 0; k < n; ++k) mixed[k] += a * nb[k];
    }
    for (size_t k = 0; k < n; ++k) theta[k] = mixed[k] - lr * state.tracker[k];

    objective(std::span<const double>(theta), rng, report);
    mixed.assign(n, 0.0);
    for (size_t k = 0; k < n; ++k) mixed[k] = a * state.tracker[k];
    for (const std::span<const double>& nb : neighbor_trackers) {
        for (size_t k = 0; k < n; ++k) mixed[k] += a * nb[k];
    }
    for (size_t k = 0; k < n; ++k) {
        state.tracker[k] = mixed[k] + report.grad[k] - state.prev_grad[k];
    }
    state.prev_grad = report.grad;
}

// Deterministic quadratic test objective ||A theta - b||^2 with dense
// row-major A; the oracle instance for optimizer verification.
struct QuadraticObjective {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> a;  // rows x cols
    std::vector<double> b;  // rows

    static QuadraticObjective scalar(double target) {
        QuadraticObjective q;
        q.rows = q.cols = 1;
        q.a = {1.0};
        q.b = {target};
        return q;
    }

    void operator()(std::span<const double> theta, std::mt19937_64&,
                    GradReport& out) const {
        if (theta.size() != cols) {
            throw std::invalid_argument("QuadraticObjective: length mismatch");
        }
        out.grad.assign(cols, 0.0);
        double loss = 0.0;
        for (size_t r = 0; r < rows; ++r) {
            double resid = -b[r];
            for (size_t c = 0; c < cols; ++c) resid += a[r * cols + c] * theta[c];
            loss += resid * resid;
            for (size_t c = 0; c < cols; ++c) {
                out.grad[c] += 2.0 * resid * a[r * cols + c];
            }
        }
        out.loss = loss;
        out.refresh_mask();
    }
};

}  // namespace comap
