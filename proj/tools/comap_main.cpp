#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "comap/engine.hpp"
#include "comap/presets.hpp"

namespace {

constexpr int kConfigErrorExit = 2;

int run_command(const std::string& config_path, const std::string& preset_name,
                std::optional<int64_t> seed, const std::string& out_dir,
                const std::string& optimizer, std::optional<double> success_rate,
                std::optional<int> agents, std::optional<int64_t> iters) {
    comap::ExperimentConfig cfg;
    std::vector<std::string> errors;

    if (!preset_name.empty()) {
        if (preset_name == "agent-scaling" && agents) {
            cfg = comap::preset_agent_scaling(*agents);
        } else if (auto p = comap::preset(preset_name)) {
            cfg = *p;
        } else {
            std::string names;
            for (const std::string& n : comap::preset_names()) names += " " + n;
            errors.push_back("preset: unknown name \"" + preset_name +
                             "\" (available:" + names + ")");
        }
        if (agents && preset_name != "agent-scaling") {
            errors.push_back("--agents: only supported with the agent-scaling preset");
        }
    } else if (!config_path.empty()) {
        comap::ParseResult parsed = comap::load_config_file(config_path);
        cfg = std::move(parsed.config);
        errors = std::move(parsed.errors);
        if (agents) {
            errors.push_back("--agents: only supported with --preset agent-scaling");
        }
    } else {
        errors.push_back("run: need --config FILE or --preset NAME");
    }

    if (seed) cfg.run.seed = static_cast<uint64_t>(*seed);
    if (!out_dir.empty()) cfg.run.out_dir = out_dir;
    if (!optimizer.empty()) {
        if (auto k = comap::parse_optimizer(optimizer)) {
            cfg.optimizer = *k;
        } else {
            errors.push_back("--optimizer: expected ramen | cadmm | dsgd | dsgt");
        }
    }
    if (success_rate) {
        cfg.comm.success_rate = *success_rate;
        cfg.comm.period = 0;
        cfg.sweep_success_rates.clear();
    }
    if (iters) cfg.run.iterations = *iters;

    if (errors.empty()) {
        for (const std::string& e : comap::validate(cfg)) errors.push_back(e);
    }
    if (!errors.empty()) {
        std::cerr << "config errors:\n";
        for (const std::string& e : errors) std::cerr << "  " << e << "\n";
        return kConfigErrorExit;
    }

    if (!cfg.sweep_success_rates.empty()) {
        const auto points = comap::run_sweep(cfg);
        std::cout << "sweep complete: " << cfg.run.out_dir << "\n";
        for (const comap::SweepPoint& p : points) {
            std::cout << "  success " << p.success_rate << ": completion "
                      << p.completion_mean << " +- " << p.completion_std << "\n";
        }
    } else {
        const comap::RunRecord rec = comap::run_experiment(cfg);
        comap::emit_outputs(rec, cfg);
        std::cout << "run complete: " << cfg.run.out_dir << " ("
                  << rec.rows.size() << " metric rows, " << rec.seconds << " s)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collaborative 2D SDF mapping with consensus optimizers"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run an experiment");
    std::string config_path, preset_name, out_dir, optimizer;
    std::optional<int64_t> seed, iters;
    std::optional<double> success_rate;
    std::optional<int> agents;
    run->add_option("--config", config_path, "Experiment config (JSON)");
    run->add_option("--preset", preset_name,
                    "Built-in preset: split-room | success-sweep | agent-scaling");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--optimizer", optimizer, "ramen | cadmm | dsgd | dsgt");
    run->add_option("--success-rate", success_rate,
                    "Message success rate in [0, 1]; disables sweeps/periods");
    run->add_option("--agents", agents, "Agent count (agent-scaling preset)");
    run->add_option("--iters", iters, "Iteration count override");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        try {
            return run_command(config_path, preset_name, seed, out_dir, optimizer,
                               success_rate, agents, iters);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 0;
}
