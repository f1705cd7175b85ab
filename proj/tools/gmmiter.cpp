#include <cstdlib>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "gmmiter/cli.hpp"

namespace {

void add_model_options(CLI::App* cmd, gmmiter::ExperimentConfig& cfg) {
    cmd->add_option("--model", cfg.model, "Model: ma1-calibrated, ma1, gaussian, cube-root")
        ->capture_default_str();
    cmd->add_option("--theta-hat", cfg.theta_hat, "Calibrated moment root (ma1-calibrated)")
        ->capture_default_str();
    cmd->add_option("--theta-true", cfg.theta_true, "Simulation parameter (ma1)")
        ->capture_default_str();
    cmd->add_option("--n", cfg.n, "Sample size (ma1)")->capture_default_str();
    cmd->add_option("--p", cfg.p, "Auxiliary autoregression order (ma1)")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "Simulation seed (ma1)")->capture_default_str();
    cmd->add_option("--mu", cfg.mu, "Population mean (gaussian)")->capture_default_str();
    cmd->add_option("--sigma2", cfg.sigma2, "Population variance (gaussian)")
        ->capture_default_str();
    cmd->add_option("--ybar", cfg.ybar, "Sample mean (cube-root)")->capture_default_str();
    cmd->add_option("--weighting", cfg.weighting, "identity or optimal")->capture_default_str();
}

void add_optimizer_options(CLI::App* cmd, gmmiter::ExperimentConfig& cfg) {
    cmd->add_option("--method", cfg.methods, "Methods to run: gd, gn, nr, lm, bfgs")
        ->capture_default_str();
    cmd->add_option("--gamma", cfg.gamma, "Learning rate in (0, 1]")->capture_default_str();
    cmd->add_option("--lm-lambda", cfg.lm_lambda, "Damping for lm")->capture_default_str();
    cmd->add_option("--iters", cfg.iters, "Iteration budget")->capture_default_str();
    cmd->add_option("--step-tol", cfg.step_tol, "Step-size stopping tolerance")
        ->capture_default_str();
    cmd->add_option("--grad-tol", cfg.grad_tol, "Gradient-norm stopping tolerance")
        ->capture_default_str();
    cmd->add_flag("--project", cfg.project, "Clamp iterates to the parameter box");
    cmd->add_flag("--nr-require-pd", cfg.nr_require_pd,
                  "Fail nr steps on non-positive-definite Hessians");
    cmd->add_flag("--global-step", cfg.global_step,
                  "Race each local step against a shifted Sobol candidate");
    cmd->add_option("--shift-seed", cfg.shift_seed, "Seed for the candidate shift")
        ->capture_default_str();
}

void add_start_options(CLI::App* cmd, gmmiter::ExperimentConfig& cfg) {
    cmd->add_option("--theta0", cfg.theta0,
                    "Starting point, comma-separated for several dimensions; repeatable");
    cmd->add_option("--sobol-starts", cfg.sobol_starts,
                    "Number of shifted Sobol starting points (when no --theta0)")
        ->capture_default_str();
    cmd->add_option("--box-lower", cfg.box_lower, "Start/candidate box lower corner");
    cmd->add_option("--box-upper", cfg.box_upper, "Start/candidate box upper corner");
    cmd->add_option("--start-seed", cfg.start_seed, "Seed for the start-set shift")
        ->capture_default_str();
}

void add_grid_options(CLI::App* cmd, gmmiter::ExperimentConfig& cfg) {
    cmd->add_option("--grid-lo", cfg.grid_lo, "Grid lower corner (one value per dimension)")
        ->capture_default_str();
    cmd->add_option("--grid-hi", cfg.grid_hi, "Grid upper corner")->capture_default_str();
    cmd->add_option("--grid-nodes", cfg.grid_nodes, "Nodes per axis")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    gmmiter::ExperimentConfig cfg;
    if (const char* env = std::getenv("GMMITER_OUT")) cfg.out_dir = env;

    CLI::App app{"Iterative GMM estimation with convergence diagnostics"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (ini tables); command-line flags win");
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();

    int exit_code = 0;
    const auto dispatch = [&](int (*fn)(const gmmiter::ExperimentConfig&, std::ostream&)) {
        return [&cfg, &exit_code, fn]() { exit_code = fn(cfg, std::cout); };
    };

    CLI::App* estimate =
        app.add_subcommand("estimate", "Run the iteration from one or more starts");
    add_model_options(estimate, cfg);
    add_optimizer_options(estimate, cfg);
    add_start_options(estimate, cfg);
    estimate->fallthrough();
    estimate->callback(dispatch(&gmmiter::cmd_estimate));

    CLI::App* compare = app.add_subcommand("compare", "Race several methods on one model");
    add_model_options(compare, cfg);
    add_optimizer_options(compare, cfg);
    add_start_options(compare, cfg);
    compare->fallthrough();
    compare->callback(dispatch(&gmmiter::cmd_compare));

    CLI::App* rank = app.add_subcommand("rank-grid", "Minimum singular values over a grid");
    add_model_options(rank, cfg);
    add_grid_options(rank, cfg);
    rank->add_option("--threshold", cfg.threshold, "Rank verdict threshold")
        ->capture_default_str();
    rank->fallthrough();
    rank->callback(dispatch(&gmmiter::cmd_rank_grid));

    CLI::App* convexity =
        app.add_subcommand("convexity-map", "Smallest Hessian eigenvalue over a grid");
    add_model_options(convexity, cfg);
    add_grid_options(convexity, cfg);
    convexity->add_option("--convention", cfg.convention, "doubled or half")
        ->capture_default_str();
    convexity->fallthrough();
    convexity->callback(dispatch(&gmmiter::cmd_convexity_map));

    CLI::App* dump = app.add_subcommand("sobol-dump", "Write a Sobol point set to CSV");
    dump->add_option("--dim", cfg.dim, "Dimension (1..16)")->capture_default_str();
    dump->add_option("--count", cfg.count, "Number of points")->capture_default_str();
    dump->add_flag("--shifted", cfg.shifted, "Apply a random shift");
    dump->add_option("--shift-seed", cfg.shift_seed, "Seed for the shift")
        ->capture_default_str();
    dump->fallthrough();
    dump->callback(dispatch(&gmmiter::cmd_sobol_dump));

    CLI::App* replicate = app.add_subcommand(
        "replicate", "Run a reference recipe and check expected against actual");
    replicate
        ->add_option("recipe", cfg.recipe,
                     "One of: table1, gaussian-hessian, rank-grids, gamma-sweep")
        ->required();
    replicate->add_option("--grid-nodes", cfg.grid_nodes, "Nodes per axis (rank-grids)")
        ->capture_default_str();
    replicate->fallthrough();
    replicate->callback(dispatch(&gmmiter::cmd_replicate));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const gmmiter::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return exit_code;
}
