#include "entroflow/errors.hpp"
#include "entroflow/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

using namespace entroflow;

namespace {

// "linear", "power_law:2", "shifted_power_law:0.5" or "custom:table.csv".
bool apply_model(const std::string& text, ExperimentConfig& c) {
    const auto colon = text.find(':');
    c.model_family = text.substr(0, colon);
    if (colon == std::string::npos) return true;
    const std::string arg = text.substr(colon + 1);
    if (c.model_family == "custom") {
        c.model_table = arg;
        return true;
    }
    try {
        std::size_t used = 0;
        c.model_m = std::stod(arg, &used);
        return used == arg.size();
    } catch (const std::exception&) {
        return false;
    }
}

int finish(int code, const std::string& message) {
    (code == kExitPass ? std::cout : std::cerr) << message << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entroflow: entropy and Fisher information experiments for nonlinear diffusion"};
    app.require_subcommand(1);

    std::string source;
    auto* run_cmd = app.add_subcommand("run", "Run a config file or a preset by name");
    run_cmd->add_option("config", source, "config.json or preset name")->required();

    app.add_subcommand("presets", "List the preset catalog");

    std::string validate_source;
    auto* validate_cmd = app.add_subcommand("validate", "Validate a config without running it");
    validate_cmd->add_option("config", validate_source, "config.json or preset name")->required();

    ExperimentConfig ineq;
    ineq.kind = ExperimentKind::Ineq;
    ineq.cells = 64;
    std::string ineq_model = "linear";
    std::uint64_t ineq_seed = 1;
    auto* ineq_cmd = app.add_subcommand("ineq", "Sample test functions and check an inequality");
    ineq_cmd->add_option("--check", ineq.ineq_check, "bernis, fisher or cmkm")
        ->check(CLI::IsMember({"bernis", "fisher", "cmkm"}));
    ineq_cmd->add_option("--n", ineq.dim, "space dimension")->check(CLI::Range(1, 3));
    ineq_cmd->add_option("--model", ineq_model, "linear | power_law:m | shifted_power_law:m | custom:path");
    ineq_cmd->add_option("--trials", ineq.ineq_trials, "number of sampled fields");
    ineq_cmd->add_option("--seed", ineq_seed, "sampling seed")->required();
    ineq_cmd->add_option("--cells", ineq.cells, "cells per axis");
    ineq_cmd->add_option("--name", ineq.name, "output directory name");

    ExperimentConfig ks;
    ks.kind = ExperimentKind::KellerSegel;
    ks.cells = 256;
    ks.t_end = 1.0;
    ks.ks_mass = 20.0;
    ks.record_every = 256;
    auto* ks_cmd = app.add_subcommand("ks", "Run the Keller-Segel system with a-priori monitors");
    ks_cmd->add_option("--p", ks.ks_p, "diffusion exponent");
    ks_cmd->add_option("--q", ks.ks_q, "sensitivity exponent");
    ks_cmd->add_option("--mass", ks.ks_mass, "initial mass");
    ks_cmd->add_option("--cells", ks.cells, "grid cells");
    ks_cmd->add_option("--t-end", ks.t_end, "final time");
    ks_cmd->add_option("--record-every", ks.record_every, "steps between snapshots");
    ks_cmd->add_flag("--strict", ks.ks_strict, "reject parameters outside the estimate hypotheses");
    ks_cmd->add_option("--name", ks.name, "output directory name");

    ExperimentConfig pl;
    pl.kind = ExperimentKind::PLaplace;
    pl.t_end = 0.05;
    pl.record_every = 64;
    auto* pl_cmd = app.add_subcommand("plaplace", "Run the regularised p-Laplace flow and monitor I[u]");
    pl_cmd->add_option("--p", pl.pl_p, "exponent p");
    pl_cmd->add_option("--delta", pl.pl_delta, "regularisation");
    pl_cmd->add_option("--cells", pl.cells, "grid cells");
    pl_cmd->add_option("--t-end", pl.t_end, "final time");
    pl_cmd->add_option("--record-every", pl.record_every, "steps between snapshots");
    pl_cmd->add_option("--name", pl.name, "output directory name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::string message;
    if (app.got_subcommand("presets")) {
        std::cout << list_presets();
        return kExitPass;
    }
    if (*validate_cmd) {
        try {
            const auto violations = validate_config(load_config(validate_source));
            if (violations.empty()) return finish(kExitPass, "config is valid");
            std::ostringstream out;
            out << violations.size() << " violation(s):";
            for (const auto& v : violations) out << "\n  " << v;
            return finish(kExitConfig, out.str());
        } catch (const ConfigError& e) {
            return finish(kExitConfig, e.what());
        }
    }
    if (*run_cmd) {
        const int code = run_experiment(source, &message);
        return finish(code, message);
    }
    if (*ineq_cmd) {
        if (!apply_model(ineq_model, ineq)) return finish(kExitConfig, "cannot parse --model " + ineq_model);
        ineq.seed = ineq_seed;
        if (ineq.name.empty()) ineq.name = "ineq_" + ineq.ineq_check + "_n" + std::to_string(ineq.dim);
        return finish(run_experiment(ineq, &message), message);
    }
    if (*ks_cmd) {
        if (ks.name.empty()) ks.name = "ks";
        return finish(run_experiment(ks, &message), message);
    }
    if (*pl_cmd) {
        if (pl.name.empty()) pl.name = "plaplace";
        return finish(run_experiment(pl, &message), message);
    }
    return kExitConfig;
}
