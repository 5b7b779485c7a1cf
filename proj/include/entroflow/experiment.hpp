#pragma once

// Config-driven experiments. A config is a flat JSON object with nested blocks:
//
//   {
//     "name": "heat_sanity",
//     "kind": "diffusion" | "ineq" | "ks" | "plaplace",
//     "model":    {"family": "linear" | "power_law" | "shifted_power_law" | "custom", "m": 2, "table": "a.csv"},
//     "grid":     {"cells": 128, "dim": 1},
//     "run":      {"t_end": 0.1, "safety": 0.4, "record_every": 50, "seed": 7, "amplitude": 0.5},
//     "ks":       {"p": 2, "q": 1, "mass": 20, "strict": true, "ceiling": 1e6},
//     "plaplace": {"p": 3, "delta": 1e-6},
//     "ineq":     {"check": "bernis" | "fisher" | "cmkm", "trials": 1000},
//     "output":   "out"
//   }
//
// Files land in <root>/<name>/, root = $ENTROFLOW_OUT, else "output", else "out".

#include "entroflow/coeff_models.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace entroflow {

enum class ExperimentKind { Diffusion, Ineq, KellerSegel, PLaplace };

struct ExperimentConfig {
    std::string name;
    ExperimentKind kind = ExperimentKind::Diffusion;

    std::string model_family = "linear";
    double model_m = 1.0;
    std::string model_table;

    int cells = 128;
    int dim = 1;

    double t_end = 0.1;
    double safety = 0.4;
    int record_every = 1;
    std::optional<std::uint64_t> seed;
    double amplitude = 0.5;

    double ks_p = 2.0, ks_q = 1.0, ks_mass = 1.0, ks_ceiling = 1e6;
    bool ks_strict = false;

    double pl_p = 3.0, pl_delta = 1e-6;

    std::string ineq_check = "bernis";
    std::size_t ineq_trials = 100;

    std::string output;
    std::string statement;  // what the experiment exercises; echoed in the summary

    /// Unknown keys and type mismatches found while parsing; reported by validate_config.
    std::vector<std::string> parse_problems;
};

enum ExitCode : int { kExitPass = 0, kExitConfig = 1, kExitPropertyFailed = 2, kExitNumericalAbort = 3 };

struct Preset {
    std::string name;
    std::string statement;
    std::string json;  // full config text
};

const std::vector<Preset>& preset_catalog();

/// One line per preset: name and the statement it exercises.
std::string list_presets();

/// Parses the config text. Throws ConfigError only for malformed JSON or a non-object
/// root; field-level problems are collected for validate_config.
ExperimentConfig parse_config(const std::string& json_text);

/// Loads a config file, or a preset when `source` names one and is not a file.
ExperimentConfig load_config(const std::string& source);

/// Every violated invariant, empty when valid. No computation is performed.
std::vector<std::string> validate_config(const ExperimentConfig& config);

CoeffModel make_model(const ExperimentConfig& config);

std::filesystem::path output_directory(const ExperimentConfig& config);

/// Executes the experiment and writes CSV series plus summary.json.
/// Returns 0 pass, 2 property failure, 3 numerical abort, 1 config error.
int run_experiment(const std::string& source, std::string* message = nullptr);
int run_experiment(const ExperimentConfig& config, std::string* message = nullptr);

}  // namespace entroflow
