#include "entroflow/experiment.hpp"

#include "entroflow/csv_io.hpp"
#include "entroflow/diffusion_flow.hpp"
#include "entroflow/entropy_meters.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/inequality_lab.hpp"
#include "entroflow/keller_segel.hpp"
#include "entroflow/p_laplace_flow.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace entroflow {

using ojson = nlohmann::ordered_json;

namespace {

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Diffusion: return "diffusion";
        case ExperimentKind::Ineq: return "ineq";
        case ExperimentKind::KellerSegel: return "ks";
        case ExperimentKind::PLaplace: return "plaplace";
    }
    return "?";
}

}  // namespace

const std::vector<Preset>& preset_catalog() {
    static const std::vector<Preset> presets = {
        {"heat_sanity", "entropy and Fisher information decay for the heat equation",
         R"({"name": "heat_sanity", "kind": "diffusion",
             "model": {"family": "linear"}, "grid": {"cells": 128, "dim": 1},
             "run": {"t_end": 0.1, "safety": 0.4, "record_every": 128, "amplitude": 0.5}})"},
        {"fisher_identity_m2", "Fisher information identity and decay, porous medium law a(s) = 2s",
         R"({"name": "fisher_identity_m2", "kind": "diffusion",
             "model": {"family": "power_law", "m": 2}, "grid": {"cells": 128, "dim": 1},
             "run": {"t_end": 0.05, "safety": 0.4, "record_every": 64, "amplitude": 0.5}})"},
        {"fisher_identity_m05", "Fisher information identity and decay, fast diffusion law m = 1/2",
         R"({"name": "fisher_identity_m05", "kind": "diffusion",
             "model": {"family": "power_law", "m": 0.5}, "grid": {"cells": 128, "dim": 1},
             "run": {"t_end": 0.05, "safety": 0.4, "record_every": 64, "amplitude": 0.5}})"},
        {"bernis_n1", "Bernis-type inequality with constant (1+sqrt n)^2, n = 1",
         R"({"name": "bernis_n1", "kind": "ineq", "model": {"family": "linear"},
             "grid": {"cells": 64, "dim": 1}, "run": {"seed": 20240611},
             "ineq": {"check": "bernis", "trials": 1000}})"},
        {"bernis_n2", "Bernis-type inequality with constant (1+sqrt n)^2, n = 2",
         R"({"name": "bernis_n2", "kind": "ineq", "model": {"family": "linear"},
             "grid": {"cells": 64, "dim": 2}, "run": {"seed": 20240611},
             "ineq": {"check": "bernis", "trials": 1000}})"},
        {"fisher_ineq_n2", "Hessian bound with constant (4+(1+sqrt n)^2)/(2 lambda), n = 2",
         R"({"name": "fisher_ineq_n2", "kind": "ineq", "model": {"family": "power_law", "m": 2},
             "grid": {"cells": 64, "dim": 2}, "run": {"seed": 20240611},
             "ineq": {"check": "fisher", "trials": 1000}})"},
        {"cmkm_n1", "ratio int|D^2 sqrt f|^2 / int f|D^2 log f|^2 (reported, no verdict)",
         R"({"name": "cmkm_n1", "kind": "ineq", "model": {"family": "linear"},
             "grid": {"cells": 64, "dim": 1}, "run": {"seed": 20240611},
             "ineq": {"check": "cmkm", "trials": 200}})"},
        {"ks_critical_21", "global existence on the critical line p - q = 1 at (p,q) = (2,1)",
         R"({"name": "ks_critical_21", "kind": "ks", "grid": {"cells": 256, "dim": 1},
             "run": {"t_end": 1.0, "safety": 0.4, "record_every": 2048},
             "ks": {"p": 2, "q": 1, "mass": 20, "strict": true}})"},
        {"ks_identity_10", "Fisher-type identities for linear sensitivity S(u) = u, (p,q) = (1,0)",
         R"({"name": "ks_identity_10", "kind": "ks", "grid": {"cells": 128, "dim": 1},
             "run": {"t_end": 0.05, "safety": 0.4, "record_every": 16},
             "ks": {"p": 1, "q": 0, "mass": 1}})"},
        {"plaplace_mono", "monotonicity of I[u] = int |d_x u^p*|^p along the p-Laplace flow, p >= 2",
         R"({"name": "plaplace_mono", "kind": "plaplace", "grid": {"cells": 128, "dim": 1},
             "run": {"t_end": 0.05, "safety": 0.4, "record_every": 64, "amplitude": 0.5},
             "plaplace": {"p": 3, "delta": 1e-6}})"},
    };
    return presets;
}

std::string list_presets() {
    std::ostringstream out;
    for (const auto& p : preset_catalog()) out << p.name << " -> " << p.statement << '\n';
    return out.str();
}

namespace {

class BlockReader {
public:
    BlockReader(const ojson& obj, std::string prefix, std::vector<std::string>& problems)
        : obj_(obj), prefix_(std::move(prefix)), problems_(problems) {}

    template <class T>
    void read(const std::string& key, T& target) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        const ojson& v = obj_.at(key);
        try {
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v.is_number()) throw std::invalid_argument("expected a number");
                if constexpr (std::is_integral_v<T>) {
                    const double d = v.get<double>();
                    if (d != std::floor(d)) throw std::invalid_argument("expected an integer");
                    if (std::is_unsigned_v<T> && d < 0) throw std::invalid_argument("expected a nonnegative integer");
                }
            } else {
                if (!v.is_string()) throw std::invalid_argument("expected a string");
            }
            target = v.get<T>();
        } catch (const std::exception& e) {
            problems_.push_back(prefix_ + key + ": " + e.what());
        }
    }

    template <class T>
    void read_optional(const std::string& key, std::optional<T>& target) {
        seen_.insert(key);
        if (!obj_.contains(key)) return;
        T value{};
        read(key, value);
        target = value;
    }

    void mark(std::initializer_list<const char*> keys) {
        for (const char* k : keys) seen_.insert(k);
    }

    void finish() {
        for (const auto& [key, _] : obj_.items()) {
            if (!seen_.count(key)) problems_.push_back("unknown field " + prefix_ + key);
        }
    }

private:
    const ojson& obj_;
    std::string prefix_;
    std::vector<std::string>& problems_;
    std::set<std::string> seen_;
};

const ojson* block(const ojson& root, const std::string& key, std::vector<std::string>& problems) {
    if (!root.contains(key)) return nullptr;
    if (!root.at(key).is_object()) {
        problems.push_back(key + ": expected an object");
        return nullptr;
    }
    return &root.at(key);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    ExperimentConfig c;
    auto& problems = c.parse_problems;
    std::string kind = "diffusion";
    {
        BlockReader r(root, "", problems);
        r.read("name", c.name);
        r.read("kind", kind);
        r.read("output", c.output);
        r.mark({"model", "grid", "run", "ks", "plaplace", "ineq"});
        r.finish();
    }
    if (kind == "diffusion") c.kind = ExperimentKind::Diffusion;
    else if (kind == "ineq") c.kind = ExperimentKind::Ineq;
    else if (kind == "ks") c.kind = ExperimentKind::KellerSegel;
    else if (kind == "plaplace") c.kind = ExperimentKind::PLaplace;
    else problems.push_back("kind: unknown experiment kind '" + kind + "'");

    if (const ojson* b = block(root, "model", problems)) {
        BlockReader r(*b, "model.", problems);
        r.read("family", c.model_family);
        r.read("m", c.model_m);
        r.read("table", c.model_table);
        r.finish();
    }
    if (const ojson* b = block(root, "grid", problems)) {
        BlockReader r(*b, "grid.", problems);
        r.read("cells", c.cells);
        r.read("dim", c.dim);
        r.finish();
    }
    if (const ojson* b = block(root, "run", problems)) {
        BlockReader r(*b, "run.", problems);
        r.read("t_end", c.t_end);
        r.read("safety", c.safety);
        r.read("record_every", c.record_every);
        r.read_optional("seed", c.seed);
        r.read("amplitude", c.amplitude);
        r.finish();
    }
    if (const ojson* b = block(root, "ks", problems)) {
        BlockReader r(*b, "ks.", problems);
        r.read("p", c.ks_p);
        r.read("q", c.ks_q);
        r.read("mass", c.ks_mass);
        r.read("strict", c.ks_strict);
        r.read("ceiling", c.ks_ceiling);
        r.finish();
    }
    if (const ojson* b = block(root, "plaplace", problems)) {
        BlockReader r(*b, "plaplace.", problems);
        r.read("p", c.pl_p);
        r.read("delta", c.pl_delta);
        r.finish();
    }
    if (const ojson* b = block(root, "ineq", problems)) {
        BlockReader r(*b, "ineq.", problems);
        r.read("check", c.ineq_check);
        r.read("trials", c.ineq_trials);
        r.finish();
    }
    for (const auto& p : preset_catalog()) {
        if (p.name == c.name) c.statement = p.statement;
    }
    return c;
}

ExperimentConfig load_config(const std::string& source) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(source, ec)) {
        std::ifstream in(source);
        if (!in) throw ConfigError("cannot open config file " + source);
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_config(buf.str());
    }
    for (const auto& p : preset_catalog()) {
        if (p.name == source) return parse_config(p.json);
    }
    throw ConfigError("no config file or preset named '" + source + "'");
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
    std::vector<std::string> v = c.parse_problems;
    if (c.name.empty()) v.push_back("name: required");
    if (c.name.find_first_of("/\\") != std::string::npos || c.name == "." || c.name == "..") {
        v.push_back("name: must be a plain directory name");
    }
    if (c.cells < 8) v.push_back("grid.cells: must be at least 8");
    const bool one_d_only = c.kind != ExperimentKind::Ineq;
    if (one_d_only && c.dim != 1) v.push_back("grid.dim: " + std::string(kind_name(c.kind)) + " experiments are 1D");
    if (!one_d_only && (c.dim < 1 || c.dim > 3)) v.push_back("grid.dim: must be 1, 2 or 3");
    if (c.kind == ExperimentKind::Ineq && c.dim == 3 && c.cells > 64) {
        v.push_back("grid.cells: 3D inequality sampling is limited to 64 cells per axis");
    }

    if (c.kind == ExperimentKind::Diffusion || c.kind == ExperimentKind::Ineq) {
        static const std::set<std::string> families = {"linear", "power_law", "shifted_power_law", "custom"};
        if (!families.count(c.model_family)) {
            v.push_back("model.family: unknown family '" + c.model_family + "'");
        } else if ((c.model_family == "power_law" || c.model_family == "shifted_power_law") && !(c.model_m > 0.0)) {
            v.push_back("model.m: must be positive");
        } else if (c.model_family == "custom" && c.model_table.empty()) {
            v.push_back("model.table: custom models need a table path");
        } else if (c.model_family == "custom" && !std::filesystem::is_regular_file(c.model_table)) {
            v.push_back("model.table: file not found: " + c.model_table);
        }
    }

    if (c.kind != ExperimentKind::Ineq) {
        if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) v.push_back("run.t_end: must be positive and finite");
        if (!(c.safety > 0.0 && c.safety <= 1.0)) v.push_back("run.safety: must lie in (0, 1]");
        if (c.record_every < 1) v.push_back("run.record_every: must be at least 1");
        if (!(c.amplitude >= 0.0 && c.amplitude < 1.0)) v.push_back("run.amplitude: must lie in [0, 1)");
    }

    switch (c.kind) {
        case ExperimentKind::Ineq: {
            if (!c.seed) v.push_back("run.seed: required for sampled experiments");
            if (c.ineq_check != "bernis" && c.ineq_check != "fisher" && c.ineq_check != "cmkm") {
                v.push_back("ineq.check: must be bernis, fisher or cmkm");
            }
            if (c.ineq_trials < 1) v.push_back("ineq.trials: must be at least 1");
            break;
        }
        case ExperimentKind::KellerSegel: {
            if (!(c.ks_p >= 0.0) || !std::isfinite(c.ks_p)) v.push_back("ks.p: must be nonnegative");
            if (!(c.ks_q >= 0.0) || !std::isfinite(c.ks_q)) v.push_back("ks.q: must be nonnegative");
            if (!(c.ks_mass > 0.0) || !std::isfinite(c.ks_mass)) v.push_back("ks.mass: must be positive");
            if (!(c.ks_ceiling > 0.0)) v.push_back("ks.ceiling: must be positive");
            if (c.ks_strict) {
                if (!(c.ks_q > 0.5 && c.ks_q <= 1.0)) {
                    std::ostringstream m;
                    m << "ks.q: strict mode needs q in (1/2,1], got q = " << c.ks_q;
                    v.push_back(m.str());
                }
                if (std::abs(c.ks_p - c.ks_q - 1.0) >= 1e-12) {
                    std::ostringstream m;
                    m << "ks.p: strict mode needs p - q = 1, got p - q = " << c.ks_p - c.ks_q;
                    v.push_back(m.str());
                }
            }
            break;
        }
        case ExperimentKind::PLaplace: {
            if (!(c.pl_p > 1.0)) v.push_back("plaplace.p: must exceed 1");
            if (std::abs(c.pl_p - 1.5) < 1e-12) v.push_back("plaplace.p: p = 3/2 is excluded (p* vanishes)");
            if (!(c.pl_delta >= 0.0)) v.push_back("plaplace.delta: must be nonnegative");
            break;
        }
        case ExperimentKind::Diffusion: break;
    }
    return v;
}

CoeffModel make_model(const ExperimentConfig& c) {
    if (c.model_family == "linear") return CoeffModel::linear();
    if (c.model_family == "power_law") return CoeffModel::power_law(c.model_m);
    if (c.model_family == "shifted_power_law") return CoeffModel::shifted_power_law(c.model_m);
    if (c.model_family == "custom") return CoeffModel::from_csv(c.model_table);
    throw ConfigError("unknown model family '" + c.model_family + "'");
}

std::filesystem::path output_directory(const ExperimentConfig& c) {
    std::filesystem::path root = "out";
    if (const char* env = std::getenv("ENTROFLOW_OUT"); env && *env) {
        root = env;
    } else if (!c.output.empty()) {
        root = c.output;
    }
    return root / c.name;
}

namespace {

struct Outcome {
    int code = kExitPass;
    std::string message;
};

ojson header(const ExperimentConfig& c) {
    ojson j;
    j["name"] = c.name;
    j["kind"] = kind_name(c.kind);
    j["statement"] = c.statement.empty() ? "custom experiment" : c.statement;
    j["grid"] = {{"cells", c.cells}, {"dim", c.dim}};
    return j;
}

void write_json(const std::filesystem::path& path, const ojson& j) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

ojson monotonicity_json(const MonotonicityReport& r) {
    return {{"pass", r.pass}, {"worst_excess", r.worst_excess}, {"worst_index", r.worst_index}};
}

Outcome run_diffusion(const ExperimentConfig& c, const std::filesystem::path& dir, ojson& summary) {
    const CoeffModel model = make_model(c);
    summary["model"] = model.name();
    FlowConfig fc;
    fc.model = model;
    fc.grid = Grid(1, c.cells);
    fc.t_end = c.t_end;
    fc.safety = c.safety;
    fc.record_every = c.record_every;
    const Field u0 = cosine_bump(fc.grid, c.amplitude);

    Trajectory traj = run(u0, fc);
    attach_meters(traj, model);
    summary["dt"] = traj.dt;
    summary["snapshots"] = traj.size();

    ResidualSeries res;
    const bool have_residuals = traj.size() >= 3;
    if (have_residuals) res = identity_residuals(traj, model);

    {
        std::ofstream out(dir / "meters.csv");
        CsvWriter csv(out, {"t", "entropy", "fisher_sigma", "fisher_st", "dissipation", "r_entropy", "r_fisher"});
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto& m = traj.meters[k];
            const bool interval = have_residuals && k + 1 < traj.size();
            csv.row({traj.times[k], m.entropy, m.fisher_sigma, m.fisher_st, m.dissipation,
                     interval ? res.r_entropy[k] : 0.0, interval ? res.r_fisher[k] : 0.0});
        }
    }
    {
        std::ofstream out(dir / "field_final.csv");
        write_field_csv(out, traj.fields.back());
    }

    std::vector<double> entropy, fisher, fisher_st;
    for (const auto& m : traj.meters) {
        entropy.push_back(m.entropy);
        fisher.push_back(m.fisher_sigma);
        fisher_st.push_back(m.fisher_st);
    }
    const double h = fc.grid.spacing();
    const auto mono_e = check_nonincreasing(entropy, h, traj.dt);
    const auto mono_f = check_nonincreasing(fisher, h, traj.dt);
    const auto mono_st = check_nonincreasing(fisher_st, h, traj.dt);
    bool pass = mono_e.pass && mono_f.pass && mono_st.pass;

    ojson props;
    props["entropy_nonincreasing"] = monotonicity_json(mono_e);
    props["fisher_sigma_nonincreasing"] = monotonicity_json(mono_f);
    props["fisher_st_nonincreasing"] = monotonicity_json(mono_st);
    if (traj.size() >= 4) {
        const auto cv = convexity_check(traj);
        props["entropy_convex"] = {{"pass", cv.pass},
                                   {"min_second_difference", cv.min_second_difference},
                                   {"tolerance", cv.tolerance}};
        pass = pass && cv.pass;
    }
    if (have_residuals) {
        props["identity_residuals"] = {{"max_abs_r_entropy", res.max_abs_entropy()},
                                       {"max_abs_r_fisher", res.max_abs_fisher()}};
    }
    if (model.family() == Family::Linear) {
        // Exact solution of the heat equation for this cosine datum.
        const double t = traj.times.back();
        double err = 0.0;
        const Field& u = traj.fields.back();
        for (int i = 0; i < u.grid.cells; ++i) {
            const double x = u.grid.center(i);
            const double exact = 1.0 + c.amplitude * std::exp(-std::numbers::pi * std::numbers::pi * t) *
                                           std::cos(std::numbers::pi * x);
            err = std::max(err, std::abs(u[i] - exact));
        }
        props["spectral_match"] = {{"pass", err <= 1e-3}, {"max_error", err}, {"tolerance", 1e-3}};
        pass = pass && err <= 1e-3;
    }
    summary["properties"] = props;
    summary["fisher_series"] = fisher;
    summary["entropy_series"] = entropy;
    return pass ? Outcome{kExitPass, "all properties hold"}
                : Outcome{kExitPropertyFailed, "a monitored property failed; see summary.json"};
}

Outcome run_ineq(const ExperimentConfig& c, const std::filesystem::path& dir, ojson& summary) {
    const CoeffModel model = make_model(c);
    summary["model"] = model.name();
    summary["check"] = c.ineq_check;
    const int n = c.dim;
    const auto s = worst_ratio_search(n, model, c.ineq_trials, *c.seed, c.cells);
    {
        std::ofstream out(dir / "trials.csv");
        CsvWriter csv(out, {"trial", "offset", "margin", "lambda", "lhs", "rhs_integral", "constant", "ratio"});
        for (const auto& r : s.results) {
            if (c.ineq_check == "cmkm") {
                csv.row({static_cast<double>(r.trial), r.spec.offset, r.spec.positivity_margin(), r.lambda, 0.0, 0.0,
                         0.0, r.cmkm});
            } else {
                const IneqReport& rep = c.ineq_check == "bernis" ? r.bernis : r.fisher;
                csv.row({static_cast<double>(r.trial), r.spec.offset, r.spec.positivity_margin(), r.lambda, rep.lhs,
                         rep.rhs_integral, rep.constant, rep.ratio});
            }
        }
    }
    summary["seed"] = *c.seed;
    summary["trials"] = c.ineq_trials;
    summary["tolerance"] = s.tol;
    bool pass = true;
    if (c.ineq_check == "bernis") {
        bool all = true;
        for (const auto& r : s.results) all = all && r.bernis.pass;
        summary["constant"] = bernis_constant(n);
        summary["max_ratio"] = s.max_bernis_ratio;
        summary["argmax_spec"] = describe(s.argmax_bernis);
        summary["pass"] = all;
        pass = all;
    } else if (c.ineq_check == "fisher") {
        bool all = true;
        for (const auto& r : s.results) all = all && r.fisher.pass;
        summary["max_ratio"] = s.max_fisher_ratio;
        summary["max_ratio_over_constant"] = s.max_fisher_normalized;
        summary["argmax_spec"] = describe(s.argmax_fisher);
        summary["pass"] = all;
        pass = all;
    } else {
        summary["max_ratio"] = s.max_cmkm_ratio;
        summary["argmax_spec"] = describe(s.argmax_cmkm);
        summary["verdict"] = "reported only";
    }
    return pass ? Outcome{kExitPass, "inequality holds on every sample"}
                : Outcome{kExitPropertyFailed, "inequality violated on at least one sample; see trials.csv"};
}

Outcome run_ks(const ExperimentConfig& c, const std::filesystem::path& dir, ojson& summary) {
    KSParams params{c.ks_p, c.ks_q, c.ks_strict};
    summary["params"] = {{"p", c.ks_p}, {"q", c.ks_q}, {"mass", c.ks_mass}, {"strict", c.ks_strict}};
    KSRunConfig rc;
    rc.grid = Grid(1, c.cells);
    rc.t_end = c.t_end;
    rc.safety = c.safety;
    rc.record_every = c.record_every;
    rc.ceiling = c.ks_ceiling;
    const KSTrajectory traj = ks_run(ks_initial_state(rc.grid, c.ks_mass, c.amplitude), params, rc);
    summary["completed"] = traj.completed;
    summary["termination"] = traj.termination;
    summary["last_safe_time"] = traj.last_safe_time;
    summary["dt"] = traj.dt;

    const auto monitors = apriori_monitor(traj, params, c.ks_ceiling);
    {
        std::ofstream out(dir / "ks_monitors.csv");
        CsvWriter csv(out, {"t", "mass", "lyap_classical", "lyap_F", "dissipation_D", "ep_estimate", "lp_norm",
                            "l2_norm_sq", "log_bound", "vt_accum", "v_l2", "v_l4", "vx_l2", "vx_l4", "u_max"});
        for (const auto& m : monitors) {
            csv.row({m.time, m.mass, m.lyap_classical, m.lyap_F, m.dissipation_D, m.ep_estimate, m.lp_norm,
                     m.l2_norm_sq, m.log_bound, m.vt_accum, m.v_l2, m.v_l4, m.vx_l2, m.vx_l4, m.u_max});
        }
    }

    ojson maxima;
    auto track = [&](const char* key, auto getter) {
        double mx = -INFINITY;
        bool finite = true;
        for (const auto& m : monitors) {
            const double x = getter(m);
            finite = finite && std::isfinite(x);
            mx = std::max(mx, x);
        }
        maxima[key] = {{"max", mx}, {"finite", finite}};
        return finite;
    };
    bool finite = true;
    finite &= track("log_bound", [](const KSMonitor& m) { return m.log_bound; });
    finite &= track("l2_norm_sq", [](const KSMonitor& m) { return m.l2_norm_sq; });
    finite &= track("ep_estimate", [](const KSMonitor& m) { return m.ep_estimate; });
    finite &= track("vt_accum", [](const KSMonitor& m) { return m.vt_accum; });
    finite &= track("lp_norm", [](const KSMonitor& m) { return m.lp_norm; });
    finite &= track("u_max", [](const KSMonitor& m) { return m.u_max; });
    finite &= track("vx_l4", [](const KSMonitor& m) { return m.vx_l4; });
    summary["monitors"] = maxima;

    ojson props;
    const double m0 = monitors.front().mass;
    double drift = 0.0;
    for (const auto& m : monitors) drift = std::max(drift, std::abs(m.mass - m0) / m0);
    props["mass_drift"] = {{"pass", drift < 1e-12}, {"relative_drift", drift}};
    bool pass = drift < 1e-12 && finite;

    if (traj.size() >= 2) {
        std::vector<double> lyap;
        for (const auto& m : monitors) lyap.push_back(m.lyap_classical);
        const auto mono = check_nonincreasing(lyap, rc.grid.spacing(), traj.dt);
        props["lyapunov_nonincreasing"] = monotonicity_json(mono);
        pass = pass && mono.pass;
        props["identity_residuals"] = {{"lyapunov", max_abs(lyapunov_identity_residual(traj, params))},
                                       {"entropy_production", max_abs(entropy_production_residual(traj, params))}};
        if (params.satisfies_estimate_hypotheses()) {
            const auto lp = lp_inequality_check(traj, params);
            props["lp_inequality"] = {{"pass", lp.pass},
                                      {"min_slack", *std::min_element(lp.slack.begin(), lp.slack.end())}};
            pass = pass && lp.pass;
        }
    }
    summary["properties"] = props;

    // Self-convergence of the identity residuals on a short horizon.
    if (traj.completed) {
        const int top = std::min(c.cells, 128);
        std::vector<int> levels;
        for (int n = top / 4; n <= top; n *= 2) {
            if (n >= 8) levels.push_back(n);
        }
        ojson table = ojson::array();
        try {
            const auto rows = ks_residual_convergence(params, c.ks_mass, levels, std::min(c.t_end, 0.01), 0.1, 4,
                                                      c.amplitude);
            std::vector<double> ly, ep;
            for (const auto& r : rows) {
                ly.push_back(r.lyapunov);
                ep.push_back(r.entropy);
                ojson row = {{"cells", r.cells}, {"dt", r.dt}, {"lyapunov", r.lyapunov}, {"entropy_production", r.entropy}};
                if (std::isfinite(r.fisher_identity)) {
                    row["fisher_identity"] = r.fisher_identity;
                    row["fg_identity"] = r.fg_identity;
                }
                table.push_back(row);
            }
            summary["residual_convergence"] = {{"levels", table},
                                               {"order_lyapunov", observed_orders(ly)},
                                               {"order_entropy_production", observed_orders(ep)}};
        } catch (const NumericalAbort& e) {
            summary["residual_convergence"] = {{"error", e.what()}};
        }
    }

    if (!traj.completed) {
        return {kExitNumericalAbort, "run aborted at t = " + format_number(traj.last_safe_time) + ": " + traj.termination};
    }
    return pass ? Outcome{kExitPass, "all properties hold"}
                : Outcome{kExitPropertyFailed, "a monitored property failed; see ks_summary.json"};
}

Outcome run_plaplace(const ExperimentConfig& c, const std::filesystem::path& dir, ojson& summary) {
    PLaplaceConfig pc;
    pc.p = c.pl_p;
    pc.delta = c.pl_delta;
    pc.grid = Grid(1, c.cells);
    pc.t_end = c.t_end;
    pc.safety = c.safety;
    pc.record_every = c.record_every;
    summary["params"] = {{"p", c.pl_p}, {"delta", c.pl_delta}};
    const Trajectory traj = pl_run(cosine_bump(pc.grid, c.amplitude), pc);
    summary["dt"] = traj.dt;
    const auto rep = monotonicity_report(traj, c.pl_p, c.pl_delta);
    {
        std::ofstream out(dir / "pl_monitors.csv");
        CsvWriter csv(out, {"t", "I", "dI_dt", "residual_prop61"});
        for (const auto& r : rep.rows) csv.row({r.t, r.I, r.dI_dt, r.residual_prop61});
    }
    double worst_res = 0.0;
    for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k) {
        worst_res = std::max(worst_res, std::abs(rep.rows[k].residual_prop61));
    }
    summary["properties"] = {{"verdict_available", rep.verdict_available},
                             {"I_nonincreasing", rep.pass},
                             {"worst_excess", rep.worst_excess},
                             {"max_abs_rate_residual", worst_res}};
    if (!rep.verdict_available) return {kExitPass, "p < 2: monitors reported without a verdict"};
    return rep.pass ? Outcome{kExitPass, "I is non-increasing"}
                    : Outcome{kExitPropertyFailed, "I increased beyond tolerance; see pl_monitors.csv"};
}

std::string summary_file(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::KellerSegel: return "ks_summary.json";
        case ExperimentKind::PLaplace: return "pl_summary.json";
        default: return "summary.json";
    }
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::string* message) {
    auto report = [&](int code, const std::string& text) {
        if (message) *message = text;
        return code;
    };
    const auto violations = validate_config(config);
    if (!violations.empty()) {
        std::string text = "invalid config:";
        for (const auto& v : violations) text += "\n  " + v;
        return report(kExitConfig, text);
    }

    const auto dir = output_directory(config);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return report(kExitConfig, "cannot create output directory " + dir.string() + ": " + ec.message());

    ojson summary = header(config);
    Outcome outcome;
    try {
        switch (config.kind) {
            case ExperimentKind::Diffusion: outcome = run_diffusion(config, dir, summary); break;
            case ExperimentKind::Ineq: outcome = run_ineq(config, dir, summary); break;
            case ExperimentKind::KellerSegel: outcome = run_ks(config, dir, summary); break;
            case ExperimentKind::PLaplace: outcome = run_plaplace(config, dir, summary); break;
        }
    } catch (const NumericalAbort& e) {
        outcome = {kExitNumericalAbort, std::string("numerical abort: ") + e.what()};
        summary["last_safe_time"] = e.last_safe_time();
    } catch (const HypothesisError& e) {
        outcome = {kExitConfig, e.what()};
    } catch (const ModelError& e) {
        outcome = {kExitConfig, std::string("model error: ") + e.what()};
    } catch (const ConfigError& e) {
        outcome = {kExitConfig, e.what()};
    } catch (const Error& e) {
        outcome = {kExitNumericalAbort, e.what()};
    }
    summary["exit_code"] = outcome.code;
    summary["message"] = outcome.message;
    write_json(dir / summary_file(config.kind), summary);
    return report(outcome.code, outcome.message);
}

int run_experiment(const std::string& source, std::string* message) {
    try {
        return run_experiment(load_config(source), message);
    } catch (const ConfigError& e) {
        if (message) *message = e.what();
        return kExitConfig;
    }
}

}  // namespace entroflow
