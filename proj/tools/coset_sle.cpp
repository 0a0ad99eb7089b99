// coset-sle: parameter queries, crossing probabilities, and Monte-Carlo
// experiments for multiple SLE with coset WZW drift structure.
//
// Exit codes: 0 success, 2 usage or domain error, 3 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosetsle/crossing.hpp"
#include "cosetsle/jsonio.hpp"
#include "cosetsle/mc.hpp"
#include "cosetsle/version.hpp"

using namespace cosetsle;

namespace {

std::string timestamp_utc() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << text;
}

/// Manifest written before any computation starts; timestamps live only
/// here so result files stay byte-reproducible.
void write_manifest(const std::string& path, const std::string& command, const json& config,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
    json m;
    m["schema_version"] = schema_version;
    m["library_version"] = version;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    m["outputs"] = outputs;
    m["timestamp"] = timestamp_utc();
    write_text_file(path, dump_json17(m) + "\n");
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("COSET_SLE_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::domain_error("COSET_SLE_SEED is not an unsigned integer");
        }
    }
    return 1;
}

struct ModelFlags {
    std::string family{"parafermion"};
    int level{4};

    CosetModel resolve() const { return model_params(family_from_name(family), level); }
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--model", mf.family, "model family: parafermion | su2k")
        ->check(CLI::IsMember({"parafermion", "su2k"}));
    cmd->add_option("--level", mf.level, "integer level (n or k)");
}

void add_df_flags(CLI::App* cmd, DFConfig& df) {
    cmd->add_option("--cutoff", df.cutoff_epsilon, "DF cutoff epsilon (default 1e-8)");
    cmd->add_option("--vmax", df.v_max, "DF v-integral truncation (default 1e4)");
    cmd->add_option("--nodes", df.nodes_per_axis, "DF quadrature nodes per axis (default 48)");
}

json params_json(const CosetModel& m) {
    json j;
    j["model"] = m.family_name();
    j["level"] = m.level;
    j["kappa"] = m.kappa_d();
    j["tau"] = m.tau_d();
    j["central_charge"] = m.central_charge.to_double();
    j["kappa_exact"] = m.kappa.str();
    j["tau_exact"] = m.tau.str();
    j["central_charge_exact"] = m.central_charge.str();
    j["h_bcc_exact"] = m.h_bcc.str();
    j["h_fused_exact"] = m.h_fused.str();
    return j;
}

json crossing_json(const CrossingResult& r) {
    json j;
    j["x"] = r.x;
    j["Z_C1"] = r.z_c1;
    j["Z_C2"] = r.z_c2;
    j["p_C1"] = r.p_c1;
    j["p_C2"] = r.p_c2;
    return j;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"multiple Schramm-Loewner evolutions for coset WZW models"};
    app.require_subcommand(1);
    app.fallthrough(true);
    app.set_config("--config", "",
                   "config file ([subcommand] sections, key=value); flags override it");
    app.set_version_flag("--version", version);

    // ---- params ----
    auto* params = app.add_subcommand("params", "print kappa/tau/central charge for a model");
    ModelFlags pm;
    add_model_flags(params, pm);

    // ---- crossing ----
    auto* crossing = app.add_subcommand("crossing", "crossing (arch) probabilities");
    ModelFlags cm;
    add_model_flags(crossing, cm);
    double cx = 0.5;
    std::string grid_spec, cross_out;
    bool check_convergence = false;
    DFConfig cdf;
    crossing->add_option("--x", cx, "cross ratio in (0,1)");
    crossing->add_option("--grid", grid_spec, "grid start:end:step (streams CSV)");
    crossing->add_option("--out", cross_out, "write output to this path instead of stdout");
    crossing->add_flag("--check", check_convergence,
                       "verify DF quadrature convergence (numeric error on failure)");
    add_df_flags(crossing, cdf);

    // ---- mc ----
    auto* mc = app.add_subcommand("mc", "Monte-Carlo experiments");
    ModelFlags mm;
    add_model_flags(mc, mm);
    std::string experiment = "two-sle";
    std::string channel = "identity";
    std::string mc_out, outcomes_csv, trace_path, journal_path, manifest_path;
    std::string drift_mode = "full";
    ExperimentConfig ec;
    bool zero_noise = false;
    double d_eff_override = std::numeric_limits<double>::quiet_NaN();
    mc->add_option("--experiment", experiment, "two-sle | three-sle | bessel | prob-martingale")
        ->check(CLI::IsMember({"two-sle", "three-sle", "bessel", "prob-martingale"}));
    mc->add_option("--channel", channel, "two-sle fusion channel: identity | fused | middle")
        ->check(CLI::IsMember({"identity", "fused", "middle"}));
    mc->add_option("--samples", ec.samples, "number of Monte-Carlo samples");
    mc->add_option("--sample-offset", ec.sample_offset,
                   "first sample index (resume by extending the range)");
    auto* seed_opt = mc->add_option("--seed", ec.seed, "RNG seed (else COSET_SLE_SEED, else 1)");
    mc->add_option("--jobs", ec.jobs, "worker threads");
    mc->add_option("--dt", ec.dt, "base time step");
    mc->add_option("--adapt", ec.adapt_coeff, "adaptive step coefficient (ds = adapt*gap^2)");
    mc->add_option("--positions", ec.initial_positions, "initial tip positions (2 values)")
        ->expected(2);
    mc->add_option("--x0", ec.x0, "three-sle / prob-martingale cross ratio");
    mc->add_option("--horizons", ec.horizons_s,
                   "Bessel-time horizons for two-sle/bessel (ds = 2 kappa dt)");
    mc->add_option("--horizon-t", ec.horizon_t, "three-sle Loewner-time horizon");
    mc->add_option("--pm-horizon", ec.pm_horizon, "prob-martingale horizon");
    mc->add_option("--eps-collision", ec.epsilon_collision, "collision threshold");
    mc->add_option("--d-eff", d_eff_override, "explicit Bessel dimension (bessel experiment)");
    mc->add_option("--drift-mode", drift_mode, "full | zero (zero is the control hook)")
        ->check(CLI::IsMember({"full", "zero"}));
    mc->add_flag("--zero-noise", zero_noise, "deterministic drift-only evolution (test hook)");
    mc->add_option("--out", mc_out, "write the JSON result record to this path");
    mc->add_option("--outcomes-csv", outcomes_csv, "append per-sample outcomes CSV here");
    mc->add_option("--trace", trace_path, "write sample 0's trajectory CSV here");
    mc->add_option("--journal", journal_path, "write sample 0's slit-map journal CSV here");
    mc->add_option("--manifest", manifest_path, "manifest path (default: <out>.manifest.json)");
    add_df_flags(mc, ec.df);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage errors map to exit code 2
    }

    if (params->parsed()) {
        std::cout << dump_json17(params_json(pm.resolve())) << "\n";
        return 0;
    }

    if (crossing->parsed()) {
        const CosetModel model = cm.resolve();
        const auto eval = [&](double x) {
            if (check_convergence && model.family == ModelFamily::Parafermion) {
                df_block_checked(model.level, x, cdf);  // throws numeric_error if unstable
                df_block_checked(model.level, 1.0 - x, cdf);
            }
            return crossing_probability(model, x, cdf);
        };
        if (!grid_spec.empty()) {
            const std::vector<double> xs = parse_grid(grid_spec);
            std::ostringstream os;
            write_crossing_grid_csv(model, xs, cdf, os);
            if (cross_out.empty())
                std::cout << os.str();
            else
                write_text_file(cross_out, os.str());
            return 0;
        }
        const json j = crossing_json(eval(cx));
        if (cross_out.empty())
            std::cout << dump_json17(j) << "\n";
        else
            write_text_file(cross_out, dump_json17(j) + "\n");
        return 0;
    }

    // ---- mc ----
    ec.model = mm.resolve();
    ec.channel = channel == "identity" ? TwoSleChannel::Identity
                 : channel == "fused"  ? TwoSleChannel::Fused
                                       : TwoSleChannel::Middle;
    ec.kind = experiment == "two-sle"     ? ExperimentKind::TwoSleCollision
              : experiment == "three-sle" ? ExperimentKind::ThreeSleArch
              : experiment == "bessel"    ? ExperimentKind::BesselCompare
                                          : ExperimentKind::ProbMartingale;
    ec.drift_mode = drift_mode == "full" ? DriftMode::Full : DriftMode::ZeroDrift;
    ec.zero_noise = zero_noise;
    ec.d_eff_override = d_eff_override;
    if (seed_opt->count() == 0) ec.seed = default_seed();
    ec.validate();

    if (!manifest_path.empty() || !mc_out.empty()) {
        std::vector<std::string> outputs;
        if (!mc_out.empty()) outputs.push_back(mc_out);
        if (!outcomes_csv.empty()) outputs.push_back(outcomes_csv);
        if (!trace_path.empty()) outputs.push_back(trace_path);
        if (!journal_path.empty()) outputs.push_back(journal_path);
        const std::string path =
            manifest_path.empty() ? mc_out + ".manifest.json" : manifest_path;
        write_manifest(path, "mc " + experiment, to_json(ec), ec.seed, outputs);
    }

    const auto t0 = std::chrono::steady_clock::now();
    json results;
    std::vector<SampleOutcome> outcomes;
    std::vector<SampleOutcome>* want = outcomes_csv.empty() ? nullptr : &outcomes;
    switch (ec.kind) {
        case ExperimentKind::TwoSleCollision:
            results = to_json(run_two_sle(ec, want));
            break;
        case ExperimentKind::BesselCompare:
            results = to_json(run_bessel_compare(ec, want));
            break;
        case ExperimentKind::ThreeSleArch: {
            const ArchStatistics stats = run_three_sle(ec, want);
            std::optional<CrossingResult> ref;
            try {
                ref = crossing_probability(ec.model, ec.x0, ec.df);
            } catch (const numeric_error&) {
                ref = std::nullopt;  // report counts even if the reference fails
            }
            results = to_json(stats, ref);
            break;
        }
        case ExperimentKind::ProbMartingale:
            results = to_json(run_prob_martingale(ec));
            break;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const json record = result_record(ec, results, wall);
    std::cout << dump_json17(record) << "\n";
    if (!mc_out.empty()) write_text_file(mc_out, dump_json17(record) + "\n");
    if (!outcomes_csv.empty()) {
        std::ostringstream os;
        write_outcomes_csv(outcomes, os);
        write_text_file(outcomes_csv, os.str());
    }

    // sample-0 replays for trajectory / journal export
    if (!trace_path.empty() || !journal_path.empty()) {
        DrivingConfig dc = DrivingConfig::from_model(ec.model);
        dc.dt_base = ec.dt;
        dc.adapt_coeff = ec.adapt_coeff;
        dc.epsilon_collision = ec.epsilon_collision;
        dc.drift_mode = ec.drift_mode;
        dc.zero_noise = ec.zero_noise;
        const bool three = ec.kind == ExperimentKind::ThreeSleArch ||
                           ec.kind == ExperimentKind::ProbMartingale;
        std::shared_ptr<MultiSleSde> sde;
        std::vector<double> x0;
        double horizon;
        if (three) {
            auto table = std::make_shared<const CrossRatioDrift>(ec.model, ec.df);
            sde = std::make_shared<MultiSleSde>(dc, table);
            x0 = {0.0, ec.x0, 1.0};
            horizon = ec.kind == ExperimentKind::ThreeSleArch ? ec.horizon_t : ec.pm_horizon;
        } else {
            auto z = std::make_shared<const PurePartition>(
                PurePartition::two_sle(ec.model, ec.channel, true));
            sde = std::make_shared<MultiSleSde>(dc, z);
            x0 = ec.initial_positions;
            double s_max = 0.0;
            for (double s : ec.horizons_s) s_max = std::max(s_max, s);
            horizon = s_max / (2.0 * ec.model.kappa_d());
        }
        LoewnerState st(x0, dc.lie_dim, /*record_journal=*/!journal_path.empty());
        SdeStreams rng(ec.seed, 0, static_cast<int>(x0.size()), dc.lie_dim);
        std::vector<TrajectorySample> rows;
        sde->run_until(st, rng, horizon, trace_path.empty() ? nullptr : &rows);
        if (!trace_path.empty()) {
            std::ostringstream os;
            write_trajectory_csv(rows, dc.lie_dim, os);
            write_text_file(trace_path, os.str());
        }
        if (!journal_path.empty()) {
            std::ostringstream os;
            write_journal_csv(st, os);
            write_text_file(journal_path, os.str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const numeric_error& e) {
        json err;
        err["error"] = "numeric";
        err["message"] = e.what();
        err["coarse_estimate"] = e.coarse_estimate;
        err["fine_estimate"] = e.fine_estimate;
        std::cerr << dump_json17(err) << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        json err;
        err["error"] = "domain";
        err["message"] = e.what();
        std::cerr << dump_json17(err) << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err;
        err["error"] = "runtime";
        err["message"] = e.what();
        std::cerr << dump_json17(err) << "\n";
        return 3;
    }
}
