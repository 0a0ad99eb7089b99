#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cosetsle/crossing.hpp"
#include "cosetsle/driving.hpp"
#include "cosetsle/stochastic.hpp"
#include "cosetsle/version.hpp"

namespace cosetsle {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

enum class ExperimentKind { TwoSleCollision, ThreeSleArch, BesselCompare, ProbMartingale };

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::TwoSleCollision: return "two-sle";
        case ExperimentKind::ThreeSleArch: return "three-sle";
        case ExperimentKind::BesselCompare: return "bessel";
        default: return "prob-martingale";
    }
}

struct ExperimentConfig {
    ExperimentKind kind{ExperimentKind::TwoSleCollision};
    CosetModel model{model_params(ModelFamily::Parafermion, 4)};
    TwoSleChannel channel{TwoSleChannel::Identity};  // two-sle / bessel
    std::vector<double> initial_positions{-0.5, 0.5};
    double x0{0.25};                       // three-sle / prob-martingale: positions (0, x0, 1)
    double dt{1e-3};                       // base (prob-martingale: fixed) time step
    double adapt_coeff{0.02};              // ds_eff = adapt * gap^2
    std::vector<double> horizons_s{500.0, 5000.0, 50000.0};  // Bessel-time horizons, ds = 2k dt
    double horizon_t{2000.0};              // three-sle horizon in Loewner time
    double pm_horizon{0.05};               // prob-martingale horizon
    double epsilon_collision{1e-4};
    long samples{10000};
    long sample_offset{0};  // resume runs by extending the index range
    std::uint64_t seed{1};
    int jobs{1};
    DFConfig df{};
    DriftMode drift_mode{DriftMode::Full};
    bool zero_noise{false};
    double d_eff_override{std::numeric_limits<double>::quiet_NaN()};  // BesselCompare

    void validate() const {
        if (samples < 1) throw std::domain_error("ExperimentConfig: samples must be >= 1");
        if (sample_offset < 0) throw std::domain_error("ExperimentConfig: negative offset");
        if (jobs < 1) throw std::domain_error("ExperimentConfig: jobs must be >= 1");
        for (double h : horizons_s)
            if (!(h > 0.0)) throw std::domain_error("ExperimentConfig: horizons must be positive");
        if (!(horizon_t > 0.0) || !(pm_horizon > 0.0))
            throw std::domain_error("ExperimentConfig: horizons must be positive");
        if (!(epsilon_collision > 0.0))
            throw std::domain_error("ExperimentConfig: epsilon_collision must be positive");
        for (std::size_t i = 0; i + 1 < initial_positions.size(); ++i)
            if (!(initial_positions[i] < initial_positions[i + 1]))
                throw std::domain_error("ExperimentConfig: positions must be increasing");
    }

    /// Effective Bessel dimension of the configured channel (or the
    /// override for plain Bessel runs).
    double d_eff() const {
        if (!std::isnan(d_eff_override)) return d_eff_override;
        const ChannelWeights w = channel_weights(model, channel, true);
        return effective_dimension(w.delta.to_double(), model.kappa_d());
    }
};

inline json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = experiment_name(c.kind);
    j["model"] = c.model.family_name();
    j["level"] = c.model.level;
    j["channel"] = c.channel == TwoSleChannel::Identity ? "identity"
                   : c.channel == TwoSleChannel::Fused  ? "fused"
                                                        : "middle";
    j["initial_positions"] = c.initial_positions;
    j["x0"] = c.x0;
    j["dt"] = c.dt;
    j["adapt_coeff"] = c.adapt_coeff;
    j["horizons_s"] = c.horizons_s;
    j["horizon_t"] = c.horizon_t;
    j["pm_horizon"] = c.pm_horizon;
    j["epsilon_collision"] = c.epsilon_collision;
    j["samples"] = c.samples;
    j["sample_offset"] = c.sample_offset;
    j["seed"] = c.seed;
    j["df"] = {{"cutoff_epsilon", c.df.cutoff_epsilon},
               {"v_max", c.df.v_max},
               {"nodes_per_axis", c.df.nodes_per_axis}};
    j["drift_mode"] = c.drift_mode == DriftMode::Full ? "full" : "zero";
    j["zero_noise"] = c.zero_noise;
    if (!std::isnan(c.d_eff_override)) j["d_eff_override"] = c.d_eff_override;
    return j;
}

/// FNV-1a over the canonical config serialization.  Job count and the
/// sample-index range are execution details, not experiment identity, so
/// resumed slices of one experiment share a fingerprint and merge.
inline std::string config_fingerprint(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("samples");
    j.erase("sample_offset");
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Sample-parallel driver
// ---------------------------------------------------------------------------

/// Runs fn(sample_index) for every sample on `jobs` workers over disjoint
/// contiguous ranges.  Samples own independent RNG substreams, so the
/// partition never affects results.
template <class Fn>
void parallel_samples(long samples, int jobs, Fn&& fn) {
    jobs = static_cast<int>(std::max<long>(1, std::min<long>(jobs, samples)));
    if (jobs == 1) {
        for (long i = 0; i < samples; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const long chunk = (samples + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        const long lo = w * chunk, hi = std::min(samples, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (long i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Two-curve collision experiment (and its Bessel mirror)
// ---------------------------------------------------------------------------

struct SampleOutcome {
    int code;        // 0 none, 1 collision/absorption, 2 rejected
    double s_event;  // Bessel-time of the event (ds = 2 kappa dt)
};

struct CollisionResult {
    std::vector<double> horizons_s;
    std::vector<long> collided_by_horizon;
    long samples{0};
    long unresolved{0};  // step-rejection exhaustion
    double mean_event_s{0.0};   // over collided samples
    double median_event_s{0.0};
    double d_eff{0.0};
    std::string fingerprint;

    double fraction_at(std::size_t i) const {
        return static_cast<double>(collided_by_horizon[i]) / static_cast<double>(samples);
    }
    double std_error_at(std::size_t i) const {
        const double p = fraction_at(i);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    }
};

namespace detail {

inline CollisionResult summarize_collisions(const ExperimentConfig& cfg,
                                            const std::vector<SampleOutcome>& outcomes) {
    CollisionResult r;
    r.horizons_s = cfg.horizons_s;
    r.samples = cfg.samples;
    r.d_eff = cfg.d_eff();
    r.fingerprint = config_fingerprint(cfg);
    r.collided_by_horizon.assign(cfg.horizons_s.size(), 0);
    std::vector<double> events;
    for (const auto& o : outcomes) {
        if (o.code == 2) ++r.unresolved;
        if (o.code != 1) continue;
        events.push_back(o.s_event);
        for (std::size_t h = 0; h < cfg.horizons_s.size(); ++h)
            if (o.s_event <= cfg.horizons_s[h]) ++r.collided_by_horizon[h];
    }
    if (!events.empty()) {
        std::sort(events.begin(), events.end());
        double sum = 0.0;
        for (double e : events) sum += e;
        r.mean_event_s = sum / static_cast<double>(events.size());
        r.median_event_s = events[events.size() / 2];
    }
    return r;
}

}  // namespace detail

/// Full 2-SLE (driving + Loewner) collision statistics.  Event times are
/// reported in Bessel time s = 2 kappa t so they compare directly with
/// run_bessel_compare at the matched effective dimension.
inline CollisionResult run_two_sle(const ExperimentConfig& cfg,
                                   std::vector<SampleOutcome>* per_sample = nullptr) {
    cfg.validate();
    if (cfg.initial_positions.size() != 2)
        throw std::domain_error("run_two_sle: needs exactly 2 initial positions");
    auto z = std::make_shared<const PurePartition>(
        PurePartition::two_sle(cfg.model, cfg.channel, true));
    DrivingConfig dc = DrivingConfig::from_model(cfg.model);
    dc.dt_base = cfg.dt;
    dc.adapt_coeff = cfg.adapt_coeff;
    dc.grow_with_gap = true;
    dc.epsilon_collision = cfg.epsilon_collision;
    dc.drift_mode = cfg.drift_mode;
    dc.zero_noise = cfg.zero_noise;
    MultiSleSde sde(dc, z);

    const double two_kappa = 2.0 * cfg.model.kappa_d();
    double s_max = 0.0;
    for (double s : cfg.horizons_s) s_max = std::max(s_max, s);
    const double t_max = s_max / two_kappa;

    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(cfg.samples));
    parallel_samples(cfg.samples, cfg.jobs, [&](long i) {
        LoewnerState st(cfg.initial_positions, dc.lie_dim, /*record_journal=*/false);
        SdeStreams rng(cfg.seed, static_cast<std::uint64_t>(cfg.sample_offset + i), 2,
                       dc.lie_dim);
        const RunOutcome out = sde.run_until(st, rng, t_max);
        auto& slot = outcomes[static_cast<std::size_t>(i)];
        if (out.collided)
            slot = {1, out.t_end * two_kappa};
        else
            slot = {out.rejected ? 2 : 0, 0.0};
    });
    if (per_sample) *per_sample = outcomes;
    return detail::summarize_collisions(cfg, outcomes);
}

/// Direct Bessel simulation at the matched effective dimension, same
/// adaptive stepping rule and absorption threshold.
inline CollisionResult run_bessel_compare(const ExperimentConfig& cfg,
                                          std::vector<SampleOutcome>* per_sample = nullptr) {
    cfg.validate();
    if (cfg.initial_positions.size() != 2)
        throw std::domain_error("run_bessel_compare: needs exactly 2 initial positions");
    const BesselSpec spec{cfg.d_eff(), cfg.initial_positions[1] - cfg.initial_positions[0]};
    BesselPathConfig pc;
    pc.adapt_coeff = cfg.adapt_coeff;
    pc.absorb_level = cfg.epsilon_collision;
    double s_max = 0.0;
    for (double s : cfg.horizons_s) s_max = std::max(s_max, s);

    std::vector<SampleOutcome> outcomes(static_cast<std::size_t>(cfg.samples));
    parallel_samples(cfg.samples, cfg.jobs, [&](long i) {
        GaussianStream g(cfg.seed,
                         stream_id(static_cast<std::uint64_t>(cfg.sample_offset + i), 0, 0));
        const BesselPathEnd end =
            run_bessel_path(spec, pc, g, s_max, [](double, double) { return false; });
        outcomes[static_cast<std::size_t>(i)] = end.absorbed ? SampleOutcome{1, end.s}
                                                             : SampleOutcome{0, 0.0};
    });
    if (per_sample) *per_sample = outcomes;
    return detail::summarize_collisions(cfg, outcomes);
}

// ---------------------------------------------------------------------------
// Three-curve arch experiment
// ---------------------------------------------------------------------------

/// Counts of the two planar pairings plus unresolved samples.  Pairing
/// [12] (adjacent tips 1,2 collide) empirically tracks channel C1,
/// [23] tracks C2; the arch/channel identification is reported, not
/// hard-coded into the evaluator.
struct ArchStatistics {
    long count_12{0};
    long count_23{0};
    long unresolved{0};
    long samples{0};
    std::string fingerprint;

    double freq_12() const { return static_cast<double>(count_12) / static_cast<double>(samples); }
    double freq_23() const { return static_cast<double>(count_23) / static_cast<double>(samples); }
    double freq_unresolved() const {
        return static_cast<double>(unresolved) / static_cast<double>(samples);
    }
    double binomial_se(double p) const {
        return std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    }
};

/// Associative, commutative count merge; refuses to mix experiments.
inline ArchStatistics merge(const ArchStatistics& a, const ArchStatistics& b) {
    if (a.samples == 0) return b;
    if (b.samples == 0) return a;
    if (a.fingerprint != b.fingerprint)
        throw std::domain_error("merge: experiment fingerprints differ");
    ArchStatistics m = a;
    m.count_12 += b.count_12;
    m.count_23 += b.count_23;
    m.unresolved += b.unresolved;
    m.samples += b.samples;
    return m;
}

inline ArchStatistics run_three_sle(const ExperimentConfig& cfg,
                                    std::vector<SampleOutcome>* per_sample = nullptr) {
    cfg.validate();
    if (!(cfg.x0 > 0.0 && cfg.x0 < 1.0))
        throw std::domain_error("run_three_sle: x0 outside (0,1)");
    auto table = std::make_shared<const CrossRatioDrift>(cfg.model, cfg.df);
    DrivingConfig dc = DrivingConfig::from_model(cfg.model);
    dc.dt_base = cfg.dt;
    dc.adapt_coeff = cfg.adapt_coeff;
    dc.grow_with_gap = true;
    dc.epsilon_collision = cfg.epsilon_collision;
    dc.drift_mode = cfg.drift_mode;
    dc.zero_noise = cfg.zero_noise;
    MultiSleSde sde(dc, table);

    std::vector<int> kinds(static_cast<std::size_t>(cfg.samples), 0);
    std::vector<double> times(static_cast<std::size_t>(cfg.samples), 0.0);
    parallel_samples(cfg.samples, cfg.jobs, [&](long i) {
        LoewnerState st({0.0, cfg.x0, 1.0}, dc.lie_dim, /*record_journal=*/false);
        SdeStreams rng(cfg.seed, static_cast<std::uint64_t>(cfg.sample_offset + i), 3,
                       dc.lie_dim);
        const RunOutcome out = sde.run_until(st, rng, cfg.horizon_t);
        auto& slot = kinds[static_cast<std::size_t>(i)];
        if (out.collided) {
            slot = out.event.first == 1 ? 1 : 2;  // pair (1,2) vs (2,3)
            times[static_cast<std::size_t>(i)] = out.t_end;
        } else {
            slot = 3;  // horizon exceeded or step rejected: unresolved, never dropped
        }
    });

    ArchStatistics stats;
    stats.samples = cfg.samples;
    stats.fingerprint = config_fingerprint(cfg);
    for (long i = 0; i < cfg.samples; ++i) {
        const int k = kinds[static_cast<std::size_t>(i)];
        if (k == 1) ++stats.count_12;
        else if (k == 2) ++stats.count_23;
        else ++stats.unresolved;
        if (per_sample)
            per_sample->push_back({k == 3 ? 0 : k, times[static_cast<std::size_t>(i)]});
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Parallel prob-martingale experiment
// ---------------------------------------------------------------------------

inline MartingaleStatistic run_prob_martingale(const ExperimentConfig& cfg) {
    cfg.validate();
    auto table = std::make_shared<const CrossRatioDrift>(cfg.model, cfg.df);
    ProbMartingaleOptions opt;  // guard/adapt defaults control the Euler bias
    opt.horizon = cfg.pm_horizon;
    opt.dt = cfg.dt;
    opt.drift_mode = cfg.drift_mode;

    std::vector<double> ps(static_cast<std::size_t>(cfg.samples));
    parallel_samples(cfg.samples, cfg.jobs, [&](long i) {
        ps[static_cast<std::size_t>(i)] = prob_martingale_sample(
            cfg.model, table, cfg.x0, opt, cfg.seed,
            static_cast<std::uint64_t>(cfg.sample_offset + i), cfg.df);
    });
    double sum = 0.0, sumsq = 0.0;
    for (double p : ps) {
        sum += p;
        sumsq += p * p;
    }
    const double n = static_cast<double>(cfg.samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    MartingaleStatistic out{};
    out.p0 = crossing_probability(cfg.model, cfg.x0, cfg.df).p_c2;
    out.statistic = mean - out.p0;
    out.std_error = std::sqrt(var / n);
    out.samples = cfg.samples;
    return out;
}

// ---------------------------------------------------------------------------
// Result records
// ---------------------------------------------------------------------------

inline json result_record(const ExperimentConfig& cfg, const json& results, double wall_s) {
    json j;
    j["schema_version"] = schema_version;
    j["library_version"] = version;
    j["config"] = to_json(cfg);
    j["fingerprint"] = config_fingerprint(cfg);
    j["seed"] = cfg.seed;
    j["results"] = results;
    j["wall_time_s"] = wall_s;
    return j;
}

inline json to_json(const CollisionResult& r) {
    json j;
    j["samples"] = r.samples;
    j["unresolved"] = r.unresolved;
    j["d_eff"] = r.d_eff;
    j["horizons_s"] = r.horizons_s;
    j["collided_by_horizon"] = r.collided_by_horizon;
    std::vector<double> fr, se;
    for (std::size_t i = 0; i < r.horizons_s.size(); ++i) {
        fr.push_back(r.fraction_at(i));
        se.push_back(r.std_error_at(i));
    }
    j["collision_fraction"] = fr;
    j["collision_fraction_se"] = se;
    j["mean_event_s"] = r.mean_event_s;
    j["median_event_s"] = r.median_event_s;
    j["fingerprint"] = r.fingerprint;
    return j;
}

inline json to_json(const ArchStatistics& s, const std::optional<CrossingResult>& reference) {
    json j;
    j["samples"] = s.samples;
    j["counts"] = {{"arch_12_3inf", s.count_12}, {"arch_1_23_inf", s.count_23},
                   {"unresolved", s.unresolved}};
    j["frequencies"] = {{"arch_12_3inf", s.freq_12()}, {"arch_1_23_inf", s.freq_23()},
                        {"unresolved", s.freq_unresolved()}};
    j["binomial_se"] = {{"arch_12_3inf", s.binomial_se(s.freq_12())},
                        {"arch_1_23_inf", s.binomial_se(s.freq_23())}};
    j["pairing"] = {{"arch_12_3inf", "C1"}, {"arch_1_23_inf", "C2"}};
    if (reference) {
        j["crossing_reference"] = {{"x", reference->x}, {"p_C1", reference->p_c1},
                                   {"p_C2", reference->p_c2}};
    }
    j["fingerprint"] = s.fingerprint;
    return j;
}

inline json to_json(const MartingaleStatistic& m) {
    json j;
    j["statistic"] = m.statistic;
    j["std_error"] = m.std_error;
    j["p0"] = m.p0;
    j["samples"] = m.samples;
    return j;
}

/// Optional per-sample CSV: sample, outcome, t_event.
inline void write_outcomes_csv(const std::vector<SampleOutcome>& outcomes, std::ostream& os) {
    os << "sample,outcome,t_event\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof line, "%zu,%d,%.17g\n", i, outcomes[i].code,
                      outcomes[i].s_event);
        os << line;
    }
}

}  // namespace cosetsle
