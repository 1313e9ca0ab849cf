#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "trial.hpp"

namespace plume {

/// One condition evaluated against the shared field realization of a trial
/// index. silent_source mutes the chemical signal (the amplitude -> 0
/// control) while keeping placement and advection identical.
struct EnsembleVariant {
    SwarmConfig swarm;
    bool silent_source = false;
};

struct TrialOutcome {
    bool completed = false;
    std::string error;  ///< init failure reason when not completed
    TrialResult result;
};

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

namespace detail {

/// All variants of one trial index against one field realization. Agents
/// never feed back on the flow or the chemical (one-way coupling), so each
/// variant's trajectory is bit-identical to a standalone Trial with the same
/// seed; the field evolution is simply not recomputed per variant.
inline std::vector<TrialOutcome> run_trial_index(const TrialConfig& base,
                                                 const std::vector<EnsembleVariant>& variants,
                                                 int trial_index) {
    const std::uint64_t seed = base.base_seed + static_cast<std::uint64_t>(trial_index);
    FlowField flow(base.flow, mix_seed(seed, 1));
    ScalarField scalar(base.scalar);

    const double dt = base.swarm.dt;
    const auto spin_steps = static_cast<long>(std::llround(base.spin_up_time / dt));
    for (long k = 0; k < spin_steps; ++k) {
        flow.step(dt);
        scalar.step(flow, dt);
    }

    std::vector<TrialOutcome> out(variants.size());
    std::vector<std::unique_ptr<detail::LiveTrial>> live(variants.size());
    for (std::size_t v = 0; v < variants.size(); ++v) {
        try {
            const Placement p = place_release_ball(variants[v].swarm, scalar,
                                                   base.flow.mean_flow, base.start_distance, seed);
            TrialConfig cfg = base;
            cfg.swarm = variants[v].swarm;
            live[v] = std::make_unique<detail::LiveTrial>(cfg, variants[v].swarm, p,
                                                          !variants[v].silent_source);
            out[v].completed = true;
        } catch (const TrialInitError& e) {
            out[v].error = e.what();
            out[v].result.n_agents = variants[v].swarm.n_agents;
            out[v].result.arrival_times.assign(variants[v].swarm.n_agents, -1.0);
        }
    }

    const auto total_steps = static_cast<long>(std::llround(base.max_time / dt));
    const auto record_every = std::max<long>(1, std::llround(base.record_interval / dt));

    auto any_active = [&] {
        for (const auto& l : live)
            if (l && l->active()) return true;
        return false;
    };

    for (long k = 0; k < total_steps && any_active(); ++k) {
        if (k % record_every == 0) {
            const double t = static_cast<double>(k) * dt;
            for (auto& l : live)
                if (l && l->active()) l->record(t, flow, scalar);
        }
        flow.step(dt);
        scalar.step(flow, dt);
        const double t_now = static_cast<double>(k + 1) * dt;
        for (auto& l : live)
            if (l && l->active()) l->advance(flow, scalar, t_now);
    }

    for (std::size_t v = 0; v < variants.size(); ++v)
        if (live[v]) out[v].result = live[v]->take_result();
    return out;
}

}  // namespace detail

/// Run n_trials seeded field realizations, each evaluated under every
/// variant. Trials execute in parallel over independent state; results land
/// in preassigned slots, so the output is a pure function of
/// (config, variants, base_seed) whatever the thread count. All variants of
/// one index share seed and therefore the field realization (common random
/// numbers across conditions).
inline std::vector<std::vector<TrialOutcome>> run_shared_ensemble(
    const TrialConfig& base, const std::vector<EnsembleVariant>& variants, int n_trials,
    int threads) {
    for (const auto& v : variants) {
        TrialConfig probe = base;
        probe.swarm = v.swarm;
        probe.validate();
        if (v.swarm.dt != base.swarm.dt)
            throw std::invalid_argument("run_shared_ensemble: variants must share dt");
    }

    std::vector<std::vector<TrialOutcome>> matrix(variants.size());
    for (auto& row : matrix) row.resize(static_cast<std::size_t>(n_trials));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int index = next.fetch_add(1);
            if (index >= n_trials) return;
            auto outcomes = detail::run_trial_index(base, variants, index);
            for (std::size_t v = 0; v < variants.size(); ++v)
                matrix[v][index] = std::move(outcomes[v]);
        }
    };
    const int n_threads = std::min(resolve_thread_count(threads), std::max(1, n_trials));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return matrix;
}

/// Parameter grid over group size, repulsion radius and memory timescale.
/// Cells enumerate in that nesting order (n_agents outer, alpha inner).
struct SweepPlan {
    std::vector<int> n_agents;
    std::vector<double> repulsion;
    std::vector<double> alpha;

    std::size_t cell_count() const {
        return n_agents.size() * repulsion.size() * alpha.size();
    }
};

/// One aggregated sweep cell. p_success is the per-agent probability
/// (successes over agents x completed trials); p_any_success is the
/// per-trial probability that at least one agent arrived. Cells with failed
/// trials are flagged through n_failed, never dropped.
struct SweepCell {
    int n_agents = 0;
    double repulsion = 0.0;
    double alpha = 0.0;
    double effective_area = 0.0;  ///< n_agents * pi * repulsion^2
    double p_success = 0.0;
    double se_p = 0.0;  ///< sqrt(p(1-p) / (n_agents * completed trials))
    double frac_arrived_given_success = 0.0;
    double mean_polarity = 0.0;
    double mean_nnd = 0.0;
    int n_trials = 0;  ///< attempted
    std::uint64_t base_seed = 0;
    double p_any_success = 0.0;
    int n_failed = 0;
};

/// Aggregate one cell from its trial outcomes. Polarity and NND pool every
/// recorded sample within and across trials.
inline SweepCell aggregate_cell(const std::vector<TrialOutcome>& outcomes, int n_agents) {
    SweepCell cell;
    cell.n_agents = n_agents;
    cell.n_trials = static_cast<int>(outcomes.size());
    long successes = 0, completed = 0, any = 0, succ_trials = 0;
    double frac_sum = 0.0, pol_sum = 0.0, nnd_sum = 0.0;
    long pol_count = 0, nnd_count = 0;
    for (const auto& o : outcomes) {
        if (!o.completed) {
            ++cell.n_failed;
            continue;
        }
        ++completed;
        successes += o.result.n_success;
        if (o.result.n_success > 0) {
            ++any;
            ++succ_trials;
            frac_sum += o.result.fraction_arrived_given_success;
        }
        for (double v : o.result.polarity_series) pol_sum += v;
        pol_count += static_cast<long>(o.result.polarity_series.size());
        for (double v : o.result.nnd_series) nnd_sum += v;
        nnd_count += static_cast<long>(o.result.nnd_series.size());
    }
    const double denom = static_cast<double>(n_agents) * static_cast<double>(completed);
    cell.p_success = completed > 0 ? successes / denom : 0.0;
    cell.se_p = completed > 0 ? std::sqrt(cell.p_success * (1.0 - cell.p_success) / denom) : 0.0;
    cell.p_any_success = completed > 0 ? static_cast<double>(any) / completed : 0.0;
    cell.frac_arrived_given_success = succ_trials > 0 ? frac_sum / succ_trials : 0.0;
    cell.mean_polarity = pol_count > 0 ? pol_sum / pol_count : 0.0;
    cell.mean_nnd = nnd_count > 0 ? nnd_sum / nnd_count : 0.0;
    return cell;
}

/// Run the full grid. on_trial, when set, is invoked serially in
/// deterministic (cell, trial) order after the parallel phase.
inline std::vector<SweepCell> run_sweep(
    const TrialConfig& base, const SweepPlan& plan, int threads,
    const std::function<void(std::size_t cell, int trial, const TrialResult&)>& on_trial = {}) {
    std::vector<EnsembleVariant> variants;
    std::vector<SweepCell> cells;
    for (int n : plan.n_agents)
        for (double rep : plan.repulsion)
            for (double alpha : plan.alpha) {
                EnsembleVariant v;
                v.swarm = base.swarm;
                v.swarm.n_agents = n;
                v.swarm.repulsion_radius = rep;
                v.swarm.memory_timescale = alpha;
                variants.push_back(v);
            }

    const auto matrix = run_shared_ensemble(base, variants, base.n_trials, threads);

    for (std::size_t c = 0; c < variants.size(); ++c) {
        SweepCell cell = aggregate_cell(matrix[c], variants[c].swarm.n_agents);
        cell.repulsion = variants[c].swarm.repulsion_radius;
        cell.alpha = variants[c].swarm.memory_timescale;
        cell.effective_area = cell.n_agents * M_PI * cell.repulsion * cell.repulsion;
        cell.base_seed = base.base_seed;
        cells.push_back(cell);
    }
    if (on_trial)
        for (std::size_t c = 0; c < matrix.size(); ++c)
            for (std::size_t t = 0; t < matrix[c].size(); ++t)
                if (matrix[c][t].completed)
                    on_trial(c, static_cast<int>(t), matrix[c][t].result);
    return cells;
}

/// Aggregate table, one deterministic row per cell.
inline void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
    os << "n_agents,repulsion_radius,alpha,effective_area,p_success,se_p,"
          "frac_arrived_given_success,mean_polarity,mean_nnd,n_trials,base_seed,"
          "p_any_success,n_failed\n";
    for (const auto& c : cells) {
        csv::row(os, {csv::fmt(c.n_agents), csv::fmt(c.repulsion), csv::fmt(c.alpha),
                      csv::fmt(c.effective_area), csv::fmt(c.p_success), csv::fmt(c.se_p),
                      csv::fmt(c.frac_arrived_given_success), csv::fmt(c.mean_polarity),
                      csv::fmt(c.mean_nnd), csv::fmt(c.n_trials), csv::fmt(c.base_seed),
                      csv::fmt(c.p_any_success), csv::fmt(c.n_failed)});
    }
}

}  // namespace plume
