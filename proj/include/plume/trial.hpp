#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flow_field.hpp"
#include "geometry.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "scalar_field.hpp"
#include "swarm.hpp"

namespace plume {

/// Full parameterization of one seeded trial: flow, scalar and swarm
/// configuration plus the experiment protocol (plume spin-up, release
/// geometry, success criterion, time budget).
struct TrialConfig {
    SpectrumConfig flow;
    ScalarConfig scalar;
    SwarmConfig swarm;
    double spin_up_time = 2.0;   ///< plume development before release
    double max_time = 3.0;       ///< trial cutoff after release
    double success_radius = 0.025;
    double start_distance = 0.8; ///< release ball downstream of the source
    int n_trials = 1000;
    std::uint64_t base_seed = 0;
    double record_interval = 0.375;

    void validate() const {
        flow.validate();
        scalar.validate();
        swarm.validate_against_flow(flow.mean_flow.norm());
        if (!(success_radius > 0.0))
            throw std::invalid_argument("TrialConfig: success_radius must be > 0");
        if (!(start_distance > 0.0 && start_distance < 1.0))
            throw std::invalid_argument("TrialConfig: start_distance must lie in (0, 1)");
        if (!(start_distance + swarm.attract_radius_max < 1.0 - success_radius))
            throw std::invalid_argument(
                "TrialConfig: release ball must fit upstream of the downstream edge "
                "(start_distance + R_A,max < 1 - success_radius)");
        if (!(spin_up_time >= 0.0))
            throw std::invalid_argument("TrialConfig: spin_up_time must be >= 0");
        if (!(record_interval > 0.0))
            throw std::invalid_argument("TrialConfig: record_interval must be > 0");
        if (n_trials < 1) throw std::invalid_argument("TrialConfig: n_trials must be >= 1");
        const double net = swarm.speed - flow.mean_flow.norm();
        if (!(max_time >= start_distance / net))
            throw std::invalid_argument(
                "TrialConfig: max_time must be >= start_distance / (v_s - |mean_flow|)");
    }
};

/// Raised when a trial cannot be initialized (e.g. the release transect
/// carries no filament); distinguished from hard errors so ensembles can
/// flag rather than abort.
struct TrialInitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Placement {
    std::vector<Agent> agents;
    Vec2 center;
    double sensing_floor = 0.0;
};

/// Release ball for one trial: centered on the instantaneous filament at the
/// transect start_distance downstream of the source, radius R_A,max;
/// headings uniform on the half circle pointing against the mean flow.
/// Placement reads the unit-amplitude carrier, so a silent source
/// (amplitude 0, the no-signal control) is released with identical
/// geometry -- the limit of amplitude -> 0+. Throws TrialInitError when the
/// release transect carries no concentration above the sensing floor.
inline Placement place_release_ball(const SwarmConfig& swarm, const ScalarField& scalar,
                                    Vec2 mean_flow, double start_distance,
                                    std::uint64_t trial_seed) {
    Placement out;
    out.sensing_floor = swarm.concentration_floor * scalar.steady_peak_tracer();

    const Vec2 ehat = mean_flow.norm() > 0.0 ? mean_flow.normalized() : Vec2{0.0, 1.0};
    const Vec2 source = scalar.config().source;
    const bool axis_y = std::abs(ehat.y) >= std::abs(ehat.x);
    const bool axial = std::abs(axis_y ? ehat.x : ehat.y) < 1e-12;
    if (axial) {
        // transect transverse to the mean flow at the release distance
        const double coord = axis_y ? wrap_unit(source.y + ehat.y * start_distance)
                                    : wrap_unit(source.x + ehat.x * start_distance);
        const auto [peak_pos, peak_val] = scalar.transect_peak(coord, axis_y);
        if (peak_val < out.sensing_floor)
            throw TrialInitError(
                "trial init: release transect concentration below floor; agents must "
                "start on the chemical filament");
        out.center = axis_y ? Vec2{peak_pos, coord} : Vec2{coord, peak_pos};
    } else {
        out.center = wrap_unit(source + start_distance * ehat);
        if (scalar.tracer_at(out.center) < out.sensing_floor)
            throw TrialInitError(
                "trial init: release point concentration below floor; agents must "
                "start on the chemical filament");
    }

    Rng rng(mix_seed(trial_seed, 2));
    const double radius = swarm.attract_radius_max;
    const Vec2 upstream{-ehat.x, -ehat.y};
    out.agents.reserve(swarm.n_agents);
    for (int i = 0; i < swarm.n_agents; ++i) {
        double ox, oy;
        do {
            ox = rng.uniform(-radius, radius);
            oy = rng.uniform(-radius, radius);
        } while (ox * ox + oy * oy > radius * radius);
        const double phi = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
        const double c = std::cos(phi), s = std::sin(phi);
        Agent a;
        a.pos = wrap_unit(out.center + Vec2{ox, oy});
        a.heading = Vec2{c * upstream.x - s * upstream.y, s * upstream.x + c * upstream.y};
        a.id = i;
        out.agents.push_back(a);
    }
    return out;
}

struct TrialResult {
    int n_agents = 0;
    int n_success = 0;
    /// Arrival time per agent id; negative means "did not arrive".
    std::vector<double> arrival_times;
    /// Polarity over active agents, sampled at the record interval while
    /// at least one agent is active.
    std::vector<double> series_times;
    std::vector<double> polarity_series;
    std::vector<int> active_series;
    /// Mean nearest-neighbour distance, sampled while at least two agents
    /// are active.
    std::vector<double> nnd_times;
    std::vector<double> nnd_series;
    double fraction_arrived_given_success = 0.0;
};

namespace detail {

/// One released group with its arena bookkeeping. Fields are fully periodic,
/// but the trial is scored on the universal cover along the mean flow: each
/// agent carries its unwrapped downstream coordinate from the source, an
/// arrival counts only at the true source (never at a periodic image), and
/// an agent swept a full domain length away -- past the downstream edge, or
/// a domain length upstream -- is out of the trial for good, the way a
/// signal-losing individual is carried off and lost in an open channel.
class LiveTrial {
public:
    using RecordHook =
        std::function<void(double t, const Swarm&, const FlowField&, const ScalarField&)>;

    LiveTrial(const TrialConfig& cfg, const SwarmConfig& swarm_cfg, const Placement& placement,
              bool sensing)
        : cfg_(cfg), swarm_(swarm_cfg, placement.agents, placement.sensing_floor, sensing) {
        const Vec2 mean = cfg.flow.mean_flow;
        ehat_ = mean.norm() > 0.0 ? mean.normalized() : Vec2{0.0, 1.0};
        result_.n_agents = swarm_cfg.n_agents;
        result_.arrival_times.assign(swarm_cfg.n_agents, -1.0);
        downstream_.reserve(placement.agents.size());
        for (const Agent& a : placement.agents)
            downstream_.push_back(cfg.start_distance +
                                  wrap_delta(placement.center, a.pos).dot(ehat_));
    }

    bool active() const { return swarm_.size() > 0; }
    const Swarm& swarm() const { return swarm_; }

    void record(double t, const FlowField& flow, const ScalarField& scalar,
                const RecordHook& hook = {}) {
        result_.series_times.push_back(t);
        result_.polarity_series.push_back(polarity(swarm_.agents()));
        result_.active_series.push_back(static_cast<int>(swarm_.size()));
        if (swarm_.size() >= 2) {
            result_.nnd_times.push_back(t);
            result_.nnd_series.push_back(mean_nnd(swarm_.agents()));
        }
        if (hook) hook(t, swarm_, flow, scalar);
    }

    /// One swarm step plus scoring: arrivals at the true source are recorded
    /// and removed; washed-out agents are removed without arrival.
    void advance(const FlowField& flow, const ScalarField& scalar, double t_now) {
        prev_.clear();
        for (const Agent& a : swarm_.agents()) prev_.push_back(a.pos);
        swarm_.step(flow, scalar);

        const auto& agents = swarm_.agents();
        const double edge = 1.0 - cfg_.success_radius;
        drop_.assign(agents.size(), 0);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            downstream_[i] += wrap_delta(prev_[i], agents[i].pos).dot(ehat_);
            if (downstream_[i] >= edge || downstream_[i] <= -edge) {
                drop_[i] = 1;  // carried out of the arena
            } else if (wrap_delta(agents[i].pos, cfg_.scalar.source).norm() <=
                       cfg_.success_radius) {
                drop_[i] = 1;
                result_.arrival_times[agents[i].id] = t_now;
                ++result_.n_success;
            }
        }
        std::size_t keep = 0;
        for (std::size_t i = 0; i < downstream_.size(); ++i)
            if (!drop_[i]) downstream_[keep++] = downstream_[i];
        downstream_.resize(keep);
        swarm_.remove_flagged(drop_);
    }

    TrialResult take_result() {
        result_.fraction_arrived_given_success =
            result_.n_success > 0 ? static_cast<double>(result_.n_success) /
                                        static_cast<double>(result_.n_agents)
                                  : 0.0;
        return std::move(result_);
    }

private:
    TrialConfig cfg_;
    Swarm swarm_;
    Vec2 ehat_;
    std::vector<double> downstream_;  ///< unwrapped coordinate from the source
    std::vector<Vec2> prev_;
    std::vector<char> drop_;
    TrialResult result_;
};

}  // namespace detail

/// One seeded trial: spins up the plume, releases the group on the filament
/// and integrates flow, scalar and swarm in lockstep until the time budget
/// runs out or everyone has arrived. Construction performs the spin-up and
/// placement; run() may be called once.
class Trial {
public:
    using RecordHook =
        std::function<void(double t, const Swarm&, const FlowField&, const ScalarField&)>;

    Trial(const TrialConfig& cfg, int trial_index)
        : cfg_(cfg),
          seed_(cfg.base_seed + static_cast<std::uint64_t>(trial_index)),
          flow_(cfg.flow, mix_seed(seed_, 1)),
          scalar_(cfg.scalar) {
        cfg_.validate();
        spin_up();
        place_agents();
    }

    const FlowField& flow() const { return flow_; }
    const ScalarField& scalar() const { return scalar_; }
    const std::vector<Agent>& initial_agents() const { return initial_agents_; }
    Vec2 release_center() const { return release_center_; }

    TrialResult run(const RecordHook& on_record = {}) {
        const double dt = cfg_.swarm.dt;
        const auto total_steps = static_cast<long>(std::llround(cfg_.max_time / dt));
        const auto record_every =
            std::max<long>(1, std::llround(cfg_.record_interval / dt));

        Placement placement;
        placement.agents = initial_agents_;
        placement.center = release_center_;
        placement.sensing_floor = sensing_floor_;
        detail::LiveTrial live(cfg_, cfg_.swarm, placement, true);

        for (long k = 0; k < total_steps && live.active(); ++k) {
            if (k % record_every == 0)
                live.record(static_cast<double>(k) * dt, flow_, scalar_, on_record);
            flow_.step(dt);
            scalar_.step(flow_, dt);
            live.advance(flow_, scalar_, static_cast<double>(k + 1) * dt);
        }
        return live.take_result();
    }

private:
    void spin_up() {
        const double dt = cfg_.swarm.dt;
        const auto steps = static_cast<long>(std::llround(cfg_.spin_up_time / dt));
        for (long k = 0; k < steps; ++k) {
            flow_.step(dt);
            scalar_.step(flow_, dt);
        }
    }

    void place_agents() {
        Placement p = place_release_ball(cfg_.swarm, scalar_, cfg_.flow.mean_flow,
                                         cfg_.start_distance, seed_);
        initial_agents_ = std::move(p.agents);
        release_center_ = p.center;
        sensing_floor_ = p.sensing_floor;
    }

    TrialConfig cfg_;
    std::uint64_t seed_;
    FlowField flow_;
    ScalarField scalar_;
    std::vector<Agent> initial_agents_;
    Vec2 release_center_;
    double sensing_floor_ = 0.0;
};

}  // namespace plume
