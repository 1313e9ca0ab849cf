#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "flow_field.hpp"
#include "geometry.hpp"
#include "neighbor_index.hpp"
#include "scalar_field.hpp"

namespace plume {

/// One self-propelled agent. memory_max is the decaying running maximum of
/// sensed concentration (the denominator state of the confidence ratio),
/// kept in units of the source amplitude.
struct Agent {
    Vec2 pos;
    Vec2 heading{0.0, 1.0};  ///< unit vector
    double memory_max = 0.0;
    double confidence = 0.0;  ///< in [0, 1]
    int id = 0;               ///< stable identity, survives removals
};

struct SwarmConfig {
    int n_agents = 60;
    double speed = 1.6;                  ///< v_s
    double turn_rate = 140.0;            ///< gamma, max angular speed (rad/time)
    double turn_gain = 140.0;            ///< angular speed per radian of error
    double repulsion_radius = 2e-3;
    double orient_radius_max = 0.075;    ///< R_O,max
    double attract_radius_max = 0.125;   ///< R_A,max
    double memory_timescale = 12.5e-3;   ///< alpha
    double dt = 2.5e-4;
    double concentration_floor = 1e-6;   ///< fraction of steady source peak

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("SwarmConfig: n_agents must be >= 1");
        if (!(speed > 0.0)) throw std::invalid_argument("SwarmConfig: v_s > 0 violated");
        if (!(repulsion_radius > 0.0 && repulsion_radius < orient_radius_max &&
              orient_radius_max < attract_radius_max))
            throw std::invalid_argument(
                "SwarmConfig: zone ordering repulsion_radius < R_O,max < R_A,max violated");
        if (!(memory_timescale > 0.0))
            throw std::invalid_argument("SwarmConfig: memory_timescale must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("SwarmConfig: dt must be > 0");
        if (!(dt * turn_rate < M_PI))
            throw std::invalid_argument("SwarmConfig: dt * turn_rate < pi violated");
        if (!(turn_gain > 0.0)) throw std::invalid_argument("SwarmConfig: turn_gain must be > 0");
        if (!(concentration_floor >= 0.0))
            throw std::invalid_argument("SwarmConfig: concentration_floor must be >= 0");
    }

    /// Upstream travel must be possible for the domain-crossing timescale to
    /// make sense.
    void validate_against_flow(double mean_flow_speed) const {
        validate();
        if (!(speed > mean_flow_speed))
            throw std::invalid_argument("SwarmConfig: v_s > |mean_flow| violated");
    }
};

/// Confidence update: the running maximum decays by exp(-dt/alpha) and is
/// refreshed by the current sample, so the ratio lands in [0, 1] by
/// construction; below the sensing floor the agent has no signal and
/// confidence is zero.
inline void update_confidence(Agent& a, double c_now, const SwarmConfig& cfg,
                              double floor_value) {
    const double decayed = a.memory_max * std::exp(-cfg.dt / cfg.memory_timescale);
    a.memory_max = std::max(c_now, decayed);
    a.confidence = a.memory_max > floor_value ? c_now / a.memory_max : 0.0;
}

struct ZoneRadii {
    double attract = 0.0;
    double orient = 0.0;
};

/// Context-dependent interaction ranges:
///   R_A = (1 - C)^2 R_A,max,   R_O = sin^2(pi C) R_O,max.
/// No signal (C=0) leaves attraction only; a steady/improving signal (C=1)
/// shrinks both zones to zero and the agent ignores its neighbors.
inline ZoneRadii zone_radii(double confidence, const SwarmConfig& cfg) {
    const double s = sin_pi(confidence);
    const double om = 1.0 - confidence;
    return {om * om * cfg.attract_radius_max, s * s * cfg.orient_radius_max};
}

/// Desired direction from the interaction rules. Any neighbor inside the
/// repulsion zone preempts everything else and repels; otherwise attraction
/// pulls toward neighbors within R_A and alignment adds headings of
/// neighbors within R_O (membership per radius, zones need not nest).
/// Returns nullopt when no neighbor falls in any zone or the contributions
/// cancel below 1e-12 -- the agent keeps its current direction.
inline std::optional<Vec2> desired_direction(int self, const std::vector<Agent>& snapshot,
                                             const std::vector<int>& candidates,
                                             ZoneRadii radii, const SwarmConfig& cfg) {
    const Vec2 p = snapshot[self].pos;
    Vec2 rep{0.0, 0.0};
    bool any_rep = false;
    for (int j : candidates) {
        if (j == self) continue;
        const Vec2 off = wrap_delta(p, snapshot[j].pos);
        const double d = off.norm();
        if (d <= cfg.repulsion_radius) {
            any_rep = true;
            if (d > 0.0) rep += off * (-1.0 / d);
        }
    }
    if (any_rep) {
        if (rep.norm() < 1e-12) return std::nullopt;
        return rep.normalized();
    }

    Vec2 sum{0.0, 0.0};
    bool any = false;
    for (int j : candidates) {
        if (j == self) continue;
        const Vec2 off = wrap_delta(p, snapshot[j].pos);
        const double d = off.norm();
        if (d <= radii.attract && d > 0.0) {
            sum += off * (1.0 / d);
            any = true;
        }
        if (d <= radii.orient) {
            sum += snapshot[j].heading;
            any = true;
        }
    }
    if (!any || sum.norm() < 1e-12) return std::nullopt;
    return sum.normalized();
}

/// Turn toward the desired direction at a rate proportional to the heading
/// error, capped at the maximum angular speed, never overshooting.
inline void steer(Agent& a, Vec2 desired, const SwarmConfig& cfg) {
    const double dtheta = std::atan2(a.heading.cross(desired), a.heading.dot(desired));
    double omega = cfg.turn_gain * dtheta;
    omega = std::clamp(omega, -cfg.turn_rate, cfg.turn_rate);
    double step = omega * cfg.dt;
    step = std::clamp(step, -std::abs(dtheta), std::abs(dtheta));
    const double c = std::cos(step);
    const double s = std::sin(step);
    const Vec2 h{c * a.heading.x - s * a.heading.y, s * a.heading.x + c * a.heading.y};
    a.heading = h.normalized();
}

/// The active agent set of one trial with its synchronous update rule.
/// Within a step every confidence, zone and desired direction is computed
/// from the beginning-of-step snapshot; headings are then steered and
/// positions advanced with a midpoint pass through the frozen velocity
/// field. Each trial owns its Swarm; nothing here is shared.
class Swarm {
public:
    /// sensing=false mutes the chemical signal entirely (the amplitude -> 0
    /// control); agents then run on social rules alone.
    Swarm(const SwarmConfig& cfg, std::vector<Agent> agents, double sensing_floor,
          bool sensing = true)
        : cfg_(cfg), agents_(std::move(agents)), floor_(sensing_floor), sensing_(sensing),
          index_(cfg.attract_radius_max) {
        cfg_.validate();
    }

    const SwarmConfig& config() const { return cfg_; }
    const std::vector<Agent>& agents() const { return agents_; }
    std::size_t size() const { return agents_.size(); }

    /// Remove agents flagged by pred (arrived agents leave the simulation
    /// and everyone's neighbor queries).
    template <class Pred>
    void remove_if(Pred pred) {
        agents_.erase(std::remove_if(agents_.begin(), agents_.end(), pred), agents_.end());
    }

    /// Remove agents whose flag is set; drop aligns with agents() order.
    void remove_flagged(const std::vector<char>& drop) {
        std::size_t keep = 0;
        for (std::size_t i = 0; i < agents_.size(); ++i)
            if (!drop[i]) agents_[keep++] = agents_[i];
        agents_.resize(keep);
    }

    void step(const FlowField& flow, const ScalarField& scalar) {
        const double dt = cfg_.dt;
        snapshot_ = agents_;
        positions_.resize(snapshot_.size());
        for (std::size_t i = 0; i < snapshot_.size(); ++i) positions_[i] = snapshot_[i].pos;
        index_.build(positions_);

        for (std::size_t i = 0; i < agents_.size(); ++i) {
            Agent& a = agents_[i];
            update_confidence(a, sensing_ ? scalar.sensed_at(a.pos) : 0.0, cfg_, floor_);
            const ZoneRadii radii = zone_radii(a.confidence, cfg_);
            const double qr = std::max({radii.attract, radii.orient, cfg_.repulsion_radius});
            index_.query(a.pos, qr, static_cast<int>(i), candidates_);
            const auto desired =
                desired_direction(static_cast<int>(i), snapshot_, candidates_, radii, cfg_);
            if (desired) steer(a, *desired, cfg_);
        }

        for (Agent& a : agents_) {
            const Vec2 v1 = flow.velocity_at(a.pos);
            const Vec2 mid = a.pos + (v1 + cfg_.speed * a.heading) * (0.5 * dt);
            const Vec2 v2 = flow.velocity_at(mid);
            a.pos = wrap_unit(a.pos + (v2 + cfg_.speed * a.heading) * dt);
        }
    }

private:
    SwarmConfig cfg_;
    std::vector<Agent> agents_;
    std::vector<Agent> snapshot_;
    std::vector<Vec2> positions_;
    std::vector<int> candidates_;
    double floor_;
    bool sensing_;
    NeighborIndex index_;
};

}  // namespace plume
