// Minimal library walkthrough: develop a plume, release a group on the
// filament and report how many agents find the source.

#include <cstdio>

#include "plume/trial.hpp"

int main() {
    plume::TrialConfig cfg;
    cfg.scalar.grid = 256;  // desk-scale grid; the reference setup uses 512
    cfg.swarm.n_agents = 30;
    cfg.max_time = 2.0;
    cfg.base_seed = 4;

    plume::Trial trial(cfg, 0);
    std::printf("released %d agents at (%g, %g)\n", cfg.swarm.n_agents,
                trial.release_center().x, trial.release_center().y);

    const plume::TrialResult res = trial.run();
    std::printf("%d of %d agents reached the source\n", res.n_success, res.n_agents);
    for (std::size_t k = 0; k < res.series_times.size(); ++k)
        std::printf("t=%.4f  active=%d  polarity=%.3f\n", res.series_times[k],
                    res.active_series[k], res.polarity_series[k]);
    return res.n_success > 0 ? 0 : 1;
}
