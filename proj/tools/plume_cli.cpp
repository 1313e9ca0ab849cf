// Command-line front end: run (one trial, optional field/agent snapshots),
// sweep (seeded parameter-grid ensembles), snapshot (developed plume fields),
// width (filament width report). All randomness flows from --seed; every
// output directory receives a manifest that reproduces the run when passed
// back through --config.

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "plume/config_io.hpp"
#include "plume/csv.hpp"
#include "plume/sweep.hpp"
#include "plume/trial.hpp"
#include "plume/version.hpp"

namespace fs = std::filesystem;
using namespace plume;

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "plume_out";
    std::string agents_list, alpha_list, repulsion_list;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = -1;
    bool snapshots = false;
    bool verbose = false;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        double v = 0.0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw ConfigError(flag + ": invalid number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(flag + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        int v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
            throw ConfigError(flag + ": invalid integer '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(flag + ": empty list");
    return out;
}

int env_threads() {
    const char* env = std::getenv("SIM_THREADS");
    if (!env || !*env) return 0;
    int v = 0;
    const auto res = std::from_chars(env, env + std::strlen(env), v);
    if (res.ec != std::errc{} || v < 0)
        throw ConfigError("SIM_THREADS: expected a nonnegative integer");
    return v;  // 0 = auto
}

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

/// Tracks files written into the output directory; on failure every created
/// file is removed so failed runs leave no outputs (and no manifest, which
/// is written last).
class OutputSet {
public:
    explicit OutputSet(const fs::path& dir) : dir_(dir) { fs::create_directories(dir); }

    std::ofstream open(const std::string& name, std::ios::openmode mode = std::ios::out) {
        const fs::path p = dir_ / name;
        std::ofstream os(p, mode);
        if (!os) throw std::runtime_error("cannot open output file: " + p.string());
        created_.push_back(p);
        return os;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : created_) out.push_back(fs::relative(p, dir_).string());
        return out;
    }

    void discard_all() {
        for (const auto& p : created_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        created_.clear();
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<fs::path> created_;
};

Manifest resolve_manifest(const CliOptions& opt, const std::string& command) {
    Manifest m;
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw ConfigError("cannot open config file: " + opt.config_path);
        m = parse_config(in, opt.config_path);
    }
    if (opt.seed_set) m.cfg.base_seed = opt.seed;
    if (opt.trials >= 0) m.cfg.n_trials = opt.trials;
    if (!opt.agents_list.empty()) {
        const auto agents = parse_int_list(opt.agents_list, "--agents");
        if (command == "run" && agents.size() != 1)
            throw ConfigError("--agents: run takes a single group size");
        m.cfg.swarm.n_agents = agents.front();
    }
    m.cfg.validate();
    m.command = command;
    m.version = kVersion;
    m.created_utc = now_utc();
    m.out_dir = opt.out_dir;
    return m;
}

void finalize_manifest(OutputSet& outputs, Manifest& manifest) {
    manifest.outputs = outputs.names();
    auto os = outputs.open("manifest.txt");
    write_manifest(os, manifest);
}

int cmd_run(const CliOptions& opt, const std::string& command) {
    Manifest manifest = resolve_manifest(opt, command);
    const TrialConfig& cfg = manifest.cfg;

    OutputSet outputs(opt.out_dir);
    try {
        Trial trial(cfg, 0);

        auto agents_csv = outputs.open("agents.csv");
        agents_csv << "t,id,x,y,px,py,confidence\n";
        int snap_index = 0;
        auto hook = [&](double t, const Swarm& swarm, const FlowField& flow,
                        const ScalarField& scalar) {
            for (const auto& a : swarm.agents())
                csv::row(agents_csv, {csv::fmt(t), csv::fmt(a.id), csv::fmt(a.pos.x),
                                      csv::fmt(a.pos.y), csv::fmt(a.heading.x),
                                      csv::fmt(a.heading.y), csv::fmt(a.confidence)});
            if (opt.snapshots) {
                char name[32];
                std::snprintf(name, sizeof(name), "flow_%04d.bin", snap_index);
                auto fb = outputs.open(name, std::ios::binary);
                flow.write_raw(fb);
                std::snprintf(name, sizeof(name), "scalar_%04d.bin", snap_index);
                auto sb = outputs.open(name, std::ios::binary);
                scalar.write_raw(sb);
                ++snap_index;
            }
        };
        const TrialResult res = trial.run(hook);

        auto arrivals = outputs.open("arrivals.csv");
        arrivals << "id,arrival_time\n";
        for (std::size_t i = 0; i < res.arrival_times.size(); ++i)
            csv::row(arrivals, {csv::fmt(static_cast<int>(i)),
                                res.arrival_times[i] >= 0.0 ? csv::fmt(res.arrival_times[i])
                                                            : std::string()});

        if (opt.verbose) {
            auto series = outputs.open("series.csv");
            series << "t,n_active,polarity,mean_nnd\n";
            for (std::size_t k = 0; k < res.series_times.size(); ++k)
                csv::row(series, {csv::fmt(res.series_times[k]), csv::fmt(res.active_series[k]),
                                  csv::fmt(res.polarity_series[k]),
                                  k < res.nnd_series.size() ? csv::fmt(res.nnd_series[k])
                                                            : std::string()});
        }
        finalize_manifest(outputs, manifest);
        std::cout << res.n_success << " of " << res.n_agents
                  << " agents reached the source within t=" << csv::fmt(cfg.max_time) << "\n";
        return 0;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

int cmd_sweep(const CliOptions& opt, const std::string& command) {
    Manifest manifest = resolve_manifest(opt, command);
    const TrialConfig& cfg = manifest.cfg;

    SweepPlan plan;
    plan.n_agents = opt.agents_list.empty() ? std::vector<int>{cfg.swarm.n_agents}
                                            : parse_int_list(opt.agents_list, "--agents");
    plan.repulsion = opt.repulsion_list.empty()
                         ? std::vector<double>{cfg.swarm.repulsion_radius}
                         : parse_double_list(opt.repulsion_list, "--repulsion");
    plan.alpha = opt.alpha_list.empty() ? std::vector<double>{cfg.swarm.memory_timescale}
                                        : parse_double_list(opt.alpha_list, "--alpha");

    OutputSet outputs(opt.out_dir);
    try {
        std::function<void(std::size_t, int, const TrialResult&)> on_trial;
        if (opt.verbose) {
            fs::create_directories(fs::path(opt.out_dir) / "trials");
            on_trial = [&](std::size_t cell, int t, const TrialResult& r) {
                char name[64];
                std::snprintf(name, sizeof(name), "trials/cell%03zu_trial%04d.csv", cell, t);
                auto os = outputs.open(name);
                os << "t,n_active,polarity,mean_nnd\n";
                for (std::size_t k = 0; k < r.series_times.size(); ++k)
                    csv::row(os, {csv::fmt(r.series_times[k]), csv::fmt(r.active_series[k]),
                                  csv::fmt(r.polarity_series[k]),
                                  k < r.nnd_series.size() ? csv::fmt(r.nnd_series[k])
                                                          : std::string()});
            };
        }
        const auto cells = run_sweep(cfg, plan, env_threads(), on_trial);
        auto os = outputs.open("sweep.csv");
        write_sweep_csv(os, cells);
        finalize_manifest(outputs, manifest);
        std::cout << cells.size() << " sweep cells x " << cfg.n_trials << " trials written to "
                  << (fs::path(opt.out_dir) / "sweep.csv").string() << "\n";
        return 0;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

int cmd_snapshot(const CliOptions& opt, const std::string& command) {
    Manifest manifest = resolve_manifest(opt, command);
    const TrialConfig& cfg = manifest.cfg;

    OutputSet outputs(opt.out_dir);
    try {
        FlowField flow(cfg.flow, mix_seed(cfg.base_seed, 1));
        ScalarField scalar(cfg.scalar);
        const double dt = cfg.swarm.dt;
        const auto steps = static_cast<long>(std::llround(cfg.spin_up_time / dt));
        for (long k = 0; k < steps; ++k) {
            flow.step(dt);
            scalar.step(flow, dt);
        }
        {
            auto fb = outputs.open("flow.bin", std::ios::binary);
            flow.write_raw(fb);
            auto sb = outputs.open("scalar.bin", std::ios::binary);
            scalar.write_raw(sb);
        }
        if (opt.verbose) {
            auto fc = outputs.open("flow.csv");
            flow.write_csv(fc);
            auto tc = outputs.open("transects.csv");
            scalar.write_transects_csv(tc, 9, cfg.flow.mean_flow);
        }
        finalize_manifest(outputs, manifest);
        std::cout << "developed plume snapshot written to " << opt.out_dir << "\n";
        return 0;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

int cmd_width(const CliOptions& opt, const std::string& command) {
    Manifest manifest = resolve_manifest(opt, command);
    const TrialConfig& cfg = manifest.cfg;

    OutputSet outputs(opt.out_dir);
    try {
        FlowField flow(cfg.flow, mix_seed(cfg.base_seed, 1));
        ScalarField scalar(cfg.scalar);
        const double dt = cfg.swarm.dt;
        const auto steps = static_cast<long>(std::llround(cfg.spin_up_time / dt));
        for (long k = 0; k < steps; ++k) {
            flow.step(dt);
            scalar.step(flow, dt);
        }
        const int n_transects = 9;
        const auto widths = scalar.transect_widths(n_transects, cfg.flow.mean_flow);
        auto os = outputs.open("width.csv");
        os << "transect_id,coord,sigma\n";
        int id = 1;
        for (const auto& [coord, sigma] : widths) {
            csv::row(os, {csv::fmt(id), csv::fmt(coord),
                          sigma ? csv::fmt(*sigma) : std::string()});
            ++id;
        }
        if (opt.verbose) {
            auto tc = outputs.open("transects.csv");
            scalar.write_transects_csv(tc, n_transects, cfg.flow.mean_flow);
        }
        const auto avg = scalar.filament_width(n_transects, cfg.flow.mean_flow);
        finalize_manifest(outputs, manifest);
        if (avg) {
            const double tstar = *avg / (cfg.swarm.speed * std::sin(M_PI / 4.0));
            std::cout << "filament width sigma = " << csv::fmt(*avg)
                      << "; traverse timescale at 45 deg = " << csv::fmt(tstar) << "\n";
        } else {
            std::cout << "no filament detected on any transect\n";
        }
        return 0;
    } catch (...) {
        outputs.discard_all();
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plume: collective chemical-plume tracking simulator"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string subcommand;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config_path, "flat key-value configuration file");
        cmd->add_option("--seed", opt.seed, "base random seed")->each([&](const std::string&) {
            opt.seed_set = true;
        });
        cmd->add_option("--agents", opt.agents_list, "group size (comma list for sweep)");
        cmd->add_option("--alpha", opt.alpha_list, "memory timescale list (sweep)");
        cmd->add_option("--repulsion", opt.repulsion_list, "repulsion radius list (sweep)");
        cmd->add_option("--trials", opt.trials, "trials per sweep cell");
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_flag("--snapshots", opt.snapshots, "dump field snapshots at the record interval");
        cmd->add_flag("--verbose", opt.verbose, "emit per-trial time series / CSV field dumps");
    };

    add_common(app.add_subcommand("run", "run one seeded trial"));
    add_common(app.add_subcommand("sweep", "run a parameter-grid ensemble"));
    add_common(app.add_subcommand("snapshot", "develop the plume and dump the fields"));
    add_common(app.add_subcommand("width", "report the filament width"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    subcommand = app.get_subcommands().front()->get_name();
    std::string command = subcommand;
    for (int i = 2; i < argc; ++i) command += std::string(" ") + argv[i];

    try {
        if (subcommand == "run") return cmd_run(opt, command);
        if (subcommand == "sweep") return cmd_sweep(opt, command);
        if (subcommand == "snapshot") return cmd_snapshot(opt, command);
        if (subcommand == "width") return cmd_width(opt, command);
        std::cerr << "plume: unknown subcommand\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "plume: " << e.what() << "\n";
        return 1;
    }
}
