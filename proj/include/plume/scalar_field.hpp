#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "csv.hpp"
#include "flow_field.hpp"
#include "geometry.hpp"

namespace plume {

struct ScalarConfig {
    int grid = 512;
    Vec2 source{0.5, 0.1};
    double amplitude = 1.0;    ///< injected mass per unit time
    double decay_rate = 4.0;   ///< b in dC/dt = S - bC
    double width_cells = 2.0;  ///< Gaussian source kernel std, in grid cells

    void validate() const {
        if (grid < 64) throw std::invalid_argument("ScalarConfig: grid must be >= 64");
        if (!(width_cells >= 1.0))
            throw std::invalid_argument("ScalarConfig: source width must be >= 1 grid cell");
        if (!(decay_rate >= 0.0))
            throw std::invalid_argument("ScalarConfig: decay_rate must be >= 0");
        if (!(amplitude >= 0.0))
            throw std::invalid_argument("ScalarConfig: amplitude must be >= 0");
        if (!(source.x >= 0.0 && source.x < 1.0 && source.y >= 0.0 && source.y < 1.0))
            throw std::invalid_argument("ScalarConfig: source must lie inside the unit domain");
    }
};

/// Concentration field advected semi-Lagrangially under a FlowField, with a
/// continuous Gaussian point source and linear decay, on a periodic N x N
/// grid.
///
/// The grid stores the response to a unit-amplitude source; the configured
/// amplitude is a multiplier applied when physical concentrations are
/// reported. The transport equation is linear in (C, S) so this is exact,
/// and it makes every behavioral quantity downstream (the confidence ratio,
/// relative thresholds) invariant under positive amplitude rescaling by
/// construction rather than up to rounding.
///
/// Single-owner stepping; concurrent read-only sampling between steps is fine.
class ScalarField {
public:
    explicit ScalarField(const ScalarConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        const int n = cfg_.grid;
        tracer_.assign(static_cast<std::size_t>(n) * n, 0.0);
        work_.assign(static_cast<std::size_t>(n) * n, 0.0);
        build_source_stamp();
    }

    const ScalarConfig& config() const { return cfg_; }
    int grid_size() const { return cfg_.grid; }

    /// Semi-Lagrangian update: per node, trace the departure point with a
    /// midpoint (second-order) backtrack through the frozen velocity field,
    /// interpolate bilinearly, apply the exact decay factor exp(-b dt) and
    /// add dt times the source kernel. Bilinear interpolation plus a
    /// nonnegative source keeps values >= 0 and creates no new extrema under
    /// pure advection.
    ///
    /// When the scalar grid is a multiple of the spectral grid the velocity
    /// is first refined onto the scalar nodes (bilinear restricted to a
    /// sub-rectangle reproduces the same bilinear, so this changes nothing
    /// but the cost); otherwise each lookup goes straight to the flow grid.
    void step(const FlowField& flow, double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("ScalarField::step: dt must be > 0");
        if (cfg_.grid % flow.grid_size() == 0)
            advect_fast(flow, dt);
        else
            advect_generic(flow, dt);
        if (cfg_.amplitude > 0.0) {
            // amplitude 0 switches the source off entirely
            double* dst = work_.data();
            for (const auto& s : stamp_) dst[s.idx] += dt * s.value;
        }
        tracer_.swap(work_);
    }

    /// Physical concentration (amplitude applied), bilinear, nonnegative.
    double concentration_at(Vec2 p) const { return cfg_.amplitude * tracer_at(p); }

    /// Unit-source carrier concentration, bilinear.
    double tracer_at(Vec2 p) const {
        p = wrap_unit(p);
        const int n = cfg_.grid;
        const double gx = p.x * n;
        const double gy = p.y * n;
        int i0 = static_cast<int>(gx);
        int j0 = static_cast<int>(gy);
        if (i0 >= n) i0 = n - 1;
        if (j0 >= n) j0 = n - 1;
        const double fx = gx - i0;
        const double fy = gy - j0;
        const int i1 = (i0 + 1 == n) ? 0 : i0 + 1;
        const int j1 = (j0 + 1 == n) ? 0 : j0 + 1;
        const double* g = tracer_.data();
        return (1.0 - fy) * ((1.0 - fx) * g[static_cast<std::size_t>(j0) * n + i0] +
                             fx * g[static_cast<std::size_t>(j0) * n + i1]) +
               fy * ((1.0 - fx) * g[static_cast<std::size_t>(j1) * n + i0] +
                     fx * g[static_cast<std::size_t>(j1) * n + i1]);
    }

    /// What an agent senses, in units of the source amplitude: the carrier
    /// value for any positive amplitude, exactly zero for a silent source.
    double sensed_at(Vec2 p) const { return cfg_.amplitude > 0.0 ? tracer_at(p) : 0.0; }

    /// Peak steady concentration of the unit source under pure decay
    /// (kernel peak / b); the reference level for relative thresholds.
    double steady_peak_tracer() const {
        if (cfg_.decay_rate > 0.0) return stamp_peak_ / cfg_.decay_rate;
        // no decay: no steady state; fall back to the current maximum
        return *std::max_element(tracer_.begin(), tracer_.end());
    }

    /// Total physical mass, sum C h^2 times amplitude.
    double total_mass() const {
        double s = 0.0;
        for (double v : tracer_) s += v;
        const double h = 1.0 / cfg_.grid;
        return cfg_.amplitude * s * h * h;
    }

    double max_tracer() const { return *std::max_element(tracer_.begin(), tracer_.end()); }
    double min_tracer() const { return *std::min_element(tracer_.begin(), tracer_.end()); }

    const std::vector<double>& tracer_grid() const { return tracer_; }

    /// Overwrite the carrier with an analytic profile (tests, demos).
    void fill_tracer(const std::function<double(Vec2)>& f) {
        const int n = cfg_.grid;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                tracer_[static_cast<std::size_t>(j) * n + i] = f({double(i) / n, double(j) / n});
    }

    /// Argmax of the carrier along the transect transverse to `axis_y` at
    /// downstream coordinate `coord`; returns (transverse position, peak).
    /// axis_y true means the mean flow is along y and the transect is a row.
    std::pair<double, double> transect_peak(double coord, bool axis_y) const {
        const int n = cfg_.grid;
        const int line = static_cast<int>(std::lround(wrap_unit(coord) * n)) % n;
        int best = 0;
        double bestv = -1.0;
        for (int i = 0; i < n; ++i) {
            const double v = axis_y ? tracer_[static_cast<std::size_t>(line) * n + i]
                                    : tracer_[static_cast<std::size_t>(i) * n + line];
            if (v > bestv) {
                bestv = v;
                best = i;
            }
        }
        return {double(best) / n, bestv};
    }

    /// Average filament width: on n_transects lines transverse to the mean
    /// flow between the source and the downstream domain edge, the
    /// concentration-weighted standard deviation of the transverse coordinate
    /// about the weighted mean (Gaussian-profile moment fit), averaged over
    /// transects whose peak clears 1e-6 of the steady source amplitude.
    /// Returns nullopt when no transect carries a filament.
    std::optional<double> filament_width(int n_transects, Vec2 mean_flow) const {
        double sum = 0.0;
        int count = 0;
        for (const auto& [coord, sigma] : transect_widths(n_transects, mean_flow)) {
            if (sigma) {
                sum += *sigma;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / count;
    }

    /// Per-transect downstream coordinate and fitted width; nullopt where the
    /// transect carries no filament. filament_width() averages these.
    std::vector<std::pair<double, std::optional<double>>> transect_widths(int n_transects,
                                                                          Vec2 mean_flow) const {
        if (n_transects < 1) throw std::invalid_argument("transect_widths: n_transects must be >= 1");
        const bool axis_y = std::abs(mean_flow.y) >= std::abs(mean_flow.x);
        const double dir = axis_y ? (mean_flow.y >= 0 ? 1.0 : -1.0) : (mean_flow.x >= 0 ? 1.0 : -1.0);
        const double s0 = axis_y ? cfg_.source.y : cfg_.source.x;
        const double floor = 1e-6 * steady_peak_tracer();
        std::vector<std::pair<double, std::optional<double>>> out;
        out.reserve(n_transects);
        for (int t = 1; t <= n_transects; ++t) {
            const double coord = wrap_unit(s0 + dir * (double(t) / (n_transects + 1)));
            out.emplace_back(coord, transect_sigma(coord, axis_y, floor));
        }
        return out;
    }

    /// Transect profiles as CSV rows (transect_id, s, C) with physical
    /// concentration; s is the transverse coordinate.
    void write_transects_csv(std::ostream& os, int n_transects, Vec2 mean_flow) const {
        const bool axis_y = std::abs(mean_flow.y) >= std::abs(mean_flow.x);
        const double dir = axis_y ? (mean_flow.y >= 0 ? 1.0 : -1.0) : (mean_flow.x >= 0 ? 1.0 : -1.0);
        const double s0 = axis_y ? cfg_.source.y : cfg_.source.x;
        const int n = cfg_.grid;
        os << "transect_id,s,C\n";
        for (int t = 1; t <= n_transects; ++t) {
            const double coord = wrap_unit(s0 + dir * (double(t) / (n_transects + 1)));
            const int line = static_cast<int>(std::lround(coord * n)) % n;
            for (int i = 0; i < n; ++i) {
                const double v = axis_y ? tracer_[static_cast<std::size_t>(line) * n + i]
                                        : tracer_[static_cast<std::size_t>(i) * n + line];
                csv::row(os, {csv::fmt(t), csv::fmt(double(i) / n), csv::fmt(cfg_.amplitude * v)});
            }
        }
    }

    /// Raw snapshot: 16-byte header (magic "CFLD", u32 width, u32 height,
    /// u32 reserved) then width*height little-endian f64 physical
    /// concentrations, row-major with y outer.
    void write_raw(std::ostream& os) const {
        const int n = cfg_.grid;
        FlowField::write_raw_header(os, "CFLD", n, n);
        std::vector<double> plane(tracer_.size());
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = cfg_.amplitude * tracer_[i];
        os.write(reinterpret_cast<const char*>(plane.data()),
                 static_cast<std::streamsize>(plane.size() * sizeof(double)));
    }

private:
    struct StampEntry {
        std::size_t idx;
        double value;
    };

    /// Bilinear sample of the old tracer at (px, py) times decay, into dst.
    double backtraced_value(const double* src, double px, double py, double decay) const {
        const int n = cfg_.grid;
        px -= std::floor(px);
        py -= std::floor(py);
        const double gx = px * n;
        const double gy = py * n;
        int i0 = static_cast<int>(gx);
        int j0 = static_cast<int>(gy);
        if (i0 >= n) i0 = n - 1;
        if (j0 >= n) j0 = n - 1;
        const double fx = gx - i0;
        const double fy = gy - j0;
        const int i1 = (i0 + 1 == n) ? 0 : i0 + 1;
        const int j1 = (j0 + 1 == n) ? 0 : j0 + 1;
        const double c = (1.0 - fy) * ((1.0 - fx) * src[static_cast<std::size_t>(j0) * n + i0] +
                                       fx * src[static_cast<std::size_t>(j0) * n + i1]) +
                         fy * ((1.0 - fx) * src[static_cast<std::size_t>(j1) * n + i0] +
                               fx * src[static_cast<std::size_t>(j1) * n + i1]);
        return c * decay;
    }

    void advect_fast(const FlowField& flow, double dt) {
        const int n = cfg_.grid;
        const int m = flow.grid_size();
        const int q = n / m;
        const int mmask = m - 1;
        const double h = 1.0 / n;
        const double decay = std::exp(-cfg_.decay_rate * dt);
        const double ux = flow.config().mean_flow.x;
        const double uy = flow.config().mean_flow.y;
        const auto* fg = flow.fluctuation_grid().data();

        // total velocity refined onto the scalar nodes, (u, v) interleaved
        uv_.resize(2 * static_cast<std::size_t>(n) * n);
        for (int j = 0; j < n; ++j) {
            const int jf0 = j / q;
            const int jf1 = (jf0 + 1) & mmask;
            const double wy = static_cast<double>(j - jf0 * q) / q;
            const auto* row0 = fg + static_cast<std::size_t>(jf0) * m;
            const auto* row1 = fg + static_cast<std::size_t>(jf1) * m;
            double* out = uv_.data() + 2 * static_cast<std::size_t>(j) * n;
            for (int i = 0; i < n; ++i) {
                const int if0 = i / q;
                const int if1 = (if0 + 1) & mmask;
                const double wx = static_cast<double>(i - if0 * q) / q;
                const auto w = (1.0 - wy) * ((1.0 - wx) * row0[if0] + wx * row0[if1]) +
                               wy * ((1.0 - wx) * row1[if0] + wx * row1[if1]);
                out[2 * i] = ux + w.real();
                out[2 * i + 1] = uy + w.imag();
            }
        }

        const double* src = tracer_.data();
        double* dst = work_.data();
        const double* uv = uv_.data();
        for (int j = 0; j < n; ++j) {
            const double y = j * h;
            for (int i = 0; i < n; ++i) {
                const double x = i * h;
                const std::size_t idx = static_cast<std::size_t>(j) * n + i;
                // midpoint velocity, bilinear on the refined grid; the
                // half-step displacement never exceeds one cell at any dt the
                // flow accepts, so wrapping is a rare branch
                double px = x - 0.5 * dt * uv[2 * idx];
                double py = y - 0.5 * dt * uv[2 * idx + 1];
                if (px < 0.0) px += 1.0; else if (px >= 1.0) px -= 1.0;
                if (py < 0.0) py += 1.0; else if (py >= 1.0) py -= 1.0;
                const double gx = px * n;
                const double gy = py * n;
                int i0 = static_cast<int>(gx);
                int j0 = static_cast<int>(gy);
                if (i0 >= n) i0 = n - 1;
                if (j0 >= n) j0 = n - 1;
                const double fx = gx - i0;
                const double fy = gy - j0;
                const int i1 = (i0 + 1 == n) ? 0 : i0 + 1;
                const int j1 = (j0 + 1 == n) ? 0 : j0 + 1;
                const double* r0 = uv + 2 * (static_cast<std::size_t>(j0) * n);
                const double* r1 = uv + 2 * (static_cast<std::size_t>(j1) * n);
                const double w00 = (1.0 - fy) * (1.0 - fx);
                const double w10 = (1.0 - fy) * fx;
                const double w01 = fy * (1.0 - fx);
                const double w11 = fy * fx;
                const double vx = w00 * r0[2 * i0] + w10 * r0[2 * i1] +
                                  w01 * r1[2 * i0] + w11 * r1[2 * i1];
                const double vy = w00 * r0[2 * i0 + 1] + w10 * r0[2 * i1 + 1] +
                                  w01 * r1[2 * i0 + 1] + w11 * r1[2 * i1 + 1];
                dst[idx] = backtraced_value(src, x - dt * vx, y - dt * vy, decay);
            }
        }
    }

    void advect_generic(const FlowField& flow, double dt) {
        const int n = cfg_.grid;
        const double h = 1.0 / n;
        const double decay = std::exp(-cfg_.decay_rate * dt);
        const int m = flow.grid_size();
        const int mmask = m - 1;
        const auto* fg = flow.fluctuation_grid().data();
        const double ux = flow.config().mean_flow.x;
        const double uy = flow.config().mean_flow.y;

        auto fluct = [&](double px, double py, double& vx, double& vy) {
            px -= std::floor(px);
            py -= std::floor(py);
            const double gx = px * m;
            const double gy = py * m;
            int i0 = static_cast<int>(gx);
            int j0 = static_cast<int>(gy);
            const double fx = gx - i0;
            const double fy = gy - j0;
            i0 &= mmask;
            j0 &= mmask;
            const int i1 = (i0 + 1) & mmask;
            const int j1 = (j0 + 1) & mmask;
            const auto w = (1.0 - fy) * ((1.0 - fx) * fg[static_cast<std::size_t>(j0) * m + i0] +
                                         fx * fg[static_cast<std::size_t>(j0) * m + i1]) +
                           fy * ((1.0 - fx) * fg[static_cast<std::size_t>(j1) * m + i0] +
                                 fx * fg[static_cast<std::size_t>(j1) * m + i1]);
            vx = w.real();
            vy = w.imag();
        };

        const double* src = tracer_.data();
        double* dst = work_.data();
        for (int j = 0; j < n; ++j) {
            const double y = j * h;
            for (int i = 0; i < n; ++i) {
                const double x = i * h;
                double vx, vy;
                fluct(x, y, vx, vy);
                const double mx = x - 0.5 * dt * (vx + ux);
                const double my = y - 0.5 * dt * (vy + uy);
                fluct(mx, my, vx, vy);
                dst[static_cast<std::size_t>(j) * n + i] =
                    backtraced_value(src, x - dt * (vx + ux), y - dt * (vy + uy), decay);
            }
        }
    }

    /// Discretize the Gaussian source kernel, truncated at 6 sigma and
    /// normalized so one unit of mass is injected per unit time exactly.
    void build_source_stamp() {
        const int n = cfg_.grid;
        const double h = 1.0 / n;
        const double sig = cfg_.width_cells * h;
        const int r = std::min(static_cast<int>(std::ceil(6.0 * cfg_.width_cells)), n / 2 - 1);
        const int ci = static_cast<int>(std::floor(cfg_.source.x * n));
        const int cj = static_cast<int>(std::floor(cfg_.source.y * n));

        stamp_.clear();
        double sum = 0.0;
        for (int dj = -r; dj <= r + 1; ++dj) {
            for (int di = -r; di <= r + 1; ++di) {
                const int i = ((ci + di) % n + n) % n;
                const int j = ((cj + dj) % n + n) % n;
                const double dx = wrap_delta(double(i) * h - cfg_.source.x);
                const double dy = wrap_delta(double(j) * h - cfg_.source.y);
                const double d2 = dx * dx + dy * dy;
                if (d2 > 36.0 * sig * sig) continue;
                const double g = std::exp(-d2 / (2.0 * sig * sig));
                stamp_.push_back({static_cast<std::size_t>(j) * n + i, g});
                sum += g;
            }
        }
        const double norm = 1.0 / (sum * h * h);
        stamp_peak_ = 0.0;
        for (auto& s : stamp_) {
            s.value *= norm;
            stamp_peak_ = std::max(stamp_peak_, s.value);
        }
    }

    std::optional<double> transect_sigma(double coord, bool axis_y, double floor) const {
        const int n = cfg_.grid;
        const int line = static_cast<int>(std::lround(coord * n)) % n;
        auto at = [&](int i) {
            i = ((i % n) + n) % n;
            return axis_y ? tracer_[static_cast<std::size_t>(line) * n + i]
                          : tracer_[static_cast<std::size_t>(i) * n + line];
        };
        int best = 0;
        double bestv = -1.0;
        for (int i = 0; i < n; ++i)
            if (at(i) > bestv) {
                bestv = at(i);
                best = i;
            }
        if (bestv < floor) return std::nullopt;

        // moments in a window around the peak, coordinates unwrapped there
        const int w = std::max(4, n / 10);
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        const double h = 1.0 / n;
        for (int d = -w; d <= w; ++d) {
            const double c = at(best + d);
            const double x = d * h;
            m0 += c;
            m1 += c * x;
            m2 += c * x * x;
        }
        const double mean = m1 / m0;
        const double var = m2 / m0 - mean * mean;
        return var > 0.0 ? std::optional<double>(std::sqrt(var)) : std::optional<double>(0.0);
    }

    ScalarConfig cfg_;
    std::vector<double> tracer_;  ///< unit-amplitude concentration
    std::vector<double> work_;
    std::vector<double> uv_;  ///< per-step refined velocity scratch, interleaved
    std::vector<StampEntry> stamp_;
    double stamp_peak_ = 0.0;
};

}  // namespace plume
