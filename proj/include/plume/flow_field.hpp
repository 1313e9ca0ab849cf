#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "csv.hpp"
#include "fft.hpp"
#include "geometry.hpp"
#include "rng.hpp"

namespace plume {

/// Parameters of the stochastic velocity field: energy spectrum
/// E(k) = A k exp(-k/k_p) with k_p = 2*pi/peak_lengthscale, A normalized so
/// the expected rms fluctuation speed equals rms_velocity, plus a constant
/// mean flow. Each Fourier mode of the stream function evolves as an
/// Ornstein-Uhlenbeck process with correlation time correlation_time.
struct SpectrumConfig {
    double peak_lengthscale = 0.31;
    double rms_velocity = 0.25;
    Vec2 mean_flow{0.0, 0.6};
    double correlation_time = 0.2;
    int modes = 128;  ///< spectral grid resolution per axis; power of two

    void validate() const {
        if (modes < 4 || (modes & (modes - 1)) != 0)
            throw std::invalid_argument("SpectrumConfig: modes must be a power of two >= 4");
        if (!(peak_lengthscale > 0.0 && peak_lengthscale < 1.0))
            throw std::invalid_argument("SpectrumConfig: peak_lengthscale must lie in (0, 1)");
        if (peak_lengthscale <= 2.0 / modes)
            throw std::invalid_argument(
                "SpectrumConfig: peak_lengthscale must exceed 2x the spectral grid spacing");
        if (!(rms_velocity >= 0.0))
            throw std::invalid_argument("SpectrumConfig: rms_velocity must be >= 0");
        if (!(correlation_time > 0.0))
            throw std::invalid_argument("SpectrumConfig: correlation_time must be > 0");
    }

    /// Wavenumber of the spectrum peak, 2*pi/peak_lengthscale.
    double peak_wavenumber() const { return 2.0 * M_PI / peak_lengthscale; }
};

/// Divergence-free stochastic 2D velocity field on the periodic unit square.
///
/// The fluctuation is the rotated gradient of a stream function whose Fourier
/// modes carry the prescribed spectrum. Spectral derivatives use the
/// centered-difference symbol sin(k h)/h, so the velocity evaluated on the
/// physical grid has exactly zero centered-difference divergence, and modal
/// variances are normalized against the same symbol so the grid rms is exact
/// in expectation. After every step the fluctuation is synthesized onto an
/// modes x modes grid; sampling anywhere in the domain is bilinear on that
/// grid.
///
/// One instance belongs to one trial: stepping is single-owner, sampling is
/// safe concurrently between steps.
class FlowField {
public:
    FlowField(const SpectrumConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), rng_(mix_seed(seed, 0x0f1f)), fft_(cfg.modes) {
        cfg_.validate();
        const int m = cfg_.modes;
        modes_.assign(static_cast<std::size_t>(m) * m, {0.0, 0.0});
        deriv_.assign(static_cast<std::size_t>(m) * m, {0.0, 0.0});
        grid_.assign(static_cast<std::size_t>(m) * m, {0.0, 0.0});
        work_.assign(static_cast<std::size_t>(m) * m, {0.0, 0.0});

        build_mode_tables();

        if (cfg_.rms_velocity > 0.0) {
            // independent draws from the stationary distribution
            for (const auto& om : owned_) {
                const double a = om.sigma * M_SQRT1_2;
                set_mode_pair(om, {a * rng_.gaussian(), a * rng_.gaussian()});
            }
            synthesize();
        }
    }

    const SpectrumConfig& config() const { return cfg_; }
    int grid_size() const { return cfg_.modes; }

    /// One Ornstein-Uhlenbeck step of every mode:
    ///   psi <- psi (1 - dt/tau) + sqrt(2 sigma_k^2 dt/tau) xi
    /// which preserves the stationary per-mode variance in distribution.
    /// Requires dt <= correlation_time/10 for the discretization to hold.
    void step(double dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("FlowField::step: dt must be > 0");
        if (dt > cfg_.correlation_time / 10.0)
            throw std::invalid_argument(
                "FlowField::step: dt exceeds correlation_time/10 (OU discretization unstable)");
        if (cfg_.rms_velocity == 0.0) return;  // every mode is pinned at zero
        const double decay = 1.0 - dt / cfg_.correlation_time;
        const double amp = std::sqrt(dt / cfg_.correlation_time);  // times sigma per component
        for (const auto& om : owned_) {
            const double s = om.sigma * amp;
            const std::complex<double> xi{s * rng_.gaussian(), s * rng_.gaussian()};
            set_mode_pair(om, decay * modes_[om.idx] + xi);
        }
        synthesize();
    }

    /// Total velocity (mean flow + bilinear fluctuation) at any point.
    Vec2 velocity_at(Vec2 p) const {
        const Vec2 f = fluctuation_at(p);
        return {cfg_.mean_flow.x + f.x, cfg_.mean_flow.y + f.y};
    }

    /// Fluctuating part only, bilinear on the spectral grid.
    Vec2 fluctuation_at(Vec2 p) const {
        p = wrap_unit(p);
        const int m = cfg_.modes;
        const double gx = p.x * m;
        const double gy = p.y * m;
        int i0 = static_cast<int>(gx);
        int j0 = static_cast<int>(gy);
        if (i0 >= m) i0 = m - 1;
        if (j0 >= m) j0 = m - 1;
        const double fx = gx - i0;
        const double fy = gy - j0;
        const int i1 = (i0 + 1) & (m - 1);
        const int j1 = (j0 + 1) & (m - 1);
        const auto* g = grid_.data();
        const std::complex<double> w =
            (1.0 - fy) * ((1.0 - fx) * g[static_cast<std::size_t>(j0) * m + i0] +
                          fx * g[static_cast<std::size_t>(j0) * m + i1]) +
            fy * ((1.0 - fx) * g[static_cast<std::size_t>(j1) * m + i0] +
                  fx * g[static_cast<std::size_t>(j1) * m + i1]);
        return {w.real(), w.imag()};
    }

    /// Fluctuation at grid node (i, j); node (i, j) sits at (i/m, j/m).
    Vec2 fluctuation_at_node(int i, int j) const {
        const auto& w = grid_[static_cast<std::size_t>(j) * cfg_.modes + i];
        return {w.real(), w.imag()};
    }

    /// Raw fluctuation grid, row-major with y as the outer index;
    /// real part = u', imaginary part = v'.
    const AlignedComplexVector& fluctuation_grid() const { return grid_; }

    /// Stream-function mode at integer wavenumber (nx, ny).
    std::complex<double> mode(int nx, int ny) const { return modes_[mode_index(nx, ny)]; }

    /// Stationary standard deviation assigned to mode (nx, ny); zero for the
    /// DC and Nyquist lines which the construction pins to zero.
    double mode_std(int nx, int ny) const {
        for (const auto& om : owned_)
            if (om.idx == mode_index(nx, ny) || om.midx == mode_index(nx, ny)) return om.sigma;
        return 0.0;
    }

    /// Radially binned kinetic energy of the current fluctuation, computed
    /// from the modes. Bins are two integer wavenumbers wide with edges at
    /// |k|/2pi in {0.5, 2.5, 4.5, ...}; unit-width shells are too noisy at
    /// the lattice level to localize the spectral peak reliably.
    std::vector<double> energy_spectrum() const {
        std::vector<double> bins;
        const int m = cfg_.modes;
        for (int ny = -(m / 2 - 1); ny <= m / 2 - 1; ++ny) {
            for (int nx = -(m / 2 - 1); nx <= m / 2 - 1; ++nx) {
                if (nx == 0 && ny == 0) continue;
                const double kmag = 2.0 * M_PI * std::sqrt(double(nx) * nx + double(ny) * ny);
                const int b = spectrum_bin_of(kmag);
                if (b < 0) continue;
                if (b >= static_cast<int>(bins.size())) bins.resize(b + 1, 0.0);
                const auto d = deriv_[mode_index(nx, ny)];
                bins[b] += 0.5 * std::norm(d * modes_[mode_index(nx, ny)]);
            }
        }
        return bins;
    }

    /// Bin index used by energy_spectrum() for wavenumber magnitude k.
    static int spectrum_bin_of(double k) {
        const double rho = k / (2.0 * M_PI);
        if (rho <= 0.5) return -1;
        return static_cast<int>((rho - 0.5) / 2.0);
    }

    /// Velocity grid as CSV rows (x, y, u, v), total velocity.
    void write_csv(std::ostream& os) const {
        const int m = cfg_.modes;
        os << "x,y,u,v\n";
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                const Vec2 f = fluctuation_at_node(i, j);
                csv::row(os, {csv::fmt(double(i) / m), csv::fmt(double(j) / m),
                              csv::fmt(cfg_.mean_flow.x + f.x), csv::fmt(cfg_.mean_flow.y + f.y)});
            }
        }
    }

    /// Raw snapshot: 16-byte header (magic "KFLO", u32 width, u32 height,
    /// u32 reserved), then width*height little-endian f64 u values followed by
    /// width*height f64 v values, row-major with y outer.
    void write_raw(std::ostream& os) const {
        const int m = cfg_.modes;
        write_raw_header(os, "KFLO", m, m);
        std::vector<double> plane(static_cast<std::size_t>(m) * m);
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = cfg_.mean_flow.x + grid_[i].real();
        os.write(reinterpret_cast<const char*>(plane.data()),
                 static_cast<std::streamsize>(plane.size() * sizeof(double)));
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = cfg_.mean_flow.y + grid_[i].imag();
        os.write(reinterpret_cast<const char*>(plane.data()),
                 static_cast<std::streamsize>(plane.size() * sizeof(double)));
    }

    static void write_raw_header(std::ostream& os, const char magic[4], int w, int h) {
        os.write(magic, 4);
        const std::uint32_t u32[3] = {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), 0u};
        os.write(reinterpret_cast<const char*>(u32), sizeof(u32));
    }

private:
    struct OwnedMode {
        int idx;       ///< flat index of the mode
        int midx;      ///< flat index of its conjugate partner
        double sigma;  ///< stationary std of the stream-function mode
    };

    int mode_index(int nx, int ny) const {
        const int m = cfg_.modes;
        return ((ny + m) & (m - 1)) * m + ((nx + m) & (m - 1));
    }

    void set_mode_pair(const OwnedMode& om, std::complex<double> v) {
        modes_[om.idx] = v;
        modes_[om.midx] = std::conj(v);
    }

    /// Enumerate the canonical half of the mode lattice (Nyquist lines and DC
    /// excluded so every active mode has a clean conjugate partner), assign
    /// per-mode variances from the spectrum and precompute the velocity
    /// synthesis factors.
    void build_mode_tables() {
        const int m = cfg_.modes;
        const double h = 1.0 / m;
        const double kp = cfg_.peak_wavenumber();

        double weight_sum = 0.0;
        for (int ny = -(m / 2 - 1); ny <= m / 2 - 1; ++ny)
            for (int nx = -(m / 2 - 1); nx <= m / 2 - 1; ++nx) {
                if (nx == 0 && ny == 0) continue;
                weight_sum += std::exp(-2.0 * M_PI * std::sqrt(double(nx) * nx + double(ny) * ny) / kp);
            }
        const double c = cfg_.rms_velocity * cfg_.rms_velocity / weight_sum;

        owned_.clear();
        owned_.reserve(static_cast<std::size_t>(m / 2 - 1) * m);
        for (int ny = 0; ny <= m / 2 - 1; ++ny) {
            const int nx_lo = (ny == 0) ? 1 : -(m / 2 - 1);
            for (int nx = nx_lo; nx <= m / 2 - 1; ++nx) {
                const double kx = 2.0 * M_PI * nx;
                const double ky = 2.0 * M_PI * ny;
                const double sx = std::sin(kx * h) / h;
                const double sy = std::sin(ky * h) / h;
                const double s2 = sx * sx + sy * sy;
                const double kmag = std::sqrt(kx * kx + ky * ky);
                const double sigma = std::sqrt(c * std::exp(-kmag / kp) / s2);
                owned_.push_back({mode_index(nx, ny), mode_index(-nx, -ny), sigma});
            }
        }

        // w_hat = u_hat + i v_hat = (s_x + i s_y) psi_hat; the synthesis of
        // both components in a single complex transform
        for (int ny = -(m / 2 - 1); ny <= m / 2 - 1; ++ny)
            for (int nx = -(m / 2 - 1); nx <= m / 2 - 1; ++nx) {
                if (nx == 0 && ny == 0) continue;
                const double sx = std::sin(2.0 * M_PI * nx * h) / h;
                const double sy = std::sin(2.0 * M_PI * ny * h) / h;
                deriv_[mode_index(nx, ny)] = {sx, sy};
            }
    }

    /// Rebuild the physical fluctuation grid from the current modes.
    void synthesize() {
        const std::size_t n = modes_.size();
        for (std::size_t i = 0; i < n; ++i) work_[i] = deriv_[i] * modes_[i];
        fft_.inverse(work_.data());
        grid_.swap(work_);
    }

    SpectrumConfig cfg_;
    Rng rng_;
    Fft2 fft_;
    std::vector<OwnedMode> owned_;
    std::vector<std::complex<double>> modes_;  ///< stream-function coefficients
    std::vector<std::complex<double>> deriv_;  ///< per-mode (s_x + i s_y)
    AlignedComplexVector grid_;                ///< u' + i v' at grid nodes
    AlignedComplexVector work_;
};

}  // namespace plume
