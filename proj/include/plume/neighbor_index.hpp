#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"

namespace plume {

/// Uniform-grid spatial hash over the periodic unit square. Cell size is at
/// least the largest query radius (the maximum attraction radius), so a
/// radius query only has to visit the 3x3 cell neighborhood. Queries return
/// exactly the agents within the wrapped Euclidean radius.
class NeighborIndex {
public:
    /// cell_size_target caps the admissible query radius.
    explicit NeighborIndex(double cell_size_target) {
        if (!(cell_size_target > 0.0))
            throw std::invalid_argument("NeighborIndex: cell size must be > 0");
        n_cells_ = std::max(1, static_cast<int>(std::floor(1.0 / cell_size_target)));
        cell_size_ = 1.0 / n_cells_;
    }

    double cell_size() const { return cell_size_; }

    void build(const std::vector<Vec2>& positions) {
        positions_ = positions;
        const int nc = n_cells_;
        counts_.assign(static_cast<std::size_t>(nc) * nc + 1, 0);
        for (const auto& p : positions_) ++counts_[cell_of(p) + 1];
        for (std::size_t c = 1; c < counts_.size(); ++c) counts_[c] += counts_[c - 1];
        items_.resize(positions_.size());
        fill_ = counts_;
        for (int i = 0; i < static_cast<int>(positions_.size()); ++i)
            items_[fill_[cell_of(positions_[i])]++] = i;
    }

    /// Indices (into the build order) of all agents with wrapped distance
    /// <= r from p, excluding `exclude`. r must not exceed the cell size.
    void query(Vec2 p, double r, int exclude, std::vector<int>& out) const {
        if (r > cell_size_ * (1.0 + 1e-12))
            throw std::invalid_argument("NeighborIndex: query radius exceeds cell size");
        out.clear();
        const double r2 = r * r;
        if (n_cells_ < 3) {
            for (int i = 0; i < static_cast<int>(positions_.size()); ++i) {
                if (i == exclude) continue;
                if (wrap_delta(p, positions_[i]).norm2() <= r2) out.push_back(i);
            }
            return;
        }
        const int cx = coord_of(p.x);
        const int cy = coord_of(p.y);
        for (int dj = -1; dj <= 1; ++dj) {
            const int jy = wrap_cell(cy + dj);
            for (int di = -1; di <= 1; ++di) {
                const int jx = wrap_cell(cx + di);
                const std::size_t c = static_cast<std::size_t>(jy) * n_cells_ + jx;
                for (std::size_t k = counts_[c]; k < counts_[c + 1]; ++k) {
                    const int i = items_[k];
                    if (i == exclude) continue;
                    if (wrap_delta(p, positions_[i]).norm2() <= r2) out.push_back(i);
                }
            }
        }
    }

private:
    int coord_of(double x) const {
        int c = static_cast<int>(wrap_unit(x) * n_cells_);
        return c >= n_cells_ ? n_cells_ - 1 : c;
    }
    int wrap_cell(int c) const { return (c % n_cells_ + n_cells_) % n_cells_; }
    std::size_t cell_of(Vec2 p) const {
        return static_cast<std::size_t>(coord_of(p.y)) * n_cells_ + coord_of(p.x);
    }

    int n_cells_;
    double cell_size_;
    std::vector<Vec2> positions_;
    std::vector<std::size_t> counts_, fill_;
    std::vector<int> items_;
};

}  // namespace plume
