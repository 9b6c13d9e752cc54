#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace natscale {

// Chebyshev-Lobatto collocation on [-1, 1]: nodes include both ends, so
// adjacent panels share their boundary node.
class PanelRule {
public:
    explicit PanelRule(int order);

    static const PanelRule& get(int order);

    int order() const { return n_; }
    // Ascending nodes on [-1, 1].
    double node(int j) const { return t_[j]; }
    // Integral of the interpolant over [-1, 1].
    double weight(int k) const { return w_[k]; }
    // cumulative(j, k) = integral over [-1, t_j] of the k-th Lagrange basis.
    double cumulative(int j, int k) const { return s_[j * n_ + k]; }
    double barycentric(int k) const { return bary_[k]; }

    // Row-major n x n matrices: S (from the left end), R (to the right end,
    // R = w - S) and their squares, which map samples of g to the double
    // integral of g from the corresponding end.
    const double* from_left() const { return s_.data(); }
    const double* from_right() const { return r_.data(); }
    const double* from_left_sq() const { return s2_.data(); }
    const double* from_right_sq() const { return r2_.data(); }

private:
    int n_;
    std::vector<double> t_, w_, s_, r_, s2_, r2_, bary_;
};

// A partition of [lo, hi] into panels, each carrying `order` Lobatto nodes.
// Node i belongs to panel i / (order - 1); panel boundaries are shared.
class PanelGrid {
public:
    PanelGrid() = default;
    PanelGrid(std::vector<double> breaks, int order);

    int order() const { return order_; }
    std::size_t panels() const { return breaks_.size() - 1; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& breaks() const { return breaks_; }
    double lo() const { return breaks_.front(); }
    double hi() const { return breaks_.back(); }

    std::size_t panel_first(std::size_t k) const { return k * static_cast<std::size_t>(order_ - 1); }
    std::size_t panel_of(double x) const;

    // Node index of a panel boundary equal to x, or npos.
    std::size_t boundary_index(double x) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    PanelGrid mirrored() const;

    // Barycentric interpolation of node data inside the panel containing x.
    // `left_limits`, when given, supplies the sample at the panel's right
    // boundary node (data with jumps at panel boundaries).
    double interpolate(std::span<const double> data, double x) const;
    double interpolate(std::span<const double> data, double x, std::span<const double> left_limits) const;

private:
    int order_ = 0;
    std::vector<double> breaks_;
    std::vector<double> nodes_;
};

}  // namespace natscale
