#include "natscale/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>

#include "natscale/error.hpp"

namespace natscale {

namespace {

double lagrange(const std::vector<double>& t, int k, double x)
{
    double v = 1.0;
    for (int i = 0; i < static_cast<int>(t.size()); ++i)
        if (i != k) v *= (x - t[i]) / (t[k] - t[i]);
    return v;
}

}  // namespace

PanelRule::PanelRule(int order) : n_(order)
{
    if (order < 3 || order > 20) throw InvalidArgument("panel order must lie in [3, 20]");
    t_.resize(n_);
    for (int j = 0; j < n_; ++j) t_[j] = -std::cos(M_PI * j / (n_ - 1));
    t_[0] = -1.0;
    t_[n_ - 1] = 1.0;
    if (n_ % 2 == 1) t_[n_ / 2] = 0.0;

    bary_.resize(n_);
    for (int j = 0; j < n_; ++j) bary_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n_ - 1) ? 0.5 : 1.0);

    // Lagrange bases have degree n-1; a 12-point Gauss rule is exact for them.
    using Gauss = boost::math::quadrature::gauss<double, 12>;
    s_.assign(static_cast<std::size_t>(n_ * n_), 0.0);
    w_.assign(n_, 0.0);
    for (int k = 0; k < n_; ++k) {
        auto basis = [&](double x) { return lagrange(t_, k, x); };
        for (int j = 1; j < n_; ++j) s_[j * n_ + k] = Gauss::integrate(basis, -1.0, t_[j]);
        w_[k] = s_[(n_ - 1) * n_ + k];
    }
    r_.resize(s_.size());
    for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) r_[j * n_ + k] = w_[k] - s_[j * n_ + k];
    auto square = [this](const std::vector<double>& a) {
        std::vector<double> out(a.size(), 0.0);
        for (int i = 0; i < n_; ++i)
            for (int k = 0; k < n_; ++k)
                for (int j = 0; j < n_; ++j) out[i * n_ + j] += a[i * n_ + k] * a[k * n_ + j];
        return out;
    };
    s2_ = square(s_);
    r2_ = square(r_);
}

const PanelRule& PanelRule::get(int order)
{
    static std::mutex mu;
    static std::map<int, std::unique_ptr<PanelRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<PanelRule>(order);
    return *slot;
}

PanelGrid::PanelGrid(std::vector<double> breaks, int order) : order_(order), breaks_(std::move(breaks))
{
    if (breaks_.size() < 2) throw InvalidArgument("panel grid needs at least one panel");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
        if (!(breaks_[i] > breaks_[i - 1])) throw InvalidArgument("panel breaks must be strictly increasing");
    const auto& rule = PanelRule::get(order);
    nodes_.reserve(panels() * (order - 1) + 1);
    for (std::size_t k = 0; k < panels(); ++k) {
        const double a = breaks_[k], b = breaks_[k + 1];
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int j = 0; j < order - 1; ++j) nodes_.push_back(j == 0 ? a : mid + half * rule.node(j));
    }
    nodes_.push_back(breaks_.back());
}

std::size_t PanelGrid::panel_of(double x) const
{
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    if (it == breaks_.begin()) return 0;
    std::size_t k = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return std::min(k, panels() - 1);
}

std::size_t PanelGrid::boundary_index(double x) const
{
    auto it = std::lower_bound(breaks_.begin(), breaks_.end(), x);
    if (it == breaks_.end() || *it != x) return npos;
    return panel_first(static_cast<std::size_t>(it - breaks_.begin()));
}

PanelGrid PanelGrid::mirrored() const
{
    std::vector<double> b;
    b.reserve(breaks_.size());
    for (auto it = breaks_.rbegin(); it != breaks_.rend(); ++it) b.push_back(-*it);
    return PanelGrid(std::move(b), order_);
}

double PanelGrid::interpolate(std::span<const double> data, double x) const
{
    return interpolate(data, x, {});
}

double PanelGrid::interpolate(std::span<const double> data, double x, std::span<const double> left_limits) const
{
    const std::size_t k = panel_of(x);
    const std::size_t first = panel_first(k);
    const auto& rule = PanelRule::get(order_);
    const double a = breaks_[k], b = breaks_[k + 1];
    const double t = (2.0 * x - a - b) / (b - a);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < order_; ++j) {
        double fj = data[first + j];
        if (j == order_ - 1 && !left_limits.empty()) fj = left_limits[first + j];
        const double d = t - rule.node(j);
        if (d == 0.0) return fj;
        const double w = rule.barycentric(j) / d;
        num += w * fj;
        den += w;
    }
    return num / den;
}

}  // namespace natscale
