#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace cct {

/// Number of uniform steps covering [0, T] with a nominal step dt.
inline int step_count(double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("step_count: T and dt must be positive");
  return std::max(1, static_cast<int>(std::lround(T / dt)));
}

/// Samples of a function of time on the uniform grid t_k = k * step, k = 0..K,
/// read back by piecewise-linear interpolation.
template <class V>
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, std::vector<V> values)
      : horizon_(horizon), values_(std::move(values)) {
    if (values_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    step_ = horizon_ / static_cast<double>(values_.size() - 1);
  }

  double horizon() const { return horizon_; }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  double time(std::size_t k) const { return k == values_.size() - 1 ? horizon_ : step_ * k; }

  const V& node(std::size_t k) const { return values_[k]; }
  const V& front() const { return values_.front(); }
  const V& back() const { return values_.back(); }
  const std::vector<V>& values() const { return values_; }

  /// Linear interpolation, clamped to [0, horizon].
  V at(double t) const {
    const double s = std::clamp(t, 0.0, horizon_) / step_;
    auto k = static_cast<std::size_t>(std::floor(s));
    if (k >= values_.size() - 1) return values_.back();
    const double w = s - static_cast<double>(k);
    if (w == 0.0) return values_[k];
    return V((1.0 - w) * values_[k] + w * values_[k + 1]);
  }

 private:
  double horizon_ = 0.0;
  double step_ = 0.0;
  std::vector<V> values_;
};

/// Composite trapezoid rule over uniformly spaced samples.
template <class V, class F>
auto trapezoid(const TimeGrid<V>& grid, F&& f) -> std::decay_t<decltype(f(grid.node(0)))> {
  using R = std::decay_t<decltype(f(grid.node(0)))>;
  const std::size_t K = grid.size() - 1;
  R acc = 0.5 * (f(grid.node(0)) + f(grid.node(K)));
  for (std::size_t k = 1; k < K; ++k) acc += f(grid.node(k));
  return R(grid.step() * acc);
}

}  // namespace cct
