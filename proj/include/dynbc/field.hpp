#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dynbc/errors.hpp"
#include "dynbc/geometry.hpp"

namespace dynbc {

/// Uniform ladder of time levels t_n = t0 + n * dt covering [t0, t0 + tau]
/// with n_steps steps (n_steps + 1 levels).
struct TimeGrid {
  TimeGrid(double t0_, double tau_, std::size_t n_steps_)
      : t0(t0_), tau(tau_), n_steps(n_steps_) {
    if (!(tau > 0.0)) throw InvalidArgument("TimeGrid: tau must be positive");
    if (n_steps < 1) throw InvalidArgument("TimeGrid: need at least one step");
  }

  double dt() const { return tau / static_cast<double>(n_steps); }
  std::size_t num_levels() const { return n_steps + 1; }
  /// t(n_steps) evaluates to exactly t0 + tau.
  double t(std::size_t n) const {
    return t0 + tau * (static_cast<double>(n) / static_cast<double>(n_steps));
  }

  friend bool operator==(const TimeGrid& a, const TimeGrid& b) {
    return a.t0 == b.t0 && a.tau == b.tau && a.n_steps == b.n_steps;
  }

  double t0;
  double tau;
  std::size_t n_steps;
};

/// Node values on every level of a time ladder, stored level-major.
class SpaceTimeField {
 public:
  SpaceTimeField(const TimeGrid& time, std::size_t n_nodes)
      : time_(time), n_nodes_(n_nodes),
        values_(time.num_levels() * n_nodes, 0.0) {
    if (n_nodes == 0) throw InvalidArgument("SpaceTimeField: empty grid");
  }

  /// Sample a callable signature double(t, x, y) on every (level, node).
  static SpaceTimeField from_function(
      const Grid& g, const TimeGrid& time,
      const std::function<double(double, double, double)>& fn) {
    SpaceTimeField f(time, g.num_nodes());
    for (std::size_t n = 0; n < time.num_levels(); ++n) {
      double t = time.t(n);
      auto lev = f.level(n);
      for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        auto p = g.position(i);
        lev[i] = fn(t, p[0], p[1]);
      }
    }
    return f;
  }

  const TimeGrid& time() const { return time_; }
  std::size_t n_nodes() const { return n_nodes_; }

  std::span<double> level(std::size_t n) {
    check_level(n);
    return {values_.data() + n * n_nodes_, n_nodes_};
  }
  std::span<const double> level(std::size_t n) const {
    check_level(n);
    return {values_.data() + n * n_nodes_, n_nodes_};
  }

  double& at(std::size_t level_idx, std::size_t node) {
    check_level(level_idx);
    return values_[level_idx * n_nodes_ + node];
  }
  double at(std::size_t level_idx, std::size_t node) const {
    check_level(level_idx);
    return values_[level_idx * n_nodes_ + node];
  }

  friend bool operator==(const SpaceTimeField& a, const SpaceTimeField& b) {
    return a.time_ == b.time_ && a.n_nodes_ == b.n_nodes_ && a.values_ == b.values_;
  }

 private:
  void check_level(std::size_t n) const {
    if (n >= time_.num_levels())
      throw InvalidArgument("SpaceTimeField: level out of range");
  }

  TimeGrid time_;
  std::size_t n_nodes_;
  std::vector<double> values_;
};

}  // namespace dynbc
