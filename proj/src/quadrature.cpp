#include "pufmc/quadrature.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <queue>
#include <string>

#include "pufmc/errors.hpp"

namespace pufmc {

GaussLegendreRule gauss_legendre(std::size_t n) {
  if (n == 0) throw ConfigError("Gauss-Legendre rule needs at least one node");
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) - 1.0) * z * p1 - (static_cast<double>(j) - 1.0) * p2) /
             static_cast<double>(j);
      }
      dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace {

struct Cell {
  double x0, x1, y0, y1;
  double value;     // refined (four-quadrant) estimate
  double error;     // |refined - single-cell|
  double q[4];      // quadrant values
  std::size_t id;
};

struct ByError {
  bool operator()(const Cell* a, const Cell* b) const {
    if (a->error != b->error) return a->error < b->error;
    return a->id > b->id;
  }
};

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

}  // namespace

AdaptiveResult integrate_2d(const std::function<double(double, double)>& f, double x0, double x1,
                            double y0, double y1, std::size_t nodes, double tol, std::size_t max_cells) {
  if (!(tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (!(x1 > x0) || !(y1 > y0)) throw ConfigError("quadrature box must have positive extent");
  const auto rule = gauss_legendre(nodes);
  AdaptiveResult result;

  auto box = [&](double a0, double a1, double b0, double b1) {
    const double hx = 0.5 * (a1 - a0);
    const double cx = 0.5 * (a1 + a0);
    const double hy = 0.5 * (b1 - b0);
    const double cy = 0.5 * (b1 + b0);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      double row = 0.0;
      const double x = cx + hx * rule.nodes[i];
      for (std::size_t j = 0; j < nodes; ++j) row += rule.weights[j] * f(x, cy + hy * rule.nodes[j]);
      s += rule.weights[i] * row;
    }
    result.evaluations += nodes * nodes;
    return s * hx * hy;
  };

  std::vector<std::unique_ptr<Cell>> cells;
  auto make = [&](double a0, double a1, double b0, double b1, double coarse) {
    auto c = std::make_unique<Cell>();
    *c = Cell{a0, a1, b0, b1, 0.0, 0.0, {0, 0, 0, 0}, cells.size()};
    const double mx = 0.5 * (a0 + a1);
    const double my = 0.5 * (b0 + b1);
    c->q[0] = box(a0, mx, b0, my);
    c->q[1] = box(mx, a1, b0, my);
    c->q[2] = box(a0, mx, my, b1);
    c->q[3] = box(mx, a1, my, b1);
    c->value = (c->q[0] + c->q[1]) + (c->q[2] + c->q[3]);
    c->error = std::abs(c->value - coarse);
    cells.push_back(std::move(c));
    return cells.back().get();
  };

  std::priority_queue<Cell*, std::vector<Cell*>, ByError> queue;
  std::vector<char> active;
  queue.push(make(x0, x1, y0, y1, box(x0, x1, y0, y1)));
  active.push_back(1);
  double total_error = queue.top()->error;

  while (total_error > tol) {
    if (cells.size() + 4 > max_cells) {
      throw ConvergenceError("2-D quadrature did not reach tolerance " + std::to_string(tol) + " within " +
                             std::to_string(max_cells) + " cells");
    }
    Cell* worst = queue.top();
    queue.pop();
    active[worst->id] = 0;
    total_error -= worst->error;
    const double mx = 0.5 * (worst->x0 + worst->x1);
    const double my = 0.5 * (worst->y0 + worst->y1);
    const double bounds[4][4] = {{worst->x0, mx, worst->y0, my},
                                 {mx, worst->x1, worst->y0, my},
                                 {worst->x0, mx, my, worst->y1},
                                 {mx, worst->x1, my, worst->y1}};
    const double q[4] = {worst->q[0], worst->q[1], worst->q[2], worst->q[3]};
    for (int i = 0; i < 4; ++i) {
      Cell* child = make(bounds[i][0], bounds[i][1], bounds[i][2], bounds[i][3], q[i]);
      active.push_back(1);
      total_error += child->error;
      queue.push(child);
    }
    // Guard the running sum against drift from repeated add/subtract.
    if (cells.size() % 4096 == 1) {
      total_error = 0.0;
      for (const auto& c : cells) {
        if (active[c->id]) total_error += c->error;
      }
    }
  }

  std::vector<double> values;
  for (const auto& c : cells) {
    if (active[c->id]) {
      values.push_back(c->value);
      result.error_estimate += c->error;
    }
  }
  result.value = pairwise_sum(values, 0, values.size());
  result.cells = values.size();
  return result;
}

}  // namespace pufmc
