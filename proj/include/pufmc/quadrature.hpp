#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pufmc {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point rule via Newton iteration on P_n. Exact for polynomials of degree 2n-1.
GaussLegendreRule gauss_legendre(std::size_t n);

struct AdaptiveResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t cells = 0;
  std::size_t evaluations = 0;
};

/// Adaptive tensor-product Gauss-Legendre integration of f(x, y) over the box
/// [x0, x1] x [y0, y1].
///
/// Each cell is integrated with the n x n rule and compared with the sum over
/// its four quadrants. The cell with the largest disagreement is split until
/// the summed disagreement is below `tol`. Cell values are combined by pairwise
/// summation in creation order. Throws ConvergenceError when more than
/// `max_cells` cells would be needed.
AdaptiveResult integrate_2d(const std::function<double(double, double)>& f, double x0, double x1,
                            double y0, double y1, std::size_t nodes, double tol,
                            std::size_t max_cells = 1 << 20);

}  // namespace pufmc
