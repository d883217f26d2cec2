#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ftxl/errors.hpp"

namespace ftxl {

/// Least-squares fit of y against a set of regressors (intercept included by caller).
struct LeastSquaresFit {
   std::vector< double > coefficients;
   double r_squared = 0.0;
};

/// Fits y ~ sum_k c_k * basis_k(x) by column-pivoting QR.
inline LeastSquaresFit least_squares(std::span< const double > xs, std::span< const double > ys,
                                     const std::vector< std::function< double(double) > >& basis)
{
   if(xs.size() != ys.size()) {
      throw ShapeMismatch("fit inputs differ in length");
   }
   if(xs.size() < basis.size()) {
      throw FitRefused("not enough points for the requested fit");
   }
   const auto rows = static_cast< Eigen::Index >(xs.size());
   const auto cols = static_cast< Eigen::Index >(basis.size());
   Eigen::MatrixXd design(rows, cols);
   Eigen::VectorXd target(rows);
   for(Eigen::Index r = 0; r < rows; ++r) {
      for(Eigen::Index c = 0; c < cols; ++c) {
         design(r, c) = basis[static_cast< std::size_t >(c)](xs[static_cast< std::size_t >(r)]);
      }
      target(r) = ys[static_cast< std::size_t >(r)];
   }
   const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
   const Eigen::VectorXd residual = target - design * coef;
   const double mean = target.mean();
   const double total = (target.array() - mean).square().sum();
   LeastSquaresFit fit;
   fit.coefficients.assign(coef.data(), coef.data() + coef.size());
   fit.r_squared = total > 0.0 ? 1.0 - residual.squaredNorm() / total : 1.0;
   return fit;
}

struct LineFit {
   double slope = 0.0;
   double intercept = 0.0;
   double r_squared = 0.0;
};

inline LineFit fit_line(std::span< const double > xs, std::span< const double > ys)
{
   const auto fit = least_squares(xs, ys, {[](double) { return 1.0; }, [](double x) { return x; }});
   return {fit.coefficients[1], fit.coefficients[0], fit.r_squared};
}

/// Index range [begin, end) of the post-transient window: the last `fraction` of
/// the samples recorded before the series first drops below `floor`.
struct FitWindow {
   std::size_t begin = 0;
   std::size_t end = 0;
   bool underflow_warning = false;
};

inline FitWindow post_transient_window(std::span< const double > distances, double floor = 1e-14,
                                       double fraction = 0.5, std::size_t min_points = 20)
{
   std::size_t end = 0;
   while(end < distances.size() and distances[end] >= floor and std::isfinite(distances[end])) {
      ++end;
   }
   const auto width = static_cast< std::size_t >(std::ceil(fraction * static_cast< double >(end)));
   FitWindow window{end - width, end, false};
   if(width < min_points) {
      window.begin = end > min_points ? end - min_points : 0;
      window.underflow_warning = true;
   }
   if(window.end - window.begin < 3) {
      throw FitRefused("fewer than 3 samples above the distance floor");
   }
   return window;
}

}  // namespace ftxl
