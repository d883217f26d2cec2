#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of them calls into the library code they are compared against.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ftxl/player_vectors.hpp"
#include "ftxl/regularizers.hpp"

namespace oracle {

using ftxl::MixedProfile;
using ftxl::PureProfile;
using ftxl::Regularizer;

/// <y, x> - sum theta(x_a), evaluated term by term.
inline double objective(const Regularizer& reg, const std::vector< double >& y, const std::vector< double >& x)
{
   double value = 0.0;
   for(std::size_t k = 0; k < x.size(); ++k) {
      value += y[k] * x[k] - reg.theta(x[k]);
   }
   return value;
}

/// Maximizer of the regularized objective over the 1-simplex on a 1e-6 grid.
inline std::vector< double > grid_argmax_2(const Regularizer& reg, const std::vector< double >& y)
{
   constexpr int steps = 1000000;
   double best = -1e300;
   double best_x = 0.0;
   for(int k = 0; k <= steps; ++k) {
      const double x = static_cast< double >(k) / steps;
      const double v = objective(reg, y, {x, 1.0 - x});
      if(v > best) {
         best = v;
         best_x = x;
      }
   }
   return {best_x, 1.0 - best_x};
}

/// Same on the 2-simplex, coarse-to-fine: a 1e-2 grid, then successive 10x
/// refinements in a +-3-cell box around the incumbent, down to spacing 1e-6.
/// The objective is strictly concave, so the incumbent cell always holds the maximizer.
inline std::vector< double > grid_argmax_3(const Regularizer& reg, const std::vector< double >& y)
{
   double h = 1e-2;
   double c0 = 1.0 / 3.0;
   double c1 = 1.0 / 3.0;
   double lo0 = 0.0, hi0 = 1.0, lo1 = 0.0, hi1 = 1.0;
   for(int level = 0; level < 5; ++level) {
      double best = -1e300;
      double b0 = c0, b1 = c1;
      const auto n0 = static_cast< long >(std::llround((hi0 - lo0) / h));
      const auto n1 = static_cast< long >(std::llround((hi1 - lo1) / h));
      for(long i = 0; i <= n0; ++i) {
         const double x0 = lo0 + static_cast< double >(i) * h;
         for(long j = 0; j <= n1; ++j) {
            const double x1 = lo1 + static_cast< double >(j) * h;
            const double x2 = 1.0 - x0 - x1;
            if(x0 < 0.0 or x1 < 0.0 or x2 < -1e-15) {
               continue;
            }
            const double v = objective(reg, y, {x0, x1, std::max(x2, 0.0)});
            if(v > best) {
               best = v;
               b0 = x0;
               b1 = x1;
            }
         }
      }
      c0 = b0;
      c1 = b1;
      lo0 = std::max(0.0, c0 - 3 * h);
      hi0 = std::min(1.0, c0 + 3 * h);
      lo1 = std::max(0.0, c1 - 3 * h);
      hi1 = std::min(1.0, c1 + 3 * h);
      h /= 10.0;
   }
   return {c0, c1, 1.0 - c0 - c1};
}


/// Left side of the product-sum identity, summed term by term.
inline double product_sum(double a, int m)
{
   double total = 0.0;
   for(int k = 1; k <= m - 1; ++k) {
      double prod = 1.0;
      for(int l = 0; l <= k - 1; ++l) {
         prod *= 1.0 - a / (m - l);
      }
      total += prod;
   }
   return total;
}

/// Right side of the same identity.
inline double product_sum_closed_form(double a, int m)
{
   double prod = 1.0;
   for(int l = 1; l <= m; ++l) {
      prod *= 1.0 - a / l;
   }
   return (m - a) / (1.0 + a) - prod / (1.0 + a);
}

/// Row player's matrix of the 3x3 zero-sum game; the column player gets its negation.
inline const std::vector< std::vector< double > >& zero_sum_matrix()
{
   static const std::vector< std::vector< double > > m = {{2, 1, 2}, {-2, -1, -2}, {-2, -1, -2}};
   return m;
}

/// Payoff vectors of the 3x3 zero-sum game by explicit matrix-vector products.
inline std::vector< std::vector< double > > zero_sum_field(const MixedProfile& x)
{
   const auto& m = zero_sum_matrix();
   std::vector< std::vector< double > > v(2, std::vector< double >(3, 0.0));
   for(std::size_t a = 0; a < 3; ++a) {
      for(std::size_t b = 0; b < 3; ++b) {
         v[0][a] += m[a][b] * x[1][b];
         v[1][b] -= m[a][b] * x[0][a];
      }
   }
   return v;
}

/// Probability of a pure profile under independent mixing.
inline double profile_probability(const MixedProfile& x, const PureProfile& a)
{
   double p = 1.0;
   for(std::size_t i = 0; i < a.size(); ++i) {
      p *= x[i][a[i]];
   }
   return p;
}

/// Score-gap drop after n undamped momentum steps of a unit payoff gap, by the
/// double sum eta^2 sum_{k<=n} sum_{j<=k} 1 accumulated step by step.
inline std::vector< double > double_sum_gap_drops(double eta, int n)
{
   std::vector< double > drops(static_cast< std::size_t >(n));
   double inner = 0.0;
   double outer = 0.0;
   for(int k = 1; k <= n; ++k) {
      inner += 1.0;
      outer += inner;
      drops[static_cast< std::size_t >(k - 1)] = eta * eta * outer;
   }
   return drops;
}

}  // namespace oracle
