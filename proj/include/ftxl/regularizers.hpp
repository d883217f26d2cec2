#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftxl/errors.hpp"
#include "ftxl/player_vectors.hpp"

namespace ftxl {

enum class RegularizerKind { entropic, decomposable };

/// Smallest probability any mirror-map output is allowed to carry.
inline constexpr double probability_floor = 1e-300;

/// Decomposable regularizer h(x) = sum_a theta(x_a) with theta strongly convex on
/// (0, 1] and theta'(0+) = -inf.
class Regularizer {
  public:
   using ScalarFn = std::function< double(double) >;

   static Regularizer entropic()
   {
      Regularizer reg;
      reg.kind_ = RegularizerKind::entropic;
      reg.name_ = "entropic";
      reg.theta_ = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
      reg.derivative_ = [](double x) { return 1.0 + std::log(x); };
      reg.second_derivative_ = [](double x) { return 1.0 / x; };
      reg.derivative_inverse_ = [](double t) { return std::exp(t - 1.0); };
      return reg;
   }

   /// theta(x) = -x^q / (q (1 - q)), q in (0, 1); q = 1/2 gives -4 sqrt(x).
   static Regularizer tsallis(double q)
   {
      if(not(q > 0.0 and q < 1.0)) {
         throw InvalidConfiguration("tsallis exponent must lie in (0, 1)");
      }
      Regularizer reg;
      reg.name_ = "tsallis:" + std::to_string(q);
      const double scale = q * (1.0 - q);
      reg.theta_ = [q, scale](double x) { return -std::pow(x, q) / scale; };
      reg.derivative_ = [q](double x) { return -std::pow(x, q - 1.0) / (1.0 - q); };
      reg.second_derivative_ = [q](double x) { return std::pow(x, q - 2.0); };
      reg.derivative_inverse_ = [q](double t) { return std::pow(-(1.0 - q) * t, 1.0 / (q - 1.0)); };
      return reg;
   }

   /// General decomposable regularizer; without an inverse of theta', the inverse
   /// is computed by bisection.
   static Regularizer decomposable(std::string name, ScalarFn theta, ScalarFn derivative,
                                   ScalarFn second_derivative,
                                   std::optional< ScalarFn > derivative_inverse = std::nullopt)
   {
      Regularizer reg;
      reg.name_ = std::move(name);
      reg.theta_ = std::move(theta);
      reg.derivative_ = std::move(derivative);
      reg.second_derivative_ = std::move(second_derivative);
      if(derivative_inverse) {
         reg.derivative_inverse_ = std::move(*derivative_inverse);
      }
      reg.validate();
      return reg;
   }

   RegularizerKind kind() const noexcept { return kind_; }
   const std::string& name() const noexcept { return name_; }
   bool has_closed_form_inverse() const noexcept { return static_cast< bool >(derivative_inverse_); }

   double theta(double x) const { return theta_(x); }
   double derivative(double x) const { return derivative_(x); }
   double second_derivative(double x) const { return second_derivative_(x); }

   /// (theta')^{-1} on (-inf, theta'(1)]; outputs below the probability floor are clamped.
   double derivative_inverse(double t) const
   {
      const double top = derivative_(1.0);
      if(not(t <= top)) {
         throw DomainError("theta' inverse requested at " + std::to_string(t)
                           + ", above theta'(1) = " + std::to_string(top));
      }
      if(derivative_inverse_) {
         return std::clamp(derivative_inverse_(t), probability_floor, 1.0);
      }
      return bisect_inverse(t);
   }

   /// Spot-checks theta'' > 0 on a grid and theta'(1e-300) < -100 (the entropic value is about -690).
   void validate() const
   {
      for(int k = 1; k <= 100; ++k) {
         const double x = k / 100.0;
         if(not(second_derivative_(x) > 0.0)) {
            throw InvalidConfiguration(name_ + ": theta'' must be positive on (0, 1]");
         }
      }
      if(not(derivative_(1e-300) < -100.0)) {
         throw InvalidConfiguration(name_ + ": theta' must diverge to -inf at 0");
      }
   }

  private:
   Regularizer() = default;

   double bisect_inverse(double t) const
   {
      double lo = std::log(probability_floor);
      double hi = 0.0;
      if(derivative_(std::exp(lo)) >= t) {
         return probability_floor;
      }
      for(int it = 0; it < 200 and hi - lo > 0.0; ++it) {
         const double mid = 0.5 * (lo + hi);
         if(mid == lo or mid == hi) {
            break;
         }
         if(derivative_(std::exp(mid)) < t) {
            lo = mid;
         } else {
            hi = mid;
         }
      }
      return std::exp(0.5 * (lo + hi));
   }

   RegularizerKind kind_ = RegularizerKind::decomposable;
   std::string name_;
   ScalarFn theta_;
   ScalarFn derivative_;
   ScalarFn second_derivative_;
   ScalarFn derivative_inverse_;
};

/// Parses "entropic" or "tsallis:<q>".
inline Regularizer parse_regularizer(std::string_view spec)
{
   if(spec == "entropic") {
      return Regularizer::entropic();
   }
   constexpr std::string_view prefix = "tsallis:";
   if(spec.starts_with(prefix)) {
      const auto digits = spec.substr(prefix.size());
      double q = 0.0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), q);
      if(ec != std::errc{} or ptr != digits.data() + digits.size()) {
         throw InvalidConfiguration("bad tsallis exponent '" + std::string(digits) + "'");
      }
      return Regularizer::tsallis(q);
   }
   throw InvalidConfiguration("unknown regularizer '" + std::string(spec) + "'");
}

/// Softmax, computed after subtracting the maximum score.
inline std::vector< double > logit_map(std::span< const double > y)
{
   if(y.empty()) {
      throw ShapeMismatch("logit map of an empty score vector");
   }
   const double top = *std::ranges::max_element(y);
   std::vector< double > x(y.size());
   double total = 0.0;
   for(std::size_t k = 0; k < y.size(); ++k) {
      x[k] = std::exp(y[k] - top);
      total += x[k];
   }
   for(auto& v : x) {
      v /= total;
   }
   return x;
}

namespace detail {

/// (theta')^{-1} extended above theta'(1) by a strictly increasing line, so the
/// KKT sum stays monotone over the whole bracket.
inline double extended_choice(const Regularizer& reg, double t, double top)
{
   if(t <= top) {
      return reg.derivative_inverse(t);
   }
   return 1.0 + (t - top);
}

}  // namespace detail

/// Regularized best response argmax_x { <y, x> - sum theta(x_a) } over the simplex,
/// found from the KKT conditions y_a = theta'(x_a) + lambda by bisection on lambda.
inline std::vector< double > kkt_mirror_map(const Regularizer& reg, std::span< const double > y)
{
   if(y.empty()) {
      throw ShapeMismatch("mirror map of an empty score vector");
   }
   const double shift = *std::ranges::max_element(y);
   std::vector< double > z(y.size());
   std::ranges::transform(y, z.begin(), [shift](double v) { return v - shift; });
   const double top = reg.derivative(1.0);
   const double lowest = *std::ranges::min_element(z);
   double lo = lowest - top - 1.0;
   double hi = 0.0 - reg.derivative(1.0 / static_cast< double >(z.size())) + 1.0;

   auto mass = [&](double lambda) {
      double total = 0.0;
      for(double v : z) {
         total += detail::extended_choice(reg, v - lambda, top);
      }
      return total;
   };

   double lambda = 0.5 * (lo + hi);
   double residual = mass(lambda) - 1.0;
   for(int it = 0; it < 200 and std::abs(residual) > simplex_tolerance; ++it) {
      if(residual > 0.0) {
         lo = lambda;
      } else {
         hi = lambda;
      }
      const double mid = 0.5 * (lo + hi);
      if(mid == lambda) {
         break;
      }
      lambda = mid;
      residual = mass(lambda) - 1.0;
   }
   if(std::abs(residual) > simplex_tolerance) {
      throw NumericalFailure("KKT multiplier bisection did not converge", residual);
   }
   std::vector< double > x(z.size());
   double total = 0.0;
   for(std::size_t k = 0; k < z.size(); ++k) {
      x[k] = std::max(detail::extended_choice(reg, z[k] - lambda, top), probability_floor);
      total += x[k];
   }
   for(auto& v : x) {
      v /= total;
   }
   return x;
}

/// Mirror map: closed-form logit for the entropic regularizer, KKT solve otherwise.
inline std::vector< double > mirror_map(const Regularizer& reg, std::span< const double > y)
{
   if(reg.kind() == RegularizerKind::entropic) {
      return logit_map(y);
   }
   return kkt_mirror_map(reg, y);
}

/// <y, x> - sum_a theta(x_a).
inline double regularized_objective(const Regularizer& reg, std::span< const double > y,
                                    std::span< const double > x)
{
   double value = dot(y, x);
   for(double v : x) {
      value -= reg.theta(v);
   }
   return value;
}

/// Upper bound on ||Q(y_i) - x*_i||_inf for each player:
/// sum over a != a* of (theta')^{-1}(theta'(1) + y_a - y_{a*}).
inline std::vector< double > distance_bound(const Regularizer& reg, const ScoreVector& y,
                                            const PureProfile& eq)
{
   if(y.num_players() != eq.size()) {
      throw ShapeMismatch("scores and equilibrium have different player counts");
   }
   const double top = reg.derivative(1.0);
   std::vector< double > bound(eq.size(), 0.0);
   for(std::size_t i = 0; i < eq.size(); ++i) {
      const auto yi = y[i];
      if(eq[i] >= yi.size()) {
         throw InvalidProfile("equilibrium action out of range");
      }
      for(std::size_t k = 0; k < yi.size(); ++k) {
         if(k == eq[i]) {
            continue;
         }
         const double gap = yi[k] - yi[eq[i]];
         if(gap > 0.0) {
            throw DomainError("score gap " + std::to_string(gap)
                              + " is positive; the bound needs the equilibrium score to lead");
         }
         if(reg.kind() == RegularizerKind::entropic) {
            bound[i] += std::exp(gap);
         } else {
            bound[i] += reg.derivative_inverse(top + gap);
         }
      }
   }
   return bound;
}

}  // namespace ftxl
