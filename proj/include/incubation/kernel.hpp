#pragma once

#include "error.hpp"

#include <cmath>

namespace incubation {

enum class KernelFamily
{
  triweight
};

struct KernelSpec
{
  KernelFamily family = KernelFamily::triweight;
  double bandwidth = 1.0;

  void validate() const
  {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
      throw ValidationError("bandwidth must be positive");
  }
};

//! Triweight kernel 35/32 (1 - u^2)^3 on [-1, 1].
constexpr double kernel(double u) noexcept
{
  if (u <= -1.0 || u >= 1.0)
    return 0.0;
  const double v = 1.0 - u * u;
  return 35.0 / 32.0 * v * v * v;
}

//! Integrated triweight kernel, the distribution function of K.
constexpr double kernel_integral(double x) noexcept
{
  if (x <= -1.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  const double x2 = x * x;
  // antiderivative of 1 - 3u^2 + 3u^4 - u^6
  const double poly = x * (1.0 + x2 * (-1.0 + x2 * (3.0 / 5.0 - x2 / 7.0)));
  return 0.5 + 35.0 / 32.0 * poly;
}

constexpr double kernel_derivative(double u) noexcept
{
  if (u <= -1.0 || u >= 1.0)
    return 0.0;
  const double v = 1.0 - u * u;
  return -105.0 / 16.0 * u * v * v;
}

//! K_h(x) = K(x/h)/h and its derivative in x.
constexpr double scaled_kernel(double x, double h) noexcept
{
  return kernel(x / h) / h;
}

constexpr double scaled_kernel_derivative(double x, double h) noexcept
{
  return kernel_derivative(x / h) / (h * h);
}

} // namespace incubation
