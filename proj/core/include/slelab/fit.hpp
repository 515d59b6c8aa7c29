#pragma once

#include <span>

namespace slelab {

/// Ordinary least-squares fit y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double residual = 0.0;  // root-mean-square residual
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace slelab
