#ifndef BSYNTH_TESTS_SUPPORT_HPP
#define BSYNTH_TESTS_SUPPORT_HPP

#include <Eigen/Dense>

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bsynth/csv.hpp"
#include "bsynth/panel.hpp"

namespace testing_support {

/// Panel with units u1.., times 1..T and the given outcomes; nothing masked.
inline bsynth::PanelData make_panel(const Eigen::MatrixXd& y) {
  bsynth::PanelData p;
  for (Eigen::Index j = 0; j < y.rows(); ++j) p.units.push_back("u" + std::to_string(j + 1));
  for (Eigen::Index t = 0; t < y.cols(); ++t) p.times.push_back(std::to_string(t + 1));
  p.outcome = y;
  p.mask = bsynth::Mask::Constant(y.rows(), y.cols(), false);
  return p;
}

inline bsynth::csv::Table table(const std::string& text) {
  std::istringstream in(text);
  return bsynth::csv::parse_table(in);
}

/// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    x(i) = xi + h;
    const double up = f(x);
    x(i) = xi - h;
    const double down = f(x);
    x(i) = xi;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace testing_support

#endif  // BSYNTH_TESTS_SUPPORT_HPP
