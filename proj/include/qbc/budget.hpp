#pragma once

#include <cmath>

#include "qbc/errors.hpp"

namespace qbc {

// Smoothing / slack parameters of the one-shot achievability region, with the
// stated validity window.
struct EpsilonBudget {
  double eps_prime = 0.0;   // test error budget
  double eps_dprime = 0.0;  // smoothing budget of the covering steps
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double eta = 0.0;

  void validate() const {
    const double w = 3.0 * eps_prime + 2.0 * std::sqrt(eps_prime);
    if (!(eps_prime > 0.0) || !(w > 0.0 && w < 1.0))
      throw_validation("OutOfWindow", "need 0 < 3e' + 2*sqrt(e') < 1");
    if (!(delta1 > 0.0 && delta1 < eps_prime) || !(delta2 > 0.0 && delta2 < eps_prime) ||
        !(delta3 > 0.0 && delta3 < eps_prime))
      throw_validation("OutOfWindow", "need 0 < delta_i < e'");
    if (!(eps_dprime > 0.0 && eps_dprime < std::sqrt(2.0) - 1.0))
      throw_validation("OutOfWindow", "need 0 < e'' < sqrt(2)-1");
    if (!(eta > 0.0 && eta < eps_dprime * eps_dprime))
      throw_validation("OutOfWindow", "need 0 < eta < e''^2");
  }
};

}  // namespace qbc
