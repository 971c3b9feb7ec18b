#pragma once

#include "qbc/states.hpp"

namespace qbc {

// All entropic quantities are in bits.

double von_neumann_entropy(const Mat& rho);
double von_neumann_entropy(const CQState& s);  // H(p) + sum_t p(t) S(block_t)

// Tr(rho log rho - rho log sigma) on supp(sigma); +inf with the flag set when
// rho has weight outside supp(sigma).
double relative_entropy(const Mat& rho, const Mat& sigma, bool* support_violation = nullptr);

// Tr rho (log rho - log sigma)^2, both logs on supp.
double relative_entropy_variance(const Mat& rho, const Mat& sigma,
                                 bool* support_violation = nullptr);

double binary_entropy(double eps);

double trace_norm(const Mat& m);  // sum of |eigenvalues| of the Hermitian part
double trace_distance(const Mat& rho, const Mat& sigma);
// ||sqrt(rho) sqrt(sigma)||_1; accepts PSD (possibly subnormalized) inputs.
double fidelity(const Mat& rho, const Mat& sigma);
double purified_distance(const Mat& rho, const Mat& sigma);

// I(A;B) = S(A) + S(B) - S(AB) on the marginal keeping A ∪ B.
double mutual_information(const DensityOperator& s, const std::vector<std::string>& a,
                          const std::vector<std::string>& b);
double mutual_information(const CQState& s, const std::vector<std::string>& a,
                          const std::vector<std::string>& b);

// I(A;B|C) = S(AC) + S(BC) - S(ABC) - S(C).
double conditional_mutual_information(const DensityOperator& s, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b,
                                      const std::vector<std::string>& given);
double conditional_mutual_information(const CQState& s, const std::vector<std::string>& a,
                                      const std::vector<std::string>& b,
                                      const std::vector<std::string>& given);

}  // namespace qbc
