#pragma once

#include <random>

#include "qbc/linalg.hpp"

namespace qbc {

using Rng = std::mt19937_64;

Mat random_gaussian(Rng& rng, int rows, int cols);
Mat random_unitary(Rng& rng, int d);
Mat random_isometry(Rng& rng, int rows, int cols);  // rows >= cols, V†V = 1

// Haar-ish mixed state from a Gaussian purification of the given rank.
Mat random_density(Rng& rng, int d, int rank = 0);

// Density matrix bounded away from singularity: (1-floor)*random + floor*I/d.
Mat random_full_rank_density(Rng& rng, int d, double floor = 0.05);

Mat random_projector(Rng& rng, int d, int rank);

// Kraus family of a random channel d_in -> d_out with environment dimension env.
std::vector<Mat> random_kraus(Rng& rng, int d_in, int d_out, int env);

RVec random_pmf(Rng& rng, int n, double floor = 0.0);

}  // namespace qbc
