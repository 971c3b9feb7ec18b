#pragma once

#include <doctest.h>

#include "qbc/divergences.hpp"
#include "qbc/modelzoo.hpp"
#include "qbc/sampling.hpp"
#include "qbc/states.hpp"

namespace qbc::testing {

inline Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

inline Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline Mat ketbra(int i, int d) {
  Mat m = Mat::Zero(d, d);
  m(i, i) = 1.0;
  return m;
}

inline Mat bell_state() {
  Vec v = Vec::Zero(4);
  v(0) = v(3) = 1.0 / std::sqrt(2.0);
  return v * v.adjoint();
}

// Binary symmetric-ish broadcast p(y,z|x) with separate flip rates.
inline BroadcastChannelModel binary_classical_model(double flip_y, double flip_z) {
  RMat p_uv(2, 2);
  p_uv << 0.3, 0.2, 0.25, 0.25;
  RMat p_xv(2, 2);
  p_xv << 0.9, 0.1, 0.2, 0.8;
  std::vector<RMat> pyz(2, RMat(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int z = 0; z < 2; ++z) {
        const double py = (y == x) ? 1.0 - flip_y : flip_y;
        const double pz = (z == x) ? 1.0 - flip_z : flip_z;
        pyz[x](y, z) = py * pz;
      }
  return classical_broadcast_model(p_uv, p_xv, pyz, 2, 2);
}

// Small genuinely quantum broadcast model on qubits.
inline BroadcastChannelModel tiny_quantum_model(unsigned seed) {
  Rng rng(seed);
  return random_broadcast_model(rng, 2, 2, 2, 2, 2, 2, 2);
}

}  // namespace qbc::testing
