#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qbc/linalg.hpp"

namespace qbc {

enum class Cone { Psd, Box01 };
enum class SolveStatus { Optimal, InfeasibleCertificate, MaxIters };

// Small dense conic program over direct sums of Hermitian blocks: minimize a
// real linear functional subject to scalar affine equalities and per-block
// cone memberships (PSD or the operator box [0, 1]).
struct ConicProgram {
  struct Block {
    int dim;
    Cone cone;
  };
  struct Row {
    std::vector<std::pair<int, Mat>> terms;  // (block, Hermitian coefficient)
    double rhs;
  };
  struct SubblockRef {
    int block;
    int row_off;
    int col_off;
    double scale;
  };

  std::vector<Block> blocks;
  std::vector<Mat> objective;  // Hermitian coefficient per block, may be zero
  std::vector<Row> rows;

  int add_block(int dim, Cone cone);
  void set_objective(int block, const Mat& coeff);
  // Scalar equality sum_i Tr(coeff_i X_{b_i}) = rhs.
  void add_row(std::vector<std::pair<int, Mat>> terms, double rhs);
  // Hermitian-valued equality sum_i scale_i * subblock(X_{b_i}) = target,
  // expanded into target.dim^2 scalar rows.
  void add_subblock_equality(const std::vector<SubblockRef>& refs, const Mat& target);

  int total_real_dim() const;
  // Worst |<A(x),y> - <x,A*(y)>| over random probes; checks the packing maps.
  double adjoint_probe_residual(unsigned seed, int probes = 8) const;
};

struct ConicSolution {
  std::vector<Mat> blocks;  // cone-feasible iterate
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
  int iterations = 0;
};

// Scaled-space iterates from a previous solve of an identically shaped program.
struct WarmStart {
  RVec z, u;
  bool valid = false;
};

ConicSolution solve(const ConicProgram& p, double tol = 1e-8, int max_iters = 200000,
                    WarmStart* warm = nullptr);

// F(rho, sigma) as the optimum of the block-operator program; cross-checks the
// spectral fidelity.
double fidelity_sdp(const Mat& rho, const Mat& sigma, double tol = 1e-8);

}  // namespace qbc
