#pragma once

#include <string>
#include <vector>

#include "qbc/linalg.hpp"

namespace qbc {

struct Subsystem {
  std::string label;
  int dim = 0;
};

// Density operator with labeled subsystems. PSD within 1e-9, unit trace
// within 1e-9, validated on construction.
class DensityOperator {
 public:
  DensityOperator(std::vector<Subsystem> systems, Mat matrix);

  const Mat& matrix() const { return matrix_; }
  const std::vector<Subsystem>& systems() const { return systems_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  std::vector<int> dims() const;
  std::vector<std::string> labels() const;
  int index_of(const std::string& label) const;  // BadPartition if unknown

  DensityOperator marginal(const std::vector<std::string>& keep_labels) const;
  // Reorders subsystems so that `front` labels come first (in the given
  // order), the remaining labels keep their relative order.
  DensityOperator reordered(const std::vector<std::string>& front) const;

 private:
  std::vector<Subsystem> systems_;
  Mat matrix_;
};

struct ClassicalReg {
  std::string label;
  int card = 0;
};

// Classical-quantum state: a probability table over classical symbol tuples
// with one quantum block per tuple. Kept symbolic; expansion to the full
// block-diagonal matrix is exact and on demand.
class CQState {
 public:
  CQState(std::vector<ClassicalReg> classical, std::vector<Subsystem> quantum,
          std::vector<double> probs, std::vector<Mat> blocks);

  const std::vector<ClassicalReg>& classical() const { return classical_; }
  const std::vector<Subsystem>& quantum() const { return quantum_; }
  int classical_size() const { return static_cast<int>(probs_.size()); }
  int quantum_dim() const;

  double prob(int flat) const { return probs_[flat]; }
  const std::vector<double>& probs() const { return probs_; }
  const Mat& block(int flat) const { return blocks_[flat]; }

  std::vector<int> tuple_of(int flat) const;
  int flat_of(const std::vector<int>& tuple) const;

  int classical_index(const std::string& label) const;  // BadPartition if unknown
  int quantum_index(const std::string& label) const;
  bool has_classical(const std::string& label) const;
  bool has_quantum(const std::string& label) const;

  // Exact block-diagonal expansion, classical registers first then quantum.
  Mat expand() const;
  DensityOperator expand_density() const;

  CQState condition_on(const std::string& label, int symbol) const;
  CQState marginalize_classical(const std::vector<std::string>& drop) const;
  CQState marginalize_quantum(const std::vector<std::string>& drop) const;
  // Keeps exactly the given classical and quantum labels.
  CQState marginal(const std::vector<std::string>& keep_classical,
                   const std::vector<std::string>& keep_quantum) const;

  // When no classical registers remain, the single block as a DensityOperator.
  DensityOperator to_density() const;

 private:
  std::vector<ClassicalReg> classical_;
  std::vector<Subsystem> quantum_;
  std::vector<double> probs_;
  std::vector<Mat> blocks_;
};

// Kraus representation of a CPTP map, with an output subsystem split for
// broadcast channels (out_dims = [d_B, d_C]).
class KrausChannel {
 public:
  KrausChannel(int in_dim, std::vector<int> out_dims, std::vector<Mat> kraus_ops);

  int in_dim() const { return in_dim_; }
  const std::vector<int>& out_dims() const { return out_dims_; }
  int out_dim() const;
  const std::vector<Mat>& kraus_ops() const { return kraus_; }

  Mat apply(const Mat& rho) const;

 private:
  int in_dim_;
  std::vector<int> out_dims_;
  std::vector<Mat> kraus_;
};

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho,
                              const std::vector<std::string>& out_labels = {"B", "C"});

// p(u,v) p(x|v) with a modulator x -> rho_x^A feeding a broadcast channel.
class BroadcastChannelModel {
 public:
  BroadcastChannelModel(RMat p_uv, RMat p_x_given_v, std::vector<Mat> modulator,
                        KrausChannel channel);

  int card_u() const { return static_cast<int>(p_uv_.rows()); }
  int card_v() const { return static_cast<int>(p_uv_.cols()); }
  int card_x() const { return static_cast<int>(p_x_given_v_.cols()); }
  const RMat& p_uv() const { return p_uv_; }
  const RMat& p_x_given_v() const { return p_x_given_v_; }
  const std::vector<Mat>& modulator() const { return modulator_; }
  const KrausChannel& channel() const { return channel_; }

  // rho^{UVXBC}: classical (U,V,X), quantum (B,C).
  CQState induced_state() const;

 private:
  RMat p_uv_;
  RMat p_x_given_v_;
  std::vector<Mat> modulator_;
  KrausChannel channel_;
};

}  // namespace qbc
