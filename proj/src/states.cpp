#include "qbc/states.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace qbc {

namespace {

constexpr double kStateTol = 1e-9;

void check_labels_distinct(const std::vector<std::string>& labels) {
  std::set<std::string> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second) throw_validation("BadPartition", "duplicate label " + l);
}

}  // namespace

DensityOperator::DensityOperator(std::vector<Subsystem> systems, Mat matrix)
    : systems_(std::move(systems)), matrix_(std::move(matrix)) {
  int prod = 1;
  std::vector<std::string> labels;
  for (const auto& s : systems_) {
    if (s.dim <= 0) throw_validation("DimMismatch", "subsystem dimension must be positive");
    prod *= s.dim;
    labels.push_back(s.label);
  }
  check_labels_distinct(labels);
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != prod)
    throw_validation("DimMismatch", "matrix dimension does not match subsystem dims");
  if (!all_finite(matrix_)) throw_validation("NonFinite", "matrix contains NaN or Inf");
  if (asymmetry(matrix_) > kStateTol) throw_validation("NonHermitian", "density matrix not Hermitian");
  if (std::abs(trace_real(matrix_) - 1.0) > kStateTol)
    throw_validation("NotUnitTrace", "trace differs from 1 by more than 1e-9");
  if (min_eigenvalue(hermitian_part(matrix_)) < -kStateTol)
    throw_validation("NegativeEigenvalue", "density matrix not PSD within 1e-9");
  matrix_ = hermitian_part(matrix_);
}

std::vector<int> DensityOperator::dims() const {
  std::vector<int> d;
  for (const auto& s : systems_) d.push_back(s.dim);
  return d;
}

std::vector<std::string> DensityOperator::labels() const {
  std::vector<std::string> l;
  for (const auto& s : systems_) l.push_back(s.label);
  return l;
}

int DensityOperator::index_of(const std::string& label) const {
  for (size_t i = 0; i < systems_.size(); ++i)
    if (systems_[i].label == label) return static_cast<int>(i);
  throw_validation("BadPartition", "unknown subsystem label " + label);
}

DensityOperator DensityOperator::marginal(const std::vector<std::string>& keep_labels) const {
  std::vector<int> keep;
  for (const auto& l : keep_labels) keep.push_back(index_of(l));
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  Mat reduced = partial_trace(matrix_, dims(), sorted);
  std::vector<Subsystem> subs;
  for (int k : sorted) subs.push_back(systems_[k]);
  DensityOperator out(subs, reduced);
  return out.reordered(keep_labels);
}

DensityOperator DensityOperator::reordered(const std::vector<std::string>& front) const {
  std::vector<int> order;
  for (const auto& l : front) order.push_back(index_of(l));
  for (size_t i = 0; i < systems_.size(); ++i)
    if (std::find(order.begin(), order.end(), static_cast<int>(i)) == order.end())
      order.push_back(static_cast<int>(i));
  Mat m = permute_subsystems(matrix_, dims(), order);
  std::vector<Subsystem> subs;
  for (int k : order) subs.push_back(systems_[k]);
  return DensityOperator(subs, m);
}

CQState::CQState(std::vector<ClassicalReg> classical, std::vector<Subsystem> quantum,
                 std::vector<double> probs, std::vector<Mat> blocks)
    : classical_(std::move(classical)),
      quantum_(std::move(quantum)),
      probs_(std::move(probs)),
      blocks_(std::move(blocks)) {
  int csize = 1;
  std::vector<std::string> labels;
  for (const auto& r : classical_) {
    if (r.card <= 0) throw_validation("DimMismatch", "classical cardinality must be positive");
    csize *= r.card;
    labels.push_back(r.label);
  }
  int qdim = 1;
  for (const auto& s : quantum_) {
    if (s.dim <= 0) throw_validation("DimMismatch", "quantum dimension must be positive");
    qdim *= s.dim;
    labels.push_back(s.label);
  }
  check_labels_distinct(labels);
  if (static_cast<int>(probs_.size()) != csize)
    throw_validation("DimMismatch", "probability table size mismatch");
  if (blocks_.size() != probs_.size()) throw_validation("DimMismatch", "block table size mismatch");

  double total = 0.0;
  for (double p : probs_) {
    if (p < -kStateTol) throw_validation("NegativeProbability", "negative classical weight");
    total += p;
  }
  if (std::abs(total - 1.0) > kStateTol)
    throw_validation("NotNormalized", "classical weights sum differs from 1 by more than 1e-9");
  for (size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].rows() != qdim || blocks_[i].cols() != qdim)
      throw_validation("DimMismatch", "block dimension does not match quantum dims");
    if (probs_[i] <= 0) continue;  // blocks at zero-weight symbols are unconstrained
    if (std::abs(trace_real(blocks_[i]) - 1.0) > kStateTol)
      throw_validation("NotUnitTrace", "block trace differs from 1 by more than 1e-9");
    if (min_eigenvalue(hermitian_part(blocks_[i])) < -kStateTol)
      throw_validation("NegativeEigenvalue", "block not PSD within 1e-9");
  }
}

int CQState::quantum_dim() const {
  int d = 1;
  for (const auto& s : quantum_) d *= s.dim;
  return d;
}

std::vector<int> CQState::tuple_of(int flat) const {
  std::vector<int> t(classical_.size());
  for (int k = static_cast<int>(classical_.size()) - 1; k >= 0; --k) {
    t[k] = flat % classical_[k].card;
    flat /= classical_[k].card;
  }
  return t;
}

int CQState::flat_of(const std::vector<int>& tuple) const {
  if (tuple.size() != classical_.size()) throw_validation("DimMismatch", "tuple length mismatch");
  int f = 0;
  for (size_t k = 0; k < classical_.size(); ++k) {
    if (tuple[k] < 0 || tuple[k] >= classical_[k].card)
      throw_validation("DimMismatch", "symbol out of range");
    f = f * classical_[k].card + tuple[k];
  }
  return f;
}

int CQState::classical_index(const std::string& label) const {
  for (size_t i = 0; i < classical_.size(); ++i)
    if (classical_[i].label == label) return static_cast<int>(i);
  throw_validation("BadPartition", "unknown classical label " + label);
}

int CQState::quantum_index(const std::string& label) const {
  for (size_t i = 0; i < quantum_.size(); ++i)
    if (quantum_[i].label == label) return static_cast<int>(i);
  throw_validation("BadPartition", "unknown quantum label " + label);
}

bool CQState::has_classical(const std::string& label) const {
  for (const auto& r : classical_)
    if (r.label == label) return true;
  return false;
}

bool CQState::has_quantum(const std::string& label) const {
  for (const auto& s : quantum_)
    if (s.label == label) return true;
  return false;
}

Mat CQState::expand() const {
  const int qd = quantum_dim();
  const int cs = classical_size();
  Mat full = Mat::Zero(cs * qd, cs * qd);
  for (int t = 0; t < cs; ++t) {
    if (probs_[t] == 0.0) continue;
    full.block(t * qd, t * qd, qd, qd) = probs_[t] * blocks_[t];
  }
  return full;
}

DensityOperator CQState::expand_density() const {
  std::vector<Subsystem> subs;
  for (const auto& r : classical_) subs.push_back({r.label, r.card});
  for (const auto& s : quantum_) subs.push_back(s);
  return DensityOperator(subs, expand());
}

CQState CQState::condition_on(const std::string& label, int symbol) const {
  const int idx = classical_index(label);
  if (symbol < 0 || symbol >= classical_[idx].card)
    throw_validation("DimMismatch", "symbol out of range for " + label);

  double mass = 0.0;
  for (int t = 0; t < classical_size(); ++t)
    if (tuple_of(t)[idx] == symbol) mass += probs_[t];
  if (mass <= 0.0)
    throw_validation("ZeroProbabilitySymbol", "conditioning on zero-probability symbol");

  std::vector<ClassicalReg> regs;
  for (size_t k = 0; k < classical_.size(); ++k)
    if (static_cast<int>(k) != idx) regs.push_back(classical_[k]);

  int new_size = 1;
  for (const auto& r : regs) new_size *= r.card;
  std::vector<double> probs(new_size, 0.0);
  std::vector<Mat> blocks(new_size, Mat::Zero(quantum_dim(), quantum_dim()));
  for (int t = 0; t < classical_size(); ++t) {
    auto tup = tuple_of(t);
    if (tup[idx] != symbol) continue;
    tup.erase(tup.begin() + idx);
    int f = 0;
    for (size_t k = 0; k < regs.size(); ++k) f = f * regs[k].card + tup[k];
    probs[f] = probs_[t] / mass;
    blocks[f] = blocks_[t];
  }
  return CQState(regs, quantum_, probs, blocks);
}

CQState CQState::marginalize_classical(const std::vector<std::string>& drop) const {
  std::vector<int> drop_idx;
  for (const auto& l : drop) drop_idx.push_back(classical_index(l));

  std::vector<ClassicalReg> regs;
  std::vector<int> kept_idx;
  for (size_t k = 0; k < classical_.size(); ++k)
    if (std::find(drop_idx.begin(), drop_idx.end(), static_cast<int>(k)) == drop_idx.end()) {
      regs.push_back(classical_[k]);
      kept_idx.push_back(static_cast<int>(k));
    }

  int new_size = 1;
  for (const auto& r : regs) new_size *= r.card;
  const int qd = quantum_dim();
  std::vector<double> probs(new_size, 0.0);
  std::vector<Mat> sums(new_size, Mat::Zero(qd, qd));
  for (int t = 0; t < classical_size(); ++t) {
    if (probs_[t] == 0.0) continue;
    auto tup = tuple_of(t);
    int f = 0;
    for (size_t k = 0; k < kept_idx.size(); ++k) f = f * regs[k].card + tup[kept_idx[k]];
    probs[f] += probs_[t];
    sums[f] += probs_[t] * blocks_[t];
  }
  for (int f = 0; f < new_size; ++f)
    if (probs[f] > 0.0) sums[f] /= probs[f];
  return CQState(regs, quantum_, probs, sums);
}

CQState CQState::marginalize_quantum(const std::vector<std::string>& drop) const {
  std::vector<int> keep;
  std::vector<Subsystem> kept;
  for (size_t k = 0; k < quantum_.size(); ++k)
    if (std::find(drop.begin(), drop.end(), quantum_[k].label) == drop.end()) {
      keep.push_back(static_cast<int>(k));
      kept.push_back(quantum_[k]);
    }
  for (const auto& l : drop) quantum_index(l);  // validate labels
  std::vector<int> qdims;
  for (const auto& s : quantum_) qdims.push_back(s.dim);

  std::vector<Mat> blocks;
  blocks.reserve(blocks_.size());
  for (const auto& b : blocks_) blocks.push_back(partial_trace(b, qdims, keep));
  return CQState(classical_, kept, probs_, blocks);
}

CQState CQState::marginal(const std::vector<std::string>& keep_classical,
                          const std::vector<std::string>& keep_quantum) const {
  std::vector<std::string> drop_c, drop_q;
  for (const auto& r : classical_)
    if (std::find(keep_classical.begin(), keep_classical.end(), r.label) == keep_classical.end())
      drop_c.push_back(r.label);
  for (const auto& s : quantum_)
    if (std::find(keep_quantum.begin(), keep_quantum.end(), s.label) == keep_quantum.end())
      drop_q.push_back(s.label);
  for (const auto& l : keep_classical) classical_index(l);
  for (const auto& l : keep_quantum) quantum_index(l);
  return marginalize_classical(drop_c).marginalize_quantum(drop_q);
}

DensityOperator CQState::to_density() const {
  if (!classical_.empty())
    throw_validation("BadPartition", "classical registers remain; marginalize them first");
  return DensityOperator(quantum_, blocks_[0]);
}

KrausChannel::KrausChannel(int in_dim, std::vector<int> out_dims, std::vector<Mat> kraus_ops)
    : in_dim_(in_dim), out_dims_(std::move(out_dims)), kraus_(std::move(kraus_ops)) {
  if (in_dim_ <= 0) throw_validation("DimMismatch", "input dimension must be positive");
  int od = 1;
  for (int d : out_dims_) {
    if (d <= 0) throw_validation("DimMismatch", "output dimension must be positive");
    od *= d;
  }
  if (kraus_.empty()) throw_validation("DimMismatch", "empty Kraus family");
  Mat sum = Mat::Zero(in_dim_, in_dim_);
  for (const auto& k : kraus_) {
    if (k.rows() != od || k.cols() != in_dim_)
      throw_validation("DimMismatch", "Kraus operator shape mismatch");
    if (!all_finite(k)) throw_validation("NonFinite", "Kraus operator contains NaN or Inf");
    sum += k.adjoint() * k;
  }
  if (max_abs(sum - Mat::Identity(in_dim_, in_dim_)) > 1e-9)
    throw_validation("NotTracePreserving", "sum K†K differs from identity by more than 1e-9");
}

int KrausChannel::out_dim() const {
  int od = 1;
  for (int d : out_dims_) od *= d;
  return od;
}

Mat KrausChannel::apply(const Mat& rho) const {
  if (rho.rows() != in_dim_ || rho.cols() != in_dim_)
    throw_validation("DimMismatch", "state dimension does not match channel input");
  Mat out = Mat::Zero(out_dim(), out_dim());
  for (const auto& k : kraus_) out += k * rho * k.adjoint();
  return out;
}

DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho,
                              const std::vector<std::string>& out_labels) {
  if (out_labels.size() != ch.out_dims().size())
    throw_validation("DimMismatch", "output label count mismatch");
  Mat out = ch.apply(rho.matrix());
  std::vector<Subsystem> subs;
  for (size_t i = 0; i < out_labels.size(); ++i)
    subs.push_back({out_labels[i], ch.out_dims()[i]});
  return DensityOperator(subs, out);
}

BroadcastChannelModel::BroadcastChannelModel(RMat p_uv, RMat p_x_given_v,
                                             std::vector<Mat> modulator, KrausChannel channel)
    : p_uv_(std::move(p_uv)),
      p_x_given_v_(std::move(p_x_given_v)),
      modulator_(std::move(modulator)),
      channel_(std::move(channel)) {
  if (p_uv_.size() == 0) throw_validation("DimMismatch", "empty p(u,v)");
  if (p_uv_.minCoeff() < -1e-12) throw_validation("NegativeProbability", "p(u,v) negative");
  if (std::abs(p_uv_.sum() - 1.0) > 1e-9)
    throw_validation("NotNormalized", "p(u,v) sum differs from 1");
  if (p_x_given_v_.rows() != p_uv_.cols())
    throw_validation("DimMismatch", "p(x|v) rows must match |V|");
  for (int v = 0; v < p_x_given_v_.rows(); ++v) {
    if (p_x_given_v_.row(v).minCoeff() < -1e-12)
      throw_validation("NegativeProbability", "p(x|v) negative");
    if (std::abs(p_x_given_v_.row(v).sum() - 1.0) > 1e-9)
      throw_validation("NotNormalized", "p(x|v) row sum differs from 1");
  }
  if (static_cast<int>(modulator_.size()) != p_x_given_v_.cols())
    throw_validation("DimMismatch", "modulator size must match |X|");
  for (const auto& m : modulator_) {
    if (m.rows() != channel_.in_dim() || m.cols() != channel_.in_dim())
      throw_validation("DimMismatch", "modulator state does not match channel input");
    if (std::abs(trace_real(m) - 1.0) > 1e-9)
      throw_validation("NotUnitTrace", "modulator state trace differs from 1");
    if (min_eigenvalue(hermitian_part(m)) < -1e-9)
      throw_validation("NegativeEigenvalue", "modulator state not PSD");
  }
  if (channel_.out_dims().size() != 2)
    throw_validation("DimMismatch", "broadcast channel needs a [d_B, d_C] output split");
}

CQState BroadcastChannelModel::induced_state() const {
  const int nu = card_u(), nv = card_v(), nx = card_x();
  std::vector<Mat> outs(nx);
  for (int x = 0; x < nx; ++x) outs[x] = channel_.apply(modulator_[x]);

  std::vector<double> probs(nu * nv * nx);
  std::vector<Mat> blocks(nu * nv * nx);
  for (int u = 0; u < nu; ++u)
    for (int v = 0; v < nv; ++v)
      for (int x = 0; x < nx; ++x) {
        const int f = (u * nv + v) * nx + x;
        probs[f] = p_uv_(u, v) * p_x_given_v_(v, x);
        blocks[f] = outs[x];
      }
  return CQState({{"U", nu}, {"V", nv}, {"X", nx}},
                 {{"B", channel_.out_dims()[0]}, {"C", channel_.out_dims()[1]}}, probs, blocks);
}

}  // namespace qbc
