#include "qbc/modelzoo.hpp"

#include <cmath>

namespace qbc {

BroadcastChannelModel classical_broadcast_model(const RMat& p_uv, const RMat& p_x_given_v,
                                                const std::vector<RMat>& p_yz_given_x, int dy,
                                                int dz) {
  const int nx = static_cast<int>(p_yz_given_x.size());
  std::vector<Mat> kraus;
  // One operator per (x, y, z) so input coherences are fully dephased.
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < dy; ++y)
      for (int z = 0; z < dz; ++z) {
        if (p_yz_given_x[x](y, z) <= 0.0) continue;
        Mat k = Mat::Zero(dy * dz, nx);
        k(y * dz + z, x) = std::sqrt(p_yz_given_x[x](y, z));
        kraus.push_back(k);
      }
  std::vector<Mat> modulator;
  for (int x = 0; x < nx; ++x) {
    Mat m = Mat::Zero(nx, nx);
    m(x, x) = 1.0;
    modulator.push_back(m);
  }
  return BroadcastChannelModel(p_uv, p_x_given_v, modulator,
                               KrausChannel(nx, {dy, dz}, kraus));
}

BroadcastChannelModel constant_channel_model(const RMat& p_uv, const RMat& p_x_given_v,
                                             int in_dim, const Mat& out_b, const Mat& out_c) {
  const Mat out = kron(out_b, out_c);
  Spectrum s = eig_hermitian(out);
  std::vector<Mat> kraus;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
    if (s.eigenvalues(i) <= 0.0) continue;
    for (int x = 0; x < in_dim; ++x) {
      Mat k = Mat::Zero(out.rows(), in_dim);
      k.col(x) = std::sqrt(s.eigenvalues(i)) * s.eigenvectors.col(i);
      kraus.push_back(k);
    }
  }
  std::vector<Mat> modulator;
  const int nx = static_cast<int>(p_x_given_v.cols());
  for (int x = 0; x < nx; ++x)
    modulator.push_back(Mat::Identity(in_dim, in_dim) / static_cast<double>(in_dim));
  return BroadcastChannelModel(
      p_uv, p_x_given_v, modulator,
      KrausChannel(in_dim, {static_cast<int>(out_b.rows()), static_cast<int>(out_c.rows())},
                   kraus));
}

BroadcastChannelModel random_broadcast_model(Rng& rng, int card_u, int card_v, int card_x,
                                             int dim_a, int dim_b, int dim_c, int env) {
  RMat p_uv(card_u, card_v);
  RVec flat = random_pmf(rng, card_u * card_v, 0.05);
  for (int u = 0; u < card_u; ++u)
    for (int v = 0; v < card_v; ++v) p_uv(u, v) = flat(u * card_v + v);
  RMat p_x_given_v(card_v, card_x);
  for (int v = 0; v < card_v; ++v) p_x_given_v.row(v) = random_pmf(rng, card_x, 0.05).transpose();
  std::vector<Mat> modulator;
  for (int x = 0; x < card_x; ++x) modulator.push_back(random_density(rng, dim_a));
  return BroadcastChannelModel(
      p_uv, p_x_given_v, modulator,
      KrausChannel(dim_a, {dim_b, dim_c}, random_kraus(rng, dim_a, dim_b * dim_c, env)));
}

BroadcastChannelModel depolarize_outputs(const BroadcastChannelModel& model, double p) {
  if (p < 0.0 || p > 1.0) throw_validation("InvalidEpsilon", "noise strength must lie in [0,1]");
  auto depolarizing_kraus = [&](int d) {
    std::vector<Mat> ks;
    ks.push_back(std::sqrt(1.0 - p) * Mat::Identity(d, d));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        Mat k = Mat::Zero(d, d);
        k(i, j) = std::sqrt(p / d);
        ks.push_back(k);
      }
    return ks;
  };
  const int db = model.channel().out_dims()[0], dc = model.channel().out_dims()[1];
  std::vector<Mat> kb = depolarizing_kraus(db), kc = depolarizing_kraus(dc);
  std::vector<Mat> composed;
  for (const auto& base : model.channel().kraus_ops())
    for (const auto& b : kb)
      for (const auto& c : kc) {
        Mat k = kron(b, c) * base;
        if (max_abs(k) > 0.0) composed.push_back(k);
      }
  return BroadcastChannelModel(model.p_uv(), model.p_x_given_v(), model.modulator(),
                               KrausChannel(model.channel().in_dim(), {db, dc}, composed));
}

}  // namespace qbc
