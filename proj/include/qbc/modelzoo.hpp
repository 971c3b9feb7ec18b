#pragma once

#include "qbc/sampling.hpp"
#include "qbc/states.hpp"

namespace qbc {

// Classical broadcast channel p(y,z|x) embedded with diagonal Kraus operators
// and basis-state modulators.
BroadcastChannelModel classical_broadcast_model(const RMat& p_uv, const RMat& p_x_given_v,
                                                const std::vector<RMat>& p_yz_given_x, int dy,
                                                int dz);

// Channel whose output is a fixed product state regardless of the input.
BroadcastChannelModel constant_channel_model(const RMat& p_uv, const RMat& p_x_given_v,
                                             int in_dim, const Mat& out_b, const Mat& out_c);

BroadcastChannelModel random_broadcast_model(Rng& rng, int card_u, int card_v, int card_x,
                                             int dim_a, int dim_b, int dim_c, int env = 2);

// Both outputs post-processed by depolarizing noise of strength p.
BroadcastChannelModel depolarize_outputs(const BroadcastChannelModel& model, double p);

}  // namespace qbc
