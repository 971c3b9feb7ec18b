#pragma once

#include <string>

#include <json.hpp>

#include "qbc/states.hpp"

namespace qbc {

using Json = nlohmann::json;

// Complex entries serialize as [re, im] pairs.
Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

Json state_to_json(const DensityOperator& rho);
DensityOperator state_from_json(const Json& j);

Json cqstate_to_json(const CQState& s);
CQState cqstate_from_json(const Json& j);

Json channel_to_json(const KrausChannel& ch);
KrausChannel channel_from_json(const Json& j);

Json model_to_json(const BroadcastChannelModel& m);
BroadcastChannelModel model_from_json(const Json& j);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);

}  // namespace qbc
