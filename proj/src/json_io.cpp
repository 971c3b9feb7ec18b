#include "qbc/json_io.hpp"

#include <fstream>
#include <sstream>

namespace qbc {

namespace {

std::string tuple_key(const std::vector<int>& tuple) {
  std::ostringstream os;
  for (size_t i = 0; i < tuple.size(); ++i) {
    if (i) os << ",";
    os << tuple[i];
  }
  return os.str();
}

std::vector<int> parse_tuple_key(const std::string& key) {
  std::vector<int> t;
  std::istringstream is(key);
  std::string part;
  while (std::getline(is, part, ',')) t.push_back(std::stoi(part));
  return t;
}

const Json& require(const Json& j, const std::string& field, const std::string& what) {
  if (!j.contains(field)) throw_validation("SchemaViolation", what + " missing field '" + field + "'");
  return j.at(field);
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw_validation("SchemaViolation", "matrix must be a non-empty array");
  const size_t n = j.size();
  Mat m(n, n);
  for (size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n)
      throw_validation("SchemaViolation", "matrix must be square with [re,im] entries");
    for (size_t c = 0; c < n; ++c) {
      const Json& e = j[r][c];
      if (!e.is_array() || e.size() != 2)
        throw_validation("SchemaViolation", "matrix entries must be [re, im] pairs");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

Json state_to_json(const DensityOperator& rho) {
  Json j;
  j["dims"] = Json::array();
  j["labels"] = Json::array();
  for (const auto& s : rho.systems()) {
    j["dims"].push_back(s.dim);
    j["labels"].push_back(s.label);
  }
  j["matrix"] = matrix_to_json(rho.matrix());
  return j;
}

DensityOperator state_from_json(const Json& j) {
  const Json& dims = require(j, "dims", "state");
  const Json& labels = require(j, "labels", "state");
  if (dims.size() != labels.size())
    throw_validation("SchemaViolation", "state dims and labels length mismatch");
  std::vector<Subsystem> subs;
  for (size_t i = 0; i < dims.size(); ++i)
    subs.push_back({labels[i].get<std::string>(), dims[i].get<int>()});
  return DensityOperator(subs, matrix_from_json(require(j, "matrix", "state")));
}

Json cqstate_to_json(const CQState& s) {
  Json j;
  j["classical"] = Json::array();
  for (const auto& r : s.classical()) j["classical"].push_back({{"label", r.label}, {"card", r.card}});
  j["quantum"] = Json::array();
  for (const auto& q : s.quantum()) j["quantum"].push_back({{"label", q.label}, {"dim", q.dim}});
  Json probs = Json::object();
  Json blocks = Json::object();
  for (int t = 0; t < s.classical_size(); ++t) {
    const std::string key = tuple_key(s.tuple_of(t));
    probs[key] = s.prob(t);
    if (s.prob(t) > 0) blocks[key] = matrix_to_json(s.block(t));
  }
  j["probs"] = probs;
  j["blocks"] = blocks;
  return j;
}

CQState cqstate_from_json(const Json& j) {
  std::vector<ClassicalReg> regs;
  for (const auto& r : require(j, "classical", "cqstate"))
    regs.push_back({require(r, "label", "classical register").get<std::string>(),
                    require(r, "card", "classical register").get<int>()});
  std::vector<Subsystem> quantum;
  for (const auto& q : require(j, "quantum", "cqstate"))
    quantum.push_back({require(q, "label", "quantum system").get<std::string>(),
                       require(q, "dim", "quantum system").get<int>()});
  int csize = 1, qdim = 1;
  for (const auto& r : regs) csize *= r.card;
  for (const auto& q : quantum) qdim *= q.dim;

  std::vector<double> probs(csize, 0.0);
  std::vector<Mat> blocks(csize, Mat::Zero(qdim, qdim));
  // Flat index recomputed from the key so key ordering in the file is free.
  std::vector<int> cards;
  for (const auto& r : regs) cards.push_back(r.card);
  auto flat_of = [&](const std::vector<int>& t) {
    if (t.size() != cards.size()) throw_validation("SchemaViolation", "tuple key length mismatch");
    int f = 0;
    for (size_t k = 0; k < cards.size(); ++k) {
      if (t[k] < 0 || t[k] >= cards[k]) throw_validation("SchemaViolation", "tuple key out of range");
      f = f * cards[k] + t[k];
    }
    return f;
  };
  for (const auto& [key, val] : require(j, "probs", "cqstate").items())
    probs[flat_of(parse_tuple_key(key))] = val.get<double>();
  for (const auto& [key, val] : require(j, "blocks", "cqstate").items())
    blocks[flat_of(parse_tuple_key(key))] = matrix_from_json(val);
  return CQState(regs, quantum, probs, blocks);
}

Json channel_to_json(const KrausChannel& ch) {
  Json j;
  j["in_dim"] = ch.in_dim();
  j["out_dims"] = ch.out_dims();
  j["kraus"] = Json::array();
  for (const auto& k : ch.kraus_ops()) j["kraus"].push_back(matrix_to_json(k));
  return j;
}

KrausChannel channel_from_json(const Json& j) {
  const int in_dim = require(j, "in_dim", "channel").get<int>();
  std::vector<int> out_dims = require(j, "out_dims", "channel").get<std::vector<int>>();
  std::vector<Mat> kraus;
  for (const auto& k : require(j, "kraus", "channel")) {
    // Kraus operators may be rectangular; reuse the square parser when possible.
    if (!k.is_array() || k.empty()) throw_validation("SchemaViolation", "bad Kraus operator");
    const size_t rows = k.size();
    const size_t cols = k[0].size();
    Mat m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
      if (k[r].size() != cols) throw_validation("SchemaViolation", "ragged Kraus operator");
      for (size_t c = 0; c < cols; ++c)
        m(r, c) = Complex(k[r][c][0].get<double>(), k[r][c][1].get<double>());
    }
    kraus.push_back(m);
  }
  return KrausChannel(in_dim, out_dims, kraus);
}

Json model_to_json(const BroadcastChannelModel& m) {
  Json j;
  Json puv = Json::array();
  for (int u = 0; u < m.card_u(); ++u) {
    Json row = Json::array();
    for (int v = 0; v < m.card_v(); ++v) row.push_back(m.p_uv()(u, v));
    puv.push_back(row);
  }
  j["p_uv"] = puv;
  Json pxv = Json::array();
  for (int v = 0; v < m.card_v(); ++v) {
    Json row = Json::array();
    for (int x = 0; x < m.card_x(); ++x) row.push_back(m.p_x_given_v()(v, x));
    pxv.push_back(row);
  }
  j["p_x_given_v"] = pxv;
  Json mod = Json::object();
  for (size_t x = 0; x < m.modulator().size(); ++x)
    mod[std::to_string(x)] = matrix_to_json(m.modulator()[x]);
  j["modulator"] = mod;
  j["channel"] = channel_to_json(m.channel());
  return j;
}

BroadcastChannelModel model_from_json(const Json& j) {
  const Json& puv = require(j, "p_uv", "model");
  RMat p_uv(puv.size(), puv[0].size());
  for (size_t u = 0; u < puv.size(); ++u)
    for (size_t v = 0; v < puv[u].size(); ++v) p_uv(u, v) = puv[u][v].get<double>();
  const Json& pxv = require(j, "p_x_given_v", "model");
  RMat p_x_given_v(pxv.size(), pxv[0].size());
  for (size_t v = 0; v < pxv.size(); ++v)
    for (size_t x = 0; x < pxv[v].size(); ++x) p_x_given_v(v, x) = pxv[v][x].get<double>();
  const Json& mod = require(j, "modulator", "model");
  std::vector<Mat> modulator(mod.size());
  for (const auto& [key, val] : mod.items()) {
    const int x = std::stoi(key);
    if (x < 0 || x >= static_cast<int>(mod.size()))
      throw_validation("SchemaViolation", "modulator key out of range");
    modulator[x] = matrix_from_json(val);
  }
  return BroadcastChannelModel(p_uv, p_x_given_v, modulator,
                               channel_from_json(require(j, "channel", "model")));
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw_validation("MalformedJson", std::string(e.what()) + " in " + path);
  }
}

void save_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw_validation("FileNotFound", "cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace qbc
