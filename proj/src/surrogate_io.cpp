#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ucn/surrogate.hpp"

namespace ucn {

namespace {

using nlohmann::json;

constexpr int kModelSchemaVersion = 1;

json tree_to_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree t;
  for (const auto& n : j) {
    if (!n.is_array() || n.size() != 5)
      throw std::runtime_error("model file: malformed tree node");
    TreeNode node;
    node.feature = n[0].get<int>();
    node.threshold = n[1].get<double>();
    node.left = n[2].get<int>();
    node.right = n[3].get<int>();
    node.value = n[4].get<double>();
    t.nodes.push_back(node);
  }
  if (t.nodes.empty()) throw std::runtime_error("model file: empty tree");
  return t;
}

}  // namespace

void save_model(const GbtModel& m, const std::string& path) {
  if (m.trees.empty())
    throw std::invalid_argument("save_model: model is not fitted");
  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["kind"] = m.kind;
  j["role"] = m.role;
  j["target"] = m.target_name;
  j["hparams"] = {{"n_trees", m.hparams.n_trees},
                  {"learning_rate", m.hparams.learning_rate},
                  {"max_depth", m.hparams.max_depth},
                  {"min_samples_leaf", m.hparams.min_samples_leaf}};
  j["base_prediction"] = m.base_prediction;
  j["learning_rate"] = m.learning_rate;
  j["scaler"] = {{"mins", m.scaler.mins}, {"maxs", m.scaler.maxs}};
  j["target_scale"] = {{"min", m.target_scale.t_min},
                       {"max", m.target_scale.t_max}};
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(1, '\t') << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

GbtModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("model file " + path + ": " + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion)
      throw std::runtime_error("unsupported schema_version " +
                               std::to_string(version));
    GbtModel m;
    m.kind = j.at("kind").get<std::string>();
    m.role = j.at("role").get<std::string>();
    m.target_name = j.at("target").get<std::string>();
    const json& hp = j.at("hparams");
    m.hparams.n_trees = hp.at("n_trees").get<int>();
    m.hparams.learning_rate = hp.at("learning_rate").get<double>();
    m.hparams.max_depth = hp.at("max_depth").get<int>();
    m.hparams.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
    m.base_prediction = j.at("base_prediction").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.scaler.mins = j.at("scaler").at("mins").get<std::array<double, 3>>();
    m.scaler.maxs = j.at("scaler").at("maxs").get<std::array<double, 3>>();
    m.target_scale.t_min = j.at("target_scale").at("min").get<double>();
    m.target_scale.t_max = j.at("target_scale").at("max").get<double>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    if (m.trees.empty())
      throw std::runtime_error("no trees");
    if (static_cast<int>(m.trees.size()) != m.hparams.n_trees)
      throw std::runtime_error("tree count disagrees with hparams");
    return m;
  } catch (const json::exception& e) {
    throw std::runtime_error("model file " + path + ": " + e.what());
  }
}

GbtModel load_model(const std::string& path, const std::string& expected_role,
                    const std::string& expected_target) {
  GbtModel m = load_model(path);
  if (m.role != expected_role)
    throw std::runtime_error("model file " + path + ": role is '" + m.role +
                             "', expected '" + expected_role + "'");
  if (m.target_name != expected_target)
    throw std::runtime_error("model file " + path + ": target is '" +
                             m.target_name + "', expected '" +
                             expected_target + "'");
  return m;
}

}  // namespace ucn
