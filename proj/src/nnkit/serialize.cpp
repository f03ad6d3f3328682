#include "farlab/nnkit/serialize.hpp"

#include <stdexcept>

namespace farlab::nnkit {

using nlohmann::json;

json net_to_json(const DenseNet& net) {
  json doc;
  doc["version"] = kNetFormatVersion;
  doc["sizes"] = net.sizes();
  json acts = json::array();
  json weights = json::array();
  json biases = json::array();
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    acts.push_back(to_string(net.layer(k).act));
    const auto w = net.weight(k);
    const auto b = net.bias(k);
    weights.push_back(std::vector<double>(w.begin(), w.end()));
    biases.push_back(std::vector<double>(b.begin(), b.end()));
  }
  doc["activations"] = std::move(acts);
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc;
}

DenseNet net_from_json(const json& doc) {
  const int version = doc.at("version").get<int>();
  if (version != kNetFormatVersion)
    throw std::runtime_error("network format version mismatch: expected " +
                             std::to_string(kNetFormatVersion) + ", found " +
                             std::to_string(version));
  const auto sizes = doc.at("sizes").get<std::vector<int>>();
  std::vector<Activation> acts;
  for (const auto& a : doc.at("activations")) acts.push_back(activation_from_string(a.get<std::string>()));
  DenseNet net = DenseNet::zeros(sizes, acts);

  const auto& weights = doc.at("weights");
  const auto& biases = doc.at("biases");
  if (weights.size() != net.num_layers() || biases.size() != net.num_layers())
    throw std::runtime_error("network document has wrong layer count");
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const auto w = weights[k].get<std::vector<double>>();
    const auto b = biases[k].get<std::vector<double>>();
    auto dw = net.weight(k);
    auto db = net.bias(k);
    if (w.size() != dw.size() || b.size() != db.size())
      throw std::runtime_error("network document layer " + std::to_string(k) + " has wrong shape");
    std::copy(w.begin(), w.end(), dw.begin());
    std::copy(b.begin(), b.end(), db.begin());
  }
  return net;
}

json adam_to_json(const AdamState& state) {
  return json{{"lr", state.config.lr},
              {"beta1", state.config.beta1},
              {"beta2", state.config.beta2},
              {"eps", state.config.eps},
              {"t", state.t},
              {"m", state.m},
              {"v", state.v}};
}

AdamState adam_from_json(const json& doc) {
  AdamState s;
  s.config.lr = doc.at("lr").get<double>();
  s.config.beta1 = doc.at("beta1").get<double>();
  s.config.beta2 = doc.at("beta2").get<double>();
  s.config.eps = doc.at("eps").get<double>();
  s.t = doc.at("t").get<std::int64_t>();
  s.m = doc.at("m").get<std::vector<double>>();
  s.v = doc.at("v").get<std::vector<double>>();
  if (s.m.size() != s.v.size()) throw std::runtime_error("adam document moment size mismatch");
  return s;
}

}  // namespace farlab::nnkit
