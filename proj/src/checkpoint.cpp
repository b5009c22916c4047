// SPDX-License-Identifier: Apache-2.0

#include "kdpinn/checkpoint.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "kdpinn/io.hpp"

namespace kdpinn {

namespace {
constexpr int kFormatVersion = 1;

nlohmann::json payload_json(const MlpNetwork& net, const TrainingMeta& meta) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["spec"]["sizes"] = net.spec().sizes;
  j["spec"]["activation"] = activation_name(net.spec().hidden_activation);
  j["input_scale"]["dim"] = net.scale().dim;
  j["input_scale"]["lo"] = std::vector<double>(
      net.scale().lo.begin(), net.scale().lo.begin() + net.scale().dim);
  j["input_scale"]["hi"] = std::vector<double>(
      net.scale().hi.begin(), net.scale().hi.begin() + net.scale().dim);
  for (int l = 0; l < net.spec().layer_count(); ++l) {
    j["weights"].push_back(
        std::vector<double>(net.weights(l).begin(), net.weights(l).end()));
    j["biases"].push_back(
        std::vector<double>(net.biases(l).begin(), net.biases(l).end()));
  }
  j["rng_seed"] = net.init_seed();
  j["training_meta"] = {{"problem", meta.problem},
                        {"role", meta.role},
                        {"iterations", meta.iterations},
                        {"best_iter", meta.best_iter},
                        {"best_loss", meta.best_loss},
                        {"master_seed", meta.master_seed}};
  return j;
}
}  // namespace

void save_checkpoint(const MlpNetwork& net, const TrainingMeta& meta,
                     const std::string& path) {
  nlohmann::json j = payload_json(net, meta);
  j["checksum"] = to_hex(fnv1a64(j.dump()));
  write_file(path, j.dump(1) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("checkpoint parse error in " + path + ": " +
                             e.what());
  }
  if (j.value("format_version", -1) != kFormatVersion) {
    throw std::runtime_error("checkpoint format version mismatch: " + path);
  }
  const std::string stored = j.value("checksum", "");
  j.erase("checksum");
  if (stored != to_hex(fnv1a64(j.dump()))) {
    throw std::runtime_error("checkpoint checksum mismatch: " + path);
  }

  LayerSpec spec;
  spec.sizes = j.at("spec").at("sizes").get<std::vector<int>>();
  spec.hidden_activation =
      activation_from_name(j.at("spec").at("activation").get<std::string>());
  const auto lo = j.at("input_scale").at("lo").get<std::vector<double>>();
  const auto hi = j.at("input_scale").at("hi").get<std::vector<double>>();
  const InputScale scale = InputScale::from_box(
      j.at("input_scale").at("dim").get<int>(), lo, hi);

  MlpNetwork net(spec, scale);
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (static_cast<int>(weights.size()) != spec.layer_count() ||
      static_cast<int>(biases.size()) != spec.layer_count()) {
    throw std::runtime_error("checkpoint layer count mismatch: " + path);
  }
  for (int l = 0; l < spec.layer_count(); ++l) {
    const auto w = weights[l].get<std::vector<double>>();
    const auto b = biases[l].get<std::vector<double>>();
    if (w.size() != net.weights(l).size() || b.size() != net.biases(l).size()) {
      throw std::runtime_error("checkpoint layer shape mismatch: " + path);
    }
    std::copy(w.begin(), w.end(), net.weights(l).begin());
    std::copy(b.begin(), b.end(), net.biases(l).begin());
  }

  TrainingMeta meta;
  const auto& tm = j.at("training_meta");
  meta.problem = tm.value("problem", "");
  meta.role = tm.value("role", "");
  meta.iterations = tm.value("iterations", 0LL);
  meta.best_iter = tm.value("best_iter", 0LL);
  meta.best_loss = tm.value("best_loss", 0.0);
  meta.master_seed = tm.value("master_seed", 0ULL);
  return {std::move(net), std::move(meta)};
}

}  // namespace kdpinn
