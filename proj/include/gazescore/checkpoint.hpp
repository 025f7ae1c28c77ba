#pragma once

// Model checkpointing. This header pulls in nlohmann/json from the vendored
// third-party directory, so only translation units that actually save or
// load checkpoints need that include path.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "gazescore/errors.hpp"
#include "gazescore/model.hpp"
#include "json.hpp"

namespace gazescore {

struct Checkpoint {
  ModelParams params;
  std::uint64_t seed = 0;
  // Free-form provenance note (dataset digest, config summary, ...).
  std::string note;
};

namespace detail {

inline nlohmann::json tensor_to_json(const Tensor& t) {
  nlohmann::json j;
  j["shape"] = t.shape();
  j["data"] = t.data();
  return j;
}

inline Tensor tensor_from_json(const nlohmann::json& j,
                               const std::string& where) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    throw data_error("checkpoint: " + where +
                     " must be an object with 'shape' and 'data'");
  }
  std::vector<std::size_t> shape = j["shape"].get<std::vector<std::size_t>>();
  std::vector<double> data = j["data"].get<std::vector<double>>();
  std::size_t expect = 1;
  for (std::size_t d : shape) expect *= d;
  if (shape.empty() || expect != data.size()) {
    throw data_error("checkpoint: " + where + " has inconsistent shape");
  }
  return Tensor(shape, std::move(data));
}

}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  validate_model(ckpt.params);
  nlohmann::json j;
  j["format"] = "gazescore-checkpoint";
  j["version"] = kCheckpointVersion;
  j["input_dim"] = ckpt.params.input_dim();
  j["hidden"] = ckpt.params.hidden();
  j["layers"] = ckpt.params.layers();
  j["seed"] = ckpt.seed;
  j["note"] = ckpt.note;

  nlohmann::json lstm;
  lstm["forget_w"] = detail::tensor_to_json(ckpt.params.lstm.forget_w);
  lstm["candidate_w"] = detail::tensor_to_json(ckpt.params.lstm.candidate_w);
  lstm["input_w"] = detail::tensor_to_json(ckpt.params.lstm.input_w);
  lstm["output_w"] = detail::tensor_to_json(ckpt.params.lstm.output_w);
  lstm["forget_b"] = detail::tensor_to_json(ckpt.params.lstm.forget_b);
  lstm["candidate_b"] = detail::tensor_to_json(ckpt.params.lstm.candidate_b);
  lstm["input_b"] = detail::tensor_to_json(ckpt.params.lstm.input_b);
  lstm["output_b"] = detail::tensor_to_json(ckpt.params.lstm.output_b);
  j["lstm"] = std::move(lstm);

  nlohmann::json net;
  net["weights"] = nlohmann::json::array();
  net["biases"] = nlohmann::json::array();
  for (std::size_t layer = 0; layer < ckpt.params.layers(); ++layer) {
    net["weights"].push_back(
        detail::tensor_to_json(ckpt.params.net.weights[layer]));
    net["biases"].push_back(
        detail::tensor_to_json(ckpt.params.net.biases[layer]));
  }
  j["net"] = std::move(net);
  return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "gazescore-checkpoint") {
    throw data_error("checkpoint: unrecognized format marker");
  }
  if (j.value("version", -1) != kCheckpointVersion) {
    throw data_error("checkpoint: unsupported version");
  }
  for (const char* key : {"lstm", "net", "hidden", "input_dim", "layers"}) {
    if (!j.contains(key)) {
      throw data_error(std::string("checkpoint: missing field '") + key +
                       "'");
    }
  }

  Checkpoint ckpt;
  ckpt.seed = j.value("seed", std::uint64_t{0});
  ckpt.note = j.value("note", std::string{});

  const nlohmann::json& lstm = j["lstm"];
  ckpt.params.lstm.forget_w =
      detail::tensor_from_json(lstm.at("forget_w"), "lstm.forget_w");
  ckpt.params.lstm.candidate_w =
      detail::tensor_from_json(lstm.at("candidate_w"), "lstm.candidate_w");
  ckpt.params.lstm.input_w =
      detail::tensor_from_json(lstm.at("input_w"), "lstm.input_w");
  ckpt.params.lstm.output_w =
      detail::tensor_from_json(lstm.at("output_w"), "lstm.output_w");
  ckpt.params.lstm.forget_b =
      detail::tensor_from_json(lstm.at("forget_b"), "lstm.forget_b");
  ckpt.params.lstm.candidate_b =
      detail::tensor_from_json(lstm.at("candidate_b"), "lstm.candidate_b");
  ckpt.params.lstm.input_b =
      detail::tensor_from_json(lstm.at("input_b"), "lstm.input_b");
  ckpt.params.lstm.output_b =
      detail::tensor_from_json(lstm.at("output_b"), "lstm.output_b");

  const nlohmann::json& net = j["net"];
  if (!net.contains("weights") || !net.contains("biases") ||
      net["weights"].size() != net["biases"].size()) {
    throw data_error("checkpoint: net must carry parallel weights/biases");
  }
  for (std::size_t layer = 0; layer < net["weights"].size(); ++layer) {
    const std::string tag = "net layer " + std::to_string(layer);
    ckpt.params.net.weights.push_back(
        detail::tensor_from_json(net["weights"][layer], tag + " weights"));
    ckpt.params.net.biases.push_back(
        detail::tensor_from_json(net["biases"][layer], tag + " biases"));
  }

  if (ckpt.params.hidden() != j["hidden"].get<std::size_t>() ||
      ckpt.params.input_dim() != j["input_dim"].get<std::size_t>() ||
      ckpt.params.layers() != j["layers"].get<std::size_t>()) {
    throw data_error("checkpoint: header dimensions disagree with tensors");
  }
  validate_model(ckpt.params);
  return ckpt;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) {
    throw data_error("checkpoint: cannot open '" + path + "' for writing");
  }
  // nlohmann/json prints doubles with the shortest representation that
  // round-trips, so a save/load cycle reproduces every weight bit-exactly.
  out << checkpoint_to_json(ckpt).dump(2) << '\n';
  if (!out) {
    throw data_error("checkpoint: failed writing '" + path + "'");
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw data_error("checkpoint: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("checkpoint: '" + path + "' is not valid JSON: " +
                     e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace gazescore
