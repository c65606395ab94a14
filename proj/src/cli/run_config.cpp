// SPDX-License-Identifier: Apache-2.0

#include "mcmg/cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

#include "mcmg/common/error.hpp"

namespace mcmg::cli {

using nlohmann::ordered_json;

namespace {

// Copies `key` from `obj` into `field` if present and records it as seen.
class Reader {
 public:
  Reader(const ordered_json& obj, std::string section) : obj_(obj), section_(std::move(section)) {
    if (!obj_.is_object()) throw std::invalid_argument("config: '" + section_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& field) {
    seen_.push_back(key);
    if (!obj_.contains(key)) return;
    try {
      field = obj_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config: '" + section_ + "." + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw std::invalid_argument("config: unknown key '" + section_ + "." + key + "'");
      }
    }
  }

 private:
  const ordered_json& obj_;
  std::string section_;
  std::vector<std::string> seen_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  Reader top(doc, "config");
  int version = kConfigVersion;
  top.get("version", version);
  if (version != kConfigVersion) {
    throw std::invalid_argument("config: version " + std::to_string(version) + " is not supported (expected " +
                                std::to_string(kConfigVersion) + ")");
  }
  ordered_json ingest = ordered_json::object(), model = ordered_json::object(), train = ordered_json::object();
  top.get("ingest", ingest);
  top.get("model", model);
  top.get("train", train);
  top.get("paths", c.paths);
  top.finish();

  Reader in(ingest, "ingest");
  data::IngestConfig& i = c.ingest;
  in.get("k_regions", i.k_regions);
  in.get("seed", i.seed);
  in.get("max_len", i.max_len);
  in.get("utc_offset_minutes", i.utc_offset_minutes);
  in.get("distance_buckets", i.distance_buckets);
  in.get("min_distance_km", i.min_distance_km);
  in.get("train_ratio", i.train_ratio);
  in.get("validation_ratio", i.validation_ratio);
  in.get("min_trajectories", i.min_trajectories);
  in.get("max_malformed_fraction", i.max_malformed_fraction);
  in.finish();

  Reader mo(model, "model");
  model::ModelConfig& m = c.train.model;
  std::string loss = model::to_string(m.loss), weighting = graph::to_string(m.edge_weighting);
  mo.get("embedding_size", m.embedding_size);
  mo.get("gcn_layers", m.gcn_layers);
  mo.get("heads", m.heads);
  mo.get("blocks", m.blocks);
  mo.get("gcn_dropout", m.gcn_dropout);
  mo.get("sa_dropout", m.sa_dropout);
  mo.get("residual", m.residual);
  mo.get("use_gcn", m.use_gcn);
  mo.get("use_region", m.use_region);
  mo.get("use_category", m.use_category);
  mo.get("loss", loss);
  mo.get("edge_weighting", weighting);
  mo.finish();
  m.loss = model::parse_loss_variant(loss);
  m.edge_weighting = graph::parse_edge_weighting(weighting);

  Reader tr(train, "train");
  train::TrainConfig& t = c.train;
  tr.get("lr", t.lr);
  tr.get("lambda", t.lambda);
  tr.get("batch_size", t.batch_size);
  tr.get("max_epochs", t.max_epochs);
  tr.get("patience", t.patience);
  tr.get("seed", t.seed);
  tr.get("eval_batch_size", t.eval_batch_size);
  tr.get("log_wall_time", t.log_wall_time);
  tr.get("num_seeds", c.num_seeds);
  tr.get("cutoffs", c.cutoffs);
  tr.finish();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string to_json(const RunConfig& c) {
  const data::IngestConfig& i = c.ingest;
  const model::ModelConfig& m = c.train.model;
  const train::TrainConfig& t = c.train;
  ordered_json doc;
  doc["version"] = kConfigVersion;
  doc["ingest"] = {{"k_regions", i.k_regions},
                   {"seed", i.seed},
                   {"max_len", i.max_len},
                   {"utc_offset_minutes", i.utc_offset_minutes},
                   {"distance_buckets", i.distance_buckets},
                   {"min_distance_km", i.min_distance_km},
                   {"train_ratio", i.train_ratio},
                   {"validation_ratio", i.validation_ratio},
                   {"min_trajectories", i.min_trajectories},
                   {"max_malformed_fraction", i.max_malformed_fraction}};
  doc["model"] = {{"embedding_size", m.embedding_size},
                  {"gcn_layers", m.gcn_layers},
                  {"heads", m.heads},
                  {"blocks", m.blocks},
                  {"gcn_dropout", m.gcn_dropout},
                  {"sa_dropout", m.sa_dropout},
                  {"residual", m.residual},
                  {"use_gcn", m.use_gcn},
                  {"use_region", m.use_region},
                  {"use_category", m.use_category},
                  {"loss", model::to_string(m.loss)},
                  {"edge_weighting", graph::to_string(m.edge_weighting)}};
  doc["train"] = {{"lr", t.lr},
                  {"lambda", t.lambda},
                  {"batch_size", t.batch_size},
                  {"max_epochs", t.max_epochs},
                  {"patience", t.patience},
                  {"seed", t.seed},
                  {"eval_batch_size", t.eval_batch_size},
                  {"log_wall_time", t.log_wall_time},
                  {"num_seeds", c.num_seeds},
                  {"cutoffs", c.cutoffs}};
  doc["paths"] = c.paths;
  return doc.dump(2) + "\n";
}

}  // namespace mcmg::cli
