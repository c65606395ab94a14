// SPDX-License-Identifier: Apache-2.0

#include "mcmg/train/trainer.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mcmg/ad/checkpoint.hpp"
#include "mcmg/ad/ops.hpp"
#include "mcmg/common/container.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/eval/evaluator.hpp"

namespace mcmg::train {

void TrainConfig::validate() const {
  model.validate();
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be a non-negative number");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be a non-negative number");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (patience == 0) throw std::invalid_argument("patience must be positive");
}

std::string log_csv_header() { return "epoch,J_l,J_r,J_c,J,val_HR@10,val_NDCG@10,wall_seconds\n"; }

std::string log_csv_row(const EpochLog& r) {
  return fmt::format("{},{},{},{},{},{},{},{:.3f}\n", r.epoch, r.j_poi, r.j_region, r.j_category, r.j, r.val_hr10,
                     r.val_ndcg10, r.wall_seconds);
}

namespace {

constexpr const char* kCheckpointMagic = "MCMGCKPT";

void put_config(ByteWriter& w, const TrainConfig& c, const model::Sizes& s) {
  const model::ModelConfig& m = c.model;
  for (std::size_t v : {m.embedding_size, m.gcn_layers, m.heads, m.blocks}) w.u64(v);
  w.f64(m.gcn_dropout);
  w.f64(m.sa_dropout);
  for (bool b : {m.residual, m.use_gcn, m.use_region, m.use_category}) w.u8(b ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(m.loss));
  w.u8(static_cast<std::uint8_t>(m.edge_weighting));
  w.f64(c.lr);
  w.f64(c.lambda);
  for (std::size_t v : {c.batch_size, c.max_epochs, c.patience}) w.u64(v);
  w.u64(c.seed);
  w.u64(c.eval_batch_size);
  w.u8(c.log_wall_time ? 1 : 0);
  for (std::size_t v : {s.pois, s.regions, s.categories, s.positions, s.distance_buckets}) w.u64(v);
}

std::pair<TrainConfig, model::Sizes> get_config(ByteReader r) {
  TrainConfig c;
  model::ModelConfig& m = c.model;
  for (std::size_t* v : {&m.embedding_size, &m.gcn_layers, &m.heads, &m.blocks}) *v = r.u64();
  m.gcn_dropout = r.f64();
  m.sa_dropout = r.f64();
  for (bool* b : {&m.residual, &m.use_gcn, &m.use_region, &m.use_category}) *b = r.u8() != 0;
  const std::uint8_t loss = r.u8();
  const std::uint8_t weighting = r.u8();
  if (loss > 1 || weighting > 1) r.fail("unknown loss variant or edge weighting");
  m.loss = static_cast<model::LossVariant>(loss);
  m.edge_weighting = static_cast<graph::EdgeWeighting>(weighting);
  c.lr = r.f64();
  c.lambda = r.f64();
  for (std::size_t* v : {&c.batch_size, &c.max_epochs, &c.patience}) *v = r.u64();
  c.seed = r.u64();
  c.eval_batch_size = r.u64();
  c.log_wall_time = r.u8() != 0;
  model::Sizes s;
  for (std::size_t* v : {&s.pois, &s.regions, &s.categories, &s.positions, &s.distance_buckets}) *v = r.u64();
  if (!r.done()) r.fail("unexpected trailing bytes");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
  return {c, s};
}

std::string encode_log(const std::vector<EpochLog>& log) {
  ByteWriter w;
  w.u64(log.size());
  for (const EpochLog& e : log) {
    w.u64(e.epoch);
    for (double v : {e.j_poi, e.j_region, e.j_category, e.j, e.val_hr10, e.val_ndcg10, e.wall_seconds}) w.f64(v);
  }
  return w.take();
}

std::vector<EpochLog> decode_log(ByteReader& r) {
  std::vector<EpochLog> log(r.count(64));
  for (EpochLog& e : log) {
    e.epoch = r.u64();
    for (double* v : {&e.j_poi, &e.j_region, &e.j_category, &e.j, &e.val_hr10, &e.val_ndcg10, &e.wall_seconds}) {
      *v = r.f64();
    }
  }
  return log;
}

std::string parameter_norms(const ad::ParamStore& params) {
  std::string out;
  for (const auto& p : params) {
    out += fmt::format("\n  {:<22} |value| {:<12.6g} |grad| {:.6g}", p.name, p.value.norm(),
                       p.grad.empty() ? 0.0 : p.grad.norm());
  }
  return out;
}

}  // namespace

Trainer::Trainer(const data::Dataset& dataset, const graph::PoiGraph& graph, TrainConfig config)
    : dataset_(&dataset),
      graph_(&graph),
      config_(config),
      model_(config.model, model::sizes_of(dataset), config.seed),
      adam_(ad::AdamConfig{config.lr, config.lambda}),
      rng_(config.seed ^ 0x9E3779B97F4A7C15ULL) {
  config_.validate();
  train_instances_ = model::expand_prefixes(dataset.select(data::Split::kTrain));
  validation_instances_ = model::final_prefixes(dataset.select(data::Split::kValidation));
  if (train_instances_.empty()) throw DataError("the train split has no prediction instances");
  if (validation_instances_.empty()) throw DataError("the validation split is empty");
  best_params_ = model_.params();
}

Trainer Trainer::resume(const data::Dataset& dataset, const graph::PoiGraph& graph,
                        const std::filesystem::path& checkpoint, std::optional<TrainConfig> overrides) {
  const ContainerReader in = ContainerReader::open(checkpoint, kCheckpointMagic, kCheckpointVersion);
  if (!in.has("trainer")) throw FormatError("'" + checkpoint.string() + "' holds a model only and cannot be resumed");
  auto [config, sizes] = get_config(in.section("config"));
  const model::Sizes expected = model::sizes_of(dataset);
  if (sizes.pois != expected.pois || sizes.regions != expected.regions || sizes.categories != expected.categories ||
      sizes.positions != expected.positions || sizes.distance_buckets != expected.distance_buckets) {
    throw FormatError("section 'config': checkpoint was trained on a dataset with different vocabulary sizes");
  }
  if (overrides) {
    config.max_epochs = overrides->max_epochs;
    config.patience = overrides->patience;
    config.log_wall_time = overrides->log_wall_time;
  }
  Trainer t(dataset, graph, config);
  ad::decode_params(in.section("params"), t.model_.params());
  ad::decode_params(in.section("best"), t.best_params_);
  t.adam_ = ad::decode_adam(in.section("adam"));
  ByteReader r = in.section("trainer");
  t.epoch_ = r.u64();
  t.best_epoch_ = r.u64();
  t.best_ndcg_ = r.f64();
  t.bad_epochs_ = r.u64();
  t.batches_seen_ = r.u64();
  try {
    t.rng_.restore(r.str());
  } catch (const FormatError& e) {
    r.fail(e.what());
  }
  t.log_ = decode_log(r);
  if (!r.done()) r.fail("unexpected trailing bytes");
  return t;
}

bool Trainer::finished() const {
  return epoch_ >= config_.max_epochs || (epoch_ > 0 && bad_epochs_ >= config_.patience);
}

EpochLog Trainer::run_epoch() {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = train_instances_.size();

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng_.shuffle(order);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return train_instances_[a].prefix < train_instances_[b].prefix;
  });
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  for (std::size_t s = 0; s < n; s += config_.batch_size) chunks.emplace_back(s, std::min(n, s + config_.batch_size));
  rng_.shuffle(chunks);

  double sum_l = 0.0, sum_r = 0.0, sum_c = 0.0, sum_j = 0.0;
  std::vector<model::Instance> members;
  for (std::size_t bi = 0; bi < chunks.size(); ++bi) {
    members.clear();
    for (std::size_t i = chunks[bi].first; i < chunks[bi].second; ++i) members.push_back(train_instances_[order[i]]);
    const model::Batch batch = model::make_batch(members);
    const double weight = static_cast<double>(batch.size);

    ad::Tape tape;
    model::LossTerms loss;
    try {
      const auto out = model_.forward(tape, *graph_, batch, true, rng_);
      loss = model::compute_loss(out.logits, batch, config_.model);
    } catch (const NumericError& e) {
      throw NumericError(fmt::format("epoch {} batch {}: {}; parameter norms:{}", epoch_ + 1, bi, e.what(),
                                     parameter_norms(model_.params())));
    }
    const double j = loss.total.value()[0];
    if (!std::isfinite(j)) {
      throw NumericError(fmt::format("epoch {} batch {}: non-finite loss {}; parameter norms:{}", epoch_ + 1, bi, j,
                                     parameter_norms(model_.params())));
    }
    tape.backward(loss.total);
    for (const auto& p : model_.params()) {
      if (!p.grad.all_finite()) {
        throw NumericError(fmt::format("epoch {} batch {}: non-finite gradient for '{}'; parameter norms:{}",
                                       epoch_ + 1, bi, p.name, parameter_norms(model_.params())));
      }
    }
    adam_.step(model_.params());
    ++batches_seen_;
    sum_l += weight * loss.poi.value()[0];
    sum_r += weight * loss.region.value()[0];
    sum_c += weight * loss.category.value()[0];
    sum_j += weight * j;
    if (on_batch) on_batch(batches_seen_, j, model_.group_weights());
  }

  const eval::Ranks ranks =
      eval::rank_instances(model_, *graph_, validation_instances_, config_.eval_batch_size);
  double hr = 0.0, ndcg = 0.0;
  for (std::size_t r : ranks.poi) {
    hr += eval::hr_at(r, 10);
    ndcg += eval::ndcg_at(r, 10);
  }
  hr /= static_cast<double>(ranks.poi.size());
  ndcg /= static_cast<double>(ranks.poi.size());

  ++epoch_;
  if (ndcg > best_ndcg_) {
    best_ndcg_ = ndcg;
    best_epoch_ = epoch_;
    bad_epochs_ = 0;
    best_params_ = model_.params();
  } else {
    ++bad_epochs_;
  }

  EpochLog row;
  row.epoch = epoch_;
  const double total = static_cast<double>(n);
  row.j_poi = sum_l / total;
  row.j_region = sum_r / total;
  row.j_category = sum_c / total;
  row.j = sum_j / total;
  row.val_hr10 = hr;
  row.val_ndcg10 = ndcg;
  if (config_.log_wall_time) {
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  }
  log_.push_back(row);
  return row;
}

void Trainer::fit(const EpochCallback& on_epoch) {
  while (!finished()) {
    const EpochLog row = run_epoch();
    if (on_epoch) on_epoch(row);
  }
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  ContainerWriter out(kCheckpointMagic, kCheckpointVersion);
  ByteWriter cfg;
  put_config(cfg, config_, model_.sizes());
  out.add("config", cfg.take());
  out.add("params", ad::encode_params(model_.params()));
  out.add("best", ad::encode_params(best_params_));
  out.add("adam", ad::encode_adam(adam_));
  ByteWriter st;
  st.u64(epoch_);
  st.u64(best_epoch_);
  st.f64(best_ndcg_);
  st.u64(bad_epochs_);
  st.u64(batches_seen_);
  st.str(rng_.state());
  std::string state = st.take();
  state += encode_log(log_);
  out.add("trainer", std::move(state));
  out.write(path);
}

void Trainer::save_best_model(const std::filesystem::path& path) const {
  ContainerWriter out(kCheckpointMagic, kCheckpointVersion);
  ByteWriter cfg;
  put_config(cfg, config_, model_.sizes());
  out.add("config", cfg.take());
  out.add("params", ad::encode_params(best_params_));
  out.write(path);
}

LoadedModel load_model(const std::filesystem::path& path) {
  const ContainerReader in = ContainerReader::open(path, kCheckpointMagic, kCheckpointVersion);
  auto [config, sizes] = get_config(in.section("config"));
  ad::ParamStore params = ad::decode_params(in.section(in.has("best") ? "best" : "params"));
  return LoadedModel{config, model::Model(config.model, sizes, std::move(params))};
}

}  // namespace mcmg::train
