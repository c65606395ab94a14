// SPDX-License-Identifier: Apache-2.0

#include "mcmg/cli/cli.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "mcmg/analysis/analysis.hpp"
#include "mcmg/cli/run_config.hpp"
#include "mcmg/common/error.hpp"
#include "mcmg/data/synth.hpp"
#include "mcmg/eval/evaluator.hpp"
#include "mcmg/graph/poi_graph.hpp"
#include "mcmg/selftest/selftest.hpp"
#include "mcmg/train/trainer.hpp"

namespace mcmg::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

std::string find_config_arg(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.starts_with("--config=")) return std::string(a.substr(9));
  }
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return env;
  return {};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::int64_t parse_timestamp(const std::string& s) {
  if (auto iso = data::parse_iso8601(s)) return *iso;
  std::size_t used = 0;
  try {
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError("cannot parse timestamp '" + s + "'");
}

struct Flags {
  std::string config_path;
  std::string edge_weighting;
  std::string loss;
  bool no_gcn = false, no_region = false, no_category = false, no_wall_time = false;
  std::uint64_t seed = 0;
};

// Binds the flags that mirror configuration fields.
void add_ingest_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--k-regions", c.ingest.k_regions, "number of k-means regions")->capture_default_str();
  app->add_option("--max-len", c.ingest.max_len, "maximum check-ins kept per trajectory")->capture_default_str();
  app->add_option("--utc-offset-minutes", c.ingest.utc_offset_minutes, "local time zone offset")->capture_default_str();
  app->add_option("--distance-buckets", c.ingest.distance_buckets, "distance embedding buckets")->capture_default_str();
  app->add_option("--min-distance-km", c.ingest.min_distance_km, "smallest non-zero distance bucket edge")
      ->capture_default_str();
  app->add_option("--min-trajectories", c.ingest.min_trajectories, "drop users with fewer trajectories")
      ->capture_default_str();
}

void add_model_flags(CLI::App* app, RunConfig& c, Flags& f) {
  model::ModelConfig& m = c.train.model;
  train::TrainConfig& t = c.train;
  app->add_option("--embedding-size", m.embedding_size, "embedding size d")->capture_default_str();
  app->add_option("--lr", t.lr, "learning rate")->capture_default_str();
  app->add_option("--lambda", t.lambda, "L2 regularization")->capture_default_str();
  app->add_option("--batch-size", t.batch_size, "instances per batch")->capture_default_str();
  app->add_option("--layers", m.gcn_layers, "GCN layers")->capture_default_str();
  app->add_option("--heads", m.heads, "self-attention heads")->capture_default_str();
  app->add_option("--blocks", m.blocks, "self-attention blocks")->capture_default_str();
  app->add_option("--gcn-dropout", m.gcn_dropout, "GCN dropout rate")->capture_default_str();
  app->add_option("--sa-dropout", m.sa_dropout, "self-attention dropout rate")->capture_default_str();
  app->add_option("--max-epochs", t.max_epochs, "epoch limit")->capture_default_str();
  app->add_option("--patience", t.patience, "epochs without validation improvement before stopping")
      ->capture_default_str();
  app->add_option("--loss-variant", f.loss, "bce or ce")->check(CLI::IsMember({"bce", "ce"}));
  app->add_option("--edge-weighting", f.edge_weighting, "count or binary")->check(CLI::IsMember({"count", "binary"}));
  app->add_flag("--residual", m.residual, "residual connections around attention blocks");
  app->add_flag("--no-gcn", f.no_gcn, "use the raw POI table instead of the GCN output");
  app->add_flag("--no-region", f.no_region, "disable the region channel");
  app->add_flag("--no-category", f.no_category, "disable the category channel");
  app->add_flag("--no-wall-time", f.no_wall_time, "write 0 in the wall_seconds log column");
}

void apply_flags(RunConfig& c, const Flags& f, bool seed_given) {
  if (!f.loss.empty()) c.train.model.loss = model::parse_loss_variant(f.loss);
  if (!f.edge_weighting.empty()) c.train.model.edge_weighting = graph::parse_edge_weighting(f.edge_weighting);
  if (f.no_gcn) c.train.model.use_gcn = false;
  if (f.no_region) c.train.model.use_region = false;
  if (f.no_category) c.train.model.use_category = false;
  if (f.no_wall_time) c.train.log_wall_time = false;
  if (seed_given) {
    c.ingest.seed = f.seed;
    c.train.seed = f.seed;
  }
}

// ---------------------------------------------------------------------------

int cmd_synth(const data::SynthConfig& cfg, const fs::path& out) {
  data::write_synth_city(cfg, out);
  spdlog::info("wrote synthetic city to {}", out.string());
  return kOk;
}

int cmd_ingest(const RunConfig& c, const fs::path& input, const fs::path& out) {
  const data::Dataset ds = data::ingest(input, c.ingest);
  fs::create_directories(out);
  data::save_dataset(ds, out / "dataset.bin");

  std::string regions = "poi\tregion\n";
  for (std::size_t l = 0; l < ds.num_pois(); ++l) {
    regions += fmt::format("{}\t{}\n", ds.pois.name(static_cast<std::int32_t>(l)), ds.poi_info[l].region);
  }
  write_text(out / "poi_regions.tsv", regions);
  std::string centers = "region\tlatitude\tlongitude\tpois\n";
  for (const auto& r : ds.regions) {
    centers += fmt::format("{}\t{}\t{}\t{}\n", r.id, r.center.latitude, r.center.longitude, r.members.size());
  }
  write_text(out / "region_centers.tsv", centers);

  const data::IngestStats& s = ds.stats;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& t : ds.trajectories) ++counts[static_cast<int>(t.split)];
  ordered_json stats = {{"data_lines", s.data_lines},
                        {"malformed", s.malformed},
                        {"users", ds.users.size()},
                        {"pois", ds.num_pois()},
                        {"categories", ds.num_categories()},
                        {"regions", ds.num_regions()},
                        {"trajectories", ds.trajectories.size()},
                        {"train", counts[0]},
                        {"validation", counts[1]},
                        {"test", counts[2]},
                        {"dropped_short", s.dropped_short},
                        {"truncated", s.truncated},
                        {"users_removed", s.users_removed},
                        {"distances_clamped", s.distances_clamped},
                        {"kmeans_iterations", s.kmeans_iterations},
                        {"poi_distance_max_km", ds.poi_distance.max_km},
                        {"region_distance_max_km", ds.region_distance.max_km}};
  write_text(out / "ingest_stats.json", stats.dump(2) + "\n");
  write_text(out / "ingest_config.json", to_json(c));
  spdlog::info("{} users, {} POIs, {} categories, {} trajectories ({} train / {} validation / {} test)",
               ds.users.size(), ds.num_pois(), ds.num_categories(), ds.trajectories.size(), counts[0], counts[1],
               counts[2]);
  return kOk;
}

int cmd_analyze(const RunConfig& c, const fs::path& dataset, const fs::path& out) {
  const data::Dataset ds = data::load_dataset(dataset);
  analysis::write_report(analysis::analyze(ds), out);
  write_text(out / "analyze_config.json", to_json(c));
  spdlog::info("wrote analysis tables to {}", out.string());
  return kOk;
}

int cmd_graph(const RunConfig& c, const fs::path& dataset, const fs::path& out) {
  const data::Dataset ds = data::load_dataset(dataset);
  const graph::PoiGraph g = graph::build_poi_graph(ds, c.train.model.edge_weighting);
  write_text(out / "edges.tsv", graph::edge_list_tsv(g, ds.pois));
  std::size_t isolated = 0;
  const graph::CsrMatrix out_edges = g.adjacency.transposed();
  for (std::size_t i = 0; i < g.num_nodes; ++i) {
    if (g.adjacency.row_ptr[i + 1] == g.adjacency.row_ptr[i] && out_edges.row_ptr[i + 1] == out_edges.row_ptr[i]) {
      ++isolated;
    }
  }
  ordered_json stats = {{"nodes", g.num_nodes},
                        {"edges", g.num_edges()},
                        {"weighting", graph::to_string(g.weighting)},
                        {"isolated_nodes", isolated}};
  write_text(out / "graph_stats.json", stats.dump(2) + "\n");
  write_text(out / "graph_config.json", to_json(c));
  spdlog::info("{} nodes, {} edges", g.num_nodes, g.num_edges());
  return kOk;
}

std::string render_log(const std::vector<train::EpochLog>& log) {
  std::string text = train::log_csv_header();
  for (const auto& row : log) text += train::log_csv_row(row);
  return text;
}

int cmd_train(const RunConfig& c, const fs::path& dataset, const fs::path& out, bool resume) {
  c.train.validate();
  if (c.num_seeds == 0) throw std::invalid_argument("--num-seeds must be at least 1");
  const data::Dataset ds = data::load_dataset(dataset);
  const graph::PoiGraph g = graph::build_poi_graph(ds, c.train.model.edge_weighting);
  for (std::size_t i = 0; i < c.num_seeds; ++i) {
    RunConfig run = c;
    run.train.seed = c.train.seed + i;
    run.num_seeds = 1;
    const fs::path dir = c.num_seeds == 1 ? out : out / fmt::format("seed_{}", run.train.seed);
    fs::create_directories(dir);
    write_text(dir / "train_config.json", to_json(run));

    const fs::path last = dir / "last.ckpt";
    train::Trainer trainer = resume && fs::exists(last) ? train::Trainer::resume(ds, g, last, run.train)
                                                        : train::Trainer(ds, g, run.train);
    if (trainer.epoch() > 0) spdlog::info("resuming seed {} after epoch {}", run.train.seed, trainer.epoch());
    trainer.fit([&](const train::EpochLog& row) {
      spdlog::info("seed {} epoch {:>3}  J {:.5f} (l {:.5f} r {:.5f} c {:.5f})  val HR@10 {:.4f} NDCG@10 {:.4f}",
                   run.train.seed, row.epoch, row.j, row.j_poi, row.j_region, row.j_category, row.val_hr10,
                   row.val_ndcg10);
      trainer.save_checkpoint(last);
      if (trainer.best_epoch() == row.epoch) trainer.save_best_model(dir / "model.ckpt");
      write_text(dir / "train_log.csv", render_log(trainer.log()));
    });
    trainer.save_best_model(dir / "model.ckpt");
    write_text(dir / "train_log.csv", render_log(trainer.log()));
    spdlog::info("seed {}: best validation NDCG@10 {:.4f} at epoch {}", run.train.seed, trainer.best_ndcg(),
                 trainer.best_epoch());
  }
  return kOk;
}

data::Split parse_split(const std::string& s) {
  if (s == "test") return data::Split::kTest;
  if (s == "validation") return data::Split::kValidation;
  if (s == "train") return data::Split::kTrain;
  throw std::invalid_argument("unknown split '" + s + "'");
}

struct EvalOptions {
  std::vector<std::string> checkpoints;
  std::string baseline;
  std::string split = "test";
  bool all_positions = false;
  std::string predictions;
  std::size_t top_n = 10;
};

int cmd_eval(const RunConfig& c, const fs::path& dataset, const fs::path& out, const EvalOptions& o) {
  if (o.checkpoints.empty() && o.baseline.empty()) {
    throw std::invalid_argument("eval needs --checkpoint (repeatable) or --baseline mostpop");
  }
  const data::Dataset ds = data::load_dataset(dataset);
  const auto instances = eval::evaluation_instances(ds, parse_split(o.split), o.all_positions);
  if (instances.empty()) throw DataError("the " + o.split + " split is empty");

  std::vector<std::pair<std::uint64_t, eval::EvalResult>> runs;
  std::string name = "MostPop";
  if (!o.baseline.empty()) {
    runs.emplace_back(0, eval::mostpop(ds, instances, c.cutoffs));
  } else {
    name = "MCMG";
    std::ofstream predictions;
    if (!o.predictions.empty()) {
      const fs::path pred_path(o.predictions);
      if (pred_path.has_parent_path()) fs::create_directories(pred_path.parent_path());
      predictions.open(o.predictions, std::ios::binary);
      if (!predictions) throw DataError("cannot write '" + o.predictions + "'");
    }
    for (std::size_t ci = 0; ci < o.checkpoints.size(); ++ci) {
      train::LoadedModel loaded = train::load_model(o.checkpoints[ci]);
      const model::Sizes expected = model::sizes_of(ds);
      if (loaded.model.sizes().pois != expected.pois || loaded.model.sizes().regions != expected.regions ||
          loaded.model.sizes().categories != expected.categories) {
        throw DataError("checkpoint '" + o.checkpoints[ci] + "' does not match the dataset vocabulary");
      }
      const graph::PoiGraph g = graph::build_poi_graph(ds, loaded.config.model.edge_weighting);
      eval::ScoreVisitor visit;
      if (ci == 0 && predictions.is_open()) {
        visit = [&](std::size_t i, std::span<const double> scores) {
          const model::Instance& in = instances[i];
          const data::Trajectory& t = *in.trajectory;
          ordered_json row;
          row["instance"] = i;
          row["user"] = ds.users.name(t.user);
          ordered_json prefix = ordered_json::array();
          for (std::size_t k = 0; k < in.prefix; ++k) prefix.push_back(ds.pois.name(t.pois[k]));
          row["prefix"] = prefix;
          row["target"] = ds.pois.name(t.pois[in.prefix]);
          row["group"] = data::to_string(in.group());
          ordered_json top = ordered_json::array();
          for (std::size_t id : eval::top_n(scores, o.top_n)) {
            top.push_back({{"poi", ds.pois.name(static_cast<std::int32_t>(id))}, {"score", scores[id]}});
          }
          row["top"] = top;
          predictions << row.dump() << "\n";
        };
      }
      eval::EvalResult r =
          eval::summarize(eval::rank_instances(loaded.model, g, instances, loaded.config.eval_batch_size, visit),
                          c.cutoffs);
      r.group_weights = loaded.model.group_weights();
      runs.emplace_back(loaded.config.seed, std::move(r));
    }
  }
  write_text(out, eval::results_json(runs, name));
  write_text(out.parent_path() / "eval_config.json", to_json(c));
  for (const auto& [seed, r] : runs) {
    const auto& poi = r.channels.at("poi").entire;
    spdlog::info("{} seed {}: {} instances  HR@5 {:.4f} NDCG@5 {:.4f} HR@10 {:.4f} NDCG@10 {:.4f}", name, seed,
                 r.instances, poi.hr.count(5) ? poi.hr.at(5) : 0.0, poi.ndcg.count(5) ? poi.ndcg.at(5) : 0.0,
                 poi.hr.count(10) ? poi.hr.at(10) : 0.0, poi.ndcg.count(10) ? poi.ndcg.at(10) : 0.0);
  }
  return kOk;
}

int cmd_predict(const fs::path& dataset, const std::string& checkpoint, const std::string& pois,
                const std::string& timestamps, std::size_t top_n, const std::string& out) {
  const data::Dataset ds = data::load_dataset(dataset);
  train::LoadedModel loaded = train::load_model(checkpoint);
  const auto names = split_list(pois);
  const auto times = split_list(timestamps);
  if (names.size() != times.size()) throw std::invalid_argument("--pois and --timestamps must have equal length");
  std::vector<std::int32_t> ids;
  std::vector<std::int64_t> ts;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const auto id = ds.pois.find(names[i]);
    if (!id) throw DataError("unknown POI '" + names[i] + "'");
    ids.push_back(*id);
    ts.push_back(parse_timestamp(times[i]));
  }
  const data::Trajectory t = model::make_trajectory(ds, ids, ts);
  const model::Instance in{&t, t.size()};
  const model::Batch batch = model::make_batch(std::span(&in, 1));
  const graph::PoiGraph g = graph::build_poi_graph(ds, loaded.config.model.edge_weighting);
  ad::Tape tape;
  Rng unused(0);
  const auto o = loaded.model.forward(tape, g, batch, false, unused);
  const ad::Tensor& scores = o.logits.poi.value();
  ordered_json doc;
  doc["prefix"] = names;
  doc["group"] = data::to_string(in.group());
  ordered_json top = ordered_json::array();
  for (std::size_t id : eval::top_n(scores.values(), top_n)) {
    top.push_back({{"poi", ds.pois.name(static_cast<std::int32_t>(id))}, {"score", scores[id]}});
  }
  doc["top"] = top;
  const std::string text = doc.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return kOk;
}

int cmd_selftest() {
  bool all = true;
  for (const auto& r : selftest::run_selftest()) {
    std::cout << fmt::format("[{}] {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    all = all && r.passed;
  }
  std::cout << (all ? "all checks passed\n" : "some checks failed\n");
  return all ? kOk : kNumericError;
}

}  // namespace

int run(int argc, const char* const* argv) {
  auto logger = spdlog::get("mcmg");
  if (!logger) logger = spdlog::stderr_color_mt("mcmg");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%^%l%$: %v");

  RunConfig config;
  try {
    const std::string path = find_config_arg(argc, argv);
    if (!path.empty()) config = load_run_config(path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }

  CLI::App app{"Multi-channel next POI recommendation: ingest, analyze, train and evaluate."};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  bool verbose = false, quiet = false;
  app.add_option("--config", flags.config_path, "JSON run config (default from $" + std::string(kConfigEnv) + ")");
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  data::SynthConfig synth;
  std::string synth_out;
  auto* s = app.add_subcommand("synth", "generate a synthetic check-in file");
  s->add_option("--out", synth_out, "output TSV")->required();
  s->add_option("--users", synth.num_users)->capture_default_str();
  s->add_option("--regions", synth.num_regions)->capture_default_str();
  s->add_option("--pois-per-region", synth.pois_per_region)->capture_default_str();
  s->add_option("--categories", synth.num_categories)->capture_default_str();
  s->add_option("--days", synth.days_per_user)->capture_default_str();
  s->add_option("--min-len", synth.min_len)->capture_default_str();
  s->add_option("--max-len", synth.max_len)->capture_default_str();
  s->add_option("--stay-probability", synth.stay_probability)->capture_default_str();
  s->add_flag("--cycle", synth.cycle, "deterministic POI cycle instead of random moves");
  s->add_option("--seed", synth.seed)->capture_default_str();

  std::string input, dataset, out;
  auto* ing = app.add_subcommand("ingest", "parse check-ins, cluster regions, build and split trajectories");
  ing->add_option("--input", input, "check-in TSV")->required();
  ing->add_option("--out", out, "output directory")->required();
  add_ingest_flags(ing, config);
  auto* ing_seed = ing->add_option("--seed", flags.seed, "k-means seed");

  auto* ana = app.add_subcommand("analyze", "region behaviour statistics over the train split");
  ana->add_option("--dataset", dataset, "dataset.bin from ingest")->required();
  ana->add_option("--out", out, "output directory")->required();

  auto* gr = app.add_subcommand("graph", "export the POI transition graph");
  gr->add_option("--dataset", dataset, "dataset.bin from ingest")->required();
  gr->add_option("--out", out, "output directory")->required();
  gr->add_option("--edge-weighting", flags.edge_weighting, "count or binary")
      ->check(CLI::IsMember({"count", "binary"}));

  bool resume = false;
  auto* tr = app.add_subcommand("train", "train the model");
  tr->add_option("--dataset", dataset, "dataset.bin from ingest")->required();
  tr->add_option("--out", out, "output directory")->required();
  add_model_flags(tr, config, flags);
  auto* tr_seed = tr->add_option("--seed", flags.seed, "model seed");
  tr->add_option("--num-seeds", config.num_seeds, "train seeds seed, seed+1, ...")->capture_default_str();
  tr->add_flag("--resume", resume, "continue from last.ckpt in the output directory");

  EvalOptions eo;
  auto* ev = app.add_subcommand("eval", "HR@N and NDCG@N on a split");
  ev->add_option("--dataset", dataset, "dataset.bin from ingest")->required();
  ev->add_option("--checkpoint", eo.checkpoints, "model checkpoint (repeat for several seeds)");
  ev->add_option("--baseline", eo.baseline, "evaluate a baseline instead")->check(CLI::IsMember({"mostpop"}));
  ev->add_option("--out", out, "results JSON")->required();
  ev->add_option("--split", eo.split, "test, validation or train")->capture_default_str();
  ev->add_flag("--all-positions", eo.all_positions, "score every prefix instead of only the final one");
  ev->add_option("--predictions", eo.predictions, "write top-N predictions as JSON lines");
  ev->add_option("--top-n", eo.top_n, "predictions per instance")->capture_default_str();
  ev->add_option("--cutoffs", config.cutoffs, "ranking cutoffs N")->delimiter(',');

  std::string checkpoint, pois, timestamps;
  std::size_t top_n = 10;
  auto* pr = app.add_subcommand("predict", "rank next POIs for a given prefix");
  pr->add_option("--dataset", dataset, "dataset.bin from ingest")->required();
  pr->add_option("--checkpoint", checkpoint, "model checkpoint")->required();
  pr->add_option("--pois", pois, "comma-separated POI ids")->required();
  pr->add_option("--timestamps", timestamps, "comma-separated epoch seconds or ISO-8601 times")->required();
  pr->add_option("--top-n", top_n)->capture_default_str();
  pr->add_option("--out", out, "output JSON (default stdout)");

  auto* st = app.add_subcommand("selftest", "gradient checks and invariants");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    apply_flags(config, flags, ing_seed->count() > 0 || tr_seed->count() > 0);
    config.paths.clear();
    auto record_path = [&](const std::string& key, const std::string& value) {
      if (!value.empty()) config.paths[key] = value;
    };
    record_path("input", input);
    record_path("dataset", dataset);
    record_path("out", s->parsed() ? synth_out : out);
    record_path("checkpoint", checkpoint);
    for (std::size_t i = 0; i < eo.checkpoints.size(); ++i) record_path(fmt::format("checkpoint{}", i), eo.checkpoints[i]);
    config.train.validate();
    if (s->parsed()) return cmd_synth(synth, synth_out);
    if (ing->parsed()) return cmd_ingest(config, input, out);
    if (ana->parsed()) return cmd_analyze(config, dataset, out);
    if (gr->parsed()) return cmd_graph(config, dataset, out);
    if (tr->parsed()) return cmd_train(config, dataset, out, resume);
    if (ev->parsed()) return cmd_eval(config, dataset, out, eo);
    if (pr->parsed()) return cmd_predict(dataset, checkpoint, pois, timestamps, top_n, out);
    if (st->parsed()) return cmd_selftest();
  } catch (const NumericError& e) {
    spdlog::error("{}", e.what());
    return kNumericError;
  } catch (const ShapeError& e) {
    spdlog::error("internal shape error: {}", e.what());
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const DataError& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  }
  return kUsage;
}

}  // namespace mcmg::cli
