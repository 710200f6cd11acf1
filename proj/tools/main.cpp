// deepchess: dataset extraction, training pipeline, UCI engine and match harness.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or engine failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "deepchess/bench.hpp"
#include "deepchess/config.hpp"
#include "deepchess/corpus.hpp"
#include "deepchess/dataset.hpp"
#include "deepchess/match.hpp"
#include "deepchess/model_io.hpp"
#include "deepchess/training.hpp"
#include "deepchess/uci.hpp"

namespace {

using namespace deepchess;

constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      dims.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw UsageError("bad layer list '" + text + "'");
    }
  }
  if (dims.empty()) throw UsageError("empty layer list");
  return dims;
}

std::string join_dims(const std::vector<int>& dims) {
  std::string out;
  for (int d : dims) out += (out.empty() ? "" : ",") + std::to_string(d);
  return out;
}

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", path, "key = value settings file")->check(CLI::ExistingFile);
    app->add_option("--set", overrides, "override a setting (key=value), repeatable");
  }

  Config load() const {
    Config cfg = path.empty() ? Config{} : Config::load(path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
  }
};

void warn_unused(const Config& cfg) {
  for (const auto& key : cfg.unused_keys()) std::cerr << "warning: unused setting '" << key << "'\n";
}

SplitDataset load_split(const std::string& data_path, const Config& cfg) {
  auto positions = read_dataset(data_path);
  const auto val = cfg.get_uint("val_per_class", 50'000);
  return split(std::move(positions), val, cfg.get_uint("split_seed", 1));
}

void print_epoch(const nn::EpochLog& e) {
  std::printf("epoch %4zu  lr %.6f  loss %.5f  train_acc %.4f  val_acc %.4f\n", e.epoch, e.learning_rate,
              e.train_loss, e.train_accuracy, e.val_accuracy);
  std::fflush(stdout);
}

EngineConfig engine_from_spec(const std::string& spec) {
  EngineConfig e;
  std::stringstream in(spec);
  for (std::string item; std::getline(in, item, ',');) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("engine spec items are key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    try {
      if (key == "comparator") e.comparator = parse_comparator_kind(value);
      else if (key == "model") e.model_path = value;
      else if (key == "depth") e.max_depth = std::stoi(value);
      else if (key == "cache_mb") e.cache_mb = std::stoul(value);
      else if (key == "seed") e.seed = std::stoull(value);
      else if (key == "name") e.name = value;
      else if (key == "deterministic") e.deterministic = value == "1" || value == "true";
      else throw UsageError("unknown engine spec key '" + key + "'");
    } catch (const std::invalid_argument& ex) {
      throw UsageError("engine spec '" + item + "': " + ex.what());
    }
  }
  e.validate();
  return e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deepchess: comparison-based chess engine and training pipeline"};
  app.require_subcommand(1);

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "sample labeled positions from a PGN corpus");
  std::string pgn_path, out_path;
  ExtractConfig extract_cfg;
  std::string exclusion = "fullmoves";
  std::uint64_t extract_seed = 1;
  extract_cmd->add_option("--pgn", pgn_path, "PGN input")->required()->check(CLI::ExistingFile);
  extract_cmd->add_option("--out", out_path, "dataset output")->required();
  extract_cmd->add_option("--per-game", extract_cfg.per_game, "positions sampled per game");
  extract_cmd->add_option("--opening-moves", extract_cfg.opening_moves, "opening length excluded");
  extract_cmd->add_option("--exclusion", exclusion, "fullmoves or plies")->check(CLI::IsMember({"fullmoves", "plies"}));
  extract_cmd->add_option("--seed", extract_seed);

  // pretrain / train / distill
  ConfigArgs pretrain_args, train_args, distill_args;
  std::string data_path, extractor_path, teacher_path;
  auto* pretrain_cmd = app.add_subcommand("pretrain", "layer-wise autoencoder pretraining of the feature extractor");
  pretrain_args.attach(pretrain_cmd);
  pretrain_cmd->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);
  pretrain_cmd->add_option("--out", out_path, "extractor output")->required();

  auto* train_cmd = app.add_subcommand("train", "supervised Siamese training");
  train_args.attach(train_cmd);
  train_cmd->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--extractor", extractor_path, "pretrained extractor (random init if omitted)");
  train_cmd->add_option("--out", out_path, "model output")->required();

  auto* distill_cmd = app.add_subcommand("distill", "distill a trained model into a student network");
  distill_args.attach(distill_cmd);
  distill_cmd->add_option("--data", data_path, "dataset file")->required()->check(CLI::ExistingFile);
  distill_cmd->add_option("--teacher", teacher_path, "teacher model")->required()->check(CLI::ExistingFile);
  distill_cmd->add_option("--out", out_path, "student output")->required();

  // play
  auto* play_cmd = app.add_subcommand("play", "run as a UCI engine on stdin/stdout");
  EngineConfig play_cfg;
  std::string play_comparator = "learned";
  std::string model_path;
  play_cmd->add_option("--comparator", play_comparator)->check(CLI::IsMember({"learned", "material", "random"}));
  play_cmd->add_option("--model", model_path, "model file (learned comparator)");
  play_cmd->add_option("--cache-mb", play_cfg.cache_mb, "feature cache size");
  play_cmd->add_option("--depth", play_cfg.max_depth, "default search depth");
  play_cmd->add_option("--seed", play_cfg.seed);
  play_cmd->add_flag("--deterministic", play_cfg.deterministic, "ignore clock limits");

  // match
  auto* match_cmd = app.add_subcommand("match", "engine-versus-engine match");
  std::string engine_a = "comparator=material,depth=2", engine_b = "comparator=random,depth=1";
  MatchSpec spec;
  long long time_a = 0, time_b = 0;
  std::string openings_path, pgn_out;
  bool no_alternate = false;
  match_cmd->add_option("--engine-a", engine_a, "comparator=..,model=..,depth=..,cache_mb=..,seed=..,name=..");
  match_cmd->add_option("--engine-b", engine_b, "same keys as --engine-a");
  match_cmd->add_option("--games", spec.games);
  match_cmd->add_option("--time-a", time_a, "ms per game for engine A (0 = depth only)");
  match_cmd->add_option("--time-b", time_b, "ms per game for engine B (0 = depth only)");
  match_cmd->add_option("--openings", openings_path, "FEN lines or PGN")->check(CLI::ExistingFile);
  match_cmd->add_option("--pgn-out", pgn_out, "write games here");
  match_cmd->add_option("--max-plies", spec.max_plies);
  match_cmd->add_option("--seed", spec.seed);
  match_cmd->add_flag("--no-alternate", no_alternate, "first engine always plays White");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "throughput of the learned comparator");
  BenchConfig bench_cfg;
  bench_cmd->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--positions", bench_cfg.positions);
  bench_cmd->add_option("--depth", bench_cfg.search_depth);
  bench_cmd->add_option("--cache-mb", bench_cfg.cache_mb);
  bench_cmd->add_option("--seed", bench_cfg.seed);

  // audit
  auto* audit_cmd = app.add_subcommand("audit", "comparator consistency: cycle rate on sampled triples");
  std::string audit_comparator = "learned";
  std::size_t audit_positions = 500, audit_triples = 2000;
  std::uint64_t audit_seed = 1;
  audit_cmd->add_option("--comparator", audit_comparator)->check(CLI::IsMember({"learned", "material", "random"}));
  audit_cmd->add_option("--model", model_path);
  audit_cmd->add_option("--positions", audit_positions);
  audit_cmd->add_option("--triples", audit_triples);
  audit_cmd->add_option("--seed", audit_seed);

  // selfplay
  auto* selfplay_cmd = app.add_subcommand("selfplay", "generate a PGN corpus from noisy material self-play");
  SelfPlayConfig selfplay_cfg;
  selfplay_cmd->add_option("--games", selfplay_cfg.games, "maximum number of games");
  selfplay_cmd->add_option("--decisive", selfplay_cfg.decisive_target, "stop after this many decisive games");
  selfplay_cmd->add_option("--out", out_path, "PGN output")->required();
  selfplay_cmd->add_option("--seed", selfplay_cfg.seed);
  selfplay_cmd->add_option("--depth", selfplay_cfg.depth);
  selfplay_cmd->add_option("--random-rate", selfplay_cfg.random_move_rate);
  selfplay_cmd->add_option("--max-plies", selfplay_cfg.max_plies);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*extract_cmd) {
      extract_cfg.exclusion = exclusion == "plies" ? OpeningExclusion::Plies : OpeningExclusion::FullMoves;
      std::ifstream in(pgn_path);
      ExtractStats stats;
      const auto positions = extract_corpus(in, extract_seed, extract_cfg, &stats);
      write_dataset(out_path, positions);
      std::printf("games %zu  white wins %zu  black wins %zu  draws skipped %zu  unfinished %zu  malformed %zu\n",
                  stats.games, stats.white_wins, stats.black_wins, stats.draws_discarded, stats.unknown_discarded,
                  stats.malformed);
      std::printf("wrote %zu positions to %s\n", positions.size(), out_path.c_str());
    } else if (*pretrain_cmd) {
      const Config cfg = pretrain_args.load();
      const auto dims = parse_dims(cfg.get_string("dims", join_dims(nn::kTeacherExtractorDims)));
      const auto train_cfg = read_train_config(cfg, "", nn::TrainConfig::pretraining_defaults());
      const SplitDataset ds = load_split(data_path, cfg);
      const auto subset = nn::balanced_subset(ds, cfg.get_uint("per_class", 1'000'000), train_cfg.seed);
      warn_unused(cfg);
      nn::PretrainLog log;
      const auto fe = nn::pretrain_pos2vec(subset, dims, train_cfg, &log);
      for (std::size_t s = 0; s < log.stage_losses.size(); ++s)
        std::printf("stage %zu  final reconstruction loss %.5f\n", s, log.stage_losses[s].empty() ? 0.0 : log.stage_losses[s].back());
      nn::save_extractor(fe, out_path);
    } else if (*train_cmd) {
      const Config cfg = train_args.load();
      const auto train_cfg = read_train_config(cfg, "", nn::TrainConfig::supervised_defaults());
      const auto head_dims = parse_dims(cfg.get_string("head_dims", join_dims(nn::kTeacherHeadDims)));
      const auto ext_dims = parse_dims(cfg.get_string("extractor_dims", join_dims(nn::kTeacherExtractorDims)));
      const auto val_pairs = cfg.get_uint("validation_pairs", 10'000);
      const SplitDataset ds = load_split(data_path, cfg);
      warn_unused(cfg);
      nn::FeatureExtractor<float> init;
      if (extractor_path.empty()) {
        std::mt19937_64 rng(train_cfg.seed);
        init = nn::make_extractor<float>(ext_dims, rng);
      } else {
        init = nn::load_extractor(extractor_path);
      }
      const auto result = nn::train_deepchess(ds, init, head_dims, train_cfg, val_pairs, print_epoch);
      nn::save_model(result.net, out_path);
    } else if (*distill_cmd) {
      const Config cfg = distill_args.load();
      nn::DistillConfig dcfg;
      dcfg.feature_stage = read_train_config(cfg, "feature_", nn::TrainConfig::supervised_defaults());
      dcfg.output_stage = read_train_config(cfg, "output_", nn::TrainConfig::supervised_defaults());
      dcfg.freeze_extractor = cfg.get_bool("freeze_extractor", false);
      const auto ext_dims = parse_dims(cfg.get_string("student_extractor_dims", join_dims(nn::kStudentExtractorDims)));
      const auto head_dims = parse_dims(cfg.get_string("student_head_dims", join_dims(nn::kStudentHeadDims)));
      const auto val_pairs = cfg.get_uint("validation_pairs", 10'000);
      const SplitDataset ds = load_split(data_path, cfg);
      warn_unused(cfg);
      const auto teacher = nn::load_model(teacher_path);
      std::mt19937_64 rng(cfg.get_uint("student_seed", 1));
      auto student = nn::make_siamese<float>(ext_dims, head_dims, rng);
      const auto result = nn::distill(teacher, std::move(student), ds, dcfg, val_pairs);
      for (std::size_t e = 0; e < result.feature_losses.size(); ++e)
        std::printf("feature epoch %4zu  mse %.5f\n", e, result.feature_losses[e]);
      for (const auto& e : result.output_log) print_epoch(e);
      nn::save_model(result.student, out_path);
    } else if (*play_cmd) {
      play_cfg.comparator = parse_comparator_kind(play_comparator);
      play_cfg.model_path = model_path;
      try {
        play_cfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      uci_loop(play_cfg, std::cin, std::cout);
    } else if (*match_cmd) {
      spec.engines = {engine_from_spec(engine_a), engine_from_spec(engine_b)};
      spec.alternate_colors = !no_alternate;
      if (time_a > 0) spec.time_per_game[0] = std::chrono::milliseconds(time_a);
      if (time_b > 0) spec.time_per_game[1] = std::chrono::milliseconds(time_b);
      if (!openings_path.empty()) spec.openings = load_openings(openings_path);
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      const auto report = run_match(spec, [](const GameRecord& g, const MatchReport& r) {
        std::printf("game %3zu  %-7s  %-22s  score %zu-%zu-%zu\n", g.pgn.index + 1,
                    std::string(outcome_token(g.pgn.outcome)).c_str(), std::string(describe(g.end)).c_str(), r.wins,
                    r.losses, r.draws);
        std::fflush(stdout);
      });
      if (!pgn_out.empty()) std::ofstream(pgn_out) << report.pgn_text();
      std::printf("A: +%zu -%zu =%zu  points %.3f", report.wins, report.losses, report.draws, report.points_fraction);
      if (report.elo_diff) std::printf("  elo %+.1f\n", *report.elo_diff);
      else std::printf("  elo undefined (shutout)\n");
      if (report.failure) {
        std::fprintf(stderr, "match aborted: %s\n", report.failure->c_str());
        return kExitFailure;
      }
    } else if (*bench_cmd) {
      const auto net = nn::load_model(model_path);
      std::fputs(format_bench(run_bench(net, bench_cfg)).c_str(), stdout);
    } else if (*audit_cmd) {
      EngineConfig ecfg;
      ecfg.comparator = parse_comparator_kind(audit_comparator);
      ecfg.model_path = model_path;
      try {
        ecfg.validate();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      Engine engine(ecfg);
      const auto positions = random_playout_positions(audit_positions, audit_seed);
      const auto report = consistency_audit(engine.comparator(), positions, audit_triples, audit_seed);
      std::printf("triples %zu  cycles %zu  cycle rate %.4f  swap consistency %.4f\n", report.triples, report.cycles,
                  report.cycle_rate(), report.swap_consistency());
    } else if (*selfplay_cmd) {
      std::ofstream out(out_path);
      if (!out) throw std::runtime_error("cannot write " + out_path);
      const auto stats = generate_selfplay_games(selfplay_cfg, out);
      std::printf("games %zu  white wins %zu  black wins %zu  draws %zu  checkmates %zu\n", stats.games,
                  stats.white_wins, stats.black_wins, stats.draws, stats.checkmates);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid setting: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
