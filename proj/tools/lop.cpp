#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lop/eval.hpp"
#include "lop/live.hpp"
#include "lop/model_io.hpp"
#include "lop/projection.hpp"
#include "lop/score_io.hpp"
#include "lop/server.hpp"
#include "lop/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void print_warnings(const lop::Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

std::vector<lop::score::AlignedPair> aligned_corpus(const std::string& dir, int quantization,
                                                    const lop::score::OrchestraLayout& layout,
                                                    lop::Diagnostics& diag) {
  auto corpus = lop::trainer::Corpus::from_directory(dir, quantization);
  return lop::trainer::align_files(corpus, corpus.names(), layout, &diag);
}

std::vector<lop::score::ScoreFile> load_all(const std::string& dir, int quantization) {
  auto corpus = lop::trainer::Corpus::from_directory(dir, quantization);
  std::vector<lop::score::ScoreFile> files;
  for (const auto& name : corpus.names()) files.push_back(corpus.load(name));
  return files;
}

lop::score::OrchestraLayout corpus_layout(std::span<const lop::score::ScoreFile> files, lop::Diagnostics& diag) {
  std::vector<std::vector<lop::score::PianoRoll>> parts;
  for (const auto& f : files) parts.push_back(f.orchestra);
  return lop::score::build_layout(parts, &diag);
}

template <typename T>
void env_override(const char* name, T& value) {
  if (const char* v = std::getenv(name); v && *v) {
    if constexpr (std::is_same_v<T, std::string>) value = v;
    else value = static_cast<T>(std::stoll(v));
  }
}

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projective orchestration with conditional RBMs"};
  app.require_subcommand(1);

  // ingest
  std::string in_path, in_format, out_path;
  int quantization = 4;
  auto* ingest = app.add_subcommand("ingest", "Convert a MIDI or JSON score to the JSON piano-roll format");
  ingest->add_option("--input", in_path)->required();
  ingest->add_option("--quantization", quantization)->check(CLI::PositiveNumber);
  ingest->add_option("--format", in_format)->check(CLI::IsMember({"midi", "json"}));
  ingest->add_option("--out", out_path);

  // synth
  std::string synth_out, synth_rules = "register-split";
  lop::trainer::SyntheticOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Write a synthetic piano/orchestra corpus");
  synth->add_option("--out", synth_out)->required();
  synth->add_option("--rules", synth_rules)->check(CLI::IsMember({"register-split", "sustained-chords"}));
  synth->add_option("--files", synth_opts.n_files);
  synth->add_option("--quarters", synth_opts.length_quarters);
  synth->add_option("--density", synth_opts.density);
  synth->add_option("--durations", synth_opts.min_duration_quarters, "Allowed chord durations in quarters");
  synth->add_option("--quantization", synth_opts.quantization);
  synth->add_option("--seed", synth_opts.seed);

  // train
  std::string config_path, corpus_dir, model_out, log_path;
  auto* train = app.add_subcommand("train", "Train a model on a corpus directory");
  train->add_option("--config", config_path);
  train->add_option("--corpus", corpus_dir)->required();
  train->add_option("--out", model_out)->required();
  train->add_option("--log", log_path);

  // project
  std::string model_path, piano_path, project_out, project_gran = "frame";
  lop::ebm::SamplingConfig sampling;
  auto* project = app.add_subcommand("project", "Orchestrate a piano score");
  project->add_option("--model", model_path)->required();
  project->add_option("--piano", piano_path)->required();
  project->add_option("--seed", sampling.seed);
  project->add_option("--gibbs-steps", sampling.gibbs_steps);
  project->add_option("--threshold", sampling.threshold);
  project->add_option("--granularity", project_gran)->check(CLI::IsMember({"frame", "event"}));
  project->add_option("--out", project_out);

  // eval
  std::string eval_model, baseline, eval_corpus, eval_gran = "event", report_fmt = "json";
  int eval_q = 0;
  int eval_horizon = 4;
  std::uint64_t eval_seed = 0;
  bool corrupt = false;
  auto* evalc = app.add_subcommand("eval", "Score a model or baseline on a corpus directory");
  auto* model_opt = evalc->add_option("--model", eval_model);
  auto* baseline_opt = evalc->add_option("--baseline", baseline)->check(CLI::IsMember({"random", "repeat"}));
  model_opt->excludes(baseline_opt);
  evalc->add_option("--corpus", eval_corpus)->required();
  evalc->add_option("--granularity", eval_gran)->check(CLI::IsMember({"frame", "event"}));
  evalc->add_option("--quantization", eval_q);
  evalc->add_option("--horizon", eval_horizon, "Baseline context length");
  evalc->add_option("--seed", eval_seed);
  evalc->add_option("--report", report_fmt)->check(CLI::IsMember({"json", "markdown"}));
  evalc->add_flag("--corrupt-piano", corrupt, "Also score with every piano frame silenced");

  // bias
  std::string bias_corpus, bias_fmt = "markdown";
  std::vector<int> bias_qs{4, 8};
  auto* bias = app.add_subcommand("bias", "Repeat-baseline accuracy across quantizations and at event level");
  bias->add_option("--corpus", bias_corpus)->required();
  bias->add_option("--quantizations", bias_qs);
  bias->add_option("--report", bias_fmt)->check(CLI::IsMember({"json", "markdown"}));

  // serve
  std::string models_dir = "models";
  lop::live::ServerOptions server_opts;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the live WebSocket server");
  serve->add_option("--models-dir", models_dir);
  serve->add_option("--port", port);
  serve->add_option("--metronome-ms", server_opts.metronome_ms);
  serve->add_option("--address", server_opts.address);

  // bench
  lop::live::LatencyBenchOptions bench_opts;
  std::string bench_kind = "crbm";
  auto* bench = app.add_subcommand("bench", "Measure live tick latency on a random model");
  bench->add_option("--kind", bench_kind)->check(CLI::IsMember({"rbm", "crbm", "fgcrbm"}));
  bench->add_option("--dim", bench_opts.orchestra_dim);
  bench->add_option("--hidden", bench_opts.n_hidden);
  bench->add_option("--factors", bench_opts.n_factors);
  bench->add_option("--gibbs-steps", bench_opts.gibbs_steps);
  bench->add_option("--horizon", bench_opts.horizon);
  bench->add_option("--ticks", bench_opts.ticks);
  bench->add_option("--seed", bench_opts.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      lop::Diagnostics diag;
      auto ext = fs::path(in_path).extension().string();
      if (in_format.empty()) in_format = (ext == ".mid" || ext == ".midi") ? "midi" : "json";
      std::vector<lop::score::PianoRoll> parts;
      if (in_format == "midi") {
        const auto bytes = lop::score::read_bytes(in_path);
        parts = lop::score::parse_midi(bytes, quantization, &diag);
      } else {
        for (auto& r : lop::score::rolls_from_json(read_json(in_path)))
          parts.push_back(lop::score::requantize(r, quantization));
      }
      print_warnings(diag);
      write_text(out_path, lop::score::rolls_to_json(parts).dump() + "\n");
    } else if (*synth) {
      synth_opts.rules = lop::trainer::parse_rule_set(synth_rules);
      fs::create_directories(synth_out);
      for (const auto& f : lop::trainer::generate_synthetic_corpus(synth_opts))
        lop::score::save_score_file(f, (fs::path(synth_out) / (f.name + ".json")).string());
      std::cerr << "wrote " << synth_opts.n_files << " files to " << synth_out << "\n";
    } else if (*train) {
      auto config = config_path.empty() ? lop::trainer::TrainingConfig{}
                                        : lop::trainer::TrainingConfig::from_json(read_json(config_path));
      config.validate();
      lop::Diagnostics diag;
      auto corpus = lop::trainer::Corpus::from_directory(corpus_dir, config.quantization);
      const auto split = lop::trainer::split_corpus(corpus.names(), {0.8, 0.1, 0.1}, config.seed, &diag);
      auto result = lop::trainer::train(config, corpus, split, &diag);
      print_warnings(diag);
      lop::save_model(result.model, model_out);
      auto log = result.log.to_json();
      log["split"] = {{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
      if (!log_path.empty()) write_text(log_path, log.dump(2) + "\n");
      std::cerr << "best epoch " << result.log.best_epoch << ", validation accuracy "
                << result.log.best_validation_accuracy.value_or(0.0) << "%\n";
    } else if (*project) {
      sampling.validate();
      const auto model = lop::load_model(model_path);
      lop::Diagnostics diag;
      const auto file = lop::score::load_score_file(piano_path, model.quantization, &diag);
      const auto piano = lop::score::piano_states(file.piano, &diag);
      print_warnings(diag);
      const auto orch = lop::projection::project_score(model, piano, sampling,
                                                       lop::projection::parse_granularity(project_gran));
      auto parts = lop::score::states_to_rolls(orch, model.layout);
      parts.insert(parts.begin(), file.piano);
      write_text(project_out, lop::score::rolls_to_json(parts).dump() + "\n");
    } else if (*evalc) {
      if (eval_model.empty() && baseline.empty()) throw std::invalid_argument("eval needs --model or --baseline");
      const auto gran = lop::projection::parse_granularity(eval_gran);
      lop::Diagnostics diag;
      json out;
      std::string md;
      if (!eval_model.empty()) {
        const auto model = lop::load_model(eval_model);
        const auto split = aligned_corpus(eval_corpus, eval_q > 0 ? eval_q : model.quantization, model.layout, diag);
        lop::ebm::SamplingConfig cfg;
        cfg.seed = eval_seed;
        if (model.training_config.contains("validation_gibbs_steps"))
          cfg.gibbs_steps = model.training_config["validation_gibbs_steps"].get<int>();
        if (model.training_config.contains("validation_threshold"))
          cfg.threshold = model.training_config["validation_threshold"].get<double>();
        const auto id = fs::path(eval_model).stem().string();
        if (corrupt) {
          auto rep = lop::eval::corrupted_piano_eval(model, split, gran, cfg);
          rep.normal.model_id = rep.corrupted.model_id = id;
          if (eval_q > 0) rep.normal.quantization = rep.corrupted.quantization = eval_q;
          out = rep.to_json();
          md = rep.normal.to_markdown() + rep.corrupted.to_markdown();
        } else {
          auto rep = lop::eval::evaluate_model(model, split, gran, cfg);
          rep.model_id = id;
          if (eval_q > 0) rep.quantization = eval_q;
          out = rep.to_json();
          md = rep.to_markdown();
        }
      } else {
        const int q = eval_q > 0 ? eval_q : 4;
        const auto files = load_all(eval_corpus, q);
        const auto layout = corpus_layout(files, diag);
        std::vector<lop::score::AlignedPair> split;
        for (const auto& f : files) split.push_back(lop::score::align_file(f, layout, &diag));
        std::unique_ptr<lop::projection::FramePredictor> pred;
        if (baseline == "random") pred = std::make_unique<lop::eval::RandomBaseline>(layout.total_dim());
        else pred = std::make_unique<lop::eval::RepeatBaseline>(layout.total_dim());
        auto rep = lop::eval::evaluate(*pred, split, static_cast<std::size_t>(eval_horizon), gran, eval_seed);
        out = rep.to_json();
        md = rep.to_markdown();
      }
      print_warnings(diag);
      write_text("-", report_fmt == "json" ? out.dump(2) : md);
    } else if (*bias) {
      if (bias_qs.empty()) throw std::invalid_argument("bias needs at least one quantization");
      const auto files = load_all(bias_corpus, 0);
      lop::Diagnostics diag;
      const auto layout = corpus_layout(files, diag);
      const auto rows = lop::eval::bias_report(files, layout, bias_qs);
      if (bias_fmt == "markdown") {
        write_text("-", lop::eval::bias_report_markdown(rows));
      } else {
        json j = json::array();
        for (const auto& r : rows)
          j.push_back({{"label", r.label},
                       {"granularity", std::string(lop::projection::to_string(r.granularity))},
                       {"Q", r.quantization},
                       {"accuracy_percent", r.accuracy}});
        write_text("-", j.dump(2));
      }
    } else if (*serve) {
      env_override("LOP_MODELS_DIR", models_dir);
      env_override("LOP_PORT", port);
      env_override("LOP_METRONOME_MS", server_opts.metronome_ms);
      server_opts.port = static_cast<std::uint16_t>(port);
      auto registry = std::make_shared<const lop::live::ModelRegistry>(lop::live::ModelRegistry::from_directory(models_dir));
      lop::live::Server server(server_opts, registry);
      const auto bound = server.start();
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << registry->ids().size() << " model(s) on " << server_opts.address << ":" << bound
                << "\n";
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
    } else if (*bench) {
      bench_opts.kind = lop::ebm::parse_model_kind(bench_kind);
      const auto r = lop::live::run_latency_bench(bench_opts);
      std::cout << r.to_json().dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
