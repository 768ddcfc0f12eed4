#include "dgcn/data.hpp"
#include "dgcn/experiment.hpp"
#include "dgcn/gradcheck.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace dgcn;

struct ModelFlags {
  std::string model = "wd-gcn";
  std::string task = "vertex";
  int gc = 0, lstm = 0, fc = 0;
  double dropout = 0.0;
  bool candidate_tanh = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "model kind");
    cmd->add_option("--task", task, "vertex|graph")
        ->check(CLI::IsMember({"vertex", "graph"}));
    cmd->add_option("--gc", gc, "GC layer nodes (M)");
    cmd->add_option("--lstm", lstm, "LSTM layer nodes (N)");
    cmd->add_option("--fc", fc, "first FC layer nodes");
    cmd->add_option("--dropout", dropout, "dropout rate");
    cmd->add_flag("--candidate-tanh", candidate_tanh,
                  "use tanh for the LSTM candidate activation");
  }

  ModelSpec to_spec(int num_vertices, int feature_dim, int num_classes) const {
    auto kind = parse_model_kind(model);
    if (!kind) throw CLI::ValidationError("--model", "unknown model '" + model + "'");
    ModelSpec spec;
    spec.kind = *kind;
    spec.task = task == "graph" ? TaskKind::Graph : TaskKind::Vertex;
    spec.num_vertices = num_vertices;
    spec.feature_dim = feature_dim;
    spec.num_classes = num_classes;
    spec.gc_width = gc;
    spec.lstm_width = lstm;
    spec.fc_width = fc;
    spec.dropout = dropout;
    spec.candidate_tanh = candidate_tanh;
    return spec;
  }
};

Dataset load_or_die(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (fs::is_directory(p)) p /= "manifest.json";
  if (!fs::exists(p)) {
    throw std::runtime_error("dataset not found: " + p.string());
  }
  return load_dataset(p);
}

struct DatasetDims {
  int num_vertices, feature_dim, num_classes;
};

DatasetDims dims_of(const Dataset& ds) {
  if (ds.task == TaskKind::Vertex) {
    const auto& d = ds.vertex.value();
    return {d.graph.num_vertices(), d.graph.feature_dim(), d.num_classes};
  }
  const auto& d = ds.graph.value();
  return {d.items.front().graph.num_vertices(),
          d.items.front().graph.feature_dim(), d.num_classes};
}

int cmd_synth(const std::string& out_dir, const SynthConfig& cfg) {
  VertexDataset d = synth_dynamic_communities(cfg);
  Dataset ds{TaskKind::Vertex, std::move(d), std::nullopt};
  const auto manifest = save_dataset(ds, out_dir);
  std::cout << "dataset " << manifest.string() << "\n";
  return 0;
}

int cmd_params(const ModelSpec& spec) {
  for (const auto& entry : count_params_breakdown(spec)) {
    std::printf("layer %-12s %ld\n", entry.layer.c_str(), entry.count);
  }
  std::printf("total %ld\n", count_params(spec));
  return 0;
}

int cmd_gradcheck() {
  bool all_pass = true;
  for (const auto& entry : run_gradient_check_suite()) {
    std::printf("%-28s max_rel_err %.3e %s\n", entry.name.c_str(),
                entry.max_rel_err, entry.pass ? "pass" : "FAIL");
    all_pass = all_pass && entry.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_train(const std::string& data_path, const ModelFlags& flags,
              const std::string& out_dir, uint64_t seed, int epochs,
              double test_frac, double val_frac) {
  Dataset ds = load_or_die(data_path);
  const DatasetDims dims = dims_of(ds);
  ModelFlags f = flags;
  f.task = ds.task == TaskKind::Graph ? "graph" : "vertex";
  ModelSpec spec = f.to_spec(dims.num_vertices, dims.feature_dim, dims.num_classes);

  TrainConfig tc;
  tc.max_epochs = epochs;
  tc.seed = seed;
  Model model(spec, seed);
  SingleRunResult result =
      ds.task == TaskKind::Vertex
          ? run_single_vertex(model, ds.vertex.value(), test_frac, val_frac, tc)
          : run_single_graph(model, ds.graph.value(), test_frac, val_frac, tc);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream hist(fs::path(out_dir) / "history.tsv", std::ios::binary);
    for (const EpochRecord& r : result.train.history) {
      char line[160];
      std::snprintf(line, sizeof(line), "%d\t%.17g\t%.17g\t%.17g\n", r.epoch,
                    r.train_loss, r.val_accuracy, r.val_f1);
      hist << line;
    }
  }
  model.set_param_vector(result.train.best_params_accuracy);
  save_params(model, fs::path(out_dir) / "best_accuracy.json");
  model.set_param_vector(result.train.best_params_f1);
  save_params(model, fs::path(out_dir) / "best_f1.json");

  std::printf("best_epoch_accuracy %d\n", result.train.best_epoch_accuracy);
  std::printf("best_epoch_f1 %d\n", result.train.best_epoch_f1);
  std::printf("test_accuracy %.6f\n", result.test_accuracy);
  std::printf("test_f1 %.6f\n", result.test_f1);
  return 0;
}

int cmd_evaluate(const std::string& data_path, const ModelFlags& flags,
                 const std::string& params_path) {
  Dataset ds = load_or_die(data_path);
  const DatasetDims dims = dims_of(ds);
  ModelFlags f = flags;
  f.task = ds.task == TaskKind::Graph ? "graph" : "vertex";
  ModelSpec spec = f.to_spec(dims.num_vertices, dims.feature_dim, dims.num_classes);
  Model model(spec, 0);
  load_params(model, params_path);

  Rng rng(0);
  if (ds.task == TaskKind::Vertex) {
    const auto& d = ds.vertex.value();
    MatrixSequence probs = model.forward(d.graph, false, rng);
    std::printf("accuracy %.6f\n", accuracy(probs, d.labels, d.masks));
    std::printf("unweighted_f1 %.6f\n",
                unweighted_f1(probs, d.labels, d.masks, d.num_classes));
  } else {
    const auto& d = ds.graph.value();
    std::vector<int> pred, truth;
    for (const auto& item : d.items) {
      MatrixSequence probs = model.forward(item.graph, false, rng);
      for (size_t t = 0; t < probs.size(); ++t) {
        if (item.labels.step_mask(t) == 0.0) continue;
        pred.push_back(argmax_class(probs[t].row(0)));
        Eigen::Index col;
        item.labels.labels.row(t).maxCoeff(&col);
        truth.push_back(static_cast<int>(col));
      }
    }
    std::printf("accuracy %.6f\n", accuracy_from_classes(pred, truth));
    std::printf("unweighted_f1 %.6f\n",
                unweighted_f1_from_classes(pred, truth, d.num_classes));
  }
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

int cmd_mccv(const std::string& data_path, const std::string& models_csv,
             const ModelFlags& flags, int iterations, double test_frac,
             double val_frac, uint64_t seed, int epochs) {
  Dataset ds = load_or_die(data_path);
  const DatasetDims dims = dims_of(ds);

  std::vector<ModelSpec> specs;
  for (const std::string& name : split_list(models_csv)) {
    ModelFlags f = flags;
    f.model = name;
    f.task = ds.task == TaskKind::Graph ? "graph" : "vertex";
    specs.push_back(f.to_spec(dims.num_vertices, dims.feature_dim, dims.num_classes));
  }
  if (specs.empty()) throw CLI::ValidationError("--models", "no models given");

  MccvConfig cfg;
  cfg.iterations = iterations;
  cfg.test_fraction = test_frac;
  cfg.validation_fraction = val_frac;
  cfg.seed = seed;
  cfg.train.max_epochs = epochs;

  const auto scores = ds.task == TaskKind::Vertex
                          ? run_mccv_vertex(ds.vertex.value(), specs, cfg)
                          : run_mccv_graph(ds.graph.value(), specs, cfg);

  for (const ModelScores& s : scores) {
    for (size_t it = 0; it < s.accuracy.size(); ++it) {
      std::printf("iter %s %zu accuracy %.6f\n", s.model.c_str(), it, s.accuracy[it]);
      std::printf("iter %s %zu f1 %.6f\n", s.model.c_str(), it, s.f1[it]);
    }
  }
  for (const ModelScores& s : scores) {
    std::printf("summary %s accuracy %.6f +- %.6f\n", s.model.c_str(),
                mean(s.accuracy), stddev(s.accuracy));
    std::printf("summary %s f1 %.6f +- %.6f\n", s.model.c_str(), mean(s.f1),
                stddev(s.f1));
  }
  for (size_t a = 0; a < scores.size(); ++a) {
    for (size_t b = 0; b < scores.size(); ++b) {
      if (a == b) continue;
      for (const char* metric : {"accuracy", "f1"}) {
        const auto& xs = metric == std::string("accuracy") ? scores[a].accuracy
                                                           : scores[a].f1;
        const auto& ys = metric == std::string("accuracy") ? scores[b].accuracy
                                                           : scores[b].f1;
        try {
          std::printf("wilcoxon %s>%s %s p %.6g\n", scores[a].model.c_str(),
                      scores[b].model.c_str(), metric,
                      wilcoxon_signed_rank(xs, ys));
        } catch (const std::invalid_argument& e) {
          std::printf("wilcoxon %s>%s %s error %s\n", scores[a].model.c_str(),
                      scores[b].model.c_str(), metric, e.what());
        }
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic graph convolutional networks: training and evaluation"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dynamic-community dataset");
  std::string synth_out = "synth_dataset";
  SynthConfig synth_cfg;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--vertices", synth_cfg.num_vertices);
  synth->add_option("--steps", synth_cfg.steps);
  synth->add_option("--features", synth_cfg.feature_dim);
  synth->add_option("--classes", synth_cfg.num_classes);
  synth->add_option("--drift", synth_cfg.drift);
  synth->add_option("--noise", synth_cfg.noise);
  synth->add_option("--intra", synth_cfg.intra_edge_prob);
  synth->add_option("--inter", synth_cfg.inter_edge_prob);
  synth->add_option("--labeled-fraction", synth_cfg.labeled_fraction);
  synth->add_option("--seed", synth_cfg.seed);

  // params
  auto* params = app.add_subcommand("params", "print exact parameter counts");
  ModelFlags params_flags;
  params_flags.attach(params);
  int params_d = 0, params_k = 0, params_v = 1;
  params->add_option("--d", params_d, "input feature dimension")->required();
  params->add_option("--k", params_k, "number of classes")->required();
  params->add_option("--V", params_v, "number of vertices (gs-FC term)");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference validation of every backward pass");

  // train
  auto* train = app.add_subcommand("train", "train one model on one split");
  ModelFlags train_flags;
  train_flags.attach(train);
  std::string train_data, train_out = "run";
  uint64_t train_seed = 0;
  int train_epochs = 100;
  double train_test_frac = 0.3, train_val_frac = 0.2;
  train->add_option("--data", train_data, "dataset directory or manifest")->required();
  train->add_option("--out", train_out, "output directory");
  train->add_option("--seed", train_seed);
  train->add_option("--epochs", train_epochs);
  train->add_option("--test-frac", train_test_frac);
  train->add_option("--val-frac", train_val_frac);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "evaluate saved parameters");
  ModelFlags eval_flags;
  eval_flags.attach(evaluate);
  std::string eval_data, eval_params;
  evaluate->add_option("--data", eval_data)->required();
  evaluate->add_option("--params", eval_params, "saved parameter file")->required();

  // mccv
  auto* mccv = app.add_subcommand(
      "mccv", "Monte Carlo cross-validation over a model list with shared splits");
  ModelFlags mccv_flags;
  mccv_flags.attach(mccv);
  std::string mccv_data, mccv_models;
  int mccv_iterations = 10, mccv_epochs = 100;
  double mccv_test_frac = 0.3, mccv_val_frac = 0.2;
  uint64_t mccv_seed = 0;
  mccv->add_option("--data", mccv_data)->required();
  mccv->add_option("--models", mccv_models, "comma-separated model kinds")->required();
  mccv->add_option("--iterations", mccv_iterations);
  mccv->add_option("--test-frac", mccv_test_frac);
  mccv->add_option("--val-frac", mccv_val_frac);
  mccv->add_option("--seed", mccv_seed);
  mccv->add_option("--epochs", mccv_epochs);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_out, synth_cfg);
    if (params->parsed()) {
      return cmd_params(params_flags.to_spec(params_v, params_d, params_k));
    }
    if (gradcheck->parsed()) return cmd_gradcheck();
    if (train->parsed()) {
      return cmd_train(train_data, train_flags, train_out, train_seed,
                       train_epochs, train_test_frac, train_val_frac);
    }
    if (evaluate->parsed()) return cmd_evaluate(eval_data, eval_flags, eval_params);
    if (mccv->parsed()) {
      return cmd_mccv(mccv_data, mccv_models, mccv_flags, mccv_iterations,
                      mccv_test_frac, mccv_val_frac, mccv_seed, mccv_epochs);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
