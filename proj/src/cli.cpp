#include "km/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "km/data_io.hpp"
#include "km/interpret.hpp"
#include "km/metrics.hpp"
#include "km/model_io.hpp"
#include "km/oracles.hpp"
#include "km/rng.hpp"
#include "km/trainer.hpp"

namespace km {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int log_level() {
  const char* env = std::getenv("KM_LOG");
  if (env == nullptr) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[km] " << msg << '\n';
}

struct DatasetOptions {
  std::string dataset = "synthetic";
  std::string path;
  int users = 20;
  int items = 40;
  double train_fraction = 0.8;
};

void add_dataset_flags(CLI::App* cmd, DatasetOptions* opts) {
  cmd->add_option("--dataset", opts->dataset,
                  "Dataset kind: ml100k, ml1m, synthetic, jsonl")
      ->check(CLI::IsMember({"ml100k", "ml1m", "synthetic", "jsonl"}));
  cmd->add_option("--path", opts->path, "Ratings file for ml100k/ml1m/jsonl");
  cmd->add_option("--users", opts->users, "Synthetic grid users");
  cmd->add_option("--items", opts->items, "Synthetic grid items");
  cmd->add_option("--train-fraction", opts->train_fraction,
                  "Train share of the random split for ml100k/ml1m");
}

RatingDataset load_dataset(const DatasetOptions& opts, uint64_t seed) {
  if (opts.dataset == "synthetic") {
    return generate_synthetic({opts.users, opts.items, seed});
  }
  if (opts.path.empty()) {
    throw std::invalid_argument("--path is required for dataset '" +
                                opts.dataset + "'");
  }
  if (!fs::exists(opts.path)) {
    throw std::invalid_argument("dataset path does not exist: " + opts.path);
  }
  if (opts.dataset == "jsonl") {
    return load_jsonl(fs::path(opts.path));
  }
  RatingDataset data = opts.dataset == "ml100k" ? load_ml100k(opts.path)
                                                : load_ml1m(opts.path);
  return split_dataset(data, {opts.train_fraction, seed});
}

void add_train_flags(CLI::App* cmd, TrainConfig* cfg, std::string* eig_mode) {
  cmd->add_option("--dim", cfg->dim, "Model dimension D");
  cmd->add_option("--i-bcd", cfg->i_bcd, "Block coordinate descent passes");
  cmd->add_option("--gamma", cfg->dual.gamma, "Regularization weight");
  cmd->add_option("--eps", cfg->dual.eps, "Dual descent stopping tolerance");
  cmd->add_option("--max-iters", cfg->dual.max_iters,
                  "Dual descent iteration cap");
  cmd->add_option("--eig-mode", *eig_mode, "Eigensolver: exact or lanczos")
      ->check(CLI::IsMember({"exact", "lanczos"}));
  cmd->add_option("--lanczos-a", cfg->dual.lanczos_a,
                  "Control parameter of the Lanczos stopping threshold");
  cmd->add_option("--i-rand", cfg->rounding.i_rand,
                  "Randomization samples per item solve");
  cmd->add_option("--lambda-u", cfg->lambda_u, "User-block ridge");
  cmd->add_option("--mu-i", cfg->mu_i, "Item-block ridge");
  cmd->add_option("--fw-max-iters", cfg->fw.max_iters,
                  "Conditional-gradient iteration cap");
  cmd->add_option("--fw-tol", cfg->fw.tol, "Conditional-gradient gap tolerance");
  cmd->add_option("--parallelism", cfg->parallelism, "Worker thread cap");
  cmd->add_flag("--surrogate-linesearch", cfg->dual.surrogate_linesearch,
                "Price dual trial steps from the current spectrum instead of "
                "per-trial eigensolves");
}

ModelFile to_model_file(const KmParams& params, const RatingDataset& data) {
  ModelFile m;
  m.dim = params.dim;
  m.r_max = data.r_max();
  m.params.dim = params.dim;
  int slot = 0;
  for (const auto& [u, th] : params.theta) {
    m.user_ids.push_back(data.raw_user_id(u));
    m.params.theta.emplace(slot++, th);
  }
  slot = 0;
  for (const auto& [i, ps] : params.psi) {
    m.item_ids.push_back(data.raw_item_id(i));
    m.params.psi.emplace(slot++, ps);
  }
  return m;
}

// Rekey model parameters onto the dataset's dense indices via raw ids.
KmParams align_model(const ModelFile& model, const RatingDataset& data) {
  KmParams out;
  out.dim = model.dim;
  for (size_t slot = 0; slot < model.user_ids.size(); ++slot) {
    const int dense = data.dense_user(model.user_ids[slot]);
    if (dense >= 0) {
      out.theta.emplace(dense, model.params.theta.at(static_cast<int>(slot)));
    }
  }
  for (size_t slot = 0; slot < model.item_ids.size(); ++slot) {
    const int dense = data.dense_item(model.item_ids[slot]);
    if (dense >= 0) {
      out.psi.emplace(dense, model.params.psi.at(static_cast<int>(slot)));
    }
  }
  return out;
}

int cmd_train(const DatasetOptions& data_opts, TrainConfig cfg,
              const std::string& eig_mode, const std::string& output_dir) {
  cfg.dual.eig_mode = eig_mode == "lanczos" ? EigMode::Lanczos : EigMode::Exact;
  const RatingDataset data = load_dataset(data_opts, cfg.seed);
  log_info("training on " + std::to_string(data.triples().size()) +
           " ratings (" + std::to_string(data.train_count()) + " train)");
  const auto [params, report] = bcd_train(data, cfg);

  fs::create_directories(output_dir);
  save_model(to_model_file(params, data), fs::path(output_dir) / "model.json");
  save_report(report, fs::path(output_dir) / "report.json");
  save_rmse_csv(report, fs::path(output_dir) / "rmse.csv");
  log_info("final training RMSE " +
           std::to_string(report.rmse_per_iteration.back()));
  return 0;
}

int cmd_predict(const DatasetOptions& data_opts, const std::string& model_path,
                uint64_t seed, const std::string& output_dir) {
  const ModelFile model = load_model(model_path);
  const RatingDataset data = load_dataset(data_opts, seed);
  const KmParams params = align_model(model, data);

  fs::create_directories(output_dir);
  std::ofstream out(fs::path(output_dir) / "predictions.csv");
  out << "user,item,p,prediction\n";
  int evaluated = 0;
  for (const auto& t : data.triples()) {
    if (t.split != Split::Test) continue;
    auto th = params.theta.find(t.user);
    auto ps = params.psi.find(t.item);
    if (th == params.theta.end() || ps == params.psi.end()) continue;
    out << data.raw_user_id(t.user) << ',' << data.raw_item_id(t.item) << ','
        << t.p << ',' << km_probability(th->second, ps->second) << '\n';
    ++evaluated;
  }
  int skipped = 0;
  const double nrmse = test_nrmse(params, data, &skipped);
  std::cout << "test_nrmse " << nrmse << " over " << evaluated
            << " pairs (skipped " << skipped << " untrained)\n";
  return 0;
}

int cmd_interpret(const DatasetOptions& data_opts,
                  const std::string& model_path, uint64_t seed,
                  double like_threshold, bool include_unliked,
                  const std::string& output_dir) {
  const ModelFile model = load_model(model_path);
  const RatingDataset data = load_dataset(data_opts, seed);
  const KmParams params = align_model(model, data);
  if (params.psi.empty()) {
    throw std::invalid_argument("model covers no items of this dataset");
  }

  const AdjacencyMatrix adjacency = build_adjacency(params.psi);
  const InfluenceScores scores = influence_scores(adjacency);
  fs::create_directories(output_dir);

  std::ofstream inf(fs::path(output_dir) / "influence.csv");
  inf << "item,score\n";
  long edges = 0;
  int maximal = 0;
  for (int k = 0; k < adjacency.size(); ++k) {
    inf << data.raw_item_id(scores.items[k]) << ',' << scores.scores[k] << '\n';
    for (int j = 0; j < adjacency.size(); ++j) edges += adjacency.entries[k][j];
    maximal += (scores.scores[k] == 1.0);
  }

  nlohmann::json stats;
  stats["items"] = adjacency.size();
  stats["relations"] = edges;
  stats["maximally_supported_items"] = maximal;
  std::ofstream sj(fs::path(output_dir) / "adjacency_stats.json");
  sj << stats.dump(2) << '\n';

  const auto rows =
      mining_accuracy(params, data, like_threshold, !include_unliked);
  std::ofstream acc(fs::path(output_dir) / "accuracy.csv");
  acc << "item,user,rated_count,accuracy\n";
  for (const auto& row : rows) {
    acc << data.raw_item_id(row.item) << ',' << data.raw_user_id(row.user)
        << ',' << row.rated_count << ',' << row.accuracy << '\n';
  }
  log_info(std::to_string(rows.size()) + " accuracy rows over " +
           std::to_string(maximal) + " maximally supported items");
  return 0;
}

int cmd_bench_bqp(const DatasetOptions& data_opts, TrainConfig cfg,
                  const std::string& output_dir,
                  const std::string& iterate_log) {
  const RatingDataset data = load_dataset(data_opts, cfg.seed);
  std::vector<int> train_items;
  std::vector<std::vector<std::pair<int, double>>> by_item(data.num_items());
  for (const auto& t : data.triples()) {
    if (t.split == Split::Train) by_item[t.item].push_back({t.user, t.p});
  }
  std::vector<int> users;
  for (int u = 0; u < data.num_users(); ++u) users.push_back(u);
  const auto thetas = init_theta(users, cfg.dim, cfg.seed);

  std::vector<LiftedBqp> instances;
  for (int i = 0; i < data.num_items(); ++i) {
    if (by_item[i].empty()) continue;
    std::vector<SimplexVector> th;
    std::vector<double> ps;
    for (const auto& [u, p] : by_item[i]) {
      th.push_back(thetas.at(u));
      ps.push_back(p);
    }
    instances.push_back(lift(build_bqp(th, ps, cfg.mu_i)));
  }
  log_info("benchmarking " + std::to_string(instances.size()) +
           " item subproblems at D=" + std::to_string(cfg.dim));

  struct MethodSpec {
    std::string name;
    bool enhanced;
    EigMode mode;
  };
  // The enhanced rows run the fully accelerated configuration: trial steps
  // priced from the current spectrum instead of per-trial eigensolves.
  const std::vector<MethodSpec> methods = {
      {"plain_gd", false, EigMode::Exact},
      {"enhanced_gd_exact", true, EigMode::Exact},
      {"enhanced_gd_lanczos", true, EigMode::Lanczos},
  };

  fs::create_directories(output_dir);
  std::ofstream csv(fs::path(output_dir) / "bench.csv");
  csv << "method,D,solves,total_seconds,iterations,grad_eigensolves,"
         "ls_eigensolves,converged\n";
  for (const auto& method : methods) {
    DualConfig dual = cfg.dual;
    dual.eig_mode = method.mode;
    // Surrogate trial pricing thrashes against Ritz-approximation jitter in
    // the rollback safeguard, so the approximate-spectrum row keeps exact
    // trial evaluations.
    dual.surrogate_linesearch = method.enhanced && method.mode == EigMode::Exact;
    long iters = 0, grad_solves = 0, ls_solves = 0, converged = 0;
    const auto start = Clock::now();
    for (size_t k = 0; k < instances.size(); ++k) {
      const Eigen::VectorXd u0 = Eigen::VectorXd::Ones(cfg.dim + 1);
      DualConfig local = dual;
      const bool record = !iterate_log.empty() && k == 0;
      local.record_iterates = record;
      const DualState st = method.enhanced ? solve_enhanced_gd(instances[k], local, u0)
                                           : solve_gd(instances[k], local, u0);
      iters += st.iterations;
      grad_solves += st.grad_eigensolves;
      ls_solves += st.ls_eigensolves;
      converged += st.converged;
      if (record) {
        std::ofstream il(iterate_log + "." + method.name + ".csv");
        dump_iterates_csv(st, il);
      }
    }
    const double secs =
        std::chrono::duration<double>(Clock::now() - start).count();
    csv << method.name << ',' << cfg.dim << ',' << instances.size() << ','
        << secs << ',' << iters << ',' << grad_solves << ',' << ls_solves
        << ',' << converged << '\n';
    log_info(method.name + ": " + std::to_string(secs) + " s");
  }
  return 0;
}

int cmd_bench_eig(int dim, int samples, double lanczos_a, uint64_t seed,
                  const std::string& output_dir) {
  if (dim < 2 || samples < 1) {
    throw std::invalid_argument("bench-eig needs --dim >= 2 and --samples >= 1");
  }
  const int n = dim + 1;
  fs::create_directories(output_dir);
  std::ofstream csv(fs::path(output_dir) / "bencheig.csv");
  csv << "sample,n,exact_seconds,lanczos_seconds,m,beta_next,delta,"
         "dominant_error\n";
  Rng rng(derive_stream(seed, 0xe16));
  for (int s = 0; s < samples; ++s) {
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) {
        C(i, j) = C(j, i) = rng.next_normal();
      }
    }
    const auto t0 = Clock::now();
    const SymmetricSpectrum sp = exact_evd(C);
    const double exact_secs =
        std::chrono::duration<double>(Clock::now() - t0).count();

    const TraceThreshold th = trace_threshold(C, lanczos_a);
    const Eigen::VectorXd p1 =
        Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    const auto t1 = Clock::now();
    const LanczosFactorization fac = lanczos(C, p1, th.delta, n);
    const RitzPairs pairs = ritz_pairs(fac);
    const double lanczos_secs =
        std::chrono::duration<double>(Clock::now() - t1).count();

    const double dominant_err =
        std::abs(pairs.values[0] - sp.eigenvalues[0]);
    csv << s << ',' << n << ',' << exact_secs << ',' << lanczos_secs << ','
        << fac.m << ',' << fac.beta_next << ',' << th.delta << ','
        << dominant_err << '\n';
  }
  return 0;
}

int cmd_synth(const SyntheticConfig& cfg, const std::string& out_path) {
  const RatingDataset data = generate_synthetic(cfg);
  save_jsonl(data, fs::path(out_path));
  log_info("wrote " + std::to_string(data.triples().size()) + " ratings to " +
           out_path);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Kolmogorov-model learning toolkit"};
  app.require_subcommand(1);

  DatasetOptions data_opts;
  TrainConfig train_cfg;
  std::string eig_mode = "exact";
  std::string output_dir = "out";
  std::string model_path;
  std::string iterate_log;
  double like_threshold = 0.5;
  bool include_unliked = false;
  int eig_samples = 20;

  auto* train = app.add_subcommand("train", "Fit model parameters");
  add_dataset_flags(train, &data_opts);
  add_train_flags(train, &train_cfg, &eig_mode);
  train->add_option("--seed", train_cfg.seed, "Seed for all randomness");
  train->add_option("--output-dir", output_dir, "Output directory");

  auto* predict = app.add_subcommand("predict", "Evaluate a trained model");
  add_dataset_flags(predict, &data_opts);
  predict->add_option("--model", model_path, "Model file")->required();
  predict->add_option("--seed", train_cfg.seed, "Split seed (match training)");
  predict->add_option("--output-dir", output_dir, "Output directory");

  auto* interpret =
      app.add_subcommand("interpret", "Mine logical relations from a model");
  add_dataset_flags(interpret, &data_opts);
  interpret->add_option("--model", model_path, "Model file")->required();
  interpret->add_option("--seed", train_cfg.seed, "Split seed (match training)");
  interpret->add_option("--like-threshold", like_threshold,
                        "Empirical probability counted as liking an item");
  interpret->add_flag("--include-unliked-anchors", include_unliked,
                      "Keep users below the threshold on the anchor item");
  interpret->add_option("--output-dir", output_dir, "Output directory");

  auto* bench =
      app.add_subcommand("bench-bqp", "Time the item-subproblem solvers");
  add_dataset_flags(bench, &data_opts);
  add_train_flags(bench, &train_cfg, &eig_mode);
  bench->add_option("--seed", train_cfg.seed, "Seed for all randomness");
  bench->add_option("--output-dir", output_dir, "Output directory");
  bench->add_option("--iterate-log", iterate_log,
                    "Prefix for per-method iterate CSVs of the first solve");

  auto* bencheig =
      app.add_subcommand("bench-eig", "Time exact vs approximate spectra");
  bencheig->add_option("--dim", train_cfg.dim, "Model dimension D");
  bencheig->add_option("--samples", eig_samples, "Matrices to test");
  bencheig->add_option("--lanczos-a", train_cfg.dual.lanczos_a,
                       "Threshold control parameter");
  bencheig->add_option("--seed", train_cfg.seed, "Seed");
  bencheig->add_option("--output-dir", output_dir, "Output directory");

  std::string synth_out = "synthetic.jsonl";
  SyntheticConfig synth_cfg;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--users", synth_cfg.num_users, "Grid users");
  synth->add_option("--items", synth_cfg.num_items, "Grid items");
  synth->add_option("--seed", synth_cfg.seed, "Seed");
  synth->add_option("--out", synth_out, "Output jsonl path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << '\n';
    return 2;
  }

  try {
    if (train->parsed()) {
      return cmd_train(data_opts, train_cfg, eig_mode, output_dir);
    }
    if (predict->parsed()) {
      return cmd_predict(data_opts, model_path, train_cfg.seed, output_dir);
    }
    if (interpret->parsed()) {
      return cmd_interpret(data_opts, model_path, train_cfg.seed,
                           like_threshold, include_unliked, output_dir);
    }
    if (bench->parsed()) {
      train_cfg.dual.eig_mode =
          eig_mode == "lanczos" ? EigMode::Lanczos : EigMode::Exact;
      return cmd_bench_bqp(data_opts, train_cfg, output_dir, iterate_log);
    }
    if (bencheig->parsed()) {
      return cmd_bench_eig(train_cfg.dim, eig_samples,
                           train_cfg.dual.lanczos_a, train_cfg.seed,
                           output_dir);
    }
    if (synth->parsed()) {
      return cmd_synth(synth_cfg, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace km
