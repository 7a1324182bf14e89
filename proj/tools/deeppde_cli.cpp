// Command-line front end: dataset generation, operator training and
// evaluation, classical solves, and the PINN / Kolmogorov / BSDE experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "deeppde/experiments.hpp"
#include "deeppde/io.hpp"
#include "deeppde/plot.hpp"
#include "deeppde/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace deeppde;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

json load_config(const GlobalOptions& g) {
  if (g.config_path.empty()) return json::object();
  try {
    return json::parse(read_text_file(g.config_path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

std::uint64_t pick_seed(const GlobalOptions& g, const json& cfg) {
  if (g.seed_given) return g.seed;
  return cfg.value("seed", 0ull);
}

void ensure_out(const GlobalOptions& g) { fs::create_directories(g.out_dir); }

std::string out_path(const GlobalOptions& g, const std::string& name) {
  return (fs::path(g.out_dir) / name).string();
}

// -- problem presets ---------------------------------------------------------

struct ProblemSetup {
  SemilinearPdeSpec pde;
  GrfSpec grf;
  SolverConfig solver;
  int model_resolution = 64;
};

ProblemSetup problem_preset(const std::string& name) {
  ProblemSetup p;
  if (name == "burgers") {
    p.pde.dim = 1;
    p.pde.lengths = {2.0 * M_PI};
    p.pde.diffusion = 0.1;
    p.pde.horizon = 1.0;
    p.pde.nonlinearity = Nonlinearity::burgers_conservative;
    p.grf = GrfSpec{1e6, 10.0, 6.0, 0.0, true};
    p.solver = SolverConfig{SolveMethod::spectral, 128, 1000, true};
  } else if (name == "allen-cahn") {
    p.pde.dim = 1;
    p.pde.lengths = {1.0};
    p.pde.diffusion = 2.0 / 1000.0;
    p.pde.horizon = 3.0;
    p.pde.nonlinearity = Nonlinearity::allen_cahn;
    p.grf = GrfSpec{25e6, std::sqrt(5000.0), 4.0, 0.8, true};
    p.solver = SolverConfig{SolveMethod::spectral, 128, 1000, true};
  } else if (name == "allen-cahn-2d") {
    p.pde.dim = 2;
    p.pde.lengths = {1.0, 1.0};
    p.pde.diffusion = 2.0 / 1000.0;
    p.pde.horizon = 3.0;
    p.pde.nonlinearity = Nonlinearity::allen_cahn;
    p.grf = GrfSpec{25e6, std::sqrt(5000.0), 4.0, 0.8, true};
    p.solver = SolverConfig{SolveMethod::spectral, 128, 1000, true};
    p.model_resolution = 32;
  } else if (name == "reaction-diffusion") {
    p.pde.dim = 1;
    p.pde.lengths = {2.0};
    p.pde.diffusion = 0.05;
    p.pde.horizon = 1.0;
    p.pde.nonlinearity = Nonlinearity::reaction_with_source;
    p.pde.reaction_rate = 2.0;
    p.grf = GrfSpec{1e8, 100.0, 4.0, 0.8, true};
    p.solver = SolverConfig{SolveMethod::fdm, 128, 1000, true};
  } else {
    throw ConfigError("unknown problem preset: " + name);
  }
  return p;
}

ProblemSetup parse_problem(const json& cfg) {
  ProblemSetup p = problem_preset(cfg.value("problem", "burgers"));
  if (cfg.contains("pde")) {
    const json& j = cfg.at("pde");
    p.pde.dim = j.value("dim", p.pde.dim);
    if (j.contains("lengths")) p.pde.lengths = j.at("lengths").get<std::vector<double>>();
    p.pde.diffusion = j.value("diffusion", p.pde.diffusion);
    p.pde.horizon = j.value("horizon", p.pde.horizon);
    if (j.contains("nonlinearity"))
      p.pde.nonlinearity = nonlinearity_from_string(j.at("nonlinearity"));
    p.pde.reaction_rate = j.value("reaction_rate", p.pde.reaction_rate);
  }
  if (cfg.contains("grf")) p.grf = cfg.at("grf").get<GrfSpec>();
  if (cfg.contains("solver")) {
    const json& j = cfg.at("solver");
    if (j.contains("method")) p.solver.method = solve_method_from_string(j.at("method"));
    p.solver.space_steps = j.value("space_steps", p.solver.space_steps);
    p.solver.time_steps = j.value("time_steps", p.solver.time_steps);
    p.solver.dealias = j.value("dealias", p.solver.dealias);
  }
  p.model_resolution = cfg.value("model_resolution", p.model_resolution);
  return p;
}

// -- model presets ------------------------------------------------------------

std::unique_ptr<OperatorModel> parse_model(const json& jm, const std::vector<int>& extents,
                                           const std::vector<double>& lengths) {
  const std::string type = jm.at("type").get<std::string>();
  const int d = static_cast<int>(extents.size());
  if (type == "fno") {
    FnoSpec s;
    s.dim = d;
    s.grid_n = extents[0];
    s.channels = jm.value("channels", 8);
    s.length = jm.value("length", 2);
    s.modes = jm.value("modes", 12);
    s.lift_hidden = jm.value("lift_hidden", std::vector<int>{2 * s.channels});
    s.proj_hidden = jm.value("proj_hidden", std::vector<int>{2 * s.channels});
    s.real_constrained = jm.value("real_constrained", true);
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  if (type == "pcnn") {
    PeriodicCnnSpec s;
    s.extents = extents;
    s.channels = jm.value("channels", std::vector<int>{1, 8, 8, 1});
    const int w = jm.value("half_width", 6);
    s.half_widths.assign(s.channels.size() - 1, std::vector<int>(d, w));
    if (jm.contains("half_widths"))
      s.half_widths = jm.at("half_widths").get<std::vector<std::vector<int>>>();
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  if (type == "encdec") {
    EncDecCnnSpec s;
    s.extents = extents;
    s.channels = jm.value("channels", std::vector<int>{1, 4, 8});
    const int w = jm.value("stride", 2);
    s.kernel.assign(s.channels.size() - 1, std::vector<int>(d, w));
    if (jm.contains("kernel")) s.kernel = jm.at("kernel").get<std::vector<std::vector<int>>>();
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  if (type == "fcnn") {
    FcnnOperatorSpec s;
    s.extents = extents;
    s.hidden = jm.value("hidden", std::vector<int>{128});
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  if (type == "deeponet") {
    DeepOnetSpec s;
    s.sensors = DeepOnetSpec::grid_sensors(extents, lengths);
    s.coord_dim = d;
    s.latent = jm.value("latent", 32);
    s.branch_hidden = jm.value("branch_hidden", std::vector<int>{64});
    s.trunk_hidden = jm.value("trunk_hidden", std::vector<int>{64});
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  if (type == "ikno") {
    IkNoSpec s;
    s.extents = extents;
    s.lengths = lengths;
    s.channels = jm.value("channels", 2);
    s.length = jm.value("length", 1);
    s.radius = jm.value("radius", 0.25 * lengths[0]);
    s.lift_hidden = jm.value("lift_hidden", std::vector<int>{8});
    s.kernel_hidden = jm.value("kernel_hidden", std::vector<int>{8});
    s.proj_hidden = jm.value("proj_hidden", std::vector<int>{8});
    s.activation = activation_from_string(jm.value("activation", "gelu"));
    return make_model(s);
  }
  return OperatorModel::from_descriptor(jm);
}

TrainConfig parse_train_config(const json& cfg, std::uint64_t seed, int threads) {
  TrainConfig t;
  const json j = cfg.value("train", json::object());
  t.batch_size = j.value("batch_size", 16);
  t.learning_rate = j.value("learning_rate", 1e-3);
  t.improvement_tolerance = j.value("improvement_tolerance", 0.97);
  t.steps_between_validation = j.value("steps_between_validation", 400);
  t.max_steps = j.value("max_steps", 2000);
  t.runs = j.value("runs", 1);
  const std::string opt = j.value("optimizer", "adam");
  if (opt == "adam")
    t.optimizer = OptimizerKind::adam;
  else if (opt == "sgd")
    t.optimizer = OptimizerKind::sgd;
  else
    throw ConfigError("unknown optimizer: " + opt);
  t.seed = seed;
  t.threads = threads;
  return t;
}

// -- subcommands ---------------------------------------------------------------

int run_gen_data(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const ProblemSetup p = parse_problem(cfg);
  const std::uint64_t seed = pick_seed(g, cfg);
  const json counts = cfg.value("counts", json::object());
  const int n_train = counts.value("train", 4096);
  const int n_val = counts.value("validation", 512);
  const int n_test = counts.value("test", 512);
  ensure_out(g);

  const struct {
    const char* name;
    int count;
    std::uint64_t stream;
  } splits[] = {{"train", n_train, 1}, {"validation", n_val, 2}, {"test", n_test, 3}};
  for (const auto& split : splits) {
    DataGenConfig dg;
    dg.pde = p.pde;
    dg.grf = p.grf;
    dg.solver = p.solver;
    dg.model_resolution = p.model_resolution;
    dg.count = split.count;
    dg.seed = mix64(seed + split.stream);
    Dataset ds = dataset_generate(dg, g.threads);
    const std::string path = out_path(g, std::string(split.name) + ".ds");
    save_dataset(ds, path);
    std::printf("wrote %s (%d samples, N=%d)\n", path.c_str(), split.count,
                p.model_resolution);
  }
  return 0;
}

int run_train(const GlobalOptions& g) {
  const json cfg = load_config(g);
  if (!cfg.contains("model")) throw ConfigError("train: config needs a \"model\" object");
  const std::string data_dir = cfg.value("data", g.out_dir);
  Dataset train_set = load_dataset((fs::path(data_dir) / "train.ds").string());
  Dataset val_set = load_dataset((fs::path(data_dir) / "validation.ds").string());
  const std::uint64_t seed = pick_seed(g, cfg);

  auto model = parse_model(cfg.at("model"), train_set.inputs[0].extents,
                           train_set.inputs[0].lengths);
  TrainConfig tc = parse_train_config(cfg, seed, g.threads);
  std::printf("training %s (%zu parameters)\n", model->name().c_str(), model->param_count());
  TrainResult r = train(*model, train_set, val_set, tc);

  ensure_out(g);
  const std::string ck_path = out_path(g, model->name() + ".ck");
  save_checkpoint(r.best, ck_path);
  std::string log_csv = "run;step;train_loss;validation_error;learning_rate\n";
  char buf[160];
  for (const auto& row : r.log) {
    std::snprintf(buf, sizeof(buf), "%d;%d;%.12g;%.12g;%.12g\n", row.run, row.step,
                  row.train_loss, row.validation_error, row.learning_rate);
    log_csv += buf;
  }
  write_text_file(out_path(g, model->name() + "_train_log.csv"), log_csv);
  std::printf("best validation error %.6g after %d steps -> %s\n",
              r.best_validation_error, r.steps_done, ck_path.c_str());
  return 0;
}

std::vector<EvalMethod> baselines_from_config(const json& cfg, const Dataset& test_set) {
  std::vector<EvalMethod> methods;
  if (!cfg.contains("baselines")) return methods;
  // reconstruct the problem from the dataset metadata
  const json meta = test_set.metadata.value("pde", json::object());
  SemilinearPdeSpec pde;
  pde.dim = meta.value("dim", 1);
  pde.lengths = meta.value("lengths", std::vector<double>(pde.dim, 1.0));
  pde.diffusion = meta.value("diffusion", 0.1);
  pde.horizon = meta.value("horizon", 1.0);
  pde.nonlinearity = nonlinearity_from_string(meta.value("nonlinearity", "allen-cahn"));
  pde.reaction_rate = meta.value("reaction_rate", 2.0);

  for (const json& jb : cfg.at("baselines")) {
    const std::string method = jb.at("method").get<std::string>();
    if (method == "identity") {
      methods.push_back({jb.value("name", std::string("Identity")),
                         [](const GridFunction& f) { return f; }, 0, 0.0, 0});
      continue;
    }
    SolverConfig sc;
    sc.method = solve_method_from_string(method);
    sc.space_steps = jb.value("space_steps", test_set.inputs[0].extents[0]);
    sc.time_steps = jb.value("time_steps", 1000);
    sc.dealias = jb.value("dealias", true);
    const std::vector<int> model_ext = test_set.inputs[0].extents;
    EvalMethod m;
    m.name = jb.value("name", method);
    m.apply = [pde, sc, model_ext](const GridFunction& f) {
      // lift the model-resolution input onto the solver grid by interpolation
      const std::vector<int> solver_ext(f.dims(), sc.space_steps);
      GridFunction fine = grid_sample(
          [&](std::span<const double> x) { return f.interpolate(x); }, solver_ext,
          f.lengths);
      SemilinearPdeSpec local = pde;
      GridFunction initial = fine;
      if (local.nonlinearity == Nonlinearity::reaction_with_source) {
        local.source = fine;
        initial = GridFunction(solver_ext, f.lengths);
      }
      GridFunction out = reference_solve(local, initial, sc);
      return grid_restrict(out, model_ext);
    };
    methods.push_back(std::move(m));
  }
  return methods;
}

int run_eval(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const std::string data_dir = cfg.value("data", g.out_dir);
  Dataset test_set = load_dataset((fs::path(data_dir) / "test.ds").string());

  std::vector<EvalMethod> methods;
  std::vector<std::shared_ptr<OperatorModel>> keep_alive;
  std::vector<std::shared_ptr<ParamVector>> keep_params;
  if (cfg.contains("checkpoints")) {
    for (const json& jc : cfg.at("checkpoints")) {
      Checkpoint ck = load_checkpoint(jc.get<std::string>());
      std::shared_ptr<OperatorModel> model =
          OperatorModel::from_descriptor(ck.descriptor);
      auto params = std::make_shared<ParamVector>(std::move(ck.params));
      keep_alive.push_back(model);
      keep_params.push_back(params);
      EvalMethod m;
      m.name = model->name();
      m.param_count = model->param_count();
      m.train_steps = ck.metadata.value("steps", 0);
      m.apply = [model, params](const GridFunction& f) {
        return model->apply(*params, f);
      };
      methods.push_back(std::move(m));
    }
  }
  for (auto& b : baselines_from_config(cfg, test_set)) methods.push_back(std::move(b));
  if (methods.empty()) throw ConfigError("eval: no checkpoints or baselines configured");

  const int repeats = cfg.value("repeats", 10);
  auto rows = evaluate(methods, test_set, repeats);
  const std::string csv = results_to_csv(rows);
  ensure_out(g);
  write_text_file(out_path(g, "results.csv"), csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int run_bench(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const ProblemSetup p = parse_problem(cfg);
  const std::uint64_t seed = pick_seed(g, cfg);
  ensure_out(g);

  // 1. data
  const json counts = cfg.value("counts", json::object());
  DataGenConfig dg;
  dg.pde = p.pde;
  dg.grf = p.grf;
  dg.solver = p.solver;
  dg.model_resolution = p.model_resolution;

  auto gen_split = [&](const char* name, int count, std::uint64_t stream) {
    dg.count = count;
    dg.seed = mix64(seed + stream);
    Dataset ds = dataset_generate(dg, g.threads);
    save_dataset(ds, out_path(g, std::string(name) + ".ds"));
    return ds;
  };
  Dataset train_set = gen_split("train", counts.value("train", 4096), 1);
  Dataset val_set = gen_split("validation", counts.value("validation", 512), 2);
  Dataset test_set = gen_split("test", counts.value("test", 512), 3);
  std::printf("datasets ready (%zu train / %zu val / %zu test)\n", train_set.size(),
              val_set.size(), test_set.size());

  // 2. models
  std::vector<EvalMethod> methods;
  std::vector<std::shared_ptr<OperatorModel>> keep_alive;
  std::vector<std::shared_ptr<ParamVector>> keep_params;
  const bool measured = cfg.value("measure_timing", false);
  const json models = cfg.value("models", json::array());
  TrainConfig tc = parse_train_config(cfg, seed, g.threads);
  for (const json& jm : models) {
    auto model = std::shared_ptr<OperatorModel>(
        parse_model(jm, train_set.inputs[0].extents, train_set.inputs[0].lengths));
    std::printf("training %s (%zu parameters)\n", model->name().c_str(),
                model->param_count());
    TrainResult r = train(*model, train_set, val_set, tc);
    save_checkpoint(r.best, out_path(g, model->name() + ".ck"));
    auto params = std::make_shared<ParamVector>(r.best.params);
    keep_alive.push_back(model);
    keep_params.push_back(params);
    EvalMethod m;
    m.name = model->name();
    m.param_count = model->param_count();
    m.training_time = measured ? r.train_seconds : 0.0;
    m.train_steps = r.steps_done;
    m.apply = [model, params](const GridFunction& f) { return model->apply(*params, f); };
    methods.push_back(std::move(m));
    std::printf("  best validation error %.6g\n", r.best_validation_error);
  }

  // 3. baselines and evaluation
  for (auto& b : baselines_from_config(cfg, test_set)) methods.push_back(std::move(b));
  const int repeats = measured ? cfg.value("repeats", 10) : 0;
  auto rows = evaluate(methods, test_set, repeats);
  const std::string csv = results_to_csv(rows);
  write_text_file(out_path(g, "results.csv"), csv);
  write_text_file(out_path(g, "error_scatter.svg"), plot_error_scatter(rows));
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int run_solve(const GlobalOptions& g) {
  const json cfg = load_config(g);
  ProblemSetup p = parse_problem(cfg);
  const std::uint64_t seed = pick_seed(g, cfg);

  const std::vector<int> ext(p.pde.dim, p.solver.space_steps);
  RngState rng(seed);
  GridFunction field = grf_sample(p.grf, ext, p.pde.lengths, rng);
  GridFunction initial = field;
  if (p.pde.nonlinearity == Nonlinearity::reaction_with_source) {
    p.pde.source = field;
    initial = GridFunction(ext, p.pde.lengths);
  }
  GridFunction out = reference_solve(p.pde, initial, p.solver);

  ensure_out(g);
  std::string csv = "x;input;terminal\n";
  char buf[128];
  if (p.pde.dim == 1) {
    for (int i = 0; i < p.solver.space_steps; ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g;%.12g;%.12g\n", out.node(0, i),
                    field.values[i], out.values[i]);
      csv += buf;
    }
    write_text_file(out_path(g, "solution.csv"), csv);
    std::vector<SamplePlotSeries> series{{"input", field}, {"terminal", out}};
    write_text_file(out_path(g, "solution.svg"), plot_sample(series));
  } else {
    Dataset single;
    single.inputs.push_back(field);
    single.targets.push_back(out);
    single.metadata = {{"kind", "solve"}};
    save_dataset(single, out_path(g, "solution.ds"));
    std::vector<SamplePlotSeries> series{{"input", field}, {"terminal", out}};
    write_text_file(out_path(g, "solution.svg"), plot_sample(series));
  }
  std::printf("terminal field range [%g, %g]\n",
              *std::min_element(out.values.values().begin(), out.values.values().end()),
              *std::max_element(out.values.values().begin(), out.values.values().end()));
  return 0;
}

int run_pinn(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const std::string problem = cfg.value("problem", "laplace2d");
  const std::uint64_t seed = pick_seed(g, cfg);
  ensure_out(g);

  if (problem == "laplace2d") {
    PinnLaplaceConfig c;
    c.hidden = cfg.value("hidden", c.hidden);
    c.interior_batch = cfg.value("interior_batch", c.interior_batch);
    c.boundary_batch = cfg.value("boundary_batch", c.boundary_batch);
    c.max_steps = cfg.value("max_steps", c.max_steps);
    c.learning_rate = cfg.value("learning_rate", c.learning_rate);
    c.seed = seed;
    PinnTrainResult r = train_pinn_laplace(c);
    std::printf("laplace2d: L2 error %.6g after %d steps\n", r.l2_error, r.steps_done);
    Checkpoint ck;
    ck.descriptor = {{"type", "mlp"},
                     {"widths", r.net.widths},
                     {"activation", to_string(r.net.activation)}};
    ck.params = r.theta;
    ck.metadata = {{"problem", "laplace2d"}, {"l2_error", r.l2_error}};
    save_checkpoint(ck, out_path(g, "pinn_laplace2d.ck"));
    return 0;
  }
  if (problem == "heat1d") {
    PinnHeatConfig c;
    c.hidden = cfg.value("hidden", c.hidden);
    c.max_steps = cfg.value("max_steps", c.max_steps);
    c.learning_rate = cfg.value("learning_rate", c.learning_rate);
    c.seed = seed;
    PinnTrainResult r = train_pinn_heat(c);
    std::printf("heat1d: L2 error %.6g after %d steps\n", r.l2_error, r.steps_done);
    return 0;
  }
  if (problem == "stefan") {
    StefanTrainConfig c;
    c.max_steps = cfg.value("max_steps", c.max_steps);
    c.learning_rate = cfg.value("learning_rate", c.learning_rate);
    c.seed = seed;
    StefanTrainResult r = train_stefan_front(c);
    std::printf("stefan: final loss %.6g, front error %.6g\n", r.final_loss, r.front_error);
    return 0;
  }
  throw ConfigError("unknown pinn problem: " + problem);
}

int run_kolmogorov(const GlobalOptions& g) {
  const json cfg = load_config(g);
  KolmogorovTrainConfig c;
  c.spec.dim = cfg.value("dim", 1);
  c.spec.horizon = cfg.value("horizon", 1.0);
  c.spec.rate = cfg.value("rate", 0.5);
  c.full_solution = cfg.value("full_solution", false);
  c.hidden = cfg.value("hidden", c.hidden);
  c.batch = cfg.value("batch", c.batch);
  c.max_steps = cfg.value("max_steps", c.max_steps);
  c.learning_rate = cfg.value("learning_rate", c.learning_rate);
  c.seed = pick_seed(g, cfg);
  KolmogorovTrainResult r = train_kolmogorov_square(c);
  std::printf("kolmogorov (%s): relative L2 error %.6g after %d steps\n",
              c.full_solution ? "full" : "terminal", r.relative_l2, r.steps_done);
  ensure_out(g);
  Checkpoint ck;
  ck.descriptor = {{"type", "mlp"},
                   {"widths", r.net.widths},
                   {"activation", to_string(r.net.activation)}};
  ck.params = r.theta;
  ck.metadata = {{"problem", "kolmogorov"}, {"relative_l2", r.relative_l2}};
  save_checkpoint(ck, out_path(g, "kolmogorov.ck"));
  return 0;
}

int run_bsde(const GlobalOptions& g) {
  const json cfg = load_config(g);
  const std::string mode = cfg.value("mode", "consistency");
  if (mode == "consistency") {
    BsdeConsistencyConfig c;
    c.rate = cfg.value("rate", 0.2);
    c.horizon = cfg.value("horizon", 1.0);
    c.paths = cfg.value("paths", 10000);
    if (cfg.contains("step_counts"))
      c.step_counts = cfg.at("step_counts").get<std::vector<int>>();
    c.seed = pick_seed(g, cfg);
    auto losses = bsde_consistency(c);
    for (std::size_t i = 0; i < losses.size(); ++i)
      std::printf("dt = 1/%d: terminal loss %.6g\n", c.step_counts[i], losses[i]);
    return 0;
  }
  if (mode == "train") {
    BsdeTrainConfig c;
    c.rate = cfg.value("rate", 0.25);
    c.horizon = cfg.value("horizon", 1.0);
    c.time_steps = cfg.value("time_steps", 20);
    c.batch = cfg.value("batch", 64);
    c.max_steps = cfg.value("max_steps", 1500);
    c.learning_rate = cfg.value("learning_rate", 1e-2);
    c.seed = pick_seed(g, cfg);
    BsdeTrainResult r = train_bsde_quadratic(c);
    std::printf("bsde train: final loss %.6g, |v(0) - u(0,0)| = %.6g\n", r.final_loss,
                r.value_error_at_zero);
    return 0;
  }
  throw ConfigError("unknown bsde mode: " + mode);
}

int run_plot(const GlobalOptions& g) {
  const json cfg = load_config(g);
  ensure_out(g);
  if (cfg.contains("results")) {
    auto rows = results_from_csv(read_text_file(cfg.at("results")));
    write_text_file(out_path(g, "error_scatter.svg"), plot_error_scatter(rows));
    std::printf("wrote %s\n", out_path(g, "error_scatter.svg").c_str());
  }
  if (cfg.contains("data")) {
    Dataset ds = load_dataset(cfg.at("data"));
    const std::size_t sample = cfg.value("sample", 0);
    if (sample >= ds.size()) throw ConfigError("plot: sample index out of range");
    std::vector<SamplePlotSeries> series{{"input", ds.inputs[sample]},
                                         {"reference", ds.targets[sample]}};
    if (cfg.contains("checkpoint")) {
      Checkpoint ck = load_checkpoint(cfg.at("checkpoint"));
      auto model = OperatorModel::from_descriptor(ck.descriptor);
      series.push_back({model->name(), model->apply(ck.params, ds.inputs[sample])});
    }
    write_text_file(out_path(g, "sample_plot.svg"), plot_sample(series));
    std::printf("wrote %s\n", out_path(g, "sample_plot.svg").c_str());
  }
  if (!cfg.contains("results") && !cfg.contains("data"))
    throw ConfigError("plot: config needs \"results\" and/or \"data\"");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deep-learning methods for semilinear parabolic PDEs"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON configuration file")->expected(1);
  app.add_option("--out", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "global seed override");
  app.add_option("--threads", g.threads, "worker threads for data generation and batches");

  auto* gen = app.add_subcommand("gen-data", "sample GRF inputs and solve for targets");
  auto* tr = app.add_subcommand("train", "train an operator model on a dataset");
  auto* ev = app.add_subcommand("eval", "evaluate checkpoints and classical baselines");
  auto* be = app.add_subcommand("bench", "gen-data + train + eval pipeline");
  auto* so = app.add_subcommand("solve", "solve a single PDE instance");
  auto* pi = app.add_subcommand("pinn", "train a physics-informed network");
  auto* ko = app.add_subcommand("kolmogorov", "train a deep Kolmogorov regression");
  auto* bs = app.add_subcommand("bsde", "deep BSDE consistency run or training");
  auto* pl = app.add_subcommand("plot", "render results and sample comparisons");
  for (CLI::App* sub : {gen, tr, ev, be, so, pi, ko, bs, pl}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (gen->parsed()) return run_gen_data(g);
    if (tr->parsed()) return run_train(g);
    if (ev->parsed()) return run_eval(g);
    if (be->parsed()) return run_bench(g);
    if (so->parsed()) return run_solve(g);
    if (pi->parsed()) return run_pinn(g);
    if (ko->parsed()) return run_kolmogorov(g);
    if (bs->parsed()) return run_bsde(g);
    if (pl->parsed()) return run_plot(g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
