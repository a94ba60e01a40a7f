#include "filament/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "filament/field.hpp"
#include "filament/metrics.hpp"
#include "filament/parallel.hpp"
#include "filament/posterior.hpp"
#include "filament/rng.hpp"
#include "filament/synth.hpp"
#include "filament/uncertainty.hpp"

namespace filament {

using nlohmann::json;
namespace fs = std::filesystem;

void RunConfig::validate() const {
  if (n < 1) throw std::invalid_argument("config: n must be at least 1");
  if (noise_sd < 0.0) throw std::invalid_argument("config: noise_sd must be >= 0");
  if (q1 < 2 || q2 < 2) throw std::invalid_argument("config: spline orders must be >= 2");
  if (j1 < q1 || j2 < q2) throw std::invalid_argument("config: j must be >= spline order");
  if (j_min < 2 || j_max < j_min) throw std::invalid_argument("config: bad selection range");
  if (!(step_a > 0.0) || !(tol_eps > 0.0)) {
    throw std::invalid_argument("config: step_a and tol_eps must be positive");
  }
  if (max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  if (seed_grid < 2) throw std::invalid_argument("config: seed_grid must be >= 2");
  if (!(gamma > 0.0 && gamma < 0.5)) throw std::invalid_argument("config: gamma must be in (0, 0.5)");
  if (!(rho > 0.0)) throw std::invalid_argument("config: rho must be positive");
  if (draws < 1) throw std::invalid_argument("config: draws must be >= 1");
  if (grid_n < 8) throw std::invalid_argument("config: grid_n must be >= 8");
  if (c_over_eta < 0.0) throw std::invalid_argument("config: c_over_eta must be >= 0");
  if (!(prior_scale > 0.0)) throw std::invalid_argument("config: prior lambda0_scale must be positive");
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;  // defaults are the synthetic-study settings
  if (name == "paper-sim") {
    return cfg;
  }
  if (name == "paper-quake") {
    cfg.q1 = cfg.q2 = 4;
    cfg.j1 = cfg.j2 = 32;
    cfg.step_a = 5e-6;
    cfg.tau = 3.0;
    cfg.tol_eps = 1e-6;
    cfg.rescale = true;
    cfg.j_min = 24;
    cfg.j_max = 40;
    return cfg;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

namespace {

void require_keys(const json& j, const std::string& block,
                  const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw std::invalid_argument("config: unknown key '" + block + it.key() + "'");
    }
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_config(const std::string& path, RunConfig cfg) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j = json::parse(in);
  require_keys(j, "", {"data", "spline", "prior", "select", "scms", "credible"});
  if (j.contains("data")) {
    const json& d = j["data"];
    require_keys(d, "data.", {"n", "noise_sd", "csv", "x1", "x2", "y", "header", "rescale"});
    maybe(d, "n", cfg.n);
    maybe(d, "noise_sd", cfg.noise_sd);
    maybe(d, "csv", cfg.csv);
    maybe(d, "x1", cfg.columns.x1);
    maybe(d, "x2", cfg.columns.x2);
    maybe(d, "y", cfg.columns.y);
    maybe(d, "header", cfg.header);
    maybe(d, "rescale", cfg.rescale);
  }
  if (j.contains("spline")) {
    const json& s = j["spline"];
    require_keys(s, "spline.", {"q1", "q2", "j1", "j2"});
    maybe(s, "q1", cfg.q1);
    maybe(s, "q2", cfg.q2);
    maybe(s, "j1", cfg.j1);
    maybe(s, "j2", cfg.j2);
  }
  if (j.contains("prior")) {
    const json& pr = j["prior"];
    require_keys(pr, "prior.", {"lambda0_scale", "center_on_mean"});
    maybe(pr, "lambda0_scale", cfg.prior_scale);
    maybe(pr, "center_on_mean", cfg.prior_center_mean);
  }
  if (j.contains("select")) {
    const json& s = j["select"];
    require_keys(s, "select.", {"j_min", "j_max"});
    maybe(s, "j_min", cfg.j_min);
    maybe(s, "j_max", cfg.j_max);
  }
  if (j.contains("scms")) {
    const json& s = j["scms"];
    require_keys(s, "scms.", {"step_a", "tol_eps", "tau", "max_iter", "seed_grid"});
    maybe(s, "step_a", cfg.step_a);
    maybe(s, "tol_eps", cfg.tol_eps);
    maybe(s, "tau", cfg.tau);
    maybe(s, "max_iter", cfg.max_iter);
    maybe(s, "seed_grid", cfg.seed_grid);
  }
  if (j.contains("credible")) {
    const json& c = j["credible"];
    require_keys(c, "credible.",
                 {"gamma", "rho", "draws", "grid_n", "c_over_eta", "emit_samples"});
    maybe(c, "gamma", cfg.gamma);
    maybe(c, "rho", cfg.rho);
    maybe(c, "draws", cfg.draws);
    maybe(c, "grid_n", cfg.grid_n);
    maybe(c, "c_over_eta", cfg.c_over_eta);
    maybe(c, "emit_samples", cfg.emit_samples);
  }
  return cfg;
}

namespace {

struct CliContext {
  RunConfig cfg;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware default
  std::string out_dir = ".";

  int effective_workers() const { return workers > 0 ? workers : default_workers(); }
  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
  std::string data_path() const {
    return cfg.csv.empty() ? out("dataset.csv").string() : cfg.csv;
  }
};

PriorBuilder prior_builder(const RunConfig& cfg, const Eigen::VectorXd& ys) {
  double center = cfg.prior_center_mean ? ys.mean() : 0.0;
  double scale = cfg.prior_scale;
  return [center, scale](int dim) { return PriorSpec::empirical(dim, center, scale); };
}

ScmsConfig scms_config(const RunConfig& cfg) {
  ScmsConfig scfg;
  scfg.step_a = cfg.step_a;
  scfg.tol_eps = cfg.tol_eps;
  scfg.threshold_tau = cfg.tau;
  scfg.max_iter = cfg.max_iter;
  scfg.seeds = ScmsConfig::grid_seeds(cfg.seed_grid);
  return scfg;
}

void write_summary(const CliContext& ctx, const std::string& command, double elapsed_s,
                   json extra = json::object()) {
  json j;
  j["command"] = command;
  j["seed"] = ctx.seed;
  j["workers"] = ctx.effective_workers();
  j["version"] = kVersion;
  j["elapsed_seconds"] = elapsed_s;
  j["details"] = std::move(extra);
  std::ofstream out(ctx.out("summary.json"));
  out << j.dump(2) << '\n';
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_simulate(const CliContext& ctx) {
  Timer timer;
  AnalyticField surface = ring_surface();
  auto [xs, ys] = generate(surface, ctx.cfg.n, ctx.cfg.noise_sd, ctx.seed);
  Dataset data{std::move(xs), std::move(ys), std::nullopt};
  write_dataset_csv(ctx.out("dataset.csv").string(), data);
  write_summary(ctx, "simulate", timer.seconds(),
                {{"n", ctx.cfg.n}, {"noise_sd", ctx.cfg.noise_sd}});
  std::cout << "wrote " << ctx.out("dataset.csv").string() << " (" << ctx.cfg.n << " rows)\n";
  return 0;
}

Dataset load_data(const CliContext& ctx) {
  return ingest_csv(ctx.data_path(), ctx.cfg.columns, ctx.cfg.rescale, ctx.cfg.header);
}

int cmd_fit(const CliContext& ctx) {
  Timer timer;
  Dataset data = load_data(ctx);
  BasisSpec spec(make_uniform_knots(ctx.cfg.q1, ctx.cfg.j1),
                 make_uniform_knots(ctx.cfg.q2, ctx.cfg.j2));
  PriorBuilder prior = prior_builder(ctx.cfg, data.ys);
  FittedPosterior post = fit(spec, prior(spec.dimension()), data.xs, data.ys);
  write_model_json(ctx.out("model.json").string(), post, data.transform);
  write_summary(ctx, "fit", timer.seconds(),
                {{"n", post.n()},
                 {"j1", ctx.cfg.j1},
                 {"j2", ctx.cfg.j2},
                 {"sigma2_hat", post.sigma2_hat()}});
  std::cout << "fit: n=" << post.n() << " J=(" << ctx.cfg.j1 << "," << ctx.cfg.j2
            << ") sigma2_hat=" << post.sigma2_hat() << '\n';
  return 0;
}

int cmd_select(const CliContext& ctx) {
  Timer timer;
  Dataset data = load_data(ctx);
  std::vector<std::pair<int, int>> candidates;
  for (int j = std::max(ctx.cfg.j_min, std::max(ctx.cfg.q1, ctx.cfg.q2)); j <= ctx.cfg.j_max;
       ++j) {
    candidates.emplace_back(j, j);
  }
  SelectionResult sel = select_j(candidates, ctx.cfg.q1, ctx.cfg.q2,
                                 prior_builder(ctx.cfg, data.ys), data.xs, data.ys);
  json scores = json::array();
  for (std::size_t i = 0; i < sel.candidates.size(); ++i) {
    scores.push_back({{"j1", sel.candidates[i].first},
                      {"j2", sel.candidates[i].second},
                      {"score", sel.scores[i].value},
                      {"interpolation_warning", sel.scores[i].interpolation_warning}});
  }
  json j;
  j["chosen"] = {{"j1", sel.chosen.first}, {"j2", sel.chosen.second}};
  j["candidates"] = scores;
  std::ofstream out(ctx.out("selection.json"));
  out << j.dump(2) << '\n';
  write_summary(ctx, "select", timer.seconds(), j["chosen"]);
  std::cout << "selected J=(" << sel.chosen.first << "," << sel.chosen.second << ")\n";
  return 0;
}

int cmd_scms(const CliContext& ctx) {
  Timer timer;
  ModelFile model = read_model_json(ctx.out("model.json").string());
  ScalarField mean_field(model.posterior.spec(), model.posterior.mean_theta());
  Filament fil = scms(mean_field, scms_config(ctx.cfg), ctx.effective_workers());
  write_filament_csv(ctx.out("filament.csv").string(), fil, model.transform);
  std::size_t n_conv = fil.converged_points().size();
  write_summary(ctx, "scms", timer.seconds(),
                {{"seeds", fil.size()}, {"converged", n_conv}});
  std::cout << "scms: " << n_conv << "/" << fil.size() << " seeds converged\n";
  return 0;
}

int cmd_credible(const CliContext& ctx) {
  Timer timer;
  ModelFile model = read_model_json(ctx.out("model.json").string());
  const FittedPosterior& post = model.posterior;
  ScalarField mean_field(post.spec(), post.mean_theta());
  ScmsConfig scfg = scms_config(ctx.cfg);
  const int workers = ctx.effective_workers();

  PosteriorSupSamples sup = estimate_r_quantiles(post, ctx.cfg.draws, ctx.cfg.gamma,
                                                 ctx.cfg.grid_n, ctx.seed, workers);
  CredibleSpec spec;
  spec.gamma = ctx.cfg.gamma;
  spec.rho = ctx.cfg.rho;
  spec.r_quantiles = sup.quantiles;

  Filament center = scms(mean_field, scfg, workers);
  write_filament_csv(ctx.out("filament.csv").string(), center, model.transform);

  spec.c_over_eta = ctx.cfg.c_over_eta > 0.0 ? ctx.cfg.c_over_eta
                                             : estimate_c_over_eta(mean_field, center);
  double radius = spec.c_over_eta * spec.rho *
                  *std::max_element(spec.r_quantiles.begin(), spec.r_quantiles.end());

  // A draw is accepted when each derivative supremum sits inside its
  // inflated band; accepted draws get their own ridge run.
  std::vector<bool> accepted(ctx.cfg.draws, false);
  for (int i = 0; i < ctx.cfg.draws; ++i) {
    bool ok = true;
    for (int k = 0; k < 3; ++k) ok = ok && sup.sup(i, k) <= spec.rho * spec.r_quantiles[k];
    accepted[i] = ok;
  }
  std::vector<Filament> sample_filaments(ctx.cfg.draws);
  parallel_for(static_cast<std::size_t>(ctx.cfg.draws), workers, [&](std::size_t i) {
    if (!accepted[i]) return;
    Eigen::MatrixXd draw =
        sample_theta(post, post.sigma2_hat(), Rng::derive_seed(ctx.seed, i), 1);
    sample_filaments[i] = scms(ScalarField(post.spec(), draw.row(0).transpose()), scfg, 1);
  });

  fs::path samples_dir = ctx.out("samples");
  if (ctx.cfg.emit_samples) fs::create_directories(samples_dir);

  auto center_points = center.converged_points();
  json per_sample = json::array();
  int n_accept = 0;
  for (int i = 0; i < ctx.cfg.draws; ++i) {
    json entry;
    entry["draw"] = i;
    entry["accepted"] = static_cast<bool>(accepted[i]);
    for (int k = 0; k < 3; ++k) entry["sup"][k] = sup.sup(i, k);
    if (accepted[i]) {
      ++n_accept;
      auto pts = sample_filaments[i].converged_points();
      entry["hausdorff_to_center"] =
          (pts.empty() || center_points.empty()) ? json() : json(hausdorff(pts, center_points));
      if (ctx.cfg.emit_samples) {
        char name[32];
        std::snprintf(name, sizeof(name), "filament_%03d.csv", i);
        write_filament_csv((samples_dir / name).string(), sample_filaments[i],
                           model.transform);
      }
    }
    per_sample.push_back(std::move(entry));
  }

  json manifest;
  manifest["gamma"] = spec.gamma;
  manifest["rho"] = spec.rho;
  manifest["r_quantiles"] = spec.r_quantiles;
  manifest["acceptance_fraction"] = static_cast<double>(n_accept) / ctx.cfg.draws;
  manifest["c_over_eta"] = spec.c_over_eta;
  manifest["c_over_eta_source"] = ctx.cfg.c_over_eta > 0.0 ? "config" : "estimated";
  manifest["radius"] = radius;
  manifest["draws"] = ctx.cfg.draws;
  manifest["samples"] = std::move(per_sample);
  std::ofstream out(ctx.out("credible_manifest.json"));
  out << manifest.dump(2) << '\n';

  write_summary(ctx, "credible", timer.seconds(),
                {{"acceptance_fraction", manifest["acceptance_fraction"]},
                 {"radius", radius}});
  std::cout << "credible: acceptance " << manifest["acceptance_fraction"] << ", radius "
            << radius << '\n';
  return 0;
}

int cmd_hausdorff(const CliContext& ctx, const std::string& file_a, const std::string& file_b) {
  Timer timer;
  Filament a = read_filament_csv(file_a, std::nullopt);
  Filament b = read_filament_csv(file_b, std::nullopt);
  auto pa = a.converged_points();
  auto pb = b.converged_points();
  if (pa.empty()) pa = a.points;
  if (pb.empty()) pb = b.points;
  double d = hausdorff(pa, pb);
  json j;
  j["a"] = file_a;
  j["b"] = file_b;
  j["hausdorff"] = d;
  std::ofstream out(ctx.out("hausdorff.json"));
  out << j.dump(2) << '\n';
  write_summary(ctx, "hausdorff", timer.seconds(), {{"hausdorff", d}});
  std::cout << format_double(d) << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"B-spline regression surfaces, ridge extraction and credible sets"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir = ".";
  std::uint64_t seed = 1;
  int workers = 0;
  std::string data_path, col_x1, col_x2, col_y;
  bool no_header = false, no_rescale = false;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--preset", preset, "built-in parameter set: paper-sim or paper-quake");
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--workers", workers, "worker thread cap (0 = hardware)");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--data", data_path, "input CSV (overrides the config path)");
  app.add_option("--col-x1", col_x1, "x1 column name");
  app.add_option("--col-x2", col_x2, "x2 column name");
  app.add_option("--col-y", col_y, "response column name");
  app.add_flag("--no-header", no_header, "treat the CSV as headerless (positional columns)");
  app.add_flag("--no-rescale", no_rescale, "keep coordinates as-is instead of rescaling");

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  auto* fit_cmd = app.add_subcommand("fit", "fit the surface posterior");
  auto* sel = app.add_subcommand("select", "choose (J1, J2) by model score");
  auto* scms_cmd = app.add_subcommand("scms", "extract the ridge of the fitted surface");
  auto* cred = app.add_subcommand("credible", "posterior bands, quantiles and ridge samples");
  auto* haus = app.add_subcommand("hausdorff", "distance between two filament files");
  std::string file_a, file_b;
  haus->add_option("a", file_a, "first filament csv")->required();
  haus->add_option("b", file_b, "second filament csv")->required();

  std::vector<const char*> argv;
  argv.push_back("filament");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    CliContext ctx;
    if (!preset.empty()) ctx.cfg = preset_config(preset);
    if (!config_path.empty()) ctx.cfg = load_config(config_path, ctx.cfg);
    if (!data_path.empty()) ctx.cfg.csv = data_path;
    if (!col_x1.empty()) ctx.cfg.columns.x1 = col_x1;
    if (!col_x2.empty()) ctx.cfg.columns.x2 = col_x2;
    if (!col_y.empty()) ctx.cfg.columns.y = col_y;
    if (no_header) ctx.cfg.header = false;
    if (no_rescale) ctx.cfg.rescale = false;
    ctx.cfg.validate();
    ctx.seed = seed;
    ctx.workers = workers;
    ctx.out_dir = out_dir;
    fs::create_directories(out_dir);

    if (sim->parsed()) return cmd_simulate(ctx);
    if (fit_cmd->parsed()) return cmd_fit(ctx);
    if (sel->parsed()) return cmd_select(ctx);
    if (scms_cmd->parsed()) return cmd_scms(ctx);
    if (cred->parsed()) return cmd_credible(ctx);
    if (haus->parsed()) return cmd_hausdorff(ctx, file_a, file_b);
    return 1;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 1;
  }
}

}  // namespace filament
