#include "cli.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include <amgan/error.hpp>
#include <amgan/io.hpp>
#include <amgan/metrics.hpp>
#include <amgan/train.hpp>
#include <amgan/verify.hpp>
#include <amgan/version.hpp>

#include "manifest.hpp"

extern char** environ;

namespace amgan::cli {

namespace fs = std::filesystem;

namespace {

// Usage problems detected after CLI11 has accepted the arguments.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Property failures reported by a command (exit 1).
struct PropertyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return (env != nullptr && *env != '\0') ? fs::path(env) : fs::path(".");
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot write " + path.string());
  f << contents;
  if (!f) throw InvalidInput("write failed for " + path.string());
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open " + path.string());
  return f;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::size_t> parse_sizes(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") return out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v <= 0) throw std::invalid_argument(part);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw UsageError(std::string("--") + what + ": expected comma-separated positive integers");
    }
  }
  return out;
}

std::string real(double v) { return io::format_real(v); }

// ---------------------------------------------------------------------------
// Config file: flat `key = value` lines whose keys are long flag names of the
// subcommand. Values from the file are used only for flags absent from the
// command line.

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      out.push_back(args[i]);
    }
  }
  if (!config_path) return out;

  std::ifstream f(*config_path);
  if (!f) throw InvalidInput("cannot open config file " + *config_path);
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    const std::string flag = "--" + key;
    const bool given = std::any_of(out.begin(), out.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) out.push_back(flag + "=" + value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::uint64_t seed = VerifyOptions{}.seed;
  std::string out;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  VerifyOptions opt;
  opt.seed = a.seed;
  const VerifyReport report = run_verify(opt);
  const std::string json = verify_report_json(report);
  const fs::path path = a.out.empty() ? default_out_dir() / "verify.json" : fs::path(a.out);
  write_file(path, json);

  Manifest m;
  m.command = "verify";
  m.seed = a.seed;
  m.config["seed"] = a.seed;
  m.replay_args = {"verify", "--seed", std::to_string(a.seed)};
  m.outputs["report"] = path.filename().string();
  write_manifest(manifest_path_for(path), m);

  out << json;
  for (const auto& p : report.properties) {
    if (!p.passed) err << "FAIL " << p.name << ": " << p.detail << '\n';
  }
  return report.passed() ? kExitOk : kExitPropertyFailure;
}

// ---------------------------------------------------------------------------
// modedrop

struct ModeDropArgs {
  std::size_t n = 0;
  std::string density = "uniform";
  std::size_t trials = ModeDropConfig{}.trials;
  std::uint64_t seed = 0;
  std::optional<double> mu;
  std::optional<double> sigma;
  std::string out;
};

int cmd_modedrop(const ModeDropArgs& a, std::ostream& out) {
  ModeDropConfig cfg;
  cfg.n_points = a.n;
  cfg.density = a.density == "gaussian" ? ClassDensity::Gaussian : ClassDensity::Uniform;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.mu = a.mu;
  cfg.sigma = a.sigma;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  std::ostringstream csv;
  io::write_mode_drop_csv(csv, mode_drop_simulation(cfg));
  const fs::path path = a.out.empty() ? default_out_dir() / "modedrop.csv" : fs::path(a.out);
  write_file(path, csv.str());

  Manifest m;
  m.command = "modedrop";
  m.seed = a.seed;
  m.config["n"] = cfg.n_points;
  m.config["density"] = a.density;
  m.config["trials"] = cfg.trials;
  m.config["seed"] = cfg.seed;
  m.replay_args = {"modedrop", "--n", std::to_string(cfg.n_points), "--density", a.density,
                   "--trials", std::to_string(cfg.trials), "--seed", std::to_string(cfg.seed)};
  if (cfg.density == ClassDensity::Gaussian) {
    m.config["mu"] = cfg.resolved_mu();
    m.config["sigma"] = cfg.resolved_sigma();
    m.replay_args.insert(m.replay_args.end(), {"--mu", real(cfg.resolved_mu()), "--sigma",
                                               real(cfg.resolved_sigma())});
  }
  m.outputs["series"] = path.filename().string();
  write_manifest(manifest_path_for(path), m);
  out << path.string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string variant;
  std::string labeling = "dynamic";
  std::string generator_loss = "neg-log-d";
  double aux_weight = 1.0;
  double smooth_fake = 0.0;
  double smooth_real = 0.0;
  bool include_fake_aux = false;
  std::size_t modes = 8;
  double radius = 1.0;
  double sigma = 0.05;
  std::size_t noise_dim = TrainConfig{}.noise_dim;
  std::string hidden_g = join(TrainConfig{}.generator_hidden);
  std::string hidden_d = join(TrainConfig{}.discriminator_hidden);
  std::size_t batch = TrainConfig{}.batch_size;
  std::size_t steps = TrainConfig{}.steps;
  double lr_g = TrainConfig{}.lr_generator;
  double lr_d = TrainConfig{}.lr_discriminator;
  std::uint64_t seed = TrainConfig{}.seed;
  std::vector<std::uint64_t> seeds;
  std::size_t jobs = 1;
  std::size_t eval_every = TrainConfig{}.eval_every;
  std::size_t eval_samples = TrainConfig{}.eval_samples;
  bool no_grad_check = false;
  std::string out_dir;
};

TrainConfig resolve_train_config(const TrainArgs& a) {
  const auto tag = parse_model_tag(a.variant);
  if (!tag) throw UsageError("unknown --variant '" + a.variant + "'");
  const auto labeling = parse_labeling(a.labeling);
  if (!labeling) throw UsageError("unknown --labeling '" + a.labeling + "'");
  const auto gloss = parse_generator_loss(a.generator_loss);
  if (!gloss) throw UsageError("unknown --generator-loss '" + a.generator_loss + "'");

  TrainConfig c;
  try {
    c.variant = ModelVariant::make(*tag, *labeling);
    c.variant.generator_loss = *gloss;
    c.variant.aux_weight = a.aux_weight;
    c.variant.smoothing = {a.smooth_fake, a.smooth_real};
    c.variant.include_fake_aux = a.include_fake_aux;
    c.variant.validate();
    c.mixture = MixtureSpec::ring(a.modes, a.radius, a.sigma);
    c.noise_dim = a.noise_dim;
    c.generator_hidden = parse_sizes(a.hidden_g, "hidden-g");
    c.discriminator_hidden = parse_sizes(a.hidden_d, "hidden-d");
    c.batch_size = a.batch;
    c.steps = a.steps;
    c.lr_generator = a.lr_g;
    c.lr_discriminator = a.lr_d;
    c.seed = a.seed;
    c.eval_every = a.eval_every;
    c.eval_samples = a.eval_samples;
    c.check_gradients = !a.no_grad_check;
    c.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

nlohmann::ordered_json config_json(const TrainConfig& c, const TrainArgs& a) {
  nlohmann::ordered_json j;
  j["variant"] = std::string(to_string(c.variant.tag));
  j["labeling"] = std::string(to_string(c.variant.labeling));
  j["generator_loss"] = std::string(to_string(c.variant.generator_loss));
  j["aux_weight"] = c.variant.aux_weight;
  j["smooth_fake"] = c.variant.smoothing.lambda_fake;
  j["smooth_real"] = c.variant.smoothing.lambda_real;
  j["include_fake_aux"] = c.variant.include_fake_aux;
  j["modes"] = a.modes;
  j["radius"] = a.radius;
  j["sigma"] = a.sigma;
  j["noise_dim"] = c.noise_dim;
  j["hidden_g"] = c.generator_hidden;
  j["hidden_d"] = c.discriminator_hidden;
  j["batch"] = c.batch_size;
  j["steps"] = c.steps;
  j["lr_g"] = c.lr_generator;
  j["lr_d"] = c.lr_discriminator;
  j["seed"] = c.seed;
  j["eval_every"] = c.eval_every;
  j["eval_samples"] = c.eval_samples;
  j["grad_check"] = c.check_gradients;
  j["update_ratio"] = "1:1";
  return j;
}

std::vector<std::string> train_replay_args(const TrainConfig& c, const TrainArgs& a) {
  std::vector<std::string> r{"train",
                             "--variant", std::string(to_string(c.variant.tag)),
                             "--labeling", std::string(to_string(c.variant.labeling)),
                             "--generator-loss", std::string(to_string(c.variant.generator_loss)),
                             "--aux-weight", real(c.variant.aux_weight),
                             "--smooth-fake", real(c.variant.smoothing.lambda_fake),
                             "--smooth-real", real(c.variant.smoothing.lambda_real),
                             "--modes", std::to_string(a.modes),
                             "--radius", real(a.radius),
                             "--sigma", real(a.sigma),
                             "--noise-dim", std::to_string(c.noise_dim),
                             "--hidden-g", c.generator_hidden.empty() ? "none" : join(c.generator_hidden),
                             "--hidden-d", c.discriminator_hidden.empty() ? "none" : join(c.discriminator_hidden),
                             "--batch", std::to_string(c.batch_size),
                             "--steps", std::to_string(c.steps),
                             "--lr-g", real(c.lr_generator),
                             "--lr-d", real(c.lr_discriminator),
                             "--seed", std::to_string(c.seed),
                             "--eval-every", std::to_string(c.eval_every),
                             "--eval-samples", std::to_string(c.eval_samples)};
  if (c.variant.include_fake_aux) r.push_back("--include-fake-aux");
  if (!c.check_gradients) r.push_back("--no-grad-check");
  return r;
}

int train_one(const TrainArgs& a, const fs::path& dir, std::ostream& out, std::ostream& err) {
  const TrainConfig c = resolve_train_config(a);
  TrainingTrace trace;
  try {
    trace = train(c);
  } catch (const DivergedError& e) {
    err << "diverged: " << e.what() << '\n';
    return kExitDiverged;
  }
  fs::create_directories(dir);
  std::ostringstream trace_csv, samples_csv;
  io::write_trace_csv(trace_csv, trace.snapshots);
  io::write_sample_dump_csv(samples_csv, trace, c.mixture);
  write_file(dir / "trace.csv", trace_csv.str());
  write_file(dir / "samples.csv", samples_csv.str());

  Manifest m;
  m.command = "train";
  m.seed = c.seed;
  m.config = config_json(c, a);
  m.replay_args = train_replay_args(c, a);
  m.outputs["trace"] = "trace.csv";
  m.outputs["samples"] = "samples.csv";
  write_manifest(dir / "manifest.json", m);

  const Snapshot& last = trace.snapshots.back();
  out << (dir / "manifest.json").string() << ": step " << last.step << " inception "
      << real(last.inception_score) << " am " << real(last.am_score) << " coverage "
      << last.mode_coverage << '\n';
  return kExitOk;
}

// Runs one child process per seed, at most `jobs` at a time.
int train_seeds_parallel(const std::vector<std::string>& base_args, const TrainArgs& a,
                         const fs::path& dir, std::ostream& err) {
  std::vector<std::uint64_t> pending(a.seeds.rbegin(), a.seeds.rend());
  std::map<pid_t, std::uint64_t> running;
  int worst = kExitOk;
  auto launch = [&](std::uint64_t seed) {
    std::vector<std::string> args{"/proc/self/exe", "train"};
    args.insert(args.end(), base_args.begin(), base_args.end());
    args.insert(args.end(), {"--seed", std::to_string(seed), "--out-dir",
                             (dir / ("seed-" + std::to_string(seed))).string()});
    std::vector<char*> argv;
    for (auto& s : args) argv.push_back(s.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawn(&pid, "/proc/self/exe", nullptr, nullptr, argv.data(), environ) != 0) {
      throw InvalidInput("could not start a training process");
    }
    running[pid] = seed;
  };
  while (!pending.empty() || !running.empty()) {
    while (!pending.empty() && running.size() < a.jobs) {
      launch(pending.back());
      pending.pop_back();
    }
    int status = 0;
    const pid_t pid = waitpid(-1, &status, 0);
    if (pid < 0) break;
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : kExitPropertyFailure;
    if (code != kExitOk) err << "seed " << running[pid] << " exited with " << code << '\n';
    worst = std::max(worst, code);
    running.erase(pid);
  }
  return worst;
}

int cmd_train(const TrainArgs& a, const std::vector<std::string>& raw_args, std::ostream& out,
              std::ostream& err) {
  const fs::path dir = a.out_dir.empty() ? default_out_dir() : fs::path(a.out_dir);
  if (a.seeds.empty()) return train_one(a, dir, out, err);

  // Validate once before fanning out.
  resolve_train_config(a);
  if (a.jobs > 1) {
    std::vector<std::string> base;
    for (std::size_t i = 0; i < raw_args.size(); ++i) {
      const std::string& s = raw_args[i];
      const bool takes_value = s == "--seeds" || s == "--jobs" || s == "--seed" || s == "--out-dir";
      const bool inline_value = s.rfind("--seeds=", 0) == 0 || s.rfind("--jobs=", 0) == 0 ||
                                s.rfind("--seed=", 0) == 0 || s.rfind("--out-dir=", 0) == 0;
      if (takes_value) {
        ++i;
        continue;
      }
      if (inline_value) continue;
      base.push_back(s);
    }
    return train_seeds_parallel(base, a, dir, err);
  }
  int worst = kExitOk;
  for (std::uint64_t seed : a.seeds) {
    TrainArgs one = a;
    one.seed = seed;
    worst = std::max(worst, train_one(one, dir / ("seed-" + std::to_string(seed)), out, err));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string batch;
  std::string train_dist;
  std::string samples;
  std::string manifest;
  std::string out;
};

ProbVector read_train_dist(const fs::path& path) {
  auto f = open_input(path);
  const ClassifierBatch b = io::read_classifier_batch(f);
  if (b.rows() != 1) throw ParseError("train distribution file must hold exactly one row", 2);
  const auto row = b.row(0);
  return ProbVector(std::vector<double>(row.begin(), row.end()));
}

MixtureSpec mixture_from_manifest(const Manifest& m) {
  try {
    return MixtureSpec::ring(m.config.at("modes").get<std::size_t>(),
                             m.config.at("radius").get<double>(),
                             m.config.at("sigma").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("manifest lacks mixture settings: ") + e.what());
  }
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  if (a.batch.empty() == a.samples.empty()) {
    throw UsageError("give exactly one of --batch or --samples");
  }
  std::optional<ClassifierBatch> batch;
  std::optional<ProbVector> train_dist;
  Manifest m;
  m.command = "score";
  m.replay_args = {"score"};

  if (!a.batch.empty()) {
    auto f = open_input(a.batch);
    batch = io::read_classifier_batch(f);
    const std::string abs = fs::absolute(a.batch).string();
    m.config["batch"] = abs;
    m.replay_args.insert(m.replay_args.end(), {"--batch", abs});
    if (!a.train_dist.empty()) {
      train_dist = read_train_dist(a.train_dist);
      const std::string abs_t = fs::absolute(a.train_dist).string();
      m.config["train_dist"] = abs_t;
      m.replay_args.insert(m.replay_args.end(), {"--train-dist", abs_t});
    }
  } else {
    if (a.manifest.empty()) throw UsageError("--samples needs --manifest of the training run");
    const MixtureSpec mixture = mixture_from_manifest(read_manifest(a.manifest));
    auto f = open_input(a.samples);
    const std::vector<Point2> points = io::read_sample_dump_csv(f);
    std::vector<double> flat;
    flat.reserve(points.size() * mixture.classes());
    for (const Point2& p : points) {
      const ProbVector post = oracle_posterior(mixture, p);
      flat.insert(flat.end(), post.values().begin(), post.values().end());
    }
    batch = ClassifierBatch(mixture.classes(), std::move(flat));
    train_dist = mixture.weights();
    const std::string abs_s = fs::absolute(a.samples).string();
    const std::string abs_m = fs::absolute(a.manifest).string();
    m.config["samples"] = abs_s;
    m.config["manifest"] = abs_m;
    m.replay_args.insert(m.replay_args.end(), {"--samples", abs_s, "--manifest", abs_m});
  }

  if (train_dist && train_dist->size() != batch->classes()) {
    throw UsageError("train distribution and batch disagree on K");
  }
  const ScoreReport report =
      train_dist ? score_report(*batch, *train_dist) : inception_score(*batch);
  if (decomposition_residual(report) > 1e-9) {
    throw PropertyFailure("entropy decomposition of the inception score does not hold");
  }
  const std::string json = io::score_report_json(report);
  const fs::path path = a.out.empty() ? default_out_dir() / "score.json" : fs::path(a.out);
  write_file(path, json);
  m.outputs["report"] = path.filename().string();
  write_manifest(manifest_path_for(path), m);
  out << json;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::vector<std::string> manifests;
  std::string out;
};

struct RunRow {
  std::string manifest;
  std::string variant;
  std::string labeling;
  std::string seed;
  Snapshot last;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<RunRow> rows;
  for (const std::string& path : a.manifests) {
    const Manifest m = read_manifest(path);
    if (m.command != "train") throw InvalidInput(path + " is not a train manifest");
    const auto it = m.outputs.find("trace");
    if (it == m.outputs.end()) throw InvalidInput(path + " lists no trace");
    const fs::path trace_path = fs::path(path).parent_path() / it->second;
    std::ifstream f(trace_path, std::ios::binary);
    if (!f) throw InvalidInput("missing trace file " + trace_path.string());
    const auto snaps = io::read_trace_csv(f);
    if (snaps.empty()) throw InvalidInput(trace_path.string() + " has no snapshots");
    rows.push_back({path, m.config.value("variant", ""), m.config.value("labeling", ""),
                    std::to_string(m.seed), snaps.back()});
  }

  std::ostringstream csv;
  csv << "run,variant,labeling,seed,step,inception_score,log_inception_score,am_score,"
         "mode_coverage,intra_mode_dispersion,d_r_mean_on_fake\n";
  auto emit = [&](const std::string& run, const std::string& variant, const std::string& labeling,
                  const std::string& seed, const std::string& step, double is, double am,
                  double cov, double disp, double dr) {
    csv << run << ',' << variant << ',' << labeling << ',' << seed << ',' << step << ','
        << real(is) << ',' << real(std::log(is)) << ',' << real(am) << ',' << real(cov) << ','
        << real(disp) << ',' << real(dr) << '\n';
  };
  std::vector<std::pair<std::string, std::string>> groups;
  for (const RunRow& r : rows) {
    emit(r.manifest, r.variant, r.labeling, r.seed, std::to_string(r.last.step),
         r.last.inception_score, r.last.am_score, static_cast<double>(r.last.mode_coverage),
         r.last.intra_mode_dispersion, r.last.d_r_mean_on_fake);
    const std::pair<std::string, std::string> key{r.variant, r.labeling};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& [variant, labeling] : groups) {
    std::vector<double> is, am, cov, disp, dr;
    for (const RunRow& r : rows) {
      if (r.variant != variant || r.labeling != labeling) continue;
      is.push_back(r.last.inception_score);
      am.push_back(r.last.am_score);
      cov.push_back(static_cast<double>(r.last.mode_coverage));
      disp.push_back(r.last.intra_mode_dispersion);
      dr.push_back(r.last.d_r_mean_on_fake);
    }
    emit("median", variant, labeling, "", "", median(is), median(am), median(cov), median(disp),
         median(dr));
  }

  const fs::path path = a.out.empty() ? default_out_dir() / "compare.csv" : fs::path(a.out);
  write_file(path, csv.str());
  Manifest m;
  m.command = "compare";
  m.replay_args = {"compare"};
  for (const auto& p : a.manifests) {
    const std::string abs = fs::absolute(p).string();
    m.config["manifests"].push_back(abs);
    m.replay_args.push_back(abs);
  }
  m.outputs["table"] = path.filename().string();
  write_manifest(manifest_path_for(path), m);
  out << csv.str();
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-aware GAN losses, sample scores and desk-scale training experiments",
               "amgan"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "Run the property suites; nonzero exit on failure");
  verify->add_option("--seed", verify_args.seed, "Seed of the random instances");
  verify->add_option("--out", verify_args.out, "JSON report path");

  ModeDropArgs md;
  auto* modedrop = app.add_subcommand("modedrop", "Mode-dropping simulation of the inception score");
  modedrop->add_option("--n", md.n, "Number of points (classes)")->required()
      ->check(CLI::Range(2, 1000000));
  modedrop->add_option("--density", md.density, "Class density")
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  modedrop->add_option("--trials", md.trials, "Random drop sets per kept count")
      ->check(CLI::PositiveNumber);
  modedrop->add_option("--seed", md.seed, "Seed");
  modedrop->add_option("--mu", md.mu, "Gaussian density center (default N/2)");
  modedrop->add_option("--sigma", md.sigma, "Gaussian density width (default N/4)");
  modedrop->add_option("--out", md.out, "CSV output path");

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train one model on the 2D mixture");
  train_cmd->add_option("--variant", ta.variant,
                        "gan, gan-star, labelgan, acgan-star, acgan-star-plus or amgan")
      ->required();
  train_cmd->add_option("--labeling", ta.labeling, "dynamic, predefined or none");
  train_cmd->add_option("--generator-loss", ta.generator_loss, "neg-log-d or log-one-minus-d");
  train_cmd->add_option("--aux-weight", ta.aux_weight, "Generator classifier weight (AC family)");
  train_cmd->add_option("--smooth-fake", ta.smooth_fake, "Fake-target smoothing (vanilla GAN)");
  train_cmd->add_option("--smooth-real", ta.smooth_real, "Real-target smoothing (vanilla GAN)");
  train_cmd->add_flag("--include-fake-aux", ta.include_fake_aux,
                      "Original AC-GAN classifier term on fakes in the D loss");
  train_cmd->add_option("--modes", ta.modes, "Mixture modes on the ring");
  train_cmd->add_option("--radius", ta.radius, "Ring radius");
  train_cmd->add_option("--sigma", ta.sigma, "Mode standard deviation");
  train_cmd->add_option("--noise-dim", ta.noise_dim, "Generator noise dimension");
  train_cmd->add_option("--hidden-g", ta.hidden_g, "Generator hidden widths, e.g. 64,64");
  train_cmd->add_option("--hidden-d", ta.hidden_d, "Discriminator hidden widths");
  train_cmd->add_option("--batch", ta.batch, "Minibatch size");
  train_cmd->add_option("--steps", ta.steps, "Training iterations");
  train_cmd->add_option("--lr-g", ta.lr_g, "Generator learning rate");
  train_cmd->add_option("--lr-d", ta.lr_d, "Discriminator learning rate");
  train_cmd->add_option("--seed", ta.seed, "Seed");
  train_cmd->add_option("--seeds", ta.seeds, "Several seeds, one output subdirectory each")
      ->delimiter(',');
  train_cmd->add_option("--jobs", ta.jobs, "Parallel processes for --seeds")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--eval-every", ta.eval_every, "Steps between snapshots");
  train_cmd->add_option("--eval-samples", ta.eval_samples, "Samples per snapshot");
  train_cmd->add_flag("--no-grad-check", ta.no_grad_check, "Skip per-snapshot spot checks");
  train_cmd->add_option("--out-dir", ta.out_dir, "Output directory");

  ScoreArgs sa;
  auto* score = app.add_subcommand("score", "Score a classifier batch or a sample dump");
  score->add_option("--batch", sa.batch, "Classifier batch file (header K=<int>)");
  score->add_option("--train-dist", sa.train_dist, "Reference class distribution (one row)");
  score->add_option("--samples", sa.samples, "Sample dump from `train`, scored by the oracle");
  score->add_option("--manifest", sa.manifest, "Training manifest for --samples");
  score->add_option("--out", sa.out, "JSON output path");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Tabulate final snapshots of training runs");
  compare->add_option("manifests", ca.manifests, "Training manifests")->required();
  compare->add_option("--out", ca.out, "CSV output path");

  std::string replay_manifest, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", replay_manifest, "Manifest path")->required();
  replay->add_option("--out", replay_out,
                     "Output file (or directory for train); defaults to the original names under "
                     "the output directory");

  for (auto* sub : app.get_subcommands({})) {
    if (sub != replay) {
      sub->add_option("--config", "Flat key = value file; command-line flags take precedence");
    }
  }

  std::vector<std::string> args;
  try {
    if (!raw_args.empty()) {
      std::vector<std::string> rest(raw_args.begin() + 1, raw_args.end());
      args.push_back(raw_args.front());
      for (auto& s : expand_config(rest)) args.push_back(std::move(s));
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify(verify_args, out, err);
    if (modedrop->parsed()) return cmd_modedrop(md, out);
    if (train_cmd->parsed()) {
      return cmd_train(ta, std::vector<std::string>(args.begin() + 1, args.end()), out, err);
    }
    if (score->parsed()) return cmd_score(sa, out);
    if (compare->parsed()) return cmd_compare(ca, out);
    if (replay->parsed()) {
      const Manifest m = read_manifest(replay_manifest);
      std::vector<std::string> again = m.replay_args;
      if (m.command == "train") {
        again.insert(again.end(), {"--out-dir", replay_out.empty() ? default_out_dir().string()
                                                                     : replay_out});
      } else if (!replay_out.empty()) {
        again.insert(again.end(), {"--out", replay_out});
      } else {
        const auto it = m.outputs.begin();
        if (it != m.outputs.end()) {
          again.insert(again.end(), {"--out", (default_out_dir() / it->second).string()});
        }
      }
      return run(again, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PropertyFailure& e) {
    err << "property failure: " << e.what() << '\n';
    return kExitPropertyFailure;
  } catch (const DivergedError& e) {
    err << "diverged: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace amgan::cli
