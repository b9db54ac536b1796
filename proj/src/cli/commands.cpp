#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "jfa/adapt.hpp"
#include "jfa/cli.hpp"
#include "jfa/data.hpp"
#include "jfa/kernels.hpp"
#include "jfa/learn.hpp"
#include "jfa/modelselect.hpp"
#include "jfa/zsr.hpp"

namespace jfa::cli {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failure: " + path);
}

OmegaParams omega_from_flags(const std::string& omega, const std::string& omega_exp) {
  if (!omega.empty() && !omega_exp.empty()) throw ValidationError("give either --omega or --omega-exp, not both");
  Vector w;
  try {
    if (!omega_exp.empty()) {
      for (double e : parse_reals(omega_exp)) w.push_back(std::pow(10.0, e));
    } else if (!omega.empty()) {
      w = parse_reals(omega);
    } else {
      throw ValidationError("--omega or --omega-exp is required");
    }
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("bad omega: ") + e.what());
  }
  if (w.size() != 4) throw ValidationError("omega needs exactly 4 comma-separated components");
  return OmegaParams(w[0], w[1], w[2], w[3]);
}

// synth ------------------------------------------------------------------

struct SynthFlags {
  std::size_t classes = 25;
  std::size_t unseen = 5;
  std::size_t ds = 8;
  std::size_t dt = 16;
  std::size_t per_class = 30;
  double noise = 0.05;
  double spread = -1.0;
  double attr_scale = 1.0;
  double map_noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_synth(const SynthFlags& f, std::ostream& out) {
  if (f.unseen < 1) throw ValidationError("--unseen must be >= 1");
  if (f.classes <= f.unseen) throw ValidationError("--classes must exceed --unseen (need at least one seen class)");
  SynthConfig cfg;
  cfg.n_seen = f.classes - f.unseen;
  cfg.n_unseen = f.unseen;
  cfg.d_s = f.ds;
  cfg.d_t = f.dt;
  cfg.instances_per_class = f.per_class;
  cfg.feature_noise = f.noise;
  cfg.intra_class_spread = f.spread < 0.0 ? f.noise : f.spread;
  cfg.attribute_scale = f.attr_scale;
  cfg.map_noise = f.map_noise;
  cfg.seed = f.seed;
  const Dataset d = synth_generate(cfg);
  save_dataset(d, f.out);
  out << "wrote " << d.classes.size() << " classes (" << d.seen.size() << " seen, " << d.unseen.size()
      << " unseen) and " << d.instances.size() << " instances to " << f.out << "\n";
  return kOk;
}

// standardize --------------------------------------------------------------

struct StandardizeFlags {
  std::string data;
  std::string mode = "none";
  std::string out;
};

int run_standardize(const StandardizeFlags& f, std::ostream& out) {
  const StandardizeMode mode = parse_standardize_mode(f.mode);
  const StandardizeResult r = standardize(load_dataset_dir(f.data), mode);
  save_dataset(r.dataset, f.out);
  out << "mode " << standardize_mode_name(mode) << "\n";
  if (!r.fit.zero_variance_dims.empty()) out << "zero_variance_dims " << r.fit.zero_variance_dims.size() << "\n";
  if (r.zero_vectors) out << "zero_vectors " << r.zero_vectors << "\n";
  return kOk;
}

// train --------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string omega;
  std::string omega_exp;
  TrainConfig config;
  std::string out;
  std::string log;
};

void write_train_log(const TrainResult& r, std::ostream& log) {
  log << "# round\tobjective\tdelta_w\teig_min\teig_max\tis_pd\timproved\n";
  log << 0 << '\t' << format_real(r.state.objective_trace.front().second) << "\t0\t-\t-\t1\t-\n";
  for (const auto& d : r.rounds) {
    log << d.round << '\t' << format_real(d.objective) << '\t' << format_real(d.delta_w) << '\t'
        << format_real(d.eig_min) << '\t' << format_real(d.eig_max) << '\t' << (d.is_pd ? 1 : 0) << '\t'
        << (d.improved ? 1 : 0) << '\n';
  }
  log << "# converged " << (r.state.converged ? 1 : 0) << "\n";
}

int run_train(const TrainFlags& f, std::ostream& out) {
  const OmegaParams omega = omega_from_flags(f.omega, f.omega_exp);
  const Dataset d = load_dataset_dir(f.data);
  TrainResult r;
  try {
    r = train(d, omega, f.config);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " [omega=" + format_real(omega.w1()) + "," + format_real(omega.w2()) +
                         "," + format_real(omega.w3()) + "," + format_real(omega.w4()) + "]");
  }
  const JointSystem sys = assemble_joint_system(r.model.W, r.model.omega);
  if (!sys.is_pd()) {
    throw NumericalError("trained model is not PD: delta_W=" + format_real(sys.delta_w()) +
                         " w13=" + format_real(omega.w13()) + " w24=" + format_real(omega.w24()));
  }
  save_model(r.model, f.out);
  write_train_log(r, out);
  if (!f.log.empty()) {
    auto log = open_out(f.log);
    write_train_log(r, log);
    finish(log, f.log);
  }
  return kOk;
}

// predict / eval -------------------------------------------------------------

struct PredictFlags {
  std::string model;
  std::string data;
  std::string out;
  bool bilinear = false;
};

int run_predict(const PredictFlags& f, std::ostream& out) {
  const WeightModel model = load_model(f.model);
  const Dataset d = load_dataset_dir(f.data);
  check_model_matches(model, d);
  const auto unseen = d.unseen_classes();
  if (unseen.empty()) throw ValidationError("the dataset's unseen split is empty");
  const auto test = d.test_instances();

  std::vector<PredictionResult> preds;
  if (f.bilinear) {
    for (const auto& x : test) preds.push_back(predict_bilinear(model.W, unseen, x));
  } else {
    const JointSystem sys = assemble_joint_system(model.W, model.omega);
    if (!sys.is_pd()) throw NumericalError("model's joint system is not PD (eig_min=" + format_real(sys.eig_min()) + ")");
    for (const auto& x : test) preds.push_back(predict(sys, unseen, x));
  }

  auto file = open_out(f.out);
  file << "# instance_id\tpredicted\tscores\n# classes:";
  for (std::size_t c = 0; c < unseen.size(); ++c) file << (c ? "," : " ") << d.unseen[c];
  file << "\n";
  for (const auto& p : preds) {
    file << p.instance << '\t' << p.predicted << '\t';
    for (std::size_t c = 0; c < p.scores.size(); ++c) file << (c ? "," : "") << format_real(p.scores[c].second);
    file << '\n';
  }
  finish(file, f.out);
  out << "predicted " << preds.size() << " instances over " << unseen.size() << " unseen classes\n";
  return kOk;
}

std::vector<PredictionResult> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<PredictionResult> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::istringstream row{std::string(line)};
    PredictionResult p;
    if (!(row >> p.instance >> p.predicted)) throw ParseError(path, lineno, "expected instance id and predicted class");
    out.push_back(p);
  }
  return out;
}

void write_metrics(const MetricsReport& m, std::ostream& out) {
  out << "accuracy\t" << format_real(m.accuracy) << '\n';
  out << "macro_precision\t" << format_real(m.macro_precision) << '\n';
  out << "macro_precision_std\t" << format_real(m.macro_precision_std) << '\n';
  out << "macro_recall\t" << format_real(m.macro_recall) << '\n';
  out << "macro_recall_std\t" << format_real(m.macro_recall_std) << '\n';
  out << "# class\tsupport\tpredicted\tcorrect\tprecision\trecall\tprecision_undefined\n";
  for (const auto& c : m.per_class) {
    out << "class\t" << c.label << '\t' << c.support << '\t' << c.predicted << '\t' << c.correct << '\t'
        << format_real(c.precision) << '\t' << format_real(c.recall) << '\t' << (c.precision_undefined ? 1 : 0) << '\n';
  }
}

struct EvalFlags {
  std::string pred;
  std::string data;
  std::string out;
};

int run_eval(const EvalFlags& f, std::ostream& out) {
  const auto preds = read_predictions(f.pred);
  const Dataset d = load_dataset_dir(f.data);
  std::map<InstanceId, ClassId> truth;
  for (const auto& x : d.instances)
    if (x.label) truth[x.id] = *x.label;
  for (const auto& p : preds) {
    if (!truth.count(p.instance)) throw ValidationError("prediction for unknown or unlabeled instance " + std::to_string(p.instance));
  }
  const MetricsReport m = evaluate(preds, truth);
  auto file = open_out(f.out);
  write_metrics(m, file);
  finish(file, f.out);
  out << "accuracy " << format_real(m.accuracy) << "\n";
  return kOk;
}

// gridsearch -------------------------------------------------------------

struct GridFlags {
  std::string data;
  GridSpec grid;
  SelectionOptions options;
  TrainConfig config{.outer_iters = 5, .inner_iters = 10};
  bool no_prefilter = false;
  std::string out;
};

int run_gridsearch(GridFlags f, std::ostream& out) {
  const Dataset d = load_dataset_dir(f.data);
  f.options.use_prefilter = !f.no_prefilter;
  f.options.probe_config.lambda = f.config.lambda;
  f.options.probe_config.pd_margin = f.config.pd_margin;
  f.options.probe_config.step_size = f.config.step_size;
  const SelectionReport report = select_omega(d, f.grid, f.config, f.options);
  auto file = open_out(f.out);
  write_report(report, file);
  finish(file, f.out);
  std::size_t skipped = 0;
  for (const auto& r : report.records) skipped += r.skipped ? 1 : 0;
  out << "candidates " << report.records.size() << " evaluated " << report.records.size() - skipped << " skipped "
      << skipped << "\n";
  if (report.best) {
    const auto& b = report.records[*report.best];
    out << "best omega " << format_real(b.candidate.omega.w1()) << "," << format_real(b.candidate.omega.w2()) << ","
        << format_real(b.candidate.omega.w3()) << "," << format_real(b.candidate.omega.w4()) << " cv_accuracy "
        << format_real(b.cv_mean) << "\n";
  } else {
    out << "no candidate survived the prefilter\n";
  }
  out << "elapsed_seconds " << report.elapsed_seconds << "\n";
  return kOk;
}

// diagnose / export ------------------------------------------------------------

struct DiagnoseFlags {
  std::string model;
  std::string out;
};

int run_diagnose(const DiagnoseFlags& f, std::ostream& out) {
  const WeightModel model = load_model(f.model);
  const JointSystem sys = assemble_joint_system(model.W, model.omega);
  std::ostringstream s;
  s << "delta_w\t" << format_real(sys.delta_w()) << '\n';
  s << "eig_min\t" << format_real(sys.eig_min()) << '\n';
  s << "eig_max\t" << format_real(sys.eig_max()) << '\n';
  s << "is_pd\t" << (sys.is_pd() ? "true" : "false") << '\n';
  s << "is_diag_dominant\t" << (sys.is_diag_dominant() ? "true" : "false") << '\n';
  s << "eig_min_in_0_1\t" << (sys.eig_min() > 0.0 && sys.eig_min() <= 1.0 ? "true" : "false") << '\n';
  s << "eig_max_in_1e3_1e4\t" << (sys.eig_max() > 1e3 && sys.eig_max() <= 1e4 ? "true" : "false") << '\n';
  out << s.str();
  if (!f.out.empty()) {
    auto file = open_out(f.out);
    file << s.str();
    finish(file, f.out);
  }
  return kOk;
}

struct ExportFlags {
  std::string model;
  std::string data;
  ClassId label = 0;
  std::string out;
};

int run_export(const ExportFlags& f, std::ostream& out) {
  const WeightModel model = load_model(f.model);
  const Dataset d = load_dataset_dir(f.data);
  export_adapted(model, d, f.label, std::filesystem::path(f.out));
  out << "exported " << d.instances.size() << " rows\n";
  return kOk;
}

void add_train_config(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--lambda", c.lambda, "Regularization constant")->capture_default_str();
  cmd->add_option("--outer", c.outer_iters, "Latent re-estimation rounds")->capture_default_str();
  cmd->add_option("--inner", c.inner_iters, "Subgradient steps per round")->capture_default_str();
  cmd->add_option("--step", c.step_size, "Initial step (fraction of the PD radius)")->capture_default_str();
  cmd->add_option("--pd-margin", c.pd_margin, "Diagonal dominance slack")->capture_default_str();
  cmd->add_option("--batch", c.batch_size, "Stochastic batch size, 0 = full batch")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--patience", c.patience, "Failed rounds (each halves the step) before stopping")->capture_default_str();
  cmd->add_option("--decay", c.decay, "Step decay: per-step or per-round")
      ->transform(CLI::CheckedTransformer(std::map<std::string, StepDecay>{{"per-step", StepDecay::per_step},
                                                                           {"per-round", StepDecay::per_round}}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot recognition with joint feature adaptation"};
  app.require_subcommand(1);
  std::string backend;
  app.add_option("--kernels", backend, "Force kernel backend (scalar, avx2)");

  SynthFlags synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  c_synth->add_option("--classes", synth.classes, "Total number of classes")->capture_default_str();
  c_synth->add_option("--unseen", synth.unseen, "Number of unseen classes")->capture_default_str();
  c_synth->add_option("--ds", synth.ds, "Source (attribute) dimension")->capture_default_str();
  c_synth->add_option("--dt", synth.dt, "Target (feature) dimension")->capture_default_str();
  c_synth->add_option("--per-class", synth.per_class, "Instances per class")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Per-instance feature noise std")->capture_default_str();
  c_synth->add_option("--spread", synth.spread, "Intra-class spread std (default: same as --noise)");
  c_synth->add_option("--attr-scale", synth.attr_scale, "Attribute range [0, scale]")->capture_default_str();
  c_synth->add_option("--map-noise", synth.map_noise, "Per-class deviation from the linear map")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();

  StandardizeFlags standardize_flags;
  auto* c_std = app.add_subcommand("standardize", "Normalize a dataset (statistics from seen-class instances)");
  c_std->add_option("--data", standardize_flags.data, "Dataset directory")->required();
  c_std->add_option("--mode", standardize_flags.mode, "none | zscore-target | unit-norm-both")->capture_default_str();
  c_std->add_option("--out", standardize_flags.out, "Output directory")->required();

  TrainFlags train_flags;
  auto* c_train = app.add_subcommand("train", "Train W on the seen classes");
  c_train->add_option("--data", train_flags.data, "Dataset directory")->required();
  c_train->add_option("--omega", train_flags.omega, "w1,w2,w3,w4");
  c_train->add_option("--omega-exp", train_flags.omega_exp, "e1,e2,e3,e4 meaning omega = 10^e");
  add_train_config(c_train, train_flags.config);
  c_train->add_option("--out", train_flags.out, "Model file")->required();
  c_train->add_option("--log", train_flags.log, "Also write the training log here");

  PredictFlags predict_flags;
  auto* c_predict = app.add_subcommand("predict", "Score unseen-class instances");
  c_predict->add_option("--model", predict_flags.model, "Model file")->required();
  c_predict->add_option("--data", predict_flags.data, "Dataset directory")->required();
  c_predict->add_option("--out", predict_flags.out, "Predictions file")->required();
  c_predict->add_flag("--bilinear", predict_flags.bilinear, "Score with phi^T W psi instead of the adaptive similarity");

  EvalFlags eval_flags;
  auto* c_eval = app.add_subcommand("eval", "Accuracy and per-class precision/recall");
  c_eval->add_option("--pred", eval_flags.pred, "Predictions file")->required();
  c_eval->add_option("--data", eval_flags.data, "Dataset directory")->required();
  c_eval->add_option("--out", eval_flags.out, "Metrics file")->required();

  GridFlags grid_flags;
  auto* c_grid = app.add_subcommand("gridsearch", "Cross-validated grid search over omega");
  c_grid->add_option("--data", grid_flags.data, "Dataset directory")->required();
  c_grid->add_option("--lo", grid_flags.grid.exponent_lo, "Lowest exponent")->capture_default_str();
  c_grid->add_option("--hi", grid_flags.grid.exponent_hi, "Highest exponent")->capture_default_str();
  c_grid->add_option("--base", grid_flags.grid.base, "Grid base")->capture_default_str();
  c_grid->add_option("--folds", grid_flags.options.folds, "Class-disjoint folds")->capture_default_str();
  c_grid->add_option("--workers", grid_flags.options.workers, "Worker threads")->capture_default_str();
  c_grid->add_option("--cv-seed", grid_flags.options.seed, "Fold assignment seed")->capture_default_str();
  c_grid->add_flag("--no-prefilter", grid_flags.no_prefilter, "Evaluate every candidate");
  add_train_config(c_grid, grid_flags.config);
  c_grid->add_option("--out", grid_flags.out, "Report file")->required();

  DiagnoseFlags diagnose_flags;
  auto* c_diag = app.add_subcommand("diagnose", "Definiteness diagnostics of a model's joint system");
  c_diag->add_option("--model", diagnose_flags.model, "Model file")->required();
  c_diag->add_option("--out", diagnose_flags.out, "Also write the diagnostics here");

  ExportFlags export_flags;
  auto* c_export = app.add_subcommand("export", "Export adapted features against one class");
  c_export->add_option("--model", export_flags.model, "Model file")->required();
  c_export->add_option("--data", export_flags.data, "Dataset directory")->required();
  c_export->add_option("--class", export_flags.label, "Class id to match against")->required();
  c_export->add_option("--out", export_flags.out, "Output file")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (backend == "scalar") kernels::set_backend(kernels::Backend::scalar);
    else if (backend == "avx2") kernels::set_backend(kernels::Backend::avx2);
    else if (!backend.empty()) throw ValidationError("unknown kernel backend '" + backend + "'");

    if (c_synth->parsed()) return run_synth(synth, out);
    if (c_std->parsed()) return run_standardize(standardize_flags, out);
    if (c_train->parsed()) return run_train(train_flags, out);
    if (c_predict->parsed()) return run_predict(predict_flags, out);
    if (c_eval->parsed()) return run_eval(eval_flags, out);
    if (c_grid->parsed()) return run_gridsearch(grid_flags, out);
    if (c_diag->parsed()) return run_diagnose(diagnose_flags, out);
    if (c_export->parsed()) return run_export(export_flags, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}

}  // namespace jfa::cli
