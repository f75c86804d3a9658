#include "cli.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "romfcc/error.hpp"
#include "romfcc/harness.hpp"
#include "romfcc/io.hpp"
#include "romfcc/monitor.hpp"
#include "romfcc/simgen.hpp"

namespace romfcc::cli {
namespace {

namespace fs = std::filesystem;

void require_input(const std::string& path, const char* flag) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorKind::kIoError, std::string(flag) + ": no such file: " + path);
  }
}

void require_output(const std::string& path, const char* flag) {
  const fs::path parent = fs::absolute(fs::path(path)).parent_path();
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw Error(ErrorKind::kIoError, std::string(flag) + ": directory does not exist: " + parent.string());
  }
}

struct Globals {
  std::size_t threads = 0;
  bool verbose = false;
};

struct SimulateArgs {
  std::string preset;
  double p_tilde = 0.05;
  std::size_t n = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string labels;
  std::string warp = "corrected";
};

struct FilterArgs {
  std::string in;
  std::string out;
  std::string summary;
  double delta_fil = 0.999;
  double alpha = kFufAlpha;
  std::uint64_t seed = 0;
};

struct FitArgs {
  std::string train;
  std::string tune;
  std::string config;
  std::string out;
};

struct MonitorArgs {
  std::string model;
  std::string in;
  std::string out;
};

struct StudyArgs {
  std::string config;
  std::string out;
  bool full_scale = false;
};

void run_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
  require_output(a.out, "--out");
  if (!a.labels.empty()) require_output(a.labels, "--labels");
  SimScenario s = scenario_preset(a.preset, a.p_tilde);
  s.n = a.n;
  s.seed = a.seed;
  s.warp = parse_warp_form(a.warp);
  validate(s);
  if (s.n == 0) throw Error(ErrorKind::kInvalidConfiguration, "--n must be positive");
  const GeneratedSample sample = generate(s);
  write_curve_csv(a.out, sample.set);
  if (!a.labels.empty()) write_text(a.labels, labels_csv(sample.set.case_ids, sample.labels));
  if (g.verbose) out << "wrote " << sample.set.size() << " cases to " << a.out << "\n";
}

void run_filter(const FilterArgs& a, const Globals& g, std::ostream& out) {
  require_input(a.in, "--in");
  require_output(a.out, "--out");
  const std::string summary = a.summary.empty() ? fs::path(a.out).replace_extension(".json").string() : a.summary;
  require_output(summary, "--summary");
  if (!(a.delta_fil > 0.0 && a.delta_fil <= 1.0) || !(a.alpha > 0.0 && a.alpha < 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "--delta-fil must lie in (0, 1] and --alpha in (0, 1)");
  }
  const CurveSet set = read_curve_csv(a.in);
  const auto space = std::make_shared<const FunctionalSpace>(default_basis());
  const FilterResult r = apply_filter(smooth_set(set, space->basis), space, a.delta_fil, a.alpha, a.seed);
  write_text(a.out, filter_csv(set.case_ids, r.report));
  write_text(summary, filter_summary_json(set.case_ids, r.report));
  if (g.verbose) {
    std::size_t flagged = 0;
    for (const auto& f : r.report.flagged) flagged += f.size();
    out << "flagged " << flagged << " cells, tombstoned " << set.size() - r.curves.size() << " cases\n";
  }
}

void run_fit(const FitArgs& a, const Globals& g, std::ostream& out) {
  require_input(a.train, "--train");
  require_input(a.tune, "--tune");
  if (!a.config.empty()) require_input(a.config, "--config");
  require_output(a.out, "--out");
  const Phase1Config config = a.config.empty() ? Phase1Config{} : parse_phase1_config(read_text(a.config));
  const CurveSet train = read_curve_csv(a.train);
  const CurveSet tune = read_curve_csv(a.tune);
  if (train.p != tune.p || !(train.grid == tune.grid)) {
    throw Error(ErrorKind::kShapeError, "training and tuning sets differ in components or grid");
  }
  const auto space = std::make_shared<const FunctionalSpace>(default_basis());
  const Phase1Result r = phase1_fit(smooth_set(train, space->basis), smooth_set(tune, space->basis), space, config);
  write_text(a.out, scheme_json(r.scheme));
  if (g.verbose) {
    out << "L_mon = " << r.scheme.l_mon() << ", T2 limit = " << r.scheme.t2_limit
        << ", SPE limit = " << r.scheme.spe_limit << "\n";
  }
}

void run_monitor(const MonitorArgs& a, const Globals& g, std::ostream& out) {
  require_input(a.model, "--model");
  require_input(a.in, "--in");
  require_output(a.out, "--out");
  const MonitoringScheme scheme = parse_scheme_json(read_text(a.model));
  const CurveSet batch = read_curve_csv(a.in);
  if (batch.p != scheme.model.p) {
    throw Error(ErrorKind::kShapeError, "batch has " + std::to_string(batch.p) + " components, model expects " +
                                            std::to_string(scheme.model.p));
  }
  const MonitorResult r = phase2_monitor(scheme, smooth_set(batch, scheme.model.space->basis));
  write_text(a.out, monitor_csv(batch.case_ids, r));
  if (g.verbose) {
    std::size_t alarms = 0;
    for (char c : r.alarm) alarms += c != 0;
    out << alarms << " alarms in " << batch.size() << " cases\n";
  }
}

void run_study_cmd(const StudyArgs& a, const Globals& g, std::ostream& out) {
  if (!a.config.empty()) require_input(a.config, "--config");
  require_output(a.out, "--out");
  StudyConfig config = a.config.empty() ? StudyConfig{} : parse_study_config(read_text(a.config));
  if (a.full_scale) config.apply_full_scale();
  if (g.threads != 0) config.threads = g.threads;
  validate(config);
  ProgressFn progress;
  if (g.verbose) progress = [&out](const std::string& msg) { out << msg << "\n" << std::flush; };
  const StudyResult result = run_study(config, progress);
  const auto files = emit_plotdata(result, a.out);
  if (g.verbose) {
    for (const auto& s : result.summarize()) {
      out << s.preset << " OC" << s.oc << " " << to_string(s.method) << " SL" << s.sl << ": " << s.mean << "\n";
    }
    out << "wrote " << files.size() << " files to " << a.out << "\n";
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust multivariate functional control charts"};
  app.name("romfcc");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0: all hardware threads)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose", g.verbose, "Print progress and summaries to stdout");
  app.fallthrough();

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic sample as long-format CSV");
  s->add_option("--preset", sim.preset, "Scenario preset, e.g. S0, S1-OutE-C3, PhaseII-OCE-SL2")->required();
  s->add_option("--p-tilde", sim.p_tilde, "Contamination probability used by the preset")->capture_default_str();
  s->add_option("--n", sim.n, "Number of cases")->capture_default_str();
  s->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output curve CSV (case_id,component,t,value)")->required();
  s->add_option("--labels", sim.labels, "Optional per-cell ground-truth label CSV");
  s->add_option("--warp", sim.warp, "Phase-shift time warp: corrected or verbatim")->capture_default_str();

  FilterArgs fil;
  auto* f = app.add_subcommand("filter-report", "Run the functional univariate filter on a sample");
  f->add_option("--in", fil.in, "Input curve CSV")->required();
  f->add_option("--out", fil.out, "Per-cell CSV (case_id,component,distance,flagged)")->required();
  f->add_option("--summary", fil.summary, "Summary JSON (default: --out with .json extension)");
  f->add_option("--delta-fil", fil.delta_fil, "Explained-variance target of the filter")->capture_default_str();
  f->add_option("--alpha", fil.alpha, "Reference quantile level")->capture_default_str();
  f->add_option("--seed", fil.seed, "Random seed")->capture_default_str();

  FitArgs fit;
  auto* p1 = app.add_subcommand("fit-phase1", "Design the control charts from training and tuning samples");
  p1->add_option("--train", fit.train, "Training curve CSV")->required();
  p1->add_option("--tune", fit.tune, "Tuning curve CSV")->required();
  p1->add_option("--config", fit.config,
                 "Config JSON (delta_fil, delta_imp, delta_mon, alpha, m_imputations, seed, flavor, limits)");
  p1->add_option("--out", fit.out, "Output model JSON")->required();

  MonitorArgs mon;
  auto* m = app.add_subcommand("monitor", "Score a Phase II batch against a fitted model");
  m->add_option("--model", mon.model, "Model JSON from fit-phase1")->required();
  m->add_option("--in", mon.in, "Phase II curve CSV")->required();
  m->add_option("--out", mon.out, "Output CSV (case_id,t2,spe,alarm)")->required();

  StudyArgs st;
  auto* mc = app.add_subcommand("mc-study", "Run a Monte Carlo FAR/TDR study");
  mc->add_option("--config", st.config, "Study config JSON");
  mc->add_option("--out", st.out, "Output directory")->required();
  mc->add_flag("--paper-scale", st.full_scale, "50 runs with 1000/3000/4000 cases");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    if (*s) run_simulate(sim, g, out);
    else if (*f) run_filter(fil, g, out);
    else if (*p1) run_fit(fit, g, out);
    else if (*m) run_monitor(mon, g, out);
    else if (*mc) run_study_cmd(st, g, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_validation_error(e.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: runtime: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace romfcc::cli
