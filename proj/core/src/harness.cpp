#include "romfcc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "json_util.hpp"
#include "romfcc/error.hpp"
#include "romfcc/rng.hpp"

#ifndef ROMFCC_GIT_DESCRIBE
#define ROMFCC_GIT_DESCRIBE "unknown"
#endif

namespace romfcc {

const char* build_version() noexcept { return ROMFCC_GIT_DESCRIBE; }

std::string to_string(Method method) { return method == Method::kRoMFCC ? "RoMFCC" : "MFCC"; }

Method parse_method(const std::string& name) {
  if (name == "RoMFCC") return Method::kRoMFCC;
  if (name == "MFCC") return Method::kMFCC;
  throw Error(ErrorKind::kInvalidConfiguration, "unknown method '" + name + "' (expected RoMFCC or MFCC)");
}

void StudyConfig::apply_full_scale() {
  runs = 50;
  n_train = 1000;
  n_tune = 3000;
  n_phase2 = 4000;
}

void validate(const StudyConfig& c) {
  if (c.runs < 1) throw Error(ErrorKind::kInvalidConfiguration, "runs must be at least 1");
  if (c.n_train < 10 || c.n_tune < 10 || c.n_phase2 < 10) {
    throw Error(ErrorKind::kInvalidConfiguration, "sample sizes must be at least 10");
  }
  if (c.methods.empty() || c.presets.empty() || c.oc_types.empty()) {
    throw Error(ErrorKind::kInvalidConfiguration, "methods, presets and OC types must be non-empty");
  }
  for (char oc : c.oc_types) {
    if (oc != 'E' && oc != 'P') throw Error(ErrorKind::kInvalidConfiguration, "OC types are E and P");
  }
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "alpha must lie in (0, 1]");
  }
  for (const auto& p : c.presets) {
    if (p.rfind("PhaseII-", 0) == 0) {
      throw Error(ErrorKind::kInvalidConfiguration, "Phase II presets cannot design a Phase I sample");
    }
    scenario_preset(p, c.p_tilde);
  }
  Phase1Config p1 = c.phase1;
  p1.alpha = c.alpha;
  validate(p1);
}

RunSeeds run_seeds(std::uint64_t base_seed, std::size_t run) {
  return {derive_seed(base_seed, {run, 0}), derive_seed(base_seed, {run, 1}),
          derive_seed(base_seed, {run, 2}), derive_seed(base_seed, {run, 3})};
}

double far_tdr(std::span<const char> alarms) {
  if (alarms.empty()) throw Error(ErrorKind::kInsufficientSample, "no alarms to average");
  const auto hits = std::count_if(alarms.begin(), alarms.end(), [](char a) { return a != 0; });
  return static_cast<double>(hits) / static_cast<double>(alarms.size());
}

std::vector<double> StudyResult::rates(const std::string& preset, Method method, char oc, int sl) const {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.preset == preset && r.method == method && r.oc == oc && r.sl == sl) out.push_back(r.rate);
  }
  return out;
}

double StudyResult::mean_rate(const std::string& preset, Method method, char oc, int sl) const {
  const auto v = rates(preset, method, oc, sl);
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<RateSummary> StudyResult::summarize() const {
  std::vector<RateSummary> out;
  for (const auto& preset : config.presets)
    for (char oc : config.oc_types)
      for (Method m : config.methods)
        for (int sl = 0; sl < kSeverityLevels; ++sl) {
          const auto v = rates(preset, m, oc, sl);
          RateSummary s{preset, oc, m, sl, std::numeric_limits<double>::quiet_NaN(), 0.0, v.size()};
          if (!v.empty()) {
            double sum = 0.0;
            for (double x : v) sum += x;
            s.mean = sum / static_cast<double>(v.size());
            double ss = 0.0;
            for (double x : v) ss += (x - s.mean) * (x - s.mean);
            s.std_error = v.size() > 1
                              ? std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))
                              : 0.0;
          }
          out.push_back(s);
        }
  return out;
}

namespace {

struct RunOutput {
  std::vector<RateRecord> records;
  std::vector<RunFailure> failures;
};

CurveSample simulate_smoothed(SimScenario s, std::size_t n, std::uint64_t seed, WarpForm warp,
                              const EigenStructure& eig, const BasisSystem& basis) {
  s.n = n;
  s.seed = seed;
  s.warp = warp;
  return smooth_set(generate(s, eig).set, basis);
}

RunOutput run_one(const StudyConfig& config, std::size_t run, const EigenStructure& eig,
                  const std::shared_ptr<const FunctionalSpace>& space, const ProgressFn& progress) {
  RunOutput out;
  const RunSeeds seeds = run_seeds(config.base_seed, run);
  // Phase II samples share one seed across OC types and severities.
  std::vector<std::vector<CurveSample>> phase2(config.oc_types.size());
  for (std::size_t o = 0; o < config.oc_types.size(); ++o) {
    for (int sl = 0; sl < kSeverityLevels; ++sl) {
      const std::string name = std::string("PhaseII-OC") + config.oc_types[o] + "-SL" + std::to_string(sl);
      phase2[o].push_back(simulate_smoothed(scenario_preset(name, config.p_tilde), config.n_phase2,
                                            seeds.phase2, config.warp, eig, space->basis));
    }
  }
  for (const auto& preset : config.presets) {
    const SimScenario scenario = scenario_preset(preset, config.p_tilde);
    const CurveSample train =
        simulate_smoothed(scenario, config.n_train, seeds.train, config.warp, eig, space->basis);
    const CurveSample tune =
        simulate_smoothed(scenario, config.n_tune, seeds.tune, config.warp, eig, space->basis);
    for (Method method : config.methods) {
      Phase1Config p1 = config.phase1;
      p1.alpha = config.alpha;
      p1.seed = seeds.fit;
      p1.flavor = method == Method::kRoMFCC ? Flavor::kRobust : Flavor::kClassical;
      try {
        const Phase1Result fit = phase1_fit(train, tune, space, p1);
        for (std::size_t o = 0; o < config.oc_types.size(); ++o) {
          for (int sl = 0; sl < kSeverityLevels; ++sl) {
            const MonitorResult mr = phase2_monitor(fit.scheme, phase2[o][static_cast<std::size_t>(sl)]);
            out.records.push_back({run, preset, method, config.oc_types[o], sl, far_tdr(mr.alarm)});
          }
        }
        if (progress) {
          progress("run " + std::to_string(run) + " " + preset + " " + to_string(method) + ": L_mon = " +
                   std::to_string(fit.scheme.l_mon()));
        }
      } catch (const Error& e) {
        out.failures.push_back({run, preset, method, e.what()});
        if (progress) progress("run " + std::to_string(run) + " " + preset + " " + to_string(method) + " failed: " + e.what());
      }
    }
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& config, const ProgressFn& progress) {
  validate(config);
  const SimScenario base = scenario_preset("S0", config.p_tilde);
  const EigenStructure eig = build_eigenstructure(base);
  const auto space = std::make_shared<const FunctionalSpace>(default_basis());
  std::vector<RunOutput> outputs(config.runs);
  std::size_t threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, config.runs);
  std::mutex progress_mutex;
  const ProgressFn locked = progress ? ProgressFn([&](const std::string& msg) {
    std::lock_guard<std::mutex> lock(progress_mutex);
    progress(msg);
  })
                                     : ProgressFn{};
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const auto worker = [&] {
    for (std::size_t r = next++; r < config.runs; r = next++) {
      try {
        outputs[r] = run_one(config, r, eig, space, locked);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  StudyResult result;
  result.config = config;
  for (auto& o : outputs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.failures.insert(result.failures.end(), o.failures.begin(), o.failures.end());
  }
  return result;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::kIoError, "failed writing " + path.string());
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::filesystem::path> emit_plotdata(const StudyResult& result,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  const StudyConfig& c = result.config;
  const auto summary = result.summarize();
  std::vector<std::filesystem::path> written;
  for (const auto& preset : c.presets) {
    for (char oc : c.oc_types) {
      std::string text = "method,SL,mean_rate,stderr\n";
      for (const auto& s : summary) {
        if (s.preset != preset || s.oc != oc) continue;
        text += to_string(s.method) + "," + std::to_string(s.sl) + "," + fmt(s.mean) + "," + fmt(s.std_error) + "\n";
      }
      const auto path = dir / (preset + "_OC" + oc + ".csv");
      write_file(path, text);
      written.push_back(path);
    }
  }
  detail::Json m;
  m["version"] = build_version();
  detail::Json cfg;
  cfg["runs"] = c.runs;
  cfg["n_train"] = c.n_train;
  cfg["n_tune"] = c.n_tune;
  cfg["n_phase2"] = c.n_phase2;
  cfg["p_tilde"] = c.p_tilde;
  cfg["alpha"] = c.alpha;
  cfg["base_seed"] = c.base_seed;
  cfg["warp"] = to_string(c.warp);
  detail::Json methods = detail::Json::array();
  for (Method meth : c.methods) methods.push_back(to_string(meth));
  cfg["methods"] = methods;
  cfg["presets"] = c.presets;
  detail::Json ocs = detail::Json::array();
  for (char oc : c.oc_types) ocs.push_back(std::string(1, oc));
  cfg["oc_types"] = ocs;
  cfg["delta_fil"] = c.phase1.delta_fil;
  cfg["delta_imp"] = c.phase1.delta_imp;
  cfg["delta_mon"] = c.phase1.delta_mon;
  cfg["m_imputations"] = c.phase1.m_imputations;
  cfg["limits"] = to_string(c.phase1.limits);
  m["config"] = cfg;
  detail::Json seeds = detail::Json::array();
  for (std::size_t r = 0; r < c.runs; ++r) {
    const RunSeeds s = run_seeds(c.base_seed, r);
    seeds.push_back({{"run", r}, {"train", s.train}, {"tune", s.tune}, {"phase2", s.phase2}, {"fit", s.fit}});
  }
  m["seeds"] = seeds;
  detail::Json failures = detail::Json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"run", f.run}, {"preset", f.preset}, {"method", to_string(f.method)}, {"error", f.message}});
  }
  m["failures"] = failures;
  detail::Json files = detail::Json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  m["files"] = files;
  const auto path = dir / "manifest.json";
  write_file(path, detail::dump(m));
  written.push_back(path);
  return written;
}

}  // namespace romfcc
