#pragma once

// Monte Carlo study runner: Phase I designs per contamination preset, Phase II
// samples per out-of-control type and severity, alarm rates per method.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "romfcc/monitor.hpp"
#include "romfcc/simgen.hpp"

namespace romfcc {

enum class Method { kRoMFCC, kMFCC };

std::string to_string(Method method);
Method parse_method(const std::string& name);

inline constexpr int kSeverityLevels = 5;  // SL 0..4

struct StudyConfig {
  std::size_t runs = 10;
  std::size_t n_train = 500;
  std::size_t n_tune = 1000;
  std::size_t n_phase2 = 1000;
  double p_tilde = 0.05;
  std::vector<Method> methods{Method::kRoMFCC, Method::kMFCC};
  std::vector<std::string> presets{"S0"};
  /// Out-of-control types to evaluate: 'E' and/or 'P'.
  std::vector<char> oc_types{'E', 'P'};
  double alpha = 0.05;
  std::uint64_t base_seed = 1;
  Phase1Config phase1;  // alpha, seed and flavor are set per run and method
  WarpForm warp = WarpForm::kCorrected;
  std::size_t threads = 0;  // 0: hardware concurrency

  /// 50 runs, 1000 training / 3000 tuning / 4000 Phase II cases.
  void apply_full_scale();
};

/// Throws invalid-configuration or unknown-preset.
void validate(const StudyConfig& config);

/// Seeds of one run; all methods and presets of the run share them.
struct RunSeeds {
  std::uint64_t train = 0;
  std::uint64_t tune = 0;
  std::uint64_t phase2 = 0;
  std::uint64_t fit = 0;
};
RunSeeds run_seeds(std::uint64_t base_seed, std::size_t run);

struct RateRecord {
  std::size_t run = 0;
  std::string preset;
  Method method = Method::kRoMFCC;
  char oc = 'E';
  int sl = 0;
  double rate = 0.0;
};

struct RunFailure {
  std::size_t run = 0;
  std::string preset;
  Method method = Method::kRoMFCC;
  std::string message;
};

struct RateSummary {
  std::string preset;
  char oc = 'E';
  Method method = Method::kRoMFCC;
  int sl = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
};

struct StudyResult {
  StudyConfig config;
  std::vector<RateRecord> records;  // ordered by run, preset, method, oc, sl
  std::vector<RunFailure> failures;

  std::vector<RateSummary> summarize() const;
  /// Mean rate over runs (NaN when no run succeeded).
  double mean_rate(const std::string& preset, Method method, char oc, int sl) const;
  /// Per-run rates in run order, only runs where the method succeeded.
  std::vector<double> rates(const std::string& preset, Method method, char oc, int sl) const;
};

/// Alarm fraction; pre: non-empty.
double far_tdr(std::span<const char> alarms);

using ProgressFn = std::function<void(const std::string&)>;

StudyResult run_study(const StudyConfig& config, const ProgressFn& progress = {});

/// Writes <preset>_OC<E|P>.csv (method, SL, mean_rate, stderr) for every preset
/// and OC type plus manifest.json; returns the written paths.
std::vector<std::filesystem::path> emit_plotdata(const StudyResult& result,
                                                 const std::filesystem::path& dir);

/// Output of `git describe` at configure time.
const char* build_version() noexcept;

}  // namespace romfcc
