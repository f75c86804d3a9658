#pragma once

// File formats: long-format curve CSV, ground-truth label CSV, filter reports,
// monitoring statistics, configuration JSON and fitted-model JSON.

#include <filesystem>
#include <string>
#include <vector>

#include "romfcc/fuf.hpp"
#include "romfcc/harness.hpp"
#include "romfcc/monitor.hpp"
#include "romfcc/simgen.hpp"

namespace romfcc {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Columns case_id, component (1-based), t, value. Cases keep their first
/// appearance order; every case must carry all components on one grid.
std::string curve_csv(const CurveSet& set);
CurveSet parse_curve_csv(const std::string& text);
void write_curve_csv(const std::filesystem::path& path, const CurveSet& set);
CurveSet read_curve_csv(const std::filesystem::path& path);

/// Columns case_id, component, expulsion, phase_shift (0/1 per cell).
std::string labels_csv(const std::vector<std::string>& case_ids, const CellLabels& labels);

/// Columns case_id, component, distance, flagged.
std::string filter_csv(const std::vector<std::string>& case_ids, const FilterReport& report);
/// d_n, L_fil and flag counts per component, tombstoned case ids.
std::string filter_summary_json(const std::vector<std::string>& case_ids, const FilterReport& report);

/// Columns case_id, t2, spe, alarm.
std::string monitor_csv(const std::vector<std::string>& case_ids, const MonitorResult& result);

/// Keys: delta_fil, delta_imp, delta_mon, alpha, m_imputations, seed, flavor,
/// limits (all optional); unknown keys are rejected.
Phase1Config parse_phase1_config(const std::string& json_text);

/// Keys: runs, n_train, n_tune, n_phase2, p_tilde, methods, presets, oc_types,
/// alpha, base_seed, warp, threads, phase1 (object with the Phase I keys).
StudyConfig parse_study_config(const std::string& json_text);

std::string scheme_json(const MonitoringScheme& scheme);
/// Rebuilds the basis geometry and checks the stored Gram matrix against it;
/// a mismatch throws shape-error.
MonitoringScheme parse_scheme_json(const std::string& json_text);

}  // namespace romfcc
