#include "romfcc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "romfcc/error.hpp"

namespace romfcc {
namespace {

using detail::Json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::kIoError, "line " + std::to_string(line) + ": not a finite number: '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, std::size_t line) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kIoError, "line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
  return v;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorKind::kInvalidConfiguration, what + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw Error(ErrorKind::kInvalidConfiguration, "unknown key '" + it.key() + "' in " + what);
    }
  }
}

template <typename T>
T get(const Json& j, const char* key, const std::string& what) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::kInvalidConfiguration, std::string("bad or missing '") + key + "' in " + what);
  }
}

void apply_phase1(const Json& j, Phase1Config& c, const std::string& what) {
  check_keys(j, {"delta_fil", "delta_imp", "delta_mon", "alpha", "m_imputations", "seed", "flavor", "limits",
                 "fuf_alpha"},
             what);
  if (j.contains("delta_fil")) c.delta_fil = get<double>(j, "delta_fil", what);
  if (j.contains("delta_imp")) c.delta_imp = get<double>(j, "delta_imp", what);
  if (j.contains("delta_mon")) c.delta_mon = get<double>(j, "delta_mon", what);
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha", what);
  if (j.contains("fuf_alpha")) c.fuf_alpha = get<double>(j, "fuf_alpha", what);
  if (j.contains("m_imputations")) c.m_imputations = get<std::size_t>(j, "m_imputations", what);
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", what);
  if (j.contains("flavor")) c.flavor = parse_flavor(get<std::string>(j, "flavor", what));
  if (j.contains("limits")) c.limits = parse_limits_mode(get<std::string>(j, "limits", what));
}

Json phase1_to_json(const Phase1Config& c) {
  Json j;
  j["delta_fil"] = c.delta_fil;
  j["delta_imp"] = c.delta_imp;
  j["delta_mon"] = c.delta_mon;
  j["alpha"] = c.alpha;
  j["fuf_alpha"] = c.fuf_alpha;
  j["m_imputations"] = c.m_imputations;
  j["seed"] = c.seed;
  j["flavor"] = to_string(c.flavor);
  j["limits"] = to_string(c.limits);
  return j;
}

double json_limit(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::kIoError, "failed writing " + path.string());
}

std::string curve_csv(const CurveSet& set) {
  std::string out = "case_id,component,t,value\n";
  out.reserve(out.size() + set.size() * set.p * set.grid.size() * 40);
  std::vector<std::string> ts;
  for (double t : set.grid.points()) ts.push_back(fmt(t));
  for (std::size_t c = 0; c < set.size(); ++c) {
    for (std::size_t j = 0; j < set.p; ++j) {
      const std::string prefix = set.case_ids[c] + "," + std::to_string(j + 1) + ",";
      for (std::size_t i = 0; i < set.grid.size(); ++i) {
        out += prefix;
        out += ts[i];
        out += ',';
        out += fmt(set.values[c](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out += '\n';
      }
    }
  }
  return out;
}

CurveSet parse_curve_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::kIoError, "empty curve file");
  const auto header = split_csv_line(line);
  if (header != std::vector<std::string>{"case_id", "component", "t", "value"}) {
    throw Error(ErrorKind::kIoError, "curve file header must be case_id,component,t,value");
  }
  // case -> component -> (t, value) in file order
  std::vector<std::string> order;
  std::map<std::string, std::map<long, std::vector<std::pair<double, double>>>> data;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw Error(ErrorKind::kIoError, "line " + std::to_string(line_no) + ": expected 4 fields");
    if (f[0].empty()) throw Error(ErrorKind::kIoError, "line " + std::to_string(line_no) + ": empty case_id");
    const long comp = parse_int(f[1], line_no);
    if (comp < 1) throw Error(ErrorKind::kIoError, "line " + std::to_string(line_no) + ": component must be >= 1");
    auto [it, inserted] = data.try_emplace(f[0]);
    if (inserted) order.push_back(f[0]);
    it->second[comp].emplace_back(parse_double(f[2], line_no), parse_double(f[3], line_no));
  }
  if (order.empty()) throw Error(ErrorKind::kIoError, "curve file has no data rows");
  CurveSet set;
  const auto& first = data.at(order.front());
  set.p = static_cast<std::size_t>(first.rbegin()->first);
  std::vector<double> grid;
  for (const auto& [t, v] : first.begin()->second) grid.push_back(t);
  set.grid = Grid(grid);
  for (const auto& id : order) {
    const auto& comps = data.at(id);
    if (comps.size() != set.p || comps.rbegin()->first != static_cast<long>(set.p)) {
      throw Error(ErrorKind::kIoError, "case '" + id + "' does not have components 1.." + std::to_string(set.p));
    }
    Matrix values(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(set.p));
    for (const auto& [comp, rows] : comps) {
      if (rows.size() != grid.size()) {
        throw Error(ErrorKind::kIoError, "case '" + id + "' component " + std::to_string(comp) + " is not on the common grid");
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != grid[i]) {
          throw Error(ErrorKind::kIoError, "case '" + id + "' component " + std::to_string(comp) + " is not on the common grid");
        }
        values(static_cast<Eigen::Index>(i), comp - 1) = rows[i].second;
      }
    }
    set.case_ids.push_back(id);
    set.values.push_back(std::move(values));
  }
  return set;
}

void write_curve_csv(const std::filesystem::path& path, const CurveSet& set) { write_text(path, curve_csv(set)); }

CurveSet read_curve_csv(const std::filesystem::path& path) {
  try {
    return parse_curve_csv(read_text(path));
  } catch (const Error& e) {
    throw Error(ErrorKind::kIoError, path.string() + ": " + e.what());
  }
}

std::string labels_csv(const std::vector<std::string>& case_ids, const CellLabels& labels) {
  std::string out = "case_id,component,expulsion,phase_shift\n";
  for (std::size_t c = 0; c < case_ids.size(); ++c) {
    for (std::size_t j = 0; j < labels.cell_e[c].size(); ++j) {
      out += case_ids[c] + "," + std::to_string(j + 1) + "," + (labels.cell_e[c][j] ? "1" : "0") + "," +
             (labels.cell_p[c][j] ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string filter_csv(const std::vector<std::string>& case_ids, const FilterReport& report) {
  std::string out = "case_id,component,distance,flagged\n";
  const auto n = static_cast<std::size_t>(report.distances.rows());
  const auto p = static_cast<std::size_t>(report.distances.cols());
  std::vector<std::vector<char>> flags(n, std::vector<char>(p, 0));
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i : report.flagged[j]) flags[i][j] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      out += case_ids[i] + "," + std::to_string(j + 1) + "," +
             fmt(report.distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + "," +
             (flags[i][j] ? "1" : "0") + "\n";
  return out;
}

std::string filter_summary_json(const std::vector<std::string>& case_ids, const FilterReport& report) {
  Json j;
  j["alpha"] = report.alpha;
  j["d_n"] = detail::to_json(report.d_n);
  j["L_fil"] = report.l_fil;
  Json counts = Json::array();
  for (const auto& f : report.flagged) counts.push_back(f.size());
  j["flagged_count"] = counts;
  Json tomb = Json::array();
  for (std::size_t i = 0; i < report.tombstoned.size(); ++i) {
    if (report.tombstoned[i]) tomb.push_back(case_ids[i]);
  }
  j["tombstoned"] = tomb;
  return detail::dump(j);
}

std::string monitor_csv(const std::vector<std::string>& case_ids, const MonitorResult& result) {
  std::string out = "case_id,t2,spe,alarm\n";
  for (std::size_t i = 0; i < case_ids.size(); ++i) {
    out += case_ids[i] + "," + fmt(result.t2(static_cast<Eigen::Index>(i))) + "," +
           fmt(result.spe(static_cast<Eigen::Index>(i))) + "," + (result.alarm[i] ? "1" : "0") + "\n";
  }
  return out;
}

Phase1Config parse_phase1_config(const std::string& json_text) {
  const Json j = detail::parse(json_text, "Phase I configuration");
  Phase1Config c;
  apply_phase1(j, c, "Phase I configuration");
  validate(c);
  return c;
}

StudyConfig parse_study_config(const std::string& json_text) {
  const std::string what = "study configuration";
  const Json j = detail::parse(json_text, what);
  check_keys(j, {"runs", "n_train", "n_tune", "n_phase2", "p_tilde", "methods", "presets", "oc_types", "alpha",
                 "base_seed", "warp", "threads", "phase1"},
             what);
  StudyConfig c;
  if (j.contains("runs")) c.runs = get<std::size_t>(j, "runs", what);
  if (j.contains("n_train")) c.n_train = get<std::size_t>(j, "n_train", what);
  if (j.contains("n_tune")) c.n_tune = get<std::size_t>(j, "n_tune", what);
  if (j.contains("n_phase2")) c.n_phase2 = get<std::size_t>(j, "n_phase2", what);
  if (j.contains("p_tilde")) c.p_tilde = get<double>(j, "p_tilde", what);
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha", what);
  if (j.contains("base_seed")) c.base_seed = get<std::uint64_t>(j, "base_seed", what);
  if (j.contains("threads")) c.threads = get<std::size_t>(j, "threads", what);
  if (j.contains("warp")) c.warp = parse_warp_form(get<std::string>(j, "warp", what));
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : get<std::vector<std::string>>(j, "methods", what)) c.methods.push_back(parse_method(m));
  }
  if (j.contains("presets")) c.presets = get<std::vector<std::string>>(j, "presets", what);
  if (j.contains("oc_types")) {
    c.oc_types.clear();
    for (const auto& s : get<std::vector<std::string>>(j, "oc_types", what)) {
      if (s != "E" && s != "P") throw Error(ErrorKind::kInvalidConfiguration, "oc_types entries must be E or P");
      c.oc_types.push_back(s[0]);
    }
  }
  if (j.contains("phase1")) apply_phase1(j.at("phase1"), c.phase1, "phase1 section");
  validate(c);
  return c;
}

std::string scheme_json(const MonitoringScheme& s) {
  const MfpcaModel& m = s.model;
  Json j;
  j["format"] = "romfcc-scheme-1";
  Json basis;
  basis["order"] = m.space->basis.order();
  basis["interior_knots"] = m.space->basis.interior_knots();
  basis["penalty_order"] = m.space->basis.penalty_order();
  j["basis"] = basis;
  j["W"] = detail::to_json(m.space->w.w());
  j["p"] = m.p;
  j["flavor"] = to_string(m.flavor);
  j["seed"] = m.seed;
  j["mu_hat"] = detail::to_json(m.loc_scale.mu);
  j["v_hat"] = detail::to_json(m.loc_scale.v);
  j["B_hat"] = detail::to_json(m.b);
  j["lambda_hat"] = detail::to_json(m.lambda);
  j["L"] = m.L;
  Json cal;
  cal["lambda_mon"] = detail::to_json(s.calibration.lambda_mon);
  cal["lambda_res"] = detail::to_json(s.calibration.lambda_res);
  cal["theta"] = {s.calibration.jackson.theta1, s.calibration.jackson.theta2, s.calibration.jackson.theta3};
  cal["h0"] = s.calibration.jackson.h0;
  cal["spe_enabled"] = s.calibration.spe_enabled;
  j["calibration"] = cal;
  Json lim;
  lim["t2"] = s.t2_limit;
  lim["spe"] = s.spe_limit;
  lim["alpha"] = s.alpha;
  lim["alpha_star"] = s.alpha_star;
  j["limits"] = lim;
  j["config"] = phase1_to_json(s.config);
  return detail::dump(j);
}

MonitoringScheme parse_scheme_json(const std::string& json_text) {
  const Json j = detail::parse(json_text, "model");
  MonitoringScheme s;
  try {
    if (j.at("format") != "romfcc-scheme-1") throw Error(ErrorKind::kIoError, "unsupported model format");
    const Json& b = j.at("basis");
    BasisSystem basis(b.at("order").get<int>(), b.at("interior_knots").get<std::vector<double>>(),
                      b.at("penalty_order").get<int>());
    auto space = std::make_shared<const FunctionalSpace>(std::move(basis));
    const Matrix w = detail::matrix_from_json(j.at("W"));
    if (w.rows() != space->w.size() || w.cols() != space->w.size() ||
        (w - space->w.w()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + space->w.w().cwiseAbs().maxCoeff())) {
      throw Error(ErrorKind::kShapeError, "stored Gram matrix does not match the stored basis");
    }
    MfpcaModel& m = s.model;
    m.p = j.at("p").get<std::size_t>();
    m.flavor = parse_flavor(j.at("flavor").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.loc_scale.mu = detail::matrix_from_json(j.at("mu_hat"));
    m.loc_scale.v = detail::matrix_from_json(j.at("v_hat"));
    m.b = detail::matrix_from_json(j.at("B_hat"));
    m.lambda = detail::vector_from_json(j.at("lambda_hat"));
    m.L = j.at("L").get<std::size_t>();
    const auto k = space->w.size();
    const auto pk = k * static_cast<Eigen::Index>(m.p);
    if (m.loc_scale.mu.rows() != k || m.loc_scale.mu.cols() != static_cast<Eigen::Index>(m.p) ||
        m.loc_scale.v.rows() != static_cast<Eigen::Index>(space->evaluator.grid_size()) ||
        m.loc_scale.v.cols() != static_cast<Eigen::Index>(m.p) || m.b.rows() != pk ||
        m.b.cols() != m.lambda.size() || m.L > static_cast<std::size_t>(m.lambda.size()) || m.L == 0) {
      throw Error(ErrorKind::kShapeError, "model arrays do not match the basis and component count");
    }
    m.wb = block_diag(space->w.w(), m.p) * m.b;
    m.space = std::move(space);
    const Json& cal = j.at("calibration");
    s.calibration.lambda_mon = detail::vector_from_json(cal.at("lambda_mon"));
    s.calibration.lambda_res = detail::vector_from_json(cal.at("lambda_res"));
    const auto theta = cal.at("theta").get<std::vector<double>>();
    if (theta.size() != 3 || static_cast<std::size_t>(s.calibration.lambda_mon.size()) != m.L) {
      throw Error(ErrorKind::kShapeError, "calibration does not match the model");
    }
    s.calibration.jackson = {theta[0], theta[1], theta[2], cal.at("h0").get<double>()};
    s.calibration.spe_enabled = cal.at("spe_enabled").get<bool>();
    const Json& lim = j.at("limits");
    s.t2_limit = json_limit(lim.at("t2"));
    s.spe_limit = json_limit(lim.at("spe"));
    s.alpha = lim.at("alpha").get<double>();
    s.alpha_star = lim.at("alpha_star").get<double>();
    apply_phase1(j.at("config"), s.config, "model config");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIoError, std::string("malformed model file: ") + e.what());
  }
  return s;
}

}  // namespace romfcc
