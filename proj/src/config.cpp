#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hydrocal/config.hpp"
#include "hydrocal/error.hpp"

namespace hydrocal {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe + era * 400);
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

int days_in_month(int y, int m) {
  static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : d[m - 1];
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

int64_t parse_time_utc(const std::string& text) {
  int y, mo, d, h, mi, s;
  char zone;
  if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &zone) != 7 ||
      zone != 'Z')
    fail(ErrorCode::ParseError, "bad UTC timestamp '" + text + "', expected YYYY-MM-DDThh:00:00Z");
  if (mo < 1 || mo > 12 || d < 1 || d > days_in_month(y, mo) || h < 0 || h > 23)
    fail(ErrorCode::ParseError, "timestamp out of range: '" + text + "'");
  if (mi != 0 || s != 0)
    fail(ErrorCode::ParseError, "timestamp not hour-aligned: '" + text + "'");
  return days_from_civil(y, mo, d) * 24 + h;
}

std::string format_time_utc(int64_t hours) {
  int64_t days = hours >= 0 ? hours / 24 : (hours - 23) / 24;
  int h = static_cast<int>(hours - days * 24);
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:00:00Z", y, m, d, h);
  return buf;
}

namespace {

struct IniValue {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

using IniMap = std::map<std::string, IniValue>;  // "section.key" -> value

IniMap read_ini(const std::string& text, const std::string& origin) {
  IniMap out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(ErrorCode::ParseError, origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError, origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorCode::ParseError, origin + ":" + std::to_string(lineno) + ": empty key");
    out[section + "." + key] = {value, lineno, false};
  }
  return out;
}

class Binder {
 public:
  Binder(const IniMap& ini, const std::string& origin) : ini_(ini), origin_(origin) {}

  const IniValue* find(const std::string& key) {
    auto it = ini_.find(key);
    if (it == ini_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  void bind(const std::string& key, std::string& out) {
    if (const IniValue* v = find(key)) out = v->value;
  }
  void bind(const std::string& key, int& out) {
    if (const IniValue* v = find(key)) out = static_cast<int>(parse_ll(key, *v));
  }
  void bind(const std::string& key, uint64_t& out) {
    if (const IniValue* v = find(key)) out = static_cast<uint64_t>(parse_ll(key, *v));
  }
  void bind(const std::string& key, double& out) {
    if (const IniValue* v = find(key)) {
      try {
        size_t pos = 0;
        out = std::stod(v->value, &pos);
        if (pos != v->value.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        bad(key, *v, "a number");
      }
    }
  }
  void bind(const std::string& key, std::array<double, kNumParams>& out) {
    if (const IniValue* v = find(key)) {
      auto items = split(v->value);
      if (items.size() != kNumParams) bad(key, *v, "6 comma-separated numbers");
      for (int j = 0; j < kNumParams; ++j) {
        try {
          out[j] = std::stod(items[j]);
        } catch (const std::exception&) {
          bad(key, *v, "6 comma-separated numbers");
        }
      }
    }
  }
  void bind(const std::string& key, std::vector<SignatureWeight>& out) {
    if (const IniValue* v = find(key)) {
      out.clear();
      for (const auto& item : split(v->value)) {
        size_t colon = item.find(':');
        SignatureWeight w;
        w.name = trim(item.substr(0, colon));
        if (colon != std::string::npos) {
          try {
            w.weight = std::stod(item.substr(colon + 1));
          } catch (const std::exception&) {
            bad(key, *v, "name[:weight] items");
          }
        }
        if (!w.name.empty()) out.push_back(std::move(w));
      }
    }
  }
  void bind(const std::string& key, std::vector<std::string>& out) {
    if (const IniValue* v = find(key)) {
      out.clear();
      for (const auto& item : split(v->value))
        if (!trim(item).empty()) out.push_back(trim(item));
    }
  }

  void fail_unused() const {
    std::string unknown;
    for (const auto& [key, v] : ini_)
      if (!v.used) unknown += "\n  unknown key '" + key + "' (line " + std::to_string(v.line) + ")";
    if (!unknown.empty()) fail(ErrorCode::ValidationError, origin_ + ":" + unknown);
  }

 private:
  long long parse_ll(const std::string& key, const IniValue& v) {
    try {
      size_t pos = 0;
      long long n = std::stoll(v.value, &pos);
      if (pos != v.value.size()) throw std::invalid_argument("");
      return n;
    } catch (const std::exception&) {
      bad(key, v, "an integer");
    }
  }
  [[noreturn]] void bad(const std::string& key, const IniValue& v, const std::string& want) {
    fail(ErrorCode::ParseError, origin_ + ":" + std::to_string(v.line) + ": field '" + key +
                                    "' = '" + v.value + "' is not " + want);
  }
  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
  }

  const IniMap& ini_;
  std::string origin_;
};

const std::set<std::string> kModes = {"run",       "segment",   "signatures", "sensitivity",
                                      "calibrate", "gradient-test", "synth"};
const std::set<std::string> kStrategies = {"uniform", "distributed", "multiobjective"};

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  IniMap ini = read_ini(text, origin);
  Binder b(ini, origin);
  RunConfig c;

  b.bind("run.mode", c.mode);
  b.bind("run.seed", c.seed);
  b.bind("run.out_dir", c.out_dir);

  b.bind("paths.d8", c.d8);
  b.bind("paths.rainfall", c.rainfall);
  b.bind("paths.pet", c.pet);
  b.bind("paths.discharge", c.discharge);

  b.bind("period.start", c.start);
  b.bind("period.warmup_hours", c.warmup_hours);

  b.bind("gauge.row", c.gauge_row);
  b.bind("gauge.col", c.gauge_col);
  b.bind("gauge.id", c.gauge_id);

  b.bind("model.theta", c.theta);

  b.bind("cost.dominant", c.dominant);
  b.bind("cost.delta_d", c.delta_d);
  b.bind("cost.delta_c", c.delta_c);
  b.bind("cost.delta_f", c.delta_f);
  b.bind("cost.alpha_reg", c.alpha_reg);
  b.bind("cost.continuous_signatures", c.continuous_signatures);
  b.bind("cost.flood_signatures", c.flood_signatures);
  b.bind("cost.season_start", c.season_start);
  b.bind("cost.season_end", c.season_end);
  b.bind("cost.quantile_convention", c.quantile_convention);

  b.bind("segmentation.min_peak_height", c.min_peak_height);
  b.bind("segmentation.min_peak_distance", c.min_peak_distance);

  b.bind("calibrate.strategy", c.strategy);
  b.bind("calibrate.max_iterations", c.max_iterations);
  b.bind("calibrate.nsga_population", c.nsga_population);
  b.bind("calibrate.nsga_generations", c.nsga_generations);

  b.bind("sensitivity.sample_count", c.sample_count);
  b.bind("sensitivity.signatures", c.sensitivity_signatures);

  b.bind("gradient_test.directions", c.directions);

  b.bind("synth.theta_true", c.theta_true);
  b.bind("synth.duration_hours", c.duration_hours);
  b.bind("synth.storm_count", c.storm_count);
  b.bind("synth.storm_duration", c.storm_duration);
  b.bind("synth.storm_intensity", c.storm_intensity);
  b.bind("synth.pet_rate", c.pet_rate);
  b.bind("synth.noise", c.noise);
  b.bind("synth.nrows", c.synth_nrows);
  b.bind("synth.ncols", c.synth_ncols);

  b.fail_unused();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config_text(buf.str(), path);
  validate_config(c);
  return c;
}

void validate_config(const RunConfig& c, bool check_files) {
  std::vector<std::string> problems;
  auto need = [&](const std::string& path, const std::string& field) {
    if (path.empty()) {
      problems.push_back("missing required field 'paths." + field + "' for mode " + c.mode);
    } else if (check_files && !std::filesystem::exists(path)) {
      problems.push_back("paths." + field + " = '" + path + "' does not exist");
    }
  };

  if (!kModes.count(c.mode)) problems.push_back("run.mode '" + c.mode + "' is not a subcommand");
  if (c.warmup_hours < 0) problems.push_back("period.warmup_hours must be >= 0");
  try {
    parse_time_utc(c.start);
  } catch (const Error& e) {
    problems.push_back(std::string("period.start: ") + e.what());
  }

  const bool needs_grid = c.mode != "synth" || !c.d8.empty();
  if (c.mode == "synth") {
    if (c.synth_nrows < 1 || c.synth_ncols < 1)
      problems.push_back("synth.nrows/ncols must be positive");
    if (c.duration_hours < 1) problems.push_back("synth.duration_hours must be positive");
    if (c.storm_count < 0) problems.push_back("synth.storm_count must be >= 0");
    if (c.storm_duration < 1) problems.push_back("synth.storm_duration must be positive");
    if (c.storm_intensity < 0 || c.pet_rate < 0 || c.noise < 0)
      problems.push_back("synth intensities and noise must be >= 0");
  } else if (needs_grid) {
    need(c.d8, "d8");
  }
  if (c.mode == "run" || c.mode == "signatures" || c.mode == "sensitivity" ||
      c.mode == "calibrate" || c.mode == "gradient-test" || c.mode == "segment") {
    need(c.rainfall, "rainfall");
    need(c.pet, "pet");
  }
  if (c.mode == "segment" || c.mode == "signatures" || c.mode == "calibrate" ||
      c.mode == "gradient-test")
    need(c.discharge, "discharge");

  if (c.delta_d < 0 || c.delta_c < 0 || c.delta_f < 0)
    problems.push_back("cost.delta_* must be >= 0");
  if (c.dominant != "nse" && c.dominant != "kge")
    problems.push_back("cost.dominant must be nse or kge");
  if (c.quantile_convention != "exceedance" && c.quantile_convention != "cdf")
    problems.push_back("cost.quantile_convention must be exceedance or cdf");
  for (const auto& w : c.continuous_signatures)
    if (w.weight < 0) problems.push_back("continuous signature weight for " + w.name + " < 0");
  for (const auto& w : c.flood_signatures)
    if (w.weight < 0) problems.push_back("flood signature weight for " + w.name + " < 0");
  if ((c.season_start == 0) != (c.season_end == 0))
    problems.push_back("cost.season_start and season_end must be set together");
  if (c.season_start < 0 || c.season_start > 12 || c.season_end < 0 || c.season_end > 12)
    problems.push_back("season months must be in 1..12");

  if (!kStrategies.count(c.strategy))
    problems.push_back("calibrate.strategy '" + c.strategy + "' unknown");
  if (c.max_iterations < 1) problems.push_back("calibrate.max_iterations must be positive");
  if (c.nsga_population < 4 || c.nsga_generations < 1)
    problems.push_back("calibrate.nsga_population >= 4 and nsga_generations >= 1 required");
  if (c.sample_count < 2 || (c.sample_count & (c.sample_count - 1)) != 0)
    problems.push_back("sensitivity.sample_count must be a power of two >= 2");
  if (c.directions < 1) problems.push_back("gradient_test.directions must be positive");
  if (c.gauge_row < 0 || c.gauge_col < 0) problems.push_back("gauge.row/col must be >= 0");
  if (c.min_peak_distance < 1) problems.push_back("segmentation.min_peak_distance must be >= 1");

  if (!problems.empty()) {
    std::string msg = "configuration invalid:";
    for (const auto& p : problems) msg += "\n  - " + p;
    fail(ErrorCode::ValidationError, msg);
  }
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_theta(const std::array<double, kNumParams>& t) {
  std::string s;
  for (int j = 0; j < kNumParams; ++j) s += (j ? "," : "") + num(t[j]);
  return s;
}

std::string join_weights(const std::vector<SignatureWeight>& w) {
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + w[i].name + ":" + num(w[i].weight);
  return s;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string s;
  for (size_t i = 0; i < names.size(); ++i) s += (i ? "," : "") + names[i];
  return s;
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[run]\n"
      << "mode = " << c.mode << "\n"
      << "seed = " << c.seed << "\n"
      << "out_dir = " << c.out_dir << "\n\n"
      << "[paths]\n"
      << "d8 = " << c.d8 << "\n"
      << "rainfall = " << c.rainfall << "\n"
      << "pet = " << c.pet << "\n"
      << "discharge = " << c.discharge << "\n\n"
      << "[period]\n"
      << "start = " << c.start << "\n"
      << "warmup_hours = " << c.warmup_hours << "\n\n"
      << "[gauge]\n"
      << "row = " << c.gauge_row << "\n"
      << "col = " << c.gauge_col << "\n"
      << "id = " << c.gauge_id << "\n\n"
      << "[model]\n"
      << "theta = " << join_theta(c.theta) << "\n\n"
      << "[cost]\n"
      << "dominant = " << c.dominant << "\n"
      << "delta_d = " << num(c.delta_d) << "\n"
      << "delta_c = " << num(c.delta_c) << "\n"
      << "delta_f = " << num(c.delta_f) << "\n"
      << "alpha_reg = " << num(c.alpha_reg) << "\n"
      << "continuous_signatures = " << join_weights(c.continuous_signatures) << "\n"
      << "flood_signatures = " << join_weights(c.flood_signatures) << "\n"
      << "season_start = " << c.season_start << "\n"
      << "season_end = " << c.season_end << "\n"
      << "quantile_convention = " << c.quantile_convention << "\n\n"
      << "[segmentation]\n"
      << "min_peak_height = " << num(c.min_peak_height) << "\n"
      << "min_peak_distance = " << c.min_peak_distance << "\n\n"
      << "[calibrate]\n"
      << "strategy = " << c.strategy << "\n"
      << "max_iterations = " << c.max_iterations << "\n"
      << "nsga_population = " << c.nsga_population << "\n"
      << "nsga_generations = " << c.nsga_generations << "\n\n"
      << "[sensitivity]\n"
      << "sample_count = " << c.sample_count << "\n"
      << "signatures = " << join_names(c.sensitivity_signatures) << "\n\n"
      << "[gradient_test]\n"
      << "directions = " << c.directions << "\n\n"
      << "[synth]\n"
      << "theta_true = " << join_theta(c.theta_true) << "\n"
      << "duration_hours = " << c.duration_hours << "\n"
      << "storm_count = " << c.storm_count << "\n"
      << "storm_duration = " << c.storm_duration << "\n"
      << "storm_intensity = " << num(c.storm_intensity) << "\n"
      << "pet_rate = " << num(c.pet_rate) << "\n"
      << "noise = " << num(c.noise) << "\n"
      << "nrows = " << c.synth_nrows << "\n"
      << "ncols = " << c.synth_ncols << "\n";
  return out.str();
}

}  // namespace hydrocal
