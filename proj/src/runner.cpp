#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hydrocal/adjoint.hpp"
#include "hydrocal/calibrate.hpp"
#include "hydrocal/d8.hpp"
#include "hydrocal/model.hpp"
#include "hydrocal/runner.hpp"
#include "hydrocal/segmentation.hpp"
#include "hydrocal/sobol.hpp"
#include "hydrocal/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hydrocal {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int month_of_hour(int64_t hours) {
  return std::stoi(format_time_utc(hours).substr(5, 2));
}

}  // namespace

void write_stacked_grids(const std::string& path, const std::vector<Grid<double>>& steps,
                         double cellsize_km) {
  if (steps.empty()) fail(ErrorCode::InvalidArgument, "no grids to write");
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "ncols " << steps[0].ncols() << "\nnrows " << steps[0].nrows() << "\ncellsize_km "
      << num(cellsize_km) << "\nnodata_value -9999\nnsteps " << steps.size() << "\n";
  for (size_t t = 0; t < steps.size(); ++t) {
    if (!steps[t].same_shape(steps[0]))
      fail(ErrorCode::ShapeMismatch, "stacked grids change shape at step " + std::to_string(t));
    out << "step " << t << "\n";
    for (int r = 0; r < steps[t].nrows(); ++r) {
      for (int c = 0; c < steps[t].ncols(); ++c)
        out << (c ? " " : "") << num(steps[t](r, c));
      out << "\n";
    }
  }
}

std::vector<Grid<double>> read_stacked_grids(const std::string& path, double* cellsize_km) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  auto header = [&](const std::string& want) {
    std::string key;
    double value;
    if (!(in >> key >> value) || key != want)
      fail(ErrorCode::ParseError, path + ": expected header '" + want + "'");
    return value;
  };
  const int ncols = static_cast<int>(header("ncols"));
  const int nrows = static_cast<int>(header("nrows"));
  const double cellsize = header("cellsize_km");
  header("nodata_value");
  const int nsteps = static_cast<int>(header("nsteps"));
  if (ncols < 1 || nrows < 1 || nsteps < 1)
    fail(ErrorCode::ParseError, path + ": bad stacked-grid dimensions");
  if (cellsize_km) *cellsize_km = cellsize;

  std::vector<Grid<double>> steps;
  steps.reserve(nsteps);
  for (int t = 0; t < nsteps; ++t) {
    std::string key;
    int index;
    if (!(in >> key >> index) || key != "step" || index != t)
      fail(ErrorCode::ParseError, path + ": expected 'step " + std::to_string(t) + "'");
    Grid<double> g(nrows, ncols);
    for (size_t i = 0; i < g.size(); ++i)
      if (!(in >> g[i]))
        fail(ErrorCode::ParseError, path + ": truncated grid at step " + std::to_string(t));
    steps.push_back(std::move(g));
  }
  return steps;
}

std::vector<Grid<double>> read_grid_series(const std::string& path) {
  if (fs::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file()) files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    if (files.empty()) fail(ErrorCode::IoError, "no forcing files in '" + path + "'");
    std::vector<Grid<double>> steps;
    steps.reserve(files.size());
    for (const auto& f : files) steps.push_back(read_text_raster(f).values);
    return steps;
  }
  return read_stacked_grids(path);
}

void write_discharge_csv(const std::string& path, int64_t start_hour,
                         const std::vector<double>& discharge_m3s) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "timestamp,discharge_m3s\n";
  for (size_t t = 0; t < discharge_m3s.size(); ++t)
    out << format_time_utc(start_hour + static_cast<int64_t>(t)) << "," << num(discharge_m3s[t])
        << "\n";
}

std::vector<double> read_discharge_csv(const std::string& path, int64_t expected_start_hour) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("timestamp,discharge", 0) != 0)
    fail(ErrorCode::ParseError, path + ": expected header 'timestamp,discharge_m3s'");
  std::vector<double> values;
  int64_t expected = expected_start_hour;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": expected two columns");
    const int64_t hour = parse_time_utc(line.substr(0, comma));
    if (hour != expected)
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) +
                                      ": timestamps must be hourly from " +
                                      format_time_utc(expected_start_hour));
    try {
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": bad discharge value");
    }
    ++expected;
  }
  if (values.empty()) fail(ErrorCode::EmptySeries, path + ": no discharge rows");
  return values;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::BadSpec:
    case ErrorCode::BadN:
      return 2;
    case ErrorCode::NonFiniteFlux:
    case ErrorCode::ZeroVariance:
    case ErrorCode::NonDifferentiableCost:
      return 4;
    default:
      return 3;  // data problems: bad rasters, gaps, degenerate series, ...
  }
}

namespace {

struct Domain {
  DrainagePlan plan;
  Catchment gauge;
};

Domain load_domain(const RunConfig& c) {
  Domain d;
  d.plan = build_drainage_plan(D8Raster::from_text(read_text_raster(c.d8)));
  d.gauge = delineate_catchment(d.plan, c.gauge_row, c.gauge_col, c.gauge_id);
  return d;
}

Forcing load_forcing(const RunConfig& c, const DrainagePlan& plan) {
  Forcing f;
  f.start_hour = parse_time_utc(c.start);
  f.rainfall = read_grid_series(c.rainfall);
  f.pet = read_grid_series(c.pet);
  if (f.rainfall.size() != f.pet.size())
    fail(ErrorCode::LengthMismatch, "rainfall and pet cover different step counts");
  for (const auto& g : f.rainfall)
    if (g.nrows() != plan.nrows || g.ncols() != plan.ncols)
      fail(ErrorCode::ShapeMismatch, "rainfall grid shape differs from the drainage plan");
  for (const auto& g : f.pet)
    if (g.nrows() != plan.nrows || g.ncols() != plan.ncols)
      fail(ErrorCode::ShapeMismatch, "pet grid shape differs from the drainage plan");
  f.missing.assign(f.rainfall.size(), 0);
  if (static_cast<size_t>(c.warmup_hours) >= f.rainfall.size())
    fail(ErrorCode::ValidationError, "warm-up covers the whole forcing period");
  return f;
}

std::vector<double> load_obs_mmh(const RunConfig& c, const Domain& d, int64_t start_hour,
                                 size_t steps) {
  const std::vector<double> m3s = read_discharge_csv(c.discharge, start_hour);
  if (m3s.size() != steps)
    fail(ErrorCode::LengthMismatch, "observed discharge length differs from the forcing period");
  const double area = d.plan.drained_area[d.gauge.outlet];
  std::vector<double> mmh(m3s.size());
  for (size_t t = 0; t < m3s.size(); ++t) {
    if (m3s[t] < 0) fail(ErrorCode::NegativeFlow, "negative observed discharge");
    mmh[t] = m3s[t] / (area * kVolumeToM3s);
  }
  return mmh;
}

SegmentationOptions segmentation_options(const RunConfig& c) {
  SegmentationOptions opt;
  if (c.min_peak_height >= 0) opt.min_peak_height = c.min_peak_height;
  opt.min_peak_distance = c.min_peak_distance;
  return opt;
}

std::vector<SignatureTerm> to_terms(const std::vector<SignatureWeight>& weights,
                                    bool want_continuous) {
  std::vector<SignatureTerm> terms;
  for (const auto& w : weights) {
    SignatureTerm t{signature_from_string(w.name), w.weight};
    if (is_continuous_signature(t.id) != want_continuous)
      fail(ErrorCode::ValidationError,
           std::string(to_string(t.id)) + " listed under the wrong signature scope");
    terms.push_back(t);
  }
  return terms;
}

/// Cost assembly shared by calibrate and gradient-test; events (and their
/// peak months) are segmented once on the post-warm-up observations.
CostConfig build_cost(const RunConfig& c, bool distributed, const std::vector<double>& rain_gauge,
                      const std::vector<double>& obs_mmh, int64_t start_hour) {
  CostConfig cost;
  cost.dominant = c.dominant == "kge" ? CostConfig::Dominant::OneMinusKGE
                                      : CostConfig::Dominant::OneMinusNSE;
  cost.delta_d = c.delta_d;
  cost.delta_c = c.delta_c;
  cost.delta_f = c.delta_f;
  cost.continuous_terms = to_terms(c.continuous_signatures, true);
  cost.flood_terms = to_terms(c.flood_signatures, false);
  cost.alpha_reg = c.alpha_reg >= 0 ? c.alpha_reg : (distributed ? 1e-4 : 0.0);
  cost.sigma_theta = CostConfig::default_sigma(ParamBounds::defaults());
  cost.warmup_steps = c.warmup_hours;
  cost.quantile_convention = c.quantile_convention == "cdf" ? QuantileConvention::Cdf
                                                            : QuantileConvention::Exceedance;
  if (c.season_start > 0) cost.season = std::make_pair(c.season_start, c.season_end);

  if (cost.delta_f > 0 && !cost.flood_terms.empty()) {
    const std::vector<double> rain(rain_gauge.begin() + c.warmup_hours, rain_gauge.end());
    const std::vector<double> obs(obs_mmh.begin() + c.warmup_hours, obs_mmh.end());
    for (const FloodEvent& e : segment(rain, obs, segmentation_options(c))) {
      cost.events.push_back({e.start, e.peak, e.end});
      cost.event_months.push_back(month_of_hour(start_hour + c.warmup_hours + e.peak));
    }
    if (cost.events.empty()) fail(ErrorCode::NoEvents, "no flood events in the observations");
  }
  return cost;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << content;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_param_rasters(const fs::path& dir, const ParameterField& theta, double cellsize_km,
                         RunOutcome& outcome) {
  for (int j = 0; j < kNumParams; ++j) {
    TextRaster raster;
    raster.cellsize_km = cellsize_km;
    raster.values = theta[j];
    const std::string name = std::string("theta_") + kParamNames[j] + ".txt";
    write_text_raster((dir / name).string(), raster);
    outcome.outputs.push_back(name);
  }
}

void write_iterates_csv(const fs::path& path, const std::vector<CalibrationIterate>& history) {
  std::ofstream out(path);
  out << "iter,J,j_d,j_c,j_f,J_reg,grad_norm\n";
  for (const auto& it : history)
    out << it.iteration << "," << num(it.total) << "," << num(it.jd) << "," << num(it.jc) << ","
        << num(it.jf) << "," << num(it.jreg) << "," << num(it.grad_norm) << "\n";
}

json breakdown_json(const CostBreakdown& b) {
  return {{"J", b.total}, {"j_d", b.jd}, {"j_c", b.jc}, {"j_f", b.jf}, {"J_reg", b.jreg}};
}

// --- subcommands ------------------------------------------------------------

void do_run(const RunConfig& c, const fs::path& out_dir, RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  ParameterField theta(d.plan.nrows, d.plan.ncols, c.theta);
  theta.validate_bounds(ParamBounds::defaults(), d.plan.active);
  SimulationResult result =
      run(d.plan, theta, StateField::default_initial(theta), forcing, {d.gauge});

  write_discharge_csv((out_dir / "discharge.csv").string(), forcing.start_hour,
                      result.gauge_discharge_m3s[0]);
  outcome.outputs.push_back("discharge.csv");
  write_json((out_dir / "ledger.json").string(),
             json{{"total_rainfall_mm_km2", result.ledger.total_rainfall},
                  {"total_evaporation_mm_km2", result.ledger.total_evaporation},
                  {"total_exchange_mm_km2", result.ledger.total_exchange},
                  {"storage_change_mm_km2", result.ledger.storage_change},
                  {"total_outflow_mm_km2", result.ledger.total_outflow},
                  {"residual_mm_km2", result.ledger.residual()}});
  outcome.outputs.push_back("ledger.json");
}

void do_segment(const RunConfig& c, const fs::path& out_dir, RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  const auto obs_full = load_obs_mmh(c, d, forcing.start_hour, forcing.steps());
  const auto rain_full = gauge_rainfall_mmh(d.plan, forcing, d.gauge);
  const std::vector<double> obs(obs_full.begin() + c.warmup_hours, obs_full.end());
  const std::vector<double> rain(rain_full.begin() + c.warmup_hours, rain_full.end());
  const int64_t t0 = forcing.start_hour + c.warmup_hours;

  const auto events = segment(rain, obs, segmentation_options(c));
  {
    std::ofstream out(out_dir / "events.csv");
    out << "gauge,event_id,start,peak,end,merged_from\n";
    for (size_t e = 0; e < events.size(); ++e)
      out << c.gauge_id << "," << e + 1 << "," << format_time_utc(t0 + events[e].start) << ","
          << format_time_utc(t0 + events[e].peak) << "," << format_time_utc(t0 + events[e].end)
          << "," << events[e].merged_from << "\n";
  }
  outcome.outputs.push_back("events.csv");
  {
    std::vector<int> mask(obs.size(), 0);
    for (size_t e = 0; e < events.size(); ++e)
      for (int t = events[e].start; t <= events[e].end && t < static_cast<int>(mask.size()); ++t)
        mask[t] = static_cast<int>(e) + 1;
    std::ofstream out(out_dir / "event_mask.csv");
    out << "timestamp,event_id\n";
    for (size_t t = 0; t < mask.size(); ++t)
      out << format_time_utc(t0 + static_cast<int64_t>(t)) << "," << mask[t] << "\n";
  }
  outcome.outputs.push_back("event_mask.csv");
}

void do_signatures(const RunConfig& c, const fs::path& out_dir, RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  const auto obs_full = load_obs_mmh(c, d, forcing.start_hour, forcing.steps());
  const auto rain_full = gauge_rainfall_mmh(d.plan, forcing, d.gauge);
  const std::vector<double> obs(obs_full.begin() + c.warmup_hours, obs_full.end());
  const std::vector<double> rain(rain_full.begin() + c.warmup_hours, rain_full.end());

  const QuantileConvention convention = c.quantile_convention == "cdf"
                                            ? QuantileConvention::Cdf
                                            : QuantileConvention::Exceedance;
  std::ofstream out(out_dir / "signatures.csv");
  out << "gauge,scope,event_id,signature,value,unit\n";
  const ContinuousSignatures cont = continuous_signatures(rain, obs, convention);
  for (const auto& s : cont.values)
    out << c.gauge_id << ",continuous,0," << to_string(s.id) << ","
        << (s.defined ? num(s.value) : "nan") << "," << signature_unit(s.id) << "\n";
  const auto events = segment(rain, obs, segmentation_options(c));
  for (size_t e = 0; e < events.size(); ++e) {
    const EventWindow window{events[e].start, events[e].peak, events[e].end};
    try {
      const EventSignatures ev = event_signatures(rain, obs, window);
      for (const auto& s : ev.values)
        out << c.gauge_id << ",event," << e + 1 << "," << to_string(s.id) << ","
            << (s.defined ? num(s.value) : "nan") << "," << signature_unit(s.id) << "\n";
    } catch (const Error& err) {
      if (err.code() != ErrorCode::ZeroEventRainfall) throw;
      for (int k = 8; k < kNumSignatures; ++k) {
        const auto id = static_cast<SignatureId>(k);
        out << c.gauge_id << ",event," << e + 1 << "," << to_string(id) << ",nan,"
            << signature_unit(id) << "\n";
      }
    }
  }
  outcome.outputs.push_back("signatures.csv");
}

void do_sensitivity(const RunConfig& c, const fs::path& out_dir, uint64_t seed,
                    RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  const auto rain_full = gauge_rainfall_mmh(d.plan, forcing, d.gauge);

  // Reference series defining fixed event windows: observations when given,
  // otherwise the forward run at the configured parameters.
  ParameterField theta(d.plan.nrows, d.plan.ncols, c.theta);
  const StateField h0 = StateField::default_initial(theta);
  std::vector<double> reference_full =
      c.discharge.empty() ? simulate_gauge_mmh(d.plan, theta, h0, forcing, d.gauge)
                          : load_obs_mmh(c, d, forcing.start_hour, forcing.steps());
  const std::vector<double> reference(reference_full.begin() + c.warmup_hours,
                                      reference_full.end());
  const std::vector<double> rain(rain_full.begin() + c.warmup_hours, rain_full.end());

  std::vector<EventWindow> windows;
  for (const FloodEvent& e : segment(rain, reference, segmentation_options(c)))
    windows.push_back({e.start + c.warmup_hours, e.peak + c.warmup_hours,
                       e.end + c.warmup_hours});

  std::vector<SignatureId> ids;
  if (c.sensitivity_signatures.empty())
    for (int i = 0; i < kNumSignatures; ++i) ids.push_back(static_cast<SignatureId>(i));
  else
    for (const auto& name : c.sensitivity_signatures) ids.push_back(signature_from_string(name));

  const auto rows = signature_gssa(d.plan, d.gauge, h0, forcing, windows,
                                   ParamBounds::defaults(), c.sample_count, seed, ids);
  std::ofstream out(out_dir / "gssa.csv");
  out << "signature,parameter,first_order,total_order\n";
  for (const auto& row : rows)
    for (int j = 0; j < kNumParams; ++j)
      out << to_string(row.signature) << "," << kParamNames[j] << ","
          << (row.defined ? num(row.indices.first_order[j]) : "nan") << ","
          << (row.defined ? num(row.indices.total_order[j]) : "nan") << "\n";
  outcome.outputs.push_back("gssa.csv");
}

void do_calibrate(const RunConfig& c, const fs::path& out_dir, uint64_t seed,
                  RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  const auto obs = load_obs_mmh(c, d, forcing.start_hour, forcing.steps());
  const auto rain = gauge_rainfall_mmh(d.plan, forcing, d.gauge);
  const bool distributed = c.strategy == "distributed";
  const CostConfig cost = build_cost(c, distributed, rain, obs, forcing.start_hour);

  if (c.strategy == "uniform") {
    UniformCalibration fit = calibrate_uniform(d.plan, forcing, d.gauge, cost, obs);
    write_iterates_csv(out_dir / "iterates.csv", fit.history);
    outcome.outputs.push_back("iterates.csv");
    write_json((out_dir / "calibration.json").string(),
               json{{"strategy", "uniform"},
                    {"cost", breakdown_json(fit.cost)},
                    {"evaluations", fit.evaluations},
                    {"stop_reason", "step_below_threshold"},
                    {"theta", fit.theta}});
    outcome.outputs.push_back("calibration.json");
    write_param_rasters(out_dir, ParameterField(d.plan.nrows, d.plan.ncols, fit.theta),
                        d.plan.cellsize_km, outcome);
  } else if (distributed) {
    CostConfig uniform_cost = cost;
    uniform_cost.alpha_reg = 0.0;
    UniformCalibration first = calibrate_uniform(d.plan, forcing, d.gauge, uniform_cost, obs);
    LbfgsbOptions options;
    options.max_iterations = c.max_iterations;
    DistributedCalibration fit =
        vda_optimize(d.plan, forcing, d.gauge, cost, obs, first.theta,
                     ParamBounds::defaults(), options);
    write_iterates_csv(out_dir / "iterates.csv", fit.history);
    outcome.outputs.push_back("iterates.csv");
    write_json((out_dir / "calibration.json").string(),
               json{{"strategy", "distributed"},
                    {"cost", breakdown_json(fit.cost)},
                    {"iterations", fit.iterations},
                    {"stop_reason", fit.stop_reason},
                    {"background_theta", fit.background},
                    {"background_cost", fit.background_cost}});
    outcome.outputs.push_back("calibration.json");
    write_param_rasters(out_dir, fit.theta, d.plan.cellsize_km, outcome);
  } else {  // multiobjective
    // One objective per cost component: the dominant metric, then each flood
    // and continuous signature term on its own.
    std::vector<CostConfig> objectives;
    CostConfig jd = cost;
    jd.delta_d = 1;
    jd.delta_c = jd.delta_f = 0;
    jd.alpha_reg = 0;
    objectives.push_back(jd);
    for (const auto& term : cost.flood_terms) {
      CostConfig single = cost;
      single.delta_d = single.delta_c = 0;
      single.delta_f = 1;
      single.alpha_reg = 0;
      single.flood_terms = {SignatureTerm{term.id, 1.0}};
      objectives.push_back(single);
    }
    for (const auto& term : cost.continuous_terms) {
      CostConfig single = cost;
      single.delta_d = single.delta_f = 0;
      single.delta_c = 1;
      single.alpha_reg = 0;
      single.continuous_terms = {SignatureTerm{term.id, 1.0}};
      objectives.push_back(single);
    }
    NsgaOptions options;
    options.population = c.nsga_population;
    options.generations = c.nsga_generations;
    MultiObjectiveCalibration fit = calibrate_multiobjective(
        d.plan, forcing, d.gauge, objectives, obs, seed, ParamBounds::defaults(), options);

    std::ofstream out(out_dir / "pareto.csv");
    out << "solution_id";
    for (int j = 1; j <= kNumParams; ++j) out << ",theta_" << j;
    for (size_t m = 1; m <= objectives.size(); ++m) out << ",obj_" << m;
    out << ",selected\n";
    for (size_t i = 0; i < fit.front.solutions.size(); ++i) {
      out << i + 1;
      for (double g : fit.front.solutions[i].genes) out << "," << num(g);
      for (double o : fit.front.solutions[i].objectives) out << "," << num(o);
      out << "," << (i == fit.selected ? 1 : 0) << "\n";
    }
    outcome.outputs.push_back("pareto.csv");
    const auto& chosen = fit.front.solutions[fit.selected];
    write_json((out_dir / "calibration.json").string(),
               json{{"strategy", "multiobjective"},
                    {"objectives", objectives.size()},
                    {"front_size", fit.front.solutions.size()},
                    {"selected_solution", fit.selected + 1},
                    {"selected_theta", chosen.genes},
                    {"selected_objectives", chosen.objectives},
                    {"evaluations", fit.front.evaluations}});
    outcome.outputs.push_back("calibration.json");
    std::array<double, kNumParams> theta{};
    std::copy_n(chosen.genes.begin(), kNumParams, theta.begin());
    write_param_rasters(out_dir, ParameterField(d.plan.nrows, d.plan.ncols, theta),
                        d.plan.cellsize_km, outcome);
  }
}

void do_gradient_test(const RunConfig& c, const fs::path& out_dir, uint64_t seed,
                      RunOutcome& outcome) {
  Domain d = load_domain(c);
  Forcing forcing = load_forcing(c, d.plan);
  const auto obs = load_obs_mmh(c, d, forcing.start_hour, forcing.steps());
  const auto rain = gauge_rainfall_mmh(d.plan, forcing, d.gauge);
  const CostConfig cost = build_cost(c, /*distributed=*/false, rain, obs, forcing.start_hour);

  ParameterField theta(d.plan.nrows, d.plan.ncols, c.theta);
  theta.validate_bounds(ParamBounds::defaults(), d.plan.active);
  const StateField h0 = StateField::default_initial(theta);
  const auto rows = gradient_test(d.plan, theta, h0, forcing, d.gauge, cost, obs, nullptr,
                                  c.directions, seed);
  std::ofstream out(out_dir / "gradient_test.csv");
  out << "epsilon,relative_error,direction_id\n";
  for (const auto& r : rows)
    out << num(r.epsilon) << "," << num(r.relative_error) << "," << r.direction << "\n";
  outcome.outputs.push_back("gradient_test.csv");
  write_json((out_dir / "gradient_test.json").string(),
             json{{"directions", c.directions},
                  {"worst_direction_best_error", gradient_test_best_error(rows)}});
  outcome.outputs.push_back("gradient_test.json");
}

void do_synth(const RunConfig& c, const fs::path& out_dir, uint64_t seed, RunOutcome& outcome) {
  DrainagePlan plan;
  Catchment gauge;
  if (!c.d8.empty()) {
    Domain d = load_domain(c);
    plan = std::move(d.plan);
    gauge = std::move(d.gauge);
  } else {
    // Default synthetic topology: every cell drains south, the bottom row
    // drains east to a single outlet at the south-east corner.
    TextRaster raster;
    raster.values = Grid<double>(c.synth_nrows, c.synth_ncols, 5.0);  // 5 = S
    for (int col = 0; col < c.synth_ncols - 1; ++col)
      raster.values(c.synth_nrows - 1, col) = 3.0;  // 3 = E
    raster.values(c.synth_nrows - 1, c.synth_ncols - 1) = 3.0;
    write_text_raster((out_dir / "d8.txt").string(), raster);
    outcome.outputs.push_back("d8.txt");
    plan = build_drainage_plan(D8Raster::from_text(raster));
    gauge = delineate_catchment(plan, c.synth_nrows - 1, c.synth_ncols - 1, c.gauge_id);
  }

  SynthSpec spec;
  spec.duration_hours = c.duration_hours;
  spec.storm_count = c.storm_count;
  spec.storm_duration = c.storm_duration;
  spec.storm_intensity = c.storm_intensity;
  spec.pet_rate = c.pet_rate;
  spec.noise = c.noise;
  spec.start_hour = parse_time_utc(c.start);
  SynthResult result = synth_generate(plan, gauge, c.theta_true, spec, seed);

  write_stacked_grids((out_dir / "rainfall.txt").string(), result.forcing.rainfall,
                      plan.cellsize_km);
  outcome.outputs.push_back("rainfall.txt");
  write_stacked_grids((out_dir / "pet.txt").string(), result.forcing.pet, plan.cellsize_km);
  outcome.outputs.push_back("pet.txt");
  write_discharge_csv((out_dir / "discharge.csv").string(), spec.start_hour, result.obs_m3s);
  outcome.outputs.push_back("discharge.csv");
  const double area = plan.drained_area[gauge.outlet];
  std::vector<double> clean_m3s(result.clean_mmh.size());
  for (size_t t = 0; t < clean_m3s.size(); ++t)
    clean_m3s[t] = result.clean_mmh[t] * area * kVolumeToM3s;
  write_discharge_csv((out_dir / "clean_discharge.csv").string(), spec.start_hour, clean_m3s);
  outcome.outputs.push_back("clean_discharge.csv");
  write_json((out_dir / "synth.json").string(),
             json{{"theta_true", c.theta_true},
                  {"seed", seed},
                  {"noise", c.noise},
                  {"noisy_vs_clean_nse", result.noisy_vs_clean_nse}});
  outcome.outputs.push_back("synth.json");
}

}  // namespace

RunOutcome execute(const RunConfig& config) {
  RunOutcome outcome;
  const fs::path out_dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory '" + config.out_dir + "'");

  // Echo of the effective configuration, defaults included.
  write_text((out_dir / "effective_config.ini").string(), serialize_config(config));
  outcome.outputs.push_back("effective_config.ini");

  const uint64_t seed = config.seed;
  if (config.mode == "run") do_run(config, out_dir, outcome);
  else if (config.mode == "segment") do_segment(config, out_dir, outcome);
  else if (config.mode == "signatures") do_signatures(config, out_dir, outcome);
  else if (config.mode == "sensitivity") do_sensitivity(config, out_dir, seed, outcome);
  else if (config.mode == "calibrate") do_calibrate(config, out_dir, seed, outcome);
  else if (config.mode == "gradient-test") do_gradient_test(config, out_dir, seed, outcome);
  else if (config.mode == "synth") do_synth(config, out_dir, seed, outcome);
  else fail(ErrorCode::ValidationError, "unknown mode '" + config.mode + "'");
  return outcome;
}

RunOutcome execute_file(const std::string& config_path, const std::string& mode_override,
                        const std::string& out_dir_override, const uint64_t* seed_override) {
  RunOutcome outcome;
  try {
    RunConfig config = parse_config(config_path);
    if (!mode_override.empty()) config.mode = mode_override;
    if (!out_dir_override.empty()) config.out_dir = out_dir_override;
    if (seed_override) config.seed = *seed_override;
    validate_config(config);
    outcome = execute(config);
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e.code());
    outcome.message = e.what();
  } catch (const std::exception& e) {
    outcome.exit_code = 4;
    outcome.message = e.what();
  }
  return outcome;
}

}  // namespace hydrocal
