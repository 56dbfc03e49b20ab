// Configuration parsing/serialization, timestamp handling, on-disk raster and
// discharge formats, and the C interface of the shared library.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hydrocal.h"
#include "hydrocal/config.hpp"
#include "hydrocal/metrics.hpp"
#include "hydrocal/runner.hpp"

using namespace hydrocal;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "hydrocal_io_test";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("hour timestamps round-trip and reject sub-hour input") {
  CHECK(parse_time_utc("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_time_utc("1970-01-02T00:00:00Z") == 24);
  CHECK(parse_time_utc("1969-12-31T23:00:00Z") == -1);
  CHECK(format_time_utc(0) == "1970-01-01T00:00:00Z");
  CHECK(format_time_utc(parse_time_utc("2004-02-29T13:00:00Z")) == "2004-02-29T13:00:00Z");
  CHECK(format_time_utc(parse_time_utc("2100-03-01T07:00:00Z")) == "2100-03-01T07:00:00Z");
  for (int64_t h : {-100000LL, -1LL, 0LL, 1LL, 8760LL, 1234567LL})
    CHECK(parse_time_utc(format_time_utc(h)) == h);

  CHECK_THROWS_AS(parse_time_utc("2020-01-01T00:30:00Z"), Error);
  CHECK_THROWS_AS(parse_time_utc("2020-01-01T00:00:30Z"), Error);
  CHECK_THROWS_AS(parse_time_utc("2020-01-01T00:00:00+01:00"), Error);
  CHECK_THROWS_AS(parse_time_utc("2020-13-01T00:00:00Z"), Error);
  CHECK_THROWS_AS(parse_time_utc("2020-02-30T00:00:00Z"), Error);
  CHECK_THROWS_AS(parse_time_utc("not a time"), Error);
}

TEST_CASE("configuration text round-trips through serialization") {
  const std::string text =
      "# example configuration\n"
      "[run]\n"
      "mode = calibrate\n"
      "seed = 7\n"
      "out_dir = /tmp/somewhere\n"
      "[paths]\n"
      "d8 = d8.txt\n"
      "rainfall = rain.txt\n"
      "pet = pet.txt\n"
      "discharge = q.csv\n"
      "[period]\n"
      "start = 2001-06-15T00:00:00Z\n"
      "warmup_hours = 48\n"
      "[gauge]\n"
      "row = 2\n"
      "col = 3\n"
      "id = outlet\n"
      "[model]\n"
      "theta = 12.5, 400, 120, 25.25, -1.5, 800\n"
      "[cost]\n"
      "dominant = kge\n"
      "delta_d = 0.5\n"
      "delta_f = 0.5\n"
      "flood_signatures = Epf:1.0, Eff:0.25\n"
      "[calibrate]\n"
      "strategy = multiobjective\n"
      "nsga_population = 24\n"
      "nsga_generations = 15\n";
  RunConfig config = parse_config_text(text, "inline");

  CHECK(config.mode == "calibrate");
  CHECK(config.seed == 7);
  CHECK(config.theta[kCp] == 400.0);
  CHECK(config.theta[kMl] == -1.5);
  CHECK(config.warmup_hours == 48);
  REQUIRE(config.flood_signatures.size() == 2);
  CHECK(config.flood_signatures[1].name == "Eff");
  CHECK(config.flood_signatures[1].weight == 0.25);

  RunConfig reparsed = parse_config_text(serialize_config(config), "echo");
  CHECK(reparsed == config);

  SUBCASE("defaults also round-trip") {
    RunConfig defaults;
    CHECK(parse_config_text(serialize_config(defaults), "echo") == defaults);
  }
}

TEST_CASE("configuration errors") {
  SUBCASE("unknown keys are rejected with their names") {
    bool threw = false;
    try {
      parse_config_text("[run]\nmode = run\nbogus_key = 1\n[paths]\nwhatever = x\n", "inline");
    } catch (const Error& e) {
      threw = true;
      CHECK(e.code() == ErrorCode::ValidationError);
      const std::string msg = e.what();
      CHECK(msg.find("bogus_key") != std::string::npos);
      CHECK(msg.find("whatever") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("malformed lines carry their line number") {
    bool threw = false;
    try {
      parse_config_text("[run]\nmode = run\nthis line has no equals sign\n", "inline");
    } catch (const Error& e) {
      threw = true;
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("validation lists every violation at once") {
    RunConfig config;
    config.mode = "run";
    config.d8 = "";            // required
    config.rainfall = "";      // required
    config.pet = "";           // required
    config.warmup_hours = -3;  // out of range
    bool threw = false;
    try {
      validate_config(config, /*check_files=*/false);
    } catch (const Error& e) {
      threw = true;
      const std::string msg = e.what();
      CHECK(msg.find("d8") != std::string::npos);
      CHECK(msg.find("rainfall") != std::string::npos);
      CHECK(msg.find("warmup") != std::string::npos);
    }
    CHECK(threw);
  }
  SUBCASE("non-power-of-two sample count is rejected") {
    RunConfig config;
    config.mode = "sensitivity";
    config.sample_count = 1000;
    config.d8 = "x";
    config.rainfall = "x";
    config.pet = "x";
    CHECK_THROWS_AS(validate_config(config, false), Error);
  }
}

TEST_CASE("stacked grid series round-trip") {
  const fs::path path = scratch_dir() / "stack.txt";
  std::vector<Grid<double>> steps;
  for (int t = 0; t < 4; ++t) {
    Grid<double> g(2, 3, 0.0);
    for (size_t i = 0; i < g.size(); ++i) g[i] = t * 10.0 + static_cast<double>(i) + 0.125;
    steps.push_back(g);
  }
  write_stacked_grids(path.string(), steps, 1.0);
  std::vector<Grid<double>> back = read_stacked_grids(path.string());
  REQUIRE(back.size() == steps.size());
  for (size_t t = 0; t < steps.size(); ++t)
    for (size_t i = 0; i < steps[t].size(); ++i) CHECK(back[t][i] == steps[t][i]);

  SUBCASE("read_grid_series accepts the stacked form") {
    std::vector<Grid<double>> series = read_grid_series(path.string());
    REQUIRE(series.size() == steps.size());
    CHECK(series[2][4] == steps[2][4]);
  }
}

TEST_CASE("discharge CSV round-trip") {
  const fs::path path = scratch_dir() / "discharge.csv";
  const int64_t start = parse_time_utc("1999-05-01T00:00:00Z");
  std::vector<double> q = {0.5, 1.25, 7.75, 3.0, 2.0, 1.5};
  write_discharge_csv(path.string(), start, q);
  std::vector<double> back = read_discharge_csv(path.string(), start);
  CHECK(back == q);

  SUBCASE("wrong expected start is rejected") {
    CHECK_THROWS_AS(read_discharge_csv(path.string(), start + 1), Error);
  }
}

TEST_CASE("exit code families") {
  CHECK(exit_code_for(ErrorCode::InvalidArgument) == 2);
  CHECK(exit_code_for(ErrorCode::ParseError) == 2);
  CHECK(exit_code_for(ErrorCode::ValidationError) == 2);
  CHECK(exit_code_for(ErrorCode::NonFiniteFlux) == 4);
  CHECK(exit_code_for(ErrorCode::ZeroVariance) == 4);
  CHECK(exit_code_for(ErrorCode::NonDifferentiableCost) == 4);
  CHECK(exit_code_for(ErrorCode::LengthMismatch) == 3);
  CHECK(exit_code_for(ErrorCode::CycleDetected) == 3);
}

TEST_CASE("C interface") {
  SUBCASE("streamflow metrics match the C++ core") {
    const std::vector<double> sim = {1.5, 2.0, 2.5}, obs = {1.0, 2.0, 3.0};
    double value = 0;
    REQUIRE(hc_nse(sim.data(), obs.data(), 3, &value) == HC_OK);
    CHECK(value == doctest::Approx(0.75).epsilon(1e-14));
    REQUIRE(hc_kge(sim.data(), obs.data(), 3, &value) == HC_OK);
    CHECK(value == doctest::Approx(kge(sim, obs)).epsilon(1e-14));

    CHECK(hc_nse(nullptr, obs.data(), 3, &value) == HC_ERR_CONFIG);
    const std::vector<double> flat = {2.0, 2.0, 2.0};
    CHECK(hc_nse(sim.data(), flat.data(), 3, &value) != HC_OK);
    CHECK(std::string(hc_last_error()).size() > 0);
  }
  SUBCASE("baseflow separation matches the C++ core") {
    std::vector<double> q = {1, 1, 5, 9, 4, 2, 1.5, 1.2, 1.1, 1.0};
    std::vector<double> out(q.size(), 0.0);
    REQUIRE(hc_baseflow(q.data(), q.size(), out.data()) == HC_OK);
    BaseflowResult expected = baseflow_separate(q);
    for (size_t t = 0; t < q.size(); ++t)
      CHECK(out[t] == doctest::Approx(expected.baseflow[t]).epsilon(1e-14));
  }
  SUBCASE("drainage plan handle") {
    const fs::path d8 = scratch_dir() / "d8.txt";
    write_file(d8,
               "ncols 2\nnrows 2\ncellsize_km 1.0\nnodata_value -9999\n"
               "3 5\n3 5\n");
    hc_plan* plan = nullptr;
    REQUIRE(hc_plan_read(d8.string().c_str(), &plan) == HC_OK);
    int nrows = 0, ncols = 0;
    REQUIRE(hc_plan_shape(plan, &nrows, &ncols) == HC_OK);
    CHECK(nrows == 2);
    CHECK(ncols == 2);
    double area = 0;
    REQUIRE(hc_plan_drained_area(plan, 1, 1, &area) == HC_OK);
    CHECK(area == doctest::Approx(4.0));
    hc_plan_free(plan);

    hc_plan* missing = nullptr;
    CHECK(hc_plan_read("/nonexistent/d8.txt", &missing) == HC_ERR_DATA);
  }
  SUBCASE("executing a missing configuration reports a config error") {
    CHECK(hc_execute("/nonexistent/config.ini", nullptr, nullptr, -1) != HC_OK);
  }
  SUBCASE("synthetic run end to end through the C interface") {
    const fs::path dir = scratch_dir() / "synth_run";
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.ini";
    write_file(cfg,
               "[run]\nmode = synth\nout_dir = " + (dir / "out").string() +
                   "\n[synth]\nduration_hours = 240\nstorm_count = 2\n");
    REQUIRE(hc_execute(cfg.string().c_str(), nullptr, nullptr, 11) == HC_OK);
    CHECK(fs::exists(dir / "out" / "discharge.csv"));
    CHECK(fs::exists(dir / "out" / "rainfall.txt"));
    CHECK(fs::exists(dir / "out" / "effective_config.ini"));
    // The emitted forcing re-parses.
    std::vector<Grid<double>> rain = read_grid_series((dir / "out" / "rainfall.txt").string());
    CHECK(rain.size() == 240);
  }
}
