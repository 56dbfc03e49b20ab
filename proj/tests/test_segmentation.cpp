// Flood-event segmentation checked against an independently scripted
// line-by-line trace of the documented algorithm: peak suppression, the
// rainfall gradient/energy start criterion, the quickflow-mass end criterion,
// and the 10-day merge rule.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "hydrocal/metrics.hpp"
#include "hydrocal/segmentation.hpp"

namespace {

using std::vector;

// ---------------------------------------------------------------------------
// Independent oracle, written directly from the documented conventions and
// sharing no code with the library implementation.
// ---------------------------------------------------------------------------

double oracle_quantile(vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * (static_cast<double>(v.size()) - 1.0);
  const size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

vector<int> oracle_detect_peaks(const vector<double>& q, double mph, int mpd) {
  const int n = static_cast<int>(q.size());
  // All strict local maxima above the height threshold.
  vector<int> cand;
  for (int i = 1; i + 1 < n; ++i)
    if (q[i] > q[i - 1] && q[i] > q[i + 1] && q[i] > mph) cand.push_back(i);
  // Greedy suppression: repeatedly accept the tallest remaining candidate
  // (earliest on ties) and discard everything closer than mpd to it.
  vector<int> kept;
  vector<bool> used(cand.size(), false);
  for (;;) {
    int best = -1;
    for (size_t k = 0; k < cand.size(); ++k) {
      if (used[k]) continue;
      if (best < 0 || q[cand[k]] > q[cand[best]]) best = static_cast<int>(k);
    }
    if (best < 0) break;
    used[best] = true;
    kept.push_back(cand[best]);
    for (size_t k = 0; k < cand.size(); ++k)
      if (!used[k] && std::abs(cand[k] - cand[best]) < mpd) used[k] = true;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

// Central differences, one-sided at the series ends.
vector<double> oracle_gradient(const vector<double>& p) {
  const int n = static_cast<int>(p.size());
  vector<double> g(n, 0.0);
  if (n < 2) return g;
  for (int t = 0; t < n; ++t) {
    if (t == 0)
      g[t] = p[1] - p[0];
    else if (t == n - 1)
      g[t] = p[n - 1] - p[n - 2];
    else
      g[t] = (p[t + 1] - p[t - 1]) / 2.0;
  }
  return g;
}

// L2 norm of the 24 hourly rainfall values starting one hour before t.
double oracle_energy(const vector<double>& p, int t) {
  const int n = static_cast<int>(p.size());
  double s = 0;
  for (int k = t - 1; k <= t + 22; ++k)
    if (k >= 0 && k < n) s += p[k] * p[k];
  return std::sqrt(s);
}

struct OracleStart {
  int start;
  bool fallback;
};

OracleStart oracle_event_start(const vector<double>& p, int t_peak) {
  vector<double> grad = oracle_gradient(p);
  vector<double> window;
  for (int t = t_peak - 72; t <= t_peak; ++t) window.push_back(grad[t]);
  const double threshold = oracle_quantile(window, 0.8);
  double emax = 0;
  for (int t = t_peak - 72; t <= t_peak; ++t) emax = std::max(emax, oracle_energy(p, t));
  for (int t = t_peak - 71; t <= t_peak - 1; ++t) {
    // Candidates are gradient peaks; a flat gradient plateau resolves to its
    // trailing edge (grad rises or holds into t and strictly drops after it).
    if (grad[t] <= threshold) continue;
    if (!(grad[t] >= grad[t - 1] && grad[t] > grad[t + 1])) continue;
    if (oracle_energy(p, t) > 0.2 * emax) return {t, false};
  }
  return {t_peak - 72, true};
}

struct OracleEvent {
  int start;
  int peak;
  int end;
  int merged_from;
};

// Three-pass digital filter reimplemented independently for the end criterion.
vector<double> oracle_filter_pass(const vector<double>& s, bool forward) {
  const double a = 0.925;
  const int n = static_cast<int>(s.size());
  vector<double> in = s;
  if (!forward) std::reverse(in.begin(), in.end());
  vector<double> base(n, 0.0);
  double f_prev = 0.0;
  base[0] = in[0];
  for (int k = 1; k < n; ++k) {
    double f = a * f_prev + 0.5 * (1.0 + a) * (in[k] - in[k - 1]);
    if (f < 0) f = 0;
    if (f > in[k]) f = in[k];
    base[k] = in[k] - f;
    f_prev = f;
  }
  if (!forward) std::reverse(base.begin(), base.end());
  return base;
}

vector<double> oracle_baseflow(const vector<double>& q) {
  vector<double> b = oracle_filter_pass(q, true);
  b = oracle_filter_pass(b, false);
  b = oracle_filter_pass(b, true);
  return b;
}

vector<OracleEvent> oracle_segment(const vector<double>& p, const vector<double>& q) {
  const int n = static_cast<int>(q.size());
  if (n < 3) return {};
  const double mph = oracle_quantile(q, 0.995);
  vector<int> peaks = oracle_detect_peaks(q, mph, 12);
  if (peaks.empty()) return {};
  vector<double> baseflow = oracle_baseflow(q);

  vector<OracleEvent> events;
  for (int t_peak : peaks) {
    if (t_peak < 72) continue;  // not enough rainfall history
    OracleStart start = oracle_event_start(p, t_peak);
    // End: minimize the 48 h quickflow mass starting one hour before t_e.
    int best_e = t_peak;
    double best = std::numeric_limits<double>::infinity();
    for (int t_e = t_peak; t_e <= std::min(n - 1, start.start + 240); ++t_e) {
      double mass = 0;
      for (int t = t_e - 1; t <= t_e + 47; ++t)
        if (t >= 0 && t < n) mass += std::abs(q[t] - baseflow[t]);
      if (mass < best) {
        best = mass;
        best_e = t_e;
      }
    }
    events.push_back({start.start, t_peak, best_e, 1});
  }
  std::sort(events.begin(), events.end(),
            [](const OracleEvent& a, const OracleEvent& b) { return a.start < b.start; });

  vector<OracleEvent> merged;
  for (const OracleEvent& e : events) {
    if (!merged.empty() &&
        (e.end < merged.back().start + 240 || e.start <= merged.back().end)) {
      OracleEvent& g = merged.back();
      g.end = std::max(g.end, e.end);
      if (q[e.peak] > q[g.peak]) g.peak = e.peak;
      g.merged_from += e.merged_from;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Synthetic series builders.
// ---------------------------------------------------------------------------

// 24 h rain block at rain_start; triangular discharge apex 10 h after the
// block starts, then exponential recession. Baseflow floor keeps Q positive.
void storm_series(vector<double>& p, vector<double>& q, int rain_start, double rain_rate,
                  double apex) {
  const int apex_t = rain_start + 10;
  for (int t = rain_start; t < rain_start + 24 && t < static_cast<int>(p.size()); ++t)
    p[t] += rain_rate;
  for (int t = 0; t < static_cast<int>(q.size()); ++t) {
    double v = 0;
    if (t > rain_start && t <= apex_t)
      v = apex * static_cast<double>(t - rain_start) / 10.0;
    else if (t > apex_t)
      v = apex * std::exp(-static_cast<double>(t - apex_t) / 30.0);
    q[t] += v;
  }
}

double rng01(unsigned long long& state) {
  state = state * 6364136223846793005ULL + 1442695040888963407ULL;
  return static_cast<double>((state >> 11) & 0xFFFFFFFFFFFFF) / 4503599627370496.0;
}

}  // namespace

using namespace hydrocal;

TEST_CASE("strict local maxima above the height threshold") {
  SUBCASE("constant series has no peaks") {
    vector<double> q(50, 1.0);
    CHECK(detect_peaks(q, 0.5, 12).empty());
  }
  SUBCASE("single triangular peak is found at the apex") {
    vector<double> q(41, 0.0);
    for (int t = 0; t <= 40; ++t) q[t] = 10.0 - std::abs(t - 20);
    vector<int> peaks = detect_peaks(q, oracle_quantile(q, 0.995), 12);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 20);
  }
  SUBCASE("two equal peaks 6 h apart with mpd=12 keep the earlier") {
    vector<double> q(30, 0.0);
    q[9] = 0.5;
    q[10] = 5.0;
    q[11] = 0.5;
    q[15] = 0.5;
    q[16] = 5.0;
    q[17] = 0.5;
    vector<int> peaks = detect_peaks(q, 1.0, 12);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 10);
  }
  SUBCASE("larger of two close peaks wins regardless of order") {
    vector<double> q(30, 0.0);
    q[9] = 0.5;
    q[10] = 3.0;
    q[11] = 0.5;
    q[15] = 0.5;
    q[16] = 7.0;
    q[17] = 0.5;
    vector<int> peaks = detect_peaks(q, 1.0, 12);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == 16);
  }
  SUBCASE("randomized series match the scripted suppression rule") {
    unsigned long long state = 9001;
    for (int trial = 0; trial < 200; ++trial) {
      vector<double> q(120);
      for (double& v : q) v = rng01(state);
      const double mph = 0.6;
      const int mpd = 5 + trial % 12;
      CHECK(detect_peaks(q, mph, mpd) == oracle_detect_peaks(q, mph, mpd));
    }
  }
}

TEST_CASE("flood start criterion") {
  const int t_peak = 110;
  SUBCASE("rectangular burst starting at t_peak-10 starts the event at onset") {
    vector<double> p(200, 0.0);
    for (int t = 100; t < 124; ++t) p[t] = 5.0;
    EventStart s = event_start(p, t_peak);
    CHECK_FALSE(s.fallback);
    CHECK(s.start == 100);
    OracleStart o = oracle_event_start(p, t_peak);
    CHECK(o.start == s.start);
    CHECK(o.fallback == s.fallback);
  }
  SUBCASE("zero rainfall in the history window falls back, flagged") {
    vector<double> p(200, 0.0);
    EventStart s = event_start(p, t_peak);
    CHECK(s.fallback);
    CHECK(s.start == t_peak - 72);
  }
  SUBCASE("low-energy early burst is skipped in favor of the main burst") {
    vector<double> p(260, 0.0);
    const int peak2 = 180;
    p[peak2 - 60] = 0.3;  // small isolated burst, energy far below 0.2 of max
    for (int t = peak2 - 8; t < peak2 + 10; ++t) p[t] = 6.0;
    EventStart s = event_start(p, peak2);
    CHECK_FALSE(s.fallback);
    CHECK(s.start == peak2 - 8);
    OracleStart o = oracle_event_start(p, peak2);
    CHECK(o.start == s.start);
  }
  SUBCASE("insufficient history throws") {
    vector<double> p(200, 1.0);
    CHECK_THROWS_AS(event_start(p, 40), Error);
  }
  SUBCASE("randomized rainfall matches the scripted trace") {
    unsigned long long state = 424242;
    for (int trial = 0; trial < 200; ++trial) {
      vector<double> p(220, 0.0);
      for (double& v : p) v = rng01(state) < 0.7 ? 0.0 : 8.0 * rng01(state);
      EventStart s = event_start(p, 150);
      OracleStart o = oracle_event_start(p, 150);
      CHECK(s.start == o.start);
      CHECK(s.fallback == o.fallback);
    }
  }
}

TEST_CASE("segmentation scenarios against the independent algorithm trace") {
  SUBCASE("flat discharge yields no events") {
    vector<double> p(600, 0.0);
    vector<double> q(600, 1.0);
    p[100] = 4.0;
    CHECK(segment(p, q).empty());
  }
  SUBCASE("single storm: rain block at t=100, apex t=110, recession") {
    vector<double> p(720, 0.0);
    vector<double> q(720, 0.5);
    storm_series(p, q, 100, 4.0, 40.0);
    vector<FloodEvent> events = segment(p, q);
    vector<OracleEvent> expected = oracle_segment(p, q);
    REQUIRE(expected.size() == 1);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start == expected[0].start);
    CHECK(events[0].peak == expected[0].peak);
    CHECK(events[0].end == expected[0].end);
    CHECK(events[0].merged_from == 1);
    CHECK(events[0].peak == 110);
    CHECK(events[0].start == 100);  // burst onset per the hand trace
    CHECK_FALSE(events[0].start_fallback);
  }
  SUBCASE("two storms 5 days apart merge into one event") {
    vector<double> p(1200, 0.0);
    vector<double> q(1200, 0.5);
    storm_series(p, q, 100, 4.0, 40.0);
    storm_series(p, q, 220, 4.0, 35.0);  // 120 h later
    vector<FloodEvent> events = segment(p, q);
    vector<OracleEvent> expected = oracle_segment(p, q);
    REQUIRE(expected.size() == 1);
    REQUIRE(events.size() == 1);
    CHECK(events[0].start == expected[0].start);
    CHECK(events[0].peak == expected[0].peak);
    CHECK(events[0].end == expected[0].end);
    CHECK(events[0].merged_from == 2);
    CHECK(expected[0].merged_from == 2);
    CHECK(events[0].peak == 110);  // taller of the two merged peaks
  }
  SUBCASE("two storms far apart stay separate") {
    vector<double> p(2000, 0.0);
    vector<double> q(2000, 0.5);
    storm_series(p, q, 100, 4.0, 40.0);
    storm_series(p, q, 900, 4.0, 35.0);
    vector<FloodEvent> events = segment(p, q);
    vector<OracleEvent> expected = oracle_segment(p, q);
    REQUIRE(expected.size() == 2);
    REQUIRE(events.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
      CHECK(events[i].start == expected[i].start);
      CHECK(events[i].peak == expected[i].peak);
      CHECK(events[i].end == expected[i].end);
    }
  }
  SUBCASE("peak with less than 72 h of history is dropped") {
    vector<double> p(600, 0.0);
    vector<double> q(600, 0.5);
    // Apex at t=40: rain block would start at t=30.
    storm_series(p, q, 30, 4.0, 40.0);
    CHECK(segment(p, q).empty());
  }
  SUBCASE("length mismatch throws") {
    CHECK_THROWS_AS(segment(vector<double>(10, 0.0), vector<double>(11, 0.0)), Error);
  }
}

TEST_CASE("segmentation invariants") {
  vector<double> p(1500, 0.0);
  vector<double> q(1500, 0.5);
  storm_series(p, q, 100, 4.0, 40.0);
  storm_series(p, q, 500, 3.0, 25.0);
  storm_series(p, q, 1000, 5.0, 55.0);
  vector<FloodEvent> events = segment(p, q);
  REQUIRE_FALSE(events.empty());
  const double mph = oracle_quantile(q, 0.995);
  for (const FloodEvent& e : events) {
    CHECK(e.start <= e.peak);
    CHECK(e.peak <= e.end);
    CHECK(q[e.peak] > mph);
    if (e.merged_from == 1) CHECK(e.end - e.start <= 240);
  }
  for (size_t i = 1; i < events.size(); ++i) {
    CHECK(events[i].start > events[i - 1].end);           // disjoint after merging
    CHECK(events[i].end >= events[i - 1].start + 240);    // else they would merge
  }

  SUBCASE("determinism") {
    vector<FloodEvent> again = segment(p, q);
    REQUIRE(again.size() == events.size());
    for (size_t i = 0; i < events.size(); ++i) {
      CHECK(again[i].start == events[i].start);
      CHECK(again[i].peak == events[i].peak);
      CHECK(again[i].end == events[i].end);
    }
  }
  SUBCASE("count stability: rainfall after the last end window changes nothing") {
    vector<double> p2 = p;
    vector<double> q2 = q;
    const int tail = events.back().end + 60;
    for (int t = tail; t < tail + 5 && t < static_cast<int>(p2.size()); ++t) p2[t] += 2.0;
    vector<FloodEvent> again = segment(p2, q2);
    REQUIRE(again.size() >= events.size());
    for (size_t i = 0; i < events.size(); ++i) {
      CHECK(again[i].start == events[i].start);
      CHECK(again[i].peak == events[i].peak);
    }
  }
}
