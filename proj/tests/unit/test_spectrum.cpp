#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "nanorotor/errors.hpp"
#include "nanorotor/runner.hpp"
#include "nanorotor/spectrum.hpp"
#include "support.hpp"

using namespace nanorotor;
using test::relative;

namespace {

using Signal = std::vector<std::complex<double>>;

// Complex tones plus white noise of the given variance.
Signal tones(std::size_t n, double dt, const std::vector<std::pair<double, double>>& lines, double noise,
             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(noise / 2.0));
  Signal x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    for (const auto& [w, a] : lines) x[i] += std::polar(a, w * t);
    x[i] += std::complex<double>(normal(rng), normal(rng));
  }
  return x;
}

double total_power(const Spectrum& s) {
  double sum = 0.0;
  for (double p : s.psd) sum += p;
  return sum * s.resolution;
}

}  // namespace

TEST_CASE("Welch estimate obeys Parseval") {
  const double dt = 1e-7;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Signal x = tones(1 << 16, dt, {{2e6, 0.7}, {-3.3e6, 0.2}}, 0.3, seed);
    const Spectrum s = welch_psd(x, dt, 16, 0.5);
    CHECK(relative(total_power(s), s.variance) < 0.02);
    for (double p : s.psd) CHECK(p >= 0.0);
  }
}

TEST_CASE("a tone's band power equals its squared amplitude") {
  const double dt = 1e-7;
  const double w = 1.234e6, a = 0.8;
  const Spectrum s = welch_psd(tones(1 << 16, dt, {{w, a}}, 0.0, 1), dt, 16, 0.5);
  const double df = constants::two_pi * s.resolution;
  CHECK(relative(band_power(s, w, 6 * df), a * a) < 0.01);
  // positive frequency only: e^{+iwt} has no image at -w
  CHECK(band_power(s, -w, 6 * df) < 1e-6 * a * a);
  const auto top = std::max_element(s.psd.begin(), s.psd.end()) - s.psd.begin();
  CHECK(std::abs(s.frequency[top] - w) <= df);
}

TEST_CASE("frequency grid is ascending and centred") {
  const double dt = 2e-7;
  const Spectrum s = welch_psd(tones(4096, dt, {}, 1.0, 4), dt, 8, 0.5);
  CHECK(std::is_sorted(s.frequency.begin(), s.frequency.end()));
  CHECK(s.frequency.front() < 0.0);
  CHECK(s.frequency.back() > 0.0);
  CHECK(s.segments == 8);
  CHECK(s.resolution == doctest::Approx(1.0 / (s.segment_length * dt)));
}

TEST_CASE("short signals raise InsufficientDataError") {
  CHECK_THROWS_AS(welch_psd(Signal(40), 1e-7, 16, 0.5), InsufficientDataError);
  CHECK_THROWS_AS(welch_psd(Signal(4096), 1e-7, 3, 0.5), InsufficientDataError);
  Trajectory t;
  t.dt = 1e-7;
  t.states.assign(50, StateVector{});
  CHECK_THROWS_AS(estimate_psd(t), InsufficientDataError);
}

TEST_CASE("peak finder picks the tones out of white noise") {
  const double dt = 1e-7;
  const std::vector<std::pair<double, double>> lines = {{1.5e6, 0.3}, {4.1e6, 0.2}, {-2.2e6, 0.25}};
  const Spectrum s = welch_psd(tones(1 << 17, dt, lines, 1.0, 9), dt, 16, 0.5);
  const double df = constants::two_pi * s.resolution;
  const auto peaks = find_peaks(s, 10.0, 40 * df, 3 * df);
  REQUIRE(peaks.size() == 3);
  std::vector<double> found;
  for (const auto& p : peaks) found.push_back(p.frequency);
  std::sort(found.begin(), found.end());
  CHECK(std::abs(found[0] + 2.2e6) <= df);
  CHECK(std::abs(found[1] - 1.5e6) <= df);
  CHECK(std::abs(found[2] - 4.1e6) <= df);
  for (const auto& p : peaks) CHECK(p.prominence_db >= 10.0);

  // pure noise has no 10 dB lines
  const Spectrum quiet = welch_psd(tones(1 << 17, dt, {}, 1.0, 10), dt, 16, 0.5);
  CHECK(find_peaks(quiet, 10.0, 40 * df, 3 * df).empty());
}

TEST_CASE("peaks are assigned to modes and their combinations") {
  const std::array<double, 6> w = {100.0, 150.0, 400.0, 0.0, 230.0, 510.0};
  auto c = classify_peak(-150.4, w, 1.0);
  CHECK(c.kind == PeakKind::fundamental);
  CHECK(c.first == 1);

  c = classify_peak(200.2, w, 1.0);  // 2 w_0
  CHECK(c.kind == PeakKind::combination);
  CHECK(c.first == 0);
  CHECK(c.first_order == 2);

  c = classify_peak(330.0, w, 1.0);  // w_0 + w_4
  CHECK(c.kind == PeakKind::combination);
  CHECK(((c.first == 0 && c.second == 4) || (c.first == 4 && c.second == 0)));

  c = classify_peak(360.0, w, 1.0);  // w_5 - w_1
  CHECK(c.kind == PeakKind::combination);
  CHECK(c.first_order * c.second_order == -1);

  CHECK(classify_peak(777.0, w, 1.0).kind == PeakKind::unassigned);
  // the unconfined mode never matches
  CHECK(classify_peak(0.5, w, 1.0).kind == PeakKind::unassigned);
  // relative slack grows with the target
  CHECK(classify_peak(406.0, w, 1.0).kind == PeakKind::unassigned);
  CHECK(classify_peak(406.0, w, 1.0, 0.015).kind == PeakKind::fundamental);
}

TEST_CASE("simulate settings resolve the row 4 librations") {
  // a clean synthetic line at the beta' frequency survives the simulate peak settings
  const auto a = analyze_scenario(test::bundled("table1_row4"));
  const double w = a.modes.modes[4].frequency;
  const double dt = 4 * 2.6e-8;
  const Spectrum s = welch_psd(tones(1 << 17, dt, {{w, 0.05}}, 0.5 * 0.5 * dt * 1e6, 3), dt, 16, 0.5);
  const auto peaks = spectrum_peaks(s);
  REQUIRE_FALSE(peaks.empty());
  std::array<double, 6> freq{};
  for (int q = 0; q < 6; ++q) freq[q] = a.modes.modes[q].frequency;
  bool hit = false;
  for (const auto& p : peaks) {
    const auto c = classify_peak(p.frequency, freq, 0.0, peak_relative_tolerance);
    hit = hit || (c.kind == PeakKind::fundamental && c.first == 4);
  }
  CHECK(hit);
}
