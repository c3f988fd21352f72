#include "nanorotor/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <fftw3.h>

#include "nanorotor/errors.hpp"

namespace nanorotor {
namespace {

// FFTW planning is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(int n) : n_(n) {
    in_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(n, in_, out_, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::complex<double>* input() { return reinterpret_cast<std::complex<double>*>(in_); }
  const std::complex<double>* output() const { return reinterpret_cast<const std::complex<double>*>(out_); }
  void execute() { fftw_execute(plan_); }

 private:
  int n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

Spectrum welch_psd(const std::vector<std::complex<double>>& signal, double dt, int segments, double overlap) {
  if (segments < 4) throw InsufficientDataError("Welch estimate needs at least 4 segments");
  overlap = std::clamp(overlap, 0.0, 0.9);
  const auto total = static_cast<double>(signal.size());
  const int len = static_cast<int>(std::floor(total / (1.0 + (segments - 1) * (1.0 - overlap))));
  if (len < 16) throw InsufficientDataError("signal too short for " + std::to_string(segments) + " segments");
  const int hop = std::max(1, static_cast<int>(std::lround(len * (1.0 - overlap))));

  std::vector<double> window(static_cast<std::size_t>(len));
  double wsum2 = 0.0;
  for (int i = 0; i < len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(constants::two_pi * i / len);  // periodic Hann
    wsum2 += window[i] * window[i];
  }

  std::complex<double> mean{};
  for (const auto& v : signal) mean += v;
  mean /= total;
  double variance = 0.0;
  for (const auto& v : signal) variance += std::norm(v - mean);
  variance /= total;

  FftPlan plan(len);
  std::vector<double> acc(static_cast<std::size_t>(len), 0.0);
  int used = 0;
  for (int seg = 0; seg < segments; ++seg) {
    const std::size_t start = static_cast<std::size_t>(seg) * hop;
    if (start + len > signal.size()) break;
    for (int i = 0; i < len; ++i) plan.input()[i] = (signal[start + i] - mean) * window[i];
    plan.execute();
    for (int i = 0; i < len; ++i) acc[i] += std::norm(plan.output()[i]);
    ++used;
  }
  if (used < 4) throw InsufficientDataError("fewer than 4 complete segments");

  Spectrum s;
  s.segments = used;
  s.segment_length = len;
  s.overlap = overlap;
  s.variance = variance;
  s.resolution = 1.0 / (len * dt);
  s.frequency.resize(static_cast<std::size_t>(len));
  s.psd.resize(static_cast<std::size_t>(len));
  // Ascending frequencies; a component e^{+i w t} appears at +w.
  const double scale = dt / (wsum2 * used);
  for (int i = 0; i < len; ++i) {
    const int k = (i + (len + 1) / 2) % len;
    const int signed_k = k < (len + 1) / 2 ? k : k - len;
    s.frequency[i] = constants::two_pi * signed_k * s.resolution;
    s.psd[i] = acc[k] * scale;
  }
  return s;
}

SpectrumResult estimate_psd(const Trajectory& traj, const PsdOptions& options) {
  const std::size_t start = static_cast<std::size_t>(options.burn_in * static_cast<double>(traj.size()));
  if (traj.size() <= start + 64) throw InsufficientDataError("trajectory too short for spectral estimation");
  SpectrumResult r;
  r.segments = options.segments;
  r.overlap = options.overlap;
  for (int j = 0; j < 2; ++j) {
    std::vector<std::complex<double>> x;
    x.reserve(traj.size() - start);
    for (std::size_t i = start; i < traj.size(); ++i)
      x.emplace_back(traj.states[i][13 + 2 * j], traj.states[i][14 + 2 * j]);
    r.channel[j] = welch_psd(x, traj.dt, options.segments, options.overlap);
  }
  return r;
}

std::vector<Peak> find_peaks(const Spectrum& spectrum, double min_db, double floor_halfwidth,
                             double merge_halfwidth) {
  const auto& f = spectrum.frequency;
  const auto& p = spectrum.psd;
  const int n = static_cast<int>(p.size());
  const double df = constants::two_pi * spectrum.resolution;
  const int fw = std::max(2, static_cast<int>(floor_halfwidth / df));
  const int mw = std::max(1, static_cast<int>(merge_halfwidth / df));

  std::vector<Peak> peaks;
  std::vector<double> window;
  for (int i = 1; i + 1 < n; ++i) {
    if (!(p[i] > p[i - 1] && p[i] >= p[i + 1])) continue;
    bool highest = true;
    for (int k = std::max(0, i - mw); k <= std::min(n - 1, i + mw) && highest; ++k)
      if (p[k] > p[i]) highest = false;
    if (!highest) continue;
    const int lo = std::max(0, i - fw), hi = std::min(n - 1, i + fw);
    window.assign(p.begin() + lo, p.begin() + hi + 1);
    std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
    const double floor = window[window.size() / 2];
    if (!(floor > 0.0)) continue;
    const double db = 10.0 * std::log10(p[i] / floor);
    if (db >= min_db) peaks.push_back({f[i], p[i], db});
  }
  return peaks;
}

double band_power(const Spectrum& spectrum, double frequency, double halfwidth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < spectrum.psd.size(); ++i)
    if (std::abs(spectrum.frequency[i] - frequency) <= halfwidth) sum += spectrum.psd[i];
  return sum * spectrum.resolution;
}

PeakAssignment classify_peak(double frequency, const std::array<double, 6>& mode_frequency, double tolerance,
                             double relative) {
  const double f = std::abs(frequency);
  PeakAssignment best;
  double best_err = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    if (!(mode_frequency[i] > 0.0)) continue;
    const double err = std::abs(f - mode_frequency[i]);
    if (err <= tolerance + relative * mode_frequency[i] && err < best_err) {
      best_err = err;
      best = {PeakKind::fundamental, i, -1, 1, 0};
    }
  }
  if (best.kind == PeakKind::fundamental) return best;
  static constexpr int orders[][2] = {{2, 0}, {1, 1}, {1, -1}};
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j) {
      if (!(mode_frequency[i] > 0.0) || !(mode_frequency[j] > 0.0)) continue;
      for (const auto& o : orders) {
        if (o[1] != 0 && i == j) continue;
        if (o[1] == 0 && i != j) continue;
        const double c = std::abs(o[0] * mode_frequency[i] + o[1] * mode_frequency[j]);
        const double err = std::abs(f - c);
        if (c > tolerance && err <= tolerance + relative * c && err < best_err) {
          best_err = err;
          best = {PeakKind::combination, i, o[1] == 0 ? -1 : j, o[0], o[1]};
        }
      }
    }
  return best;
}

}  // namespace nanorotor
