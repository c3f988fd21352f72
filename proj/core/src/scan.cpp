#include "nanorotor/scan.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "nanorotor/errors.hpp"

namespace nanorotor {

std::string_view to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok:
      return "ok";
    case PointStatus::unstable:
      return "unstable";
    case PointStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

double max_occupation(const CoolingReport& report) {
  double worst = 0.0;
  for (const auto& m : report.modes) {
    if (!m.confined || !m.occupation) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, *m.occupation);
  }
  return worst;
}

std::vector<double> linear_grid(double from, double to, int points) {
  std::vector<double> g;
  if (points <= 0) return g;
  if (points == 1) return {from};
  g.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g.push_back(from + (to - from) * i / (points - 1.0));
  return g;
}

namespace {

ScanPoint evaluate_point(double value, const ScanEvaluator& evaluate) {
  ScanPoint p;
  p.value = value;
  try {
    p.report = evaluate(value);
    p.max_occupation = max_occupation(*p.report);
  } catch (const PhysicsError& e) {
    p.status = PointStatus::unstable;
    p.message = e.what();
    p.max_occupation = std::numeric_limits<double>::infinity();
  } catch (const NumericalError& e) {
    p.status = PointStatus::numerical_failure;
    p.message = e.what();
    p.max_occupation = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

}  // namespace

std::vector<ScanPoint> parameter_scan(const std::vector<double>& grid, const ScanEvaluator& evaluate,
                                      unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<ScanPoint> out(grid.size());
  if (threads == 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = evaluate_point(grid[i], evaluate);
    return out;
  }
  for (std::size_t first = 0; first < grid.size(); first += threads) {
    std::vector<std::future<ScanPoint>> batch;
    const std::size_t last = std::min(grid.size(), first + threads);
    for (std::size_t i = first; i < last; ++i)
      batch.push_back(std::async(std::launch::async, evaluate_point, grid[i], std::cref(evaluate)));
    for (std::size_t i = first; i < last; ++i) out[i] = batch[i - first].get();
  }
  return out;
}

std::vector<ScanPoint> ellipticity_scan(const Ellipsoid& particle, const TweezerConfig& tweezer,
                                        const CavityConfig& cavity, const Environment& env,
                                        const std::vector<double>& psi, const AnalysisOptions& options) {
  return parameter_scan(psi, [&](double value) {
    TweezerConfig t = tweezer;
    t.ellipticity = value;
    return analyze(Setup::create(particle, t, cavity), env, options);
  });
}

}  // namespace nanorotor
