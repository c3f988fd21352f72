#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "nanorotor/stochastic_sim.hpp"

namespace nanorotor {

struct PsdOptions {
  int segments = 16;      // number of overlapping segments
  double overlap = 0.5;   // fraction, >= 0.5
  double burn_in = 0.2;   // leading fraction of the trajectory discarded
};

/// Two-sided power spectral density on an ascending grid of angular
/// frequencies, normalized so that sum(psd) * df equals the variance
/// (df in Hz).
struct Spectrum {
  std::vector<double> frequency;  // rad/s
  std::vector<double> psd;        // 1/Hz
  double resolution = 0.0;        // bin spacing, Hz
  double variance = 0.0;          // time-domain variance of the input
  int segments = 0;
  int segment_length = 0;
  double overlap = 0.0;
};

/// Averaged periodogram with a Hann window (Welch). Throws
/// InsufficientDataError for fewer than 4 segments worth of data.
Spectrum welch_psd(const std::vector<std::complex<double>>& signal, double dt, int segments, double overlap);

struct SpectrumResult {
  std::array<Spectrum, 2> channel;  // fluctuations db_1, db_2 about their means
  std::string window = "hann";
  int segments = 0;
  double overlap = 0.0;
};

SpectrumResult estimate_psd(const Trajectory& traj, const PsdOptions& options = {});

struct Peak {
  double frequency = 0.0;  // rad/s
  double height = 0.0;
  double prominence_db = 0.0;  // above the local median floor
};

/// Local maxima standing at least min_db above the running median over
/// +-floor_halfwidth (rad/s). Only the highest bin within +-merge_halfwidth
/// (rad/s) is kept.
std::vector<Peak> find_peaks(const Spectrum& spectrum, double min_db, double floor_halfwidth,
                             double merge_halfwidth);

/// Integrated power (sum psd * df) within +-halfwidth rad/s of `frequency`.
double band_power(const Spectrum& spectrum, double frequency, double halfwidth);

enum class PeakKind { fundamental, combination, unassigned };

struct PeakAssignment {
  PeakKind kind = PeakKind::unassigned;
  int first = -1;   // mode index
  int second = -1;  // second mode of a combination, or -1
  int first_order = 0;
  int second_order = 0;
};

/// Matches |frequency| to a mode frequency or to |n w_i + m w_j| with
/// |n| + |m| = 2, within tolerance + relative * target (rad/s); large
/// amplitudes pull the lines off their linear frequencies. Fundamentals
/// win over combinations. Modes with frequency <= 0 are skipped.
PeakAssignment classify_peak(double frequency, const std::array<double, 6>& mode_frequency, double tolerance,
                             double relative = 0.0);

}  // namespace nanorotor
