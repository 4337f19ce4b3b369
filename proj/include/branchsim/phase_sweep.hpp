#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "branchsim/coop_model.hpp"

namespace branchsim {

enum class Estimator {
  McSurvival,   // explosion-race survival frequency from (1,1)
  HIndicator,   // h_polynomial value (threshold rendered at display time)
  McCoupled,    // survival frequency with shared-uniform coupling per p-row
};

std::string estimator_name(Estimator e);

struct SweepConfig {
  double p_min = 0.0, p_max = 1.0;
  double q_min = 0.0, q_max = 1.0;
  double step = 0.025;
  std::int64_t trials = 1000;
  std::int64_t explosion_threshold = 100000000;
  std::uint64_t seed = 0;
  Estimator estimator = Estimator::McSurvival;
  int jobs = 1;
};

struct PhaseGridMeta {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  std::int64_t explosion_threshold = 0;
  double grid_step = 0.0;
  std::string estimator = "mc_survival";
};

struct PhaseGrid {
  std::vector<double> p_axis;
  std::vector<double> q_axis;
  // Row-major, row = p index: values[i * q_axis.size() + j].
  std::vector<double> values;
  PhaseGridMeta meta;

  double at(std::size_t i, std::size_t j) const {
    return values[i * q_axis.size() + j];
  }
};

// Evaluates every (p_i, q_j) cell.  Monte Carlo cell (i, j) draws trial
// t from derive_stream(seed, i, j, t); the coupled estimator shares the
// stream along each p-row, derive_stream(seed, i, 0, t), so estimates
// are non-decreasing in q pathwise.  Values are a pure function of the
// config, independent of job count.
PhaseGrid sweep(const SweepConfig& config);

// Header `p,q,value,trials,threshold,seed`, rows p-major then q, floats
// as shortest round-trip decimals, LF line endings.
void export_csv(const PhaseGrid& grid, const std::string& path);
PhaseGrid import_csv(const std::string& path);

struct HeatmapOptions {
  enum class Format { Ppm, Svg };
  Format format = Format::Ppm;
  int cell_pixels = 1;            // image is |q_axis| x |p_axis| cells, scaled
  bool overlay_critical = false;  // polyline of (critical_q(p), p)
};

// q runs along the horizontal axis, p along the vertical (top = largest
// p).  Values clamp to [0,1] and map linearly to grayscale, except the
// h_indicator estimator which renders value > 1 as full intensity.
void render_heatmap(const PhaseGrid& grid, const std::string& path,
                    const HeatmapOptions& options = {});

}  // namespace branchsim
