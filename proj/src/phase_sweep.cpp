#include "branchsim/phase_sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace branchsim {
namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<double> make_axis(double lo, double hi, double step) {
  const std::int64_t n =
      static_cast<std::int64_t>(std::floor((hi - lo) / step + 0.5)) + 1;
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    double v = lo + static_cast<double>(i) * step;
    v = std::min(std::max(v, 0.0), 1.0);
    axis.push_back(v);
  }
  return axis;
}

bool survival_trial(const CoopParams& prm, std::int64_t threshold, Rng& rng) {
  CoopState s{1, 1};
  while (s.x > 0 && s.y > 0 && s.x < threshold && s.y < threshold)
    s = coop_step(s, prm, rng);
  return s.x > 0 && s.y > 0;
}

bool survival_trial_coupled(const CoopParams& prm, std::int64_t threshold,
                            Rng& rng) {
  // Exactly two uniforms per step, inverse-CDF sampled, so runs driven
  // by the same stream at componentwise larger (p,q) stay pathwise
  // above this one.
  CoopState s{1, 1};
  while (s.x > 0 && s.y > 0 && s.x < threshold && s.y < threshold) {
    const double u1 = rng.next_unit();
    const double u2 = rng.next_unit();
    CoopState next;
    next.x = binomial_quantile(2 * (s.x + s.y), prm.q, u1);
    next.y = binomial_quantile(2 * s.z(), prm.p, u2);
    s = next;
  }
  return s.x > 0 && s.y > 0;
}

}  // namespace

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::McSurvival:
      return "mc_survival";
    case Estimator::HIndicator:
      return "h_indicator";
    case Estimator::McCoupled:
      return "mc_survival_coupled";
  }
  throw std::invalid_argument("estimator_name: unknown estimator");
}

PhaseGrid sweep(const SweepConfig& config) {
  if (!(config.step > 0.0))
    throw std::domain_error("sweep: need step > 0");
  if (config.p_min < 0.0 || config.p_max > 1.0 || config.q_min < 0.0 ||
      config.q_max > 1.0 || config.p_min > config.p_max ||
      config.q_min > config.q_max)
    throw std::domain_error("sweep: ranges must be within [0, 1]");
  if (config.trials < 1) throw std::domain_error("sweep: need trials >= 1");

  PhaseGrid grid;
  grid.p_axis = make_axis(config.p_min, config.p_max, config.step);
  grid.q_axis = make_axis(config.q_min, config.q_max, config.step);
  grid.values.assign(grid.p_axis.size() * grid.q_axis.size(), 0.0);
  grid.meta.seed = config.seed;
  grid.meta.trials = config.trials;
  grid.meta.explosion_threshold = config.explosion_threshold;
  grid.meta.grid_step = config.step;
  grid.meta.estimator = estimator_name(config.estimator);

  const std::int64_t nq = static_cast<std::int64_t>(grid.q_axis.size());
  const std::int64_t cells =
      static_cast<std::int64_t>(grid.p_axis.size()) * nq;
  parallel_for(cells, config.jobs, [&](std::int64_t cell) {
    const std::int64_t i = cell / nq;
    const std::int64_t j = cell % nq;
    const CoopParams prm{grid.p_axis[static_cast<std::size_t>(i)],
                         grid.q_axis[static_cast<std::size_t>(j)]};
    double value = 0.0;
    switch (config.estimator) {
      case Estimator::HIndicator:
        value = h_polynomial(prm);
        break;
      case Estimator::McSurvival: {
        std::int64_t hits = 0;
        for (std::int64_t t = 0; t < config.trials; ++t) {
          Rng rng = derive_stream(config.seed, static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(j),
                                  static_cast<std::uint64_t>(t));
          if (survival_trial(prm, config.explosion_threshold, rng)) ++hits;
        }
        value = static_cast<double>(hits) / static_cast<double>(config.trials);
        break;
      }
      case Estimator::McCoupled: {
        std::int64_t hits = 0;
        for (std::int64_t t = 0; t < config.trials; ++t) {
          Rng rng = derive_stream(config.seed, static_cast<std::uint64_t>(i),
                                  0, static_cast<std::uint64_t>(t));
          if (survival_trial_coupled(prm, config.explosion_threshold, rng))
            ++hits;
        }
        value = static_cast<double>(hits) / static_cast<double>(config.trials);
        break;
      }
    }
    grid.values[static_cast<std::size_t>(cell)] = value;
  });
  return grid;
}

void export_csv(const PhaseGrid& grid, const std::string& path) {
  if (grid.p_axis.empty() || grid.q_axis.empty() ||
      grid.values.size() != grid.p_axis.size() * grid.q_axis.size())
    throw std::invalid_argument("export_csv: inconsistent grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  out << "p,q,value,trials,threshold,seed\n";
  for (std::size_t i = 0; i < grid.p_axis.size(); ++i)
    for (std::size_t j = 0; j < grid.q_axis.size(); ++j) {
      out << format_double(grid.p_axis[i]) << ','
          << format_double(grid.q_axis[j]) << ','
          << format_double(grid.at(i, j)) << ',' << grid.meta.trials << ','
          << grid.meta.explosion_threshold << ',' << grid.meta.seed << '\n';
    }
  if (!out) throw std::runtime_error("export_csv: write failed on " + path);
}

PhaseGrid import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "p,q,value,trials,threshold,seed")
    throw std::runtime_error("import_csv: bad header in " + path);

  PhaseGrid grid;
  auto parse_field = [&](const std::string& s, double* v) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), *v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw std::runtime_error("import_csv: bad number '" + s + "'");
  };
  bool first_row = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    double cols[6];
    for (int c = 0; c < 6; ++c) {
      if (!std::getline(row, field, ','))
        throw std::runtime_error("import_csv: short row '" + line + "'");
      parse_field(field, &cols[c]);
    }
    const double p = cols[0], q = cols[1], value = cols[2];
    if (grid.p_axis.empty() || grid.p_axis.back() != p) {
      if (!grid.p_axis.empty() && p < grid.p_axis.back())
        throw std::runtime_error("import_csv: rows not p-major");
      grid.p_axis.push_back(p);
    }
    if (grid.p_axis.size() == 1) grid.q_axis.push_back(q);
    grid.values.push_back(value);
    if (first_row) {
      grid.meta.trials = static_cast<std::int64_t>(cols[3]);
      grid.meta.explosion_threshold = static_cast<std::int64_t>(cols[4]);
      grid.meta.seed = static_cast<std::uint64_t>(cols[5]);
      first_row = false;
    }
  }
  if (grid.values.size() != grid.p_axis.size() * grid.q_axis.size())
    throw std::runtime_error("import_csv: ragged grid in " + path);
  grid.meta.grid_step =
      grid.p_axis.size() > 1 ? grid.p_axis[1] - grid.p_axis[0]
                             : (grid.q_axis.size() > 1
                                    ? grid.q_axis[1] - grid.q_axis[0]
                                    : 0.0);
  grid.meta.estimator = "imported";
  return grid;
}

namespace {

struct Pixel {
  unsigned char r = 0, g = 0, b = 0;
};

unsigned char display_level(const PhaseGrid& grid, double v) {
  if (grid.meta.estimator == "h_indicator") return v > 1.0 ? 255 : 0;
  v = std::min(std::max(v, 0.0), 1.0);
  return static_cast<unsigned char>(std::lround(v * 255.0));
}

// Fractional plot coordinates -> pixel indices, top row = largest p.
struct PixelMap {
  double q0, q1, p0, p1;
  std::int64_t w, h;
  std::int64_t px(double q) const {
    if (q1 == q0 || w == 1) return 0;
    return static_cast<std::int64_t>(
        std::lround((q - q0) / (q1 - q0) * static_cast<double>(w - 1)));
  }
  std::int64_t py(double p) const {
    if (p1 == p0 || h == 1) return 0;
    return static_cast<std::int64_t>(
        std::lround((p1 - p) / (p1 - p0) * static_cast<double>(h - 1)));
  }
};

void draw_line(std::vector<Pixel>& img, std::int64_t w, std::int64_t h,
               std::int64_t x0, std::int64_t y0, std::int64_t x1,
               std::int64_t y1, Pixel color) {
  const std::int64_t dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const std::int64_t dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  std::int64_t err = dx + dy;
  for (;;) {
    if (x0 >= 0 && x0 < w && y0 >= 0 && y0 < h)
      img[static_cast<std::size_t>(y0 * w + x0)] = color;
    if (x0 == x1 && y0 == y1) break;
    const std::int64_t e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Overlay sample points (critical_q(p), p) for p values with a crossing.
std::vector<std::pair<double, double>> overlay_points(const PhaseGrid& grid) {
  std::vector<std::pair<double, double>> pts;
  for (const double p : grid.p_axis) {
    if (!(h_polynomial({p, 1.0}) > 1.0)) continue;  // no crossing: skipped
    pts.emplace_back(critical_q(p), p);
  }
  return pts;
}

void render_ppm(const PhaseGrid& grid, const std::string& path,
                const HeatmapOptions& options) {
  const std::int64_t scale = options.cell_pixels;
  const std::int64_t w = static_cast<std::int64_t>(grid.q_axis.size()) * scale;
  const std::int64_t h = static_cast<std::int64_t>(grid.p_axis.size()) * scale;
  std::vector<Pixel> img(static_cast<std::size_t>(w * h));
  const std::size_t np = grid.p_axis.size();
  for (std::size_t i = 0; i < np; ++i) {
    const std::size_t row_top = (np - 1 - i) * static_cast<std::size_t>(scale);
    for (std::size_t j = 0; j < grid.q_axis.size(); ++j) {
      const unsigned char level = display_level(grid, grid.at(i, j));
      for (std::int64_t dy = 0; dy < scale; ++dy) {
        const std::size_t base =
            (row_top + static_cast<std::size_t>(dy)) *
                static_cast<std::size_t>(w) +
            j * static_cast<std::size_t>(scale);
        for (std::int64_t dx = 0; dx < scale; ++dx)
          img[base + static_cast<std::size_t>(dx)] = {level, level, level};
      }
    }
  }
  if (options.overlay_critical) {
    const auto pts = overlay_points(grid);
    const PixelMap map{grid.q_axis.front(), grid.q_axis.back(),
                       grid.p_axis.front(), grid.p_axis.back(), w, h};
    const Pixel green{0, 180, 0};
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      draw_line(img, w, h, map.px(pts[k].first), map.py(pts[k].second),
                map.px(pts[k + 1].first), map.py(pts[k + 1].second), green);
    if (pts.size() == 1)
      draw_line(img, w, h, map.px(pts[0].first), map.py(pts[0].second),
                map.px(pts[0].first), map.py(pts[0].second), green);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("render_heatmap: cannot open " + path);
  out << "P6\n" << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data()),
            static_cast<std::streamsize>(img.size() * 3));
  if (!out) throw std::runtime_error("render_heatmap: write failed on " + path);
}

void render_svg(const PhaseGrid& grid, const std::string& path,
                const HeatmapOptions& options) {
  const std::int64_t scale = options.cell_pixels;
  const std::int64_t plot_w =
      static_cast<std::int64_t>(grid.q_axis.size()) * scale;
  const std::int64_t plot_h =
      static_cast<std::int64_t>(grid.p_axis.size()) * scale;
  const std::int64_t ml = 46, mb = 34, mt = 8, mr = 8;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("render_heatmap: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << ml + plot_w + mr << "\" height=\"" << mt + plot_h + mb << "\">\n";
  const std::size_t np = grid.p_axis.size();
  for (std::size_t i = 0; i < np; ++i) {
    const std::int64_t y =
        mt + static_cast<std::int64_t>(np - 1 - i) * scale;
    for (std::size_t j = 0; j < grid.q_axis.size(); ++j) {
      const int level = display_level(grid, grid.at(i, j));
      out << "<rect x=\"" << ml + static_cast<std::int64_t>(j) * scale
          << "\" y=\"" << y << "\" width=\"" << scale << "\" height=\""
          << scale << "\" fill=\"rgb(" << level << ',' << level << ','
          << level << ")\"/>\n";
    }
  }
  if (options.overlay_critical) {
    const auto pts = overlay_points(grid);
    if (!pts.empty()) {
      const double q0 = grid.q_axis.front(), q1 = grid.q_axis.back();
      const double p0 = grid.p_axis.front(), p1 = grid.p_axis.back();
      out << "<polyline fill=\"none\" stroke=\"rgb(0,150,0)\" "
             "stroke-width=\"1.5\" stroke-dasharray=\"6,4\" points=\"";
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double fx = q1 == q0 ? 0.0 : (pts[k].first - q0) / (q1 - q0);
        const double fy = p1 == p0 ? 0.0 : (p1 - pts[k].second) / (p1 - p0);
        out << (k ? " " : "")
            << format_double(static_cast<double>(ml) +
                             fx * static_cast<double>(plot_w - 1))
            << ','
            << format_double(static_cast<double>(mt) +
                             fy * static_cast<double>(plot_h - 1));
      }
      out << "\"/>\n";
      out << "<text x=\"" << ml + 6 << "\" y=\"" << mt + 14
          << "\" font-size=\"11\" fill=\"rgb(0,150,0)\">h(p,q)=1</text>\n";
    }
  }
  out << "<text x=\"" << ml + plot_w / 2 << "\" y=\""
      << mt + plot_h + mb - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">q</text>\n";
  out << "<text x=\"" << ml - 30 << "\" y=\"" << mt + plot_h / 2
      << "\" font-size=\"12\" text-anchor=\"middle\">p</text>\n";
  out << "<text x=\"" << ml << "\" y=\"" << mt + plot_h + 14
      << "\" font-size=\"10\">" << format_double(grid.q_axis.front())
      << "</text>\n";
  out << "<text x=\"" << ml + plot_w << "\" y=\"" << mt + plot_h + 14
      << "\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(grid.q_axis.back()) << "</text>\n";
  out << "<text x=\"" << ml - 4 << "\" y=\"" << mt + plot_h
      << "\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(grid.p_axis.front()) << "</text>\n";
  out << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10
      << "\" font-size=\"10\" text-anchor=\"end\">"
      << format_double(grid.p_axis.back()) << "</text>\n";
  out << "</svg>\n";
  if (!out) throw std::runtime_error("render_heatmap: write failed on " + path);
}

}  // namespace

void render_heatmap(const PhaseGrid& grid, const std::string& path,
                    const HeatmapOptions& options) {
  if (grid.p_axis.empty() || grid.q_axis.empty() ||
      grid.values.size() != grid.p_axis.size() * grid.q_axis.size())
    throw std::invalid_argument("render_heatmap: inconsistent grid");
  if (options.cell_pixels < 1)
    throw std::invalid_argument("render_heatmap: need cell_pixels >= 1");
  if (options.format == HeatmapOptions::Format::Ppm)
    render_ppm(grid, path, options);
  else
    render_svg(grid, path, options);
}

}  // namespace branchsim
