// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "seadapt/common.hpp"
#include "seadapt/curriculum.hpp"
#include "seadapt/rng.hpp"

namespace seadapt {
namespace {

constexpr int kClasses = 5;

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Signed distance to the shape boundary in normalized units; negative
// inside. Shapes are centered at (cx, cy) with nominal radius r.
double shape_distance(int cls, double u, double v, double cx, double cy,
                      double r) {
  const double dx = u - cx;
  const double dy = v - cy;
  switch (cls) {
    case 0:  // circle
      return std::hypot(dx, dy) - r;
    case 1:  // square
      return std::max(std::abs(dx), std::abs(dy)) - r * 0.82;
    case 2: {  // triangle, apex up
      const double top = cy - r;
      const double bottom = cy + r * 0.78;
      const double half = r * 0.95;
      // Width of the triangle at height v, linear from apex to base.
      const double width = half * (v - top) / (bottom - top);
      const double e_side = width - std::abs(dx);  // >= 0 inside
      const double e_base = bottom - v;            // >= 0 inside
      return -std::min(e_side, e_base);
    }
    case 3: {  // cross
      const double bar = r * 0.34;
      const double dv = std::max(std::abs(dx) - bar, std::abs(dy) - r);
      const double dh = std::max(std::abs(dy) - bar, std::abs(dx) - r);
      return std::min(dv, dh);
    }
    case 4: {  // ring
      const double d = std::hypot(dx, dy);
      return std::max(d - r, r * 0.55 - d);
    }
    default:
      fail("unknown toy class index ", cls);
  }
}

// Morph partner per class; interpolating the signed distances morphs the
// outline continuously between the two shapes.
int morph_neighbor(int cls) {
  static constexpr int partner[kClasses] = {1, 0, 3, 2, 0};
  return partner[cls];
}

// Renders one shape into a row vector of size*size pixels. A nonzero
// morph blends the outline toward the class's morph partner.
Eigen::RowVectorXd render_shape(int cls, int size, double cx, double cy,
                                double r, double fg, double bg,
                                double morph = 0.0) {
  Eigen::RowVectorXd img(size * size);
  const double edge = 1.2 / size;  // soft edge roughly one pixel wide
  const int other = morph_neighbor(cls);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) / size;
      const double v = (y + 0.5) / size;
      double d = shape_distance(cls, u, v, cx, cy, r);
      if (morph > 0.0) {
        d = (1.0 - morph) * d + morph * shape_distance(other, u, v, cx, cy, r);
      }
      const double coverage = clamp01(0.5 - d / edge);
      img(y * size + x) = bg + (fg - bg) * coverage;
    }
  }
  return img;
}

void box_blur(Eigen::RowVectorXd& img, int size) {
  Eigen::RowVectorXd out(img.size());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || yy >= size || xx < 0 || xx >= size) continue;
          acc += img(yy * size + xx);
          ++n;
        }
      }
      out(y * size + x) = acc / n;
    }
  }
  img = out;
}

void add_noise(Eigen::RowVectorXd& img, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    img(i) = clamp01(img(i) + rng.normal(0.0, sigma));
  }
}

// Applies one capture condition at the given severity. Recipes are cheap
// but visually distinct, so the weather tag carries real signal.
void apply_weather(Eigen::RowVectorXd& img, int size, WeatherCondition w,
                   double severity, Rng& rng) {
  switch (w) {
    case WeatherCondition::sunny: {
      const double lift = 0.22 * severity;
      for (Eigen::Index i = 0; i < img.size(); ++i)
        img(i) = clamp01(img(i) + lift);
      add_noise(img, 0.015, rng);
      break;
    }
    case WeatherCondition::cloudy: {
      const double k = 1.0 - 0.55 * severity;
      for (Eigen::Index i = 0; i < img.size(); ++i)
        img(i) = clamp01(0.5 + (img(i) - 0.5) * k);
      add_noise(img, 0.02 + 0.03 * severity, rng);
      break;
    }
    case WeatherCondition::foggy: {
      const double f = 0.55 * severity;
      for (Eigen::Index i = 0; i < img.size(); ++i)
        img(i) = clamp01(img(i) * (1.0 - f) + 0.75 * f);
      const int passes = 1 + static_cast<int>(std::lround(severity * 2.0));
      for (int p = 0; p < passes; ++p) box_blur(img, size);
      add_noise(img, 0.02, rng);
      break;
    }
    case WeatherCondition::rainstorm: {
      const double dark = 1.0 - 0.45 * severity;
      for (Eigen::Index i = 0; i < img.size(); ++i) img(i) *= dark;
      const int streaks = 4 + static_cast<int>(std::lround(10.0 * severity));
      for (int s = 0; s < streaks; ++s) {
        const int x = static_cast<int>(rng.uniform_int(size));
        const int y0 = static_cast<int>(rng.uniform_int(size));
        const int len = 3 + static_cast<int>(rng.uniform_int(6));
        for (int y = y0; y < std::min(size, y0 + len); ++y)
          img(y * size + x) = clamp01(img(y * size + x) + 0.35);
      }
      add_noise(img, 0.03 + 0.03 * severity, rng);
      break;
    }
    case WeatherCondition::sunset_night: {
      for (int y = 0; y < size; ++y) {
        const double fall = 0.92 - 0.65 * severity * (y + 0.5) / size;
        for (int x = 0; x < size; ++x) img(y * size + x) *= fall;
      }
      add_noise(img, 0.025 + 0.02 * severity, rng);
      break;
    }
  }
}

void apply_style_shift(Eigen::RowVectorXd& img, const ToyBenchmarkConfig& cfg) {
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double g = std::pow(clamp01(img(i)), cfg.style_gamma);
    img(i) = clamp01(g * cfg.style_scale + cfg.style_offset);
  }
}

// Expands per-class (or per-weather) proportions into integer counts that
// sum to n, assigning remainders to the largest fractional parts.
std::vector<int> proportion_counts(const std::vector<double>& props, int n) {
  std::vector<int> counts(props.size());
  std::vector<std::pair<double, std::size_t>> frac;
  int used = 0;
  for (std::size_t i = 0; i < props.size(); ++i) {
    const double exact = props[i] * n;
    counts[i] = static_cast<int>(std::floor(exact));
    used += counts[i];
    frac.emplace_back(exact - counts[i], i);
  }
  std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; i < n - used; ++i) counts[frac[i % frac.size()].second]++;
  return counts;
}

}  // namespace

void ToyBenchmarkConfig::validate() const {
  require(n_source >= kClasses, "toy benchmark needs at least ", kClasses,
          " source samples, got ", n_source);
  require(n_target >= kClasses, "toy benchmark needs at least ", kClasses,
          " target samples, got ", n_target);
  require(image_size >= 8, "toy image size must be at least 8, got ",
          image_size);
  auto check_range = [](double lo, double hi, const char* what) {
    require(lo >= 0.0 && hi <= 1.0 && lo <= hi, "toy ", what,
            " severity range must satisfy 0 <= lo <= hi <= 1, got [", lo, ", ",
            hi, "]");
  };
  check_range(source_severity_lo, source_severity_hi, "source");
  check_range(target_severity_lo, target_severity_hi, "target");
  require(source_noise_fraction >= 0.0 && source_noise_fraction <= 0.5,
          "source noise fraction must lie in [0, 0.5], got ",
          source_noise_fraction);
  require(source_ambiguous_fraction >= 0.0 && source_ambiguous_fraction <= 0.6,
          "source ambiguous fraction must lie in [0, 0.6], got ",
          source_ambiguous_fraction);
  require(ambiguity_lo >= 0.0 && ambiguity_hi <= 0.5 &&
              ambiguity_lo <= ambiguity_hi,
          "ambiguity range must satisfy 0 <= lo <= hi <= 0.5, got [",
          ambiguity_lo, ", ", ambiguity_hi, "]");
  auto check_mix = [](const std::vector<double>& mix, const char* which) {
    if (mix.empty()) return;
    require(static_cast<int>(mix.size()) == kWeatherCount, "toy ", which,
            " weather mix needs ", kWeatherCount, " entries, got ", mix.size());
    double sum = 0.0;
    for (double p : mix) {
      require(p >= 0.0, "toy ", which, " weather mix entries must be >= 0");
      sum += p;
    }
    require(sum > 0.0, "toy ", which, " weather mix must not be all zero");
  };
  check_mix(source_weather_mix, "source");
  check_mix(target_weather_mix, "target");
  require(style_gamma > 0.0, "style gamma must be positive, got ", style_gamma);
}

const std::vector<std::string>& toy_label_space() {
  static const std::vector<std::string> names = {"circle", "square", "triangle",
                                                 "cross", "ring"};
  return names;
}

const std::vector<double>& toy_target_class_profile() {
  static const std::vector<double> profile = {0.42, 0.27, 0.16, 0.09, 0.06};
  return profile;
}

ToyDomain render_toy_domain(Domain domain, const ToyBenchmarkConfig& cfg) {
  cfg.validate();
  const bool source = domain == Domain::source;
  const int n = source ? cfg.n_source : cfg.n_target;
  const int size = cfg.image_size;
  Rng rng(derive_seed(cfg.seed, source ? "toy.source" : "toy.target"));

  // Class assignment: balanced on the source, long-tailed on the target.
  std::vector<int> class_of;
  if (source) {
    for (int i = 0; i < n; ++i) class_of.push_back(i % kClasses);
  } else {
    const auto counts = proportion_counts(toy_target_class_profile(), n);
    for (int c = 0; c < kClasses; ++c)
      class_of.insert(class_of.end(), counts[c], c);
  }
  rng.shuffle(class_of);

  // Weather assignment: uniform on the source; skewed toward the harsher
  // conditions on the target.
  std::vector<WeatherCondition> weather_of;
  {
    std::vector<double> props = source
        ? std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2}
        : std::vector<double>{0.15, 0.20, 0.25, 0.25, 0.15};
    const auto& custom =
        source ? cfg.source_weather_mix : cfg.target_weather_mix;
    if (!custom.empty()) {
      props = custom;
      const double sum = std::accumulate(props.begin(), props.end(), 0.0);
      for (double& p : props) p /= sum;
    }
    const auto counts = proportion_counts(props, n);
    for (int w = 0; w < kWeatherCount; ++w)
      weather_of.insert(weather_of.end(), counts[w],
                        all_weather_conditions()[w]);
    rng.shuffle(weather_of);
  }

  ToyDomain out;
  out.blob_file = source ? "source_images.tns" : "target_images.tns";
  out.images.count = n;
  out.images.height = size;
  out.images.width = size;
  out.images.channels = 1;
  out.images.data.resize(n, size * size);

  const double sev_lo = source ? cfg.source_severity_lo : cfg.target_severity_lo;
  const double sev_hi = source ? cfg.source_severity_hi : cfg.target_severity_hi;

  // Unusable-capture flags; drawn only when requested so the default
  // configuration reproduces byte-identical datasets.
  std::vector<char> ruined(n, 0);
  if (source && cfg.source_noise_fraction > 0.0) {
    const int n_ruined =
        static_cast<int>(std::lround(cfg.source_noise_fraction * n));
    std::fill(ruined.begin(), ruined.begin() + std::min(n, n_ruined), 1);
    rng.shuffle(ruined);
  }

  // Boundary-ambiguous flags, same convention.
  std::vector<char> ambiguous(n, 0);
  if (source && cfg.source_ambiguous_fraction > 0.0) {
    const int n_amb =
        static_cast<int>(std::lround(cfg.source_ambiguous_fraction * n));
    std::fill(ambiguous.begin(), ambiguous.begin() + std::min(n, n_amb), 1);
    rng.shuffle(ambiguous);
  }

  for (int i = 0; i < n; ++i) {
    const int cls = class_of[i];
    const WeatherCondition w = weather_of[i];

    // Geometry jitter; the target distribution is slightly shifted.
    const double cx = rng.uniform(0.40, 0.60) + (source ? 0.0 : 0.02);
    const double cy = rng.uniform(0.40, 0.60) + (source ? 0.0 : -0.02);
    const double r = source ? rng.uniform(0.18, 0.30) : rng.uniform(0.16, 0.27);
    const double fg = rng.uniform(0.75, 1.0);
    const double bg = rng.uniform(0.0, 0.12);

    Eigen::RowVectorXd img = render_shape(cls, size, cx, cy, r, fg, bg);
    const double severity =
        ruined[i] ? rng.uniform(0.85, 1.0) : rng.uniform(sev_lo, sev_hi);
    apply_weather(img, size, w, severity, rng);
    if (!source) apply_style_shift(img, cfg);

    // Quality prior: anticorrelated with corruption severity, with jitter
    // so it is informative rather than an oracle.
    const double quality =
        std::min(0.98, std::max(0.02, 1.0 - 0.6 * severity +
                                          rng.uniform(-0.08, 0.08)));

    SampleRecord rec;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "%c%04d", source ? 's' : 't', i);
    rec.id = idbuf;
    rec.image_ref = concat(out.blob_file, ":", i);
    rec.class_label = cls;
    rec.weather = w;
    rec.prior_quality = quality;
    rec.domain = domain;
    out.records.push_back(std::move(rec));
    out.images.data.row(i) = img;
  }
  return out;
}

ToyBenchmarkPaths generate_toy_benchmark(const std::filesystem::path& dir,
                                         const ToyBenchmarkConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(dir);

  ToyBenchmarkPaths paths;
  for (Domain d : {Domain::source, Domain::target}) {
    ToyDomain dom = render_toy_domain(d, cfg);
    write_tensor_blob(dir / dom.blob_file, dom.images);
    auto manifest =
        DomainManifest::from_records(toy_label_space(), dom.records, dir);
    const char* name = d == Domain::source ? "source.jsonl" : "target.jsonl";
    manifest.save(dir / name);
    (d == Domain::source ? paths.source_manifest : paths.target_manifest) =
        dir / name;
  }
  return paths;
}

}  // namespace seadapt
