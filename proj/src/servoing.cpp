#include "polyprune/servoing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polyprune/error.hpp"
#include "polyprune/rng.hpp"

namespace polyprune {

std::vector<double> ServoConfig::default_scales() {
  std::vector<double> s;
  for (int i = 0; i <= 8; ++i) s.push_back(0.80 + 0.05 * i);
  return s;
}

void ServoConfig::validate() const {
  if (!(tolerance > 0.0 && step_cap > tolerance))
    throw Error(ErrorCode::InvalidInput, "servo config needs step_cap > tolerance > 0");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidInput, "max_iterations must be >= 1");
  if (min_sharpness_ratio < 0.0) throw Error(ErrorCode::InvalidInput, "min_sharpness_ratio must be >= 0");
  if (scale_set.empty()) throw Error(ErrorCode::InvalidInput, "empty scale set");
  for (double s : scale_set)
    if (!(s > 0.0)) throw Error(ErrorCode::InvalidInput, "scales must be positive");
  if (!(search_radius > 0.0)) throw Error(ErrorCode::InvalidInput, "search radius must be positive");
}

const char* to_string(ServoStatus status) {
  switch (status) {
    case ServoStatus::Converged: return "converged";
    case ServoStatus::IterationLimit: return "iteration_limit";
    case ServoStatus::LocalizationFailed: return "localization_failed";
  }
  return "unknown";
}

namespace {

float sample_bilinear(const GrayImage& img, double fx, double fy, bool* clamped = nullptr) {
  const double maxx = img.width() - 1, maxy = img.height() - 1;
  if (clamped && (fx < -0.5 || fy < -0.5 || fx > maxx + 0.5 || fy > maxy + 0.5)) *clamped = true;
  fx = std::clamp(fx, 0.0, maxx);
  fy = std::clamp(fy, 0.0, maxy);
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = fx - x0, ay = fy - y0;
  const double top = (1.0 - ax) * img(x0, y0) + ax * img(x1, y0);
  const double bot = (1.0 - ax) * img(x0, y1) + ax * img(x1, y1);
  return static_cast<float>((1.0 - ay) * top + ay * bot);
}

// Summed-area tables of values and squared values, (H+1) x (W+1).
struct Integral {
  int w = 0;
  std::vector<double> sum, sq;

  explicit Integral(const GrayImage& g) : w(g.width() + 1) {
    const int h = g.height() + 1;
    sum.assign(static_cast<std::size_t>(w) * h, 0.0);
    sq.assign(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < g.height(); ++y) {
      double rs = 0.0, rq = 0.0;
      for (int x = 0; x < g.width(); ++x) {
        const double v = g(x, y);
        rs += v;
        rq += v * v;
        sum[at(x + 1, y + 1)] = sum[at(x + 1, y)] + rs;
        sq[at(x + 1, y + 1)] = sq[at(x + 1, y)] + rq;
      }
    }
  }
  std::size_t at(int x, int y) const { return static_cast<std::size_t>(y) * w + x; }
  double box(const std::vector<double>& t, int x, int y, int bw, int bh) const {
    return t[at(x + bw, y + bh)] - t[at(x, y + bh)] - t[at(x + bw, y)] + t[at(x, y)];
  }
};

double parabolic_offset(double left, double mid, double right) {
  const double denom = left - 2.0 * mid + right;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

GrayImage resample(const GrayImage& image, int out_height, int out_width) {
  if (out_height <= 0 || out_width <= 0) throw Error(ErrorCode::InvalidInput, "empty resample target");
  if (out_height == image.height() && out_width == image.width()) return image;
  GrayImage out(out_height, out_width);
  const double sx = static_cast<double>(image.width()) / out_width;
  const double sy = static_cast<double>(image.height()) / out_height;
  for (int y = 0; y < out_height; ++y)
    for (int x = 0; x < out_width; ++x)
      out(x, y) = sample_bilinear(image, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
  return out;
}

GrayImage gaussian_blur(const GrayImage& image, double sigma_px) {
  if (!(sigma_px > 0.0)) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
    total += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (double& k : kernel) k /= total;
  const int w = image.width(), h = image.height();
  GrayImage tmp(h, w), out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * image(std::clamp(x + i, 0, w - 1), y);
      tmp(x, y) = static_cast<float>(acc);
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp(x, std::clamp(y + i, 0, h - 1));
      out(x, y) = static_cast<float>(acc);
    }
  return out;
}

double ncc(const GrayImage& a, const GrayImage& b) {
  if (!a.same_shape(b)) throw Error(ErrorCode::ShapeMismatch, "ncc operands differ in shape");
  const auto va = a.values(), vb = b.values();
  const double n = static_cast<double>(va.size());
  if (n == 0) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    ma += va[i];
    mb += vb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double x = va[i] - ma, y = vb[i] - mb;
    num += x * y;
    da += x * x;
    db += y * y;
  }
  if (da <= 1e-12 * n || db <= 1e-12 * n) return 0.0;
  return num / std::sqrt(da * db);
}

double sharpness(const GrayImage& image, int x0, int y0, int x1, int y1) {
  double s = 0.0, q = 0.0, grad = 0.0;
  std::size_t n = 0, ng = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const double v = image(x, y);
      s += v;
      q += v * v;
      ++n;
      if (x + 1 < x1 && y + 1 < y1) {
        const double dx = image(x + 1, y) - v, dy = image(x, y + 1) - v;
        grad += dx * dx + dy * dy;
        ++ng;
      }
    }
  if (n == 0 || ng == 0) return 0.0;
  const double var = q / n - (s / n) * (s / n);
  if (var <= 1e-12) return 0.0;
  return grad / ng / var;
}

LocalizationResult localize(const GrayImage& local, const GrayImage& global, Vec2 search_center,
                            double px_per_cm, const ServoConfig& cfg) {
  cfg.validate();
  if (local.empty() || global.empty()) throw Error(ErrorCode::InvalidInput, "empty image");
  if (!(px_per_cm > 0.0)) throw Error(ErrorCode::InvalidScale, "px_per_cm must be positive");

  const double cx = search_center.x * px_per_cm, cy = search_center.y * px_per_cm;
  const double r = cfg.search_radius * px_per_cm;
  const int wx0 = std::max(0, static_cast<int>(std::floor(cx - r)));
  const int wy0 = std::max(0, static_cast<int>(std::floor(cy - r)));
  const int wx1 = std::min(global.width(), static_cast<int>(std::ceil(cx + r)));
  const int wy1 = std::min(global.height(), static_cast<int>(std::ceil(cy + r)));

  const double local_sharp = sharpness(local, 0, 0, local.width(), local.height());
  const double global_sharp = sharpness(global, wx0, wy0, wx1, wy1);
  if (local_sharp > 0.0 && local_sharp < cfg.min_sharpness_ratio * global_sharp) {
    throw Error(ErrorCode::LocalizationFailed, "capture too blurred: sharpness " + std::to_string(local_sharp) +
                                                   " vs " + std::to_string(global_sharp));
  }

  const Integral integral(global);
  bool found = false;
  LocalizationResult best;
  double best_score = -2.0;

  for (double scale : cfg.scale_set) {
    const int tw = static_cast<int>(std::lround(local.width() / scale));
    const int th = static_cast<int>(std::lround(local.height() / scale));
    const int nu = wx1 - wx0 - tw + 1;
    const int nv = wy1 - wy0 - th + 1;
    if (tw < 1 || th < 1 || nu < 1 || nv < 1) continue;
    GrayImage templ = resample(local, th, tw);
    const double n = static_cast<double>(tw) * th;
    double mean = 0.0;
    for (float v : templ.values()) mean += v;
    mean /= n;
    std::vector<float> zm(templ.values().begin(), templ.values().end());
    double tnorm2 = 0.0;
    for (float& v : zm) {
      v = static_cast<float>(v - mean);
      tnorm2 += static_cast<double>(v) * v;
    }
    Grid<double> scores(nv, nu, 0.0);
    if (tnorm2 > 1e-12 * n) {
      const double tnorm = std::sqrt(tnorm2);
      std::vector<float> dots(static_cast<std::size_t>(nu));
      for (int v = 0; v < nv; ++v) {
        std::fill(dots.begin(), dots.end(), 0.0f);
        for (int j = 0; j < th; ++j) {
          const float* trow = zm.data() + static_cast<std::size_t>(j) * tw;
          const float* grow = global.row(wy0 + v + j).data() + wx0;
          for (int i = 0; i < tw; ++i) {
            const float t = trow[i];
            const float* g = grow + i;
            for (int u = 0; u < nu; ++u) dots[static_cast<std::size_t>(u)] += t * g[u];
          }
        }
        for (int u = 0; u < nu; ++u) {
          const int gx = wx0 + u, gy = wy0 + v;
          const double s = integral.box(integral.sum, gx, gy, tw, th);
          const double q = integral.box(integral.sq, gx, gy, tw, th);
          const double var = q - s * s / n;
          if (var <= 1e-9 * n) continue;
          scores(u, v) = dots[static_cast<std::size_t>(u)] / (tnorm * std::sqrt(var));
        }
      }
    }
    for (int v = 0; v < nv; ++v) {
      for (int u = 0; u < nu; ++u) {
        if (!found || scores(u, v) > best_score) {
          found = true;
          best_score = scores(u, v);
          best.scale = scale;
          best.score = scores(u, v);
          best.position = {(wx0 + u + tw / 2.0) / px_per_cm, (wy0 + v + th / 2.0) / px_per_cm};
          double ox = 0.0, oy = 0.0;
          if (cfg.subpixel) {
            if (u > 0 && u + 1 < nu) ox = parabolic_offset(scores(u - 1, v), scores(u, v), scores(u + 1, v));
            if (v > 0 && v + 1 < nv) oy = parabolic_offset(scores(u, v - 1), scores(u, v), scores(u, v + 1));
          }
          best.refined = {(wx0 + u + ox + tw / 2.0) / px_per_cm, (wy0 + v + oy + th / 2.0) / px_per_cm};
        }
      }
    }
  }
  if (!found) throw Error(ErrorCode::InvalidInput, "local image does not fit the search window at any scale");
  if (best.score < cfg.min_score) {
    throw Error(ErrorCode::LocalizationFailed,
                "best correlation " + std::to_string(best.score) + " below " + std::to_string(cfg.min_score));
  }
  return best;
}

Vec2 servo_step(Vec2 current, Vec2 target, double step_cap) {
  const Vec2 delta = target - current;
  const double len = norm(delta);
  if (len <= step_cap) return target;
  return current + (step_cap / len) * delta;
}

CameraFrame simulate_camera(const GrayImage& global, const GantryPose& pose, const CameraConfig& cfg,
                            std::uint64_t capture_index) {
  if (!(pose.z > 0.0)) throw Error(ErrorCode::InvalidInput, "camera height must be positive");
  if (cfg.sensor_px < 1) throw Error(ErrorCode::InvalidInput, "sensor must have pixels");
  const double w_cm = global.width() / cfg.px_per_cm, h_cm = global.height() / cfg.px_per_cm;
  if (pose.x < 0.0 || pose.y < 0.0 || pose.x > w_cm || pose.y > h_cm)
    throw Error(ErrorCode::OutOfBounds, "camera pose outside the bed");

  const double f = pose.z / cfg.reference_height;  // global px per sensor px
  CameraFrame frame;
  frame.extent_cm = cfg.extent_cm(pose.z);
  frame.image = GrayImage(cfg.sensor_px, cfg.sensor_px);
  const double ox = pose.x * cfg.px_per_cm - cfg.sensor_px * f / 2.0;
  const double oy = pose.y * cfg.px_per_cm - cfg.sensor_px * f / 2.0;
  for (int j = 0; j < cfg.sensor_px; ++j)
    for (int i = 0; i < cfg.sensor_px; ++i)
      frame.image(i, j) = sample_bilinear(global, ox + (i + 0.5) * f - 0.5, oy + (j + 0.5) * f - 0.5, &frame.clamped);

  if (cfg.blur_sigma_px > 0.0) frame.image = gaussian_blur(frame.image, cfg.blur_sigma_px);
  if (cfg.noise_sigma > 0.0) {
    Rng rng(hash_mix(cfg.seed, capture_index, 0xCA11));
    for (float& v : frame.image.values()) v = static_cast<float>(v + cfg.noise_sigma * rng.normal());
  }
  return frame;
}

ServoOutcome servo_loop(Camera& camera, const GrayImage& global, const GantryPose& start, Vec2 prune_point,
                        double px_per_cm, const ServoConfig& cfg) {
  cfg.validate();
  const double w_cm = global.width() / px_per_cm, h_cm = global.height() / px_per_cm;
  if (prune_point.x < 0.0 || prune_point.y < 0.0 || prune_point.x > w_cm || prune_point.y > h_cm)
    throw Error(ErrorCode::OutOfBounds, "prune point outside the bed");

  ServoOutcome out;
  out.pose = start;
  const Vec2 search_center{start.x, start.y};
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const CameraFrame frame = camera.capture(out.pose);
    out.iterations = it;
    ServoIteration row;
    row.iteration = it;
    row.pose = {out.pose.x, out.pose.y};
    LocalizationResult loc;
    try {
      loc = localize(frame.image, global, search_center, px_per_cm, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LocalizationFailed) throw;
      out.status = ServoStatus::LocalizationFailed;
      out.detail = e.what();
      out.trace.push_back(row);
      return out;
    }
    const Vec2 seen = cfg.subpixel ? loc.refined : loc.position;
    row.localized = seen;
    row.scale = loc.scale;
    row.score = loc.score;
    if (distance(seen, prune_point) <= cfg.tolerance) {
      out.trace.push_back(row);
      out.status = ServoStatus::Converged;
      return out;
    }
    const Vec2 move = servo_step(seen, prune_point, cfg.step_cap) - seen;
    out.pose.x = std::clamp(out.pose.x + move.x, 0.0, w_cm);
    out.pose.y = std::clamp(out.pose.y + move.y, 0.0, h_cm);
    row.step_len = norm(move);
    out.trace.push_back(row);
  }
  out.status = ServoStatus::IterationLimit;
  out.detail = "not within tolerance after " + std::to_string(cfg.max_iterations) + " captures";
  return out;
}

GrayImage synthetic_texture(int height, int width, std::uint64_t seed) {
  GrayImage noise(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      noise(x, y) = static_cast<float>(hash_unit(seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y)));
  GrayImage smooth = gaussian_blur(noise, 1.0);
  float lo = 1e30f, hi = -1e30f;
  for (float v : smooth.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const float span = hi > lo ? hi - lo : 1.0f;
  for (float& v : smooth.values()) v = (v - lo) / span;
  return smooth;
}

GrayImage overhead_image(const RenderedGarden& rendered, int type_count, std::uint64_t seed) {
  const auto& mask = rendered.mask;
  const GrayImage texture = synthetic_texture(mask.height(), mask.width(), seed);
  GrayImage img(mask.height(), mask.width());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const int label = mask.labels(x, y);
      const double base = label == 0 ? 0.25 : 0.35 + 0.45 * label / std::max(1, type_count);
      img(x, y) = static_cast<float>(base + 0.3 * (texture(x, y) - 0.5));
    }
  }
  return img;
}

}  // namespace polyprune
