#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "polyprune/garden.hpp"
#include "polyprune/geometry.hpp"
#include "polyprune/grid.hpp"

namespace polyprune {

struct GantryPose {
  double x = 0.0;  // cm
  double y = 0.0;  // cm
  double z = 0.0;  // cm above soil
};

struct ServoConfig {
  double step_cap = 4.0;   // cm
  double tolerance = 1.0;  // cm
  int max_iterations = 6;
  std::vector<double> scale_set = default_scales();
  double search_radius = 8.0;  // cm, half-side of the square search window
  double min_score = 0.2;
  // Capture sharpness over search-window sharpness below this is treated as
  // an unclear image. Sharpness is mean squared gradient over variance.
  double min_sharpness_ratio = 0.125;
  bool subpixel = true;  // parabolic refinement of the correlation peak

  static std::vector<double> default_scales();
  void validate() const;
};

struct LocalizationResult {
  Vec2 position;  // cm, center of the best integer placement
  Vec2 refined;   // cm, sub-pixel refined center (== position when disabled)
  double scale = 1.0;
  double score = 0.0;
};

// Zero-mean NCC of `local` (resampled by 1/scale for each scale in the set)
// against every placement inside the search window of `global`. Throws
// LocalizationFailed when the best score is below cfg.min_score or the
// capture is much blurrier than the global image.
// Mean squared forward-difference gradient divided by variance; 0 when flat.
double sharpness(const GrayImage& image, int x0, int y0, int x1, int y1);

LocalizationResult localize(const GrayImage& local, const GrayImage& global, Vec2 search_center,
                            double px_per_cm, const ServoConfig& cfg);

// Zero-mean NCC of two equally sized images; 0 when either has no variance.
double ncc(const GrayImage& a, const GrayImage& b);

Vec2 servo_step(Vec2 current, Vec2 target, double step_cap);

struct CameraConfig {
  double px_per_cm = 1.0;            // of the global image
  int sensor_px = 16;                // side of the square sensor
  double reference_height = 40.0;    // cm; at this height one sensor px == one global px
  double noise_sigma = 0.0;
  double blur_sigma_px = 0.0;
  std::uint64_t seed = 1;

  double extent_cm(double z) const { return sensor_px / px_per_cm * (z / reference_height); }
};

struct CameraFrame {
  GrayImage image;
  double extent_cm = 0.0;  // linear ground extent covered by the view
  bool clamped = false;    // part of the view fell outside the global image
};

CameraFrame simulate_camera(const GrayImage& global, const GantryPose& pose, const CameraConfig& cfg,
                            std::uint64_t capture_index = 0);

class Camera {
 public:
  virtual ~Camera() = default;
  virtual CameraFrame capture(const GantryPose& pose) = 0;
};

// Renders views out of a stored overhead image; each capture draws fresh noise.
class SimulatedCamera final : public Camera {
 public:
  SimulatedCamera(GrayImage global, CameraConfig cfg) : global_(std::move(global)), cfg_(cfg) {}
  CameraFrame capture(const GantryPose& pose) override {
    return simulate_camera(global_, pose, cfg_, captures_++);
  }
  std::uint64_t captures() const noexcept { return captures_; }

 private:
  GrayImage global_;
  CameraConfig cfg_;
  std::uint64_t captures_ = 0;
};

enum class ServoStatus { Converged, IterationLimit, LocalizationFailed };

const char* to_string(ServoStatus status);

struct ServoIteration {
  int iteration = 0;
  Vec2 pose;
  Vec2 localized;
  double scale = 0.0;
  double score = 0.0;
  double step_len = 0.0;
};

struct ServoOutcome {
  ServoStatus status = ServoStatus::IterationLimit;
  GantryPose pose;
  int iterations = 0;  // captures taken
  std::vector<ServoIteration> trace;
  std::string detail;
};

// The search window is centered on the start pose (the plant's seed location).
ServoOutcome servo_loop(Camera& camera, const GrayImage& global, const GantryPose& start, Vec2 prune_point,
                        double px_per_cm, const ServoConfig& cfg);

// Textured grayscale overhead view of a rendered garden: per-type base tone
// plus fixed per-pixel texture, so correlation has structure to lock onto.
GrayImage overhead_image(const RenderedGarden& rendered, int type_count, std::uint64_t seed);

// Smoothed value noise in [0, 1].
GrayImage synthetic_texture(int height, int width, std::uint64_t seed);

GrayImage gaussian_blur(const GrayImage& image, double sigma_px);
GrayImage resample(const GrayImage& image, int out_height, int out_width);

}  // namespace polyprune
