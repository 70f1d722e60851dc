#pragma once

#include "zoomsig/dataset.hpp"
#include "zoomsig/geometry.hpp"
#include "zoomsig/random.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace zoomsig {

struct MixtureComponent;

/// Distribution over 2-D error vectors in normalized units.
struct ErrorDistribution {
    enum class Family { Fixed, Gaussian, UniformDisc, Mixture };

    Family family = Family::Fixed;
    Point offset;        // Fixed: the constant vector
    double scale = 0.0;  // Gaussian: per-axis sigma; UniformDisc: radius
    std::vector<MixtureComponent> components;

    static ErrorDistribution zero() { return {}; }
    static ErrorDistribution fixed(Point v) { return {Family::Fixed, v, 0.0, {}}; }
    static ErrorDistribution gaussian(double sigma) { return {Family::Gaussian, {}, sigma, {}}; }
    static ErrorDistribution uniform_disc(double radius) { return {Family::UniformDisc, {}, radius, {}}; }
    static ErrorDistribution mixture(std::vector<MixtureComponent> parts);

    Point sample(Rng& rng) const;
    void validate() const;
};

struct MixtureComponent {
    double weight = 1.0;
    ErrorDistribution dist;
};

/// What step 2 predicts when the target is not inside the crop.
enum class OutOfCropBehavior {
    /// phi(t) clamped to the crop, plus step-2 error, clamped again.
    Clamp,
    /// Uniformly random point in the crop; step-2 error is not applied.
    UniformInCrop,
};

struct SyntheticModelConfig {
    std::string name = "model";
    double r = 0.5;
    ErrorDistribution step1_error;
    ErrorDistribution step2_error;
    /// Extra isotropic step-2 noise with per-axis sigma coupling * |eps1|.
    double step2_error_coupling = 0.0;
    OutOfCropBehavior out_of_crop = OutOfCropBehavior::Clamp;

    void validate() const;
};

struct SimulationOptions {
    /// Targets are drawn uniformly from [margin, 1000 - margin]^2.
    double margin = 0.0;
    /// Half-size of the ground-truth box around the target (clipped to the canvas).
    double bbox_half_size = 20.0;
    std::vector<std::string> categories{"office", "scientific", "dev", "cad", "creative", "os"};
    std::vector<std::string> os_labels{"macos", "windows", "linux"};
    int apps_per_category = 3;
    /// Also emit stage-split traces: first model's step 1, second model's step 2.
    bool emit_hybrid = false;

    void validate() const;
};

/// Result of running one synthetic model's two steps against a known target.
struct TraceDraw {
    ZoomTrace trace;
    Point eps1;
    Point eps2;
    bool target_in_crop = true;
};

struct SyntheticSample {
    Point target;
    BBox gt_bbox;
    Labels labels;
    std::map<std::string, ZoomTrace> traces;
    std::map<std::string, Point> true_eps1;
    std::map<std::string, Point> true_eps2;
    std::map<std::string, bool> target_in_crop;
};

/// Runs both steps of one model for a fixed target.
TraceDraw simulate_trace(const SyntheticModelConfig& cfg, Point target, Rng& rng);

/// Step 2 of `cfg` on a crop produced by someone else's step 1 (stage split).
TraceDraw simulate_step2(const SyntheticModelConfig& cfg, Point target, Point p1, Point eps1, Rng& rng);

SyntheticSample simulate_sample(std::span<const SyntheticModelConfig> cfgs, Rng& rng,
                                const SimulationOptions& options = {});
SyntheticSample simulate_sample(const SyntheticModelConfig& cfg, Rng& rng,
                                const SimulationOptions& options = {});

/// n samples; sample i draws from Rng::derive(seed, i).
std::vector<SyntheticSample> simulate_samples(std::span<const SyntheticModelConfig> cfgs,
                                              std::size_t n, std::uint64_t seed,
                                              const SimulationOptions& options = {});

std::vector<SampleRecord> simulate_dataset(std::span<const SyntheticModelConfig> cfgs,
                                           std::size_t n, std::uint64_t seed,
                                           const SimulationOptions& options = {});

SampleRecord to_sample_record(const SyntheticSample& sample, std::string sample_id);

std::string synthetic_sample_id(std::size_t index);

}  // namespace zoomsig
