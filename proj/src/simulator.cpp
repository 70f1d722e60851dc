#include "zoomsig/simulator.hpp"

#include "zoomsig/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace zoomsig {

namespace {

Point clamp_to_canvas(Point p) {
    return {std::clamp(p.x, 0.0, kCanvas), std::clamp(p.y, 0.0, kCanvas)};
}

double norm(Point v) { return std::hypot(v.x, v.y); }

BBox box_around(Point t, double half) {
    return {std::max(0.0, t.x - half), std::max(0.0, t.y - half), std::min(kCanvas, t.x + half),
            std::min(kCanvas, t.y + half)};
}

template <typename T>
const T& pick(const std::vector<T>& items, Rng& rng) {
    return items[rng.below(items.size())];
}

}  // namespace

ErrorDistribution ErrorDistribution::mixture(std::vector<MixtureComponent> parts) {
    ErrorDistribution d;
    d.family = Family::Mixture;
    d.components = std::move(parts);
    return d;
}

Point ErrorDistribution::sample(Rng& rng) const {
    switch (family) {
        case Family::Fixed:
            return offset;
        case Family::Gaussian: {
            const double dx = scale * rng.normal();
            const double dy = scale * rng.normal();
            return {dx, dy};
        }
        case Family::UniformDisc: {
            const double radius = scale * std::sqrt(rng.uniform());
            const double theta = 2.0 * std::numbers::pi * rng.uniform();
            return {radius * std::cos(theta), radius * std::sin(theta)};
        }
        case Family::Mixture: {
            double total = 0.0;
            for (const auto& c : components) total += c.weight;
            double u = rng.uniform() * total;
            for (const auto& c : components) {
                if (u < c.weight) return c.dist.sample(rng);
                u -= c.weight;
            }
            return components.back().dist.sample(rng);
        }
    }
    return {};
}

void ErrorDistribution::validate() const {
    switch (family) {
        case Family::Fixed:
            if (!std::isfinite(offset.x) || !std::isfinite(offset.y)) {
                throw Error(ErrorKind::InvalidConfig, "fixed error vector must be finite");
            }
            return;
        case Family::Gaussian:
        case Family::UniformDisc:
            if (!std::isfinite(scale) || scale < 0.0) {
                throw Error(ErrorKind::InvalidConfig, "error scale must be finite and >= 0");
            }
            return;
        case Family::Mixture:
            if (components.empty()) {
                throw Error(ErrorKind::InvalidConfig, "mixture needs at least one component");
            }
            for (const auto& c : components) {
                if (!std::isfinite(c.weight) || c.weight <= 0.0) {
                    throw Error(ErrorKind::InvalidConfig, "mixture weights must be > 0");
                }
                c.dist.validate();
            }
            return;
    }
}

void SyntheticModelConfig::validate() const {
    try {
        validate_ratio(r);
    } catch (const Error& e) {
        throw Error(ErrorKind::InvalidConfig, "model '" + name + "': " + e.what());
    }
    step1_error.validate();
    step2_error.validate();
    if (!std::isfinite(step2_error_coupling) || step2_error_coupling < 0.0) {
        throw Error(ErrorKind::InvalidConfig, "step-2 coupling must be >= 0");
    }
}

void SimulationOptions::validate() const {
    if (!(margin >= 0.0) || margin * 2.0 > kCanvas) {
        throw Error(ErrorKind::InvalidConfig, "margin must lie in [0, 500]");
    }
    if (!(bbox_half_size >= 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "bbox half-size must be >= 0");
    }
    if (categories.empty() || os_labels.empty() || apps_per_category < 1) {
        throw Error(ErrorKind::InvalidConfig, "label pools must be nonempty");
    }
}

TraceDraw simulate_step2(const SyntheticModelConfig& cfg, Point target, Point p1, Point eps1, Rng& rng) {
    TraceDraw draw;
    draw.eps1 = eps1;
    const CropBox crop = make_crop(p1, cfg.r);

    Point eps2 = cfg.step2_error.sample(rng);
    if (cfg.step2_error_coupling > 0.0) {
        const double sigma = cfg.step2_error_coupling * norm(eps1);
        const double dx = sigma * rng.normal();
        const double dy = sigma * rng.normal();
        eps2.x += dx;
        eps2.y += dy;
    }
    draw.eps2 = eps2;
    draw.target_in_crop = target_in_crop(target, crop);

    Point p2;
    if (draw.target_in_crop || cfg.out_of_crop == OutOfCropBehavior::Clamp) {
        const Point ideal = clamp_to_canvas(to_crop(target, crop));
        p2 = clamp_to_canvas({ideal.x + eps2.x, ideal.y + eps2.y});
    } else {
        const double x = rng.uniform(0.0, kCanvas);
        const double y = rng.uniform(0.0, kCanvas);
        p2 = {x, y};
    }
    draw.trace = make_trace(cfg.r, p1, p2);
    return draw;
}

TraceDraw simulate_trace(const SyntheticModelConfig& cfg, Point target, Rng& rng) {
    const Point drawn = cfg.step1_error.sample(rng);
    // Models answer on the canvas, so the realized error is what survives clamping.
    const Point p1 = clamp_to_canvas({target.x + drawn.x, target.y + drawn.y});
    return simulate_step2(cfg, target, p1, {p1.x - target.x, p1.y - target.y}, rng);
}

SyntheticSample simulate_sample(std::span<const SyntheticModelConfig> cfgs, Rng& rng,
                                const SimulationOptions& options) {
    SyntheticSample s;
    const double tx = rng.uniform(options.margin, kCanvas - options.margin);
    const double ty = rng.uniform(options.margin, kCanvas - options.margin);
    s.target = {tx, ty};
    s.gt_bbox = box_around(s.target, options.bbox_half_size);

    const std::string& category = pick(options.categories, rng);
    s.labels["category"] = category;
    s.labels["os"] = pick(options.os_labels, rng);
    s.labels["application"] =
        category + "_" + std::to_string(rng.below(static_cast<std::uint64_t>(options.apps_per_category)));

    for (const auto& cfg : cfgs) {
        TraceDraw draw = simulate_trace(cfg, s.target, rng);
        s.true_eps1[cfg.name] = draw.eps1;
        s.true_eps2[cfg.name] = draw.eps2;
        s.target_in_crop[cfg.name] = draw.target_in_crop;
        s.traces[cfg.name] = std::move(draw.trace);
    }

    if (options.emit_hybrid && cfgs.size() >= 2) {
        const auto& a = cfgs[0];
        const auto& b = cfgs[1];
        const std::string name = PairedDataset::hybrid_model_name(a.name, b.name);
        SyntheticModelConfig step2_cfg = b;
        step2_cfg.r = a.r;
        TraceDraw draw = simulate_step2(step2_cfg, s.target, *s.traces[a.name].p1, s.true_eps1[a.name], rng);
        s.true_eps1[name] = draw.eps1;
        s.true_eps2[name] = draw.eps2;
        s.target_in_crop[name] = draw.target_in_crop;
        s.traces[name] = std::move(draw.trace);
    }
    return s;
}

SyntheticSample simulate_sample(const SyntheticModelConfig& cfg, Rng& rng, const SimulationOptions& options) {
    return simulate_sample(std::span<const SyntheticModelConfig>(&cfg, 1), rng, options);
}

std::vector<SyntheticSample> simulate_samples(std::span<const SyntheticModelConfig> cfgs, std::size_t n,
                                              std::uint64_t seed, const SimulationOptions& options) {
    if (n == 0) throw Error(ErrorKind::EmptyDataset, "sample count must be >= 1");
    if (cfgs.empty()) throw Error(ErrorKind::InvalidConfig, "at least one model config is required");
    options.validate();
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        cfgs[i].validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (cfgs[j].name == cfgs[i].name) {
                throw Error(ErrorKind::InvalidConfig, "duplicate model name '" + cfgs[i].name + "'");
            }
        }
    }

    std::vector<SyntheticSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::derive(seed, i);
        out.push_back(simulate_sample(cfgs, rng, options));
    }
    return out;
}

std::string synthetic_sample_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "syn-%06zu", index);
    return buf;
}

SampleRecord to_sample_record(const SyntheticSample& sample, std::string sample_id) {
    SampleRecord rec;
    rec.sample_id = std::move(sample_id);
    rec.gt_bbox = sample.gt_bbox;
    rec.labels = sample.labels;
    rec.traces = sample.traces;
    rescore(rec);
    return rec;
}

std::vector<SampleRecord> simulate_dataset(std::span<const SyntheticModelConfig> cfgs, std::size_t n,
                                           std::uint64_t seed, const SimulationOptions& options) {
    const auto samples = simulate_samples(cfgs, n, seed, options);
    std::vector<SampleRecord> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out.push_back(to_sample_record(samples[i], synthetic_sample_id(i)));
    }
    return out;
}

}  // namespace zoomsig
