#include "zoomsig/geometry.hpp"

#include "zoomsig/error.hpp"

#include <cmath>
#include <string>

namespace zoomsig {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidRatio: return "invalid-ratio";
        case ErrorKind::InvalidBox: return "invalid-box";
        case ErrorKind::InvalidEdges: return "invalid-edges";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::EmptyDataset: return "empty-dataset";
        case ErrorKind::UndefinedAuc: return "undefined-auc";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
        case ErrorKind::UndefinedStats: return "undefined-stats";
        case ErrorKind::MissingLabel: return "missing-label";
        case ErrorKind::MissingModel: return "missing-model";
        case ErrorKind::DuplicateRecord: return "duplicate-record";
        case ErrorKind::EmptyLog: return "empty-log";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

// Lower edge of a length-`side` interval around `center`, translated to fit
// inside [0, kCanvas]. Sets `shifted` when the translation was needed.
double fit_axis(double center, double side, bool& shifted) {
    double lo = center - side / 2.0;
    if (lo < 0.0) {
        lo = 0.0;
        shifted = true;
    } else if (lo + side > kCanvas) {
        lo = kCanvas - side;
        shifted = true;
    }
    return lo;
}

}  // namespace

void validate_ratio(double r) {
    if (!std::isfinite(r) || r <= 0.0 || r > 1.0) {
        throw Error(ErrorKind::InvalidRatio, "crop ratio must lie in (0, 1], got " + std::to_string(r));
    }
}

CropBox make_crop(Point center, double r) {
    validate_ratio(r);
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) {
        throw Error(ErrorKind::InvalidBox, "crop center must be finite");
    }
    const double side = r * kCanvas;
    bool shifted = false;
    const double x0 = fit_axis(center.x, side, shifted);
    const double y0 = fit_axis(center.y, side, shifted);

    CropBox crop;
    crop.box = {x0, y0, x0 + side, y0 + side};
    crop.r = r;
    crop.clipped = shifted;
    return crop;
}

CropBox crop_from_corners(const BBox& corners, double r, std::optional<Point> requested_center) {
    validate_ratio(r);
    const double side = r * kCanvas;
    const double w = corners.x1 - corners.x0;
    const double h = corners.y1 - corners.y0;
    if (std::abs(w - side) > 1e-6 || std::abs(h - side) > 1e-6) {
        throw Error(ErrorKind::InvalidBox, "crop box must be a square of side r * 1000");
    }
    CropBox crop;
    crop.box = corners;
    crop.r = r;
    if (requested_center) {
        const CropBox expected = make_crop(*requested_center, r);
        const bool moved = std::abs(corners.x0 - expected.box.x0) > 1e-6 || std::abs(corners.y0 - expected.box.y0) > 1e-6;
        crop.clipped = expected.clipped || moved;
    }
    return crop;
}

Point to_crop(Point q, const CropBox& crop) noexcept {
    const Point c = crop.effective_center();
    return {(q.x - c.x) / crop.r + kCropCenter, (q.y - c.y) / crop.r + kCropCenter};
}

Point from_crop(Point p, const CropBox& crop) noexcept {
    const Point c = crop.effective_center();
    return {(p.x - kCropCenter) * crop.r + c.x, (p.y - kCropCenter) * crop.r + c.y};
}

double consistency(Point p2_crop) noexcept {
    return std::hypot(p2_crop.x - kCropCenter, p2_crop.y - kCropCenter);
}

double implied_step1_error(double c, double r) {
    validate_ratio(r);
    return r * c;
}

bool target_in_crop(Point t, const CropBox& crop) noexcept {
    const BBox& b = crop.box;
    return t.x >= b.x0 && t.x <= b.x1 && t.y >= b.y0 && t.y <= b.y1;
}

void validate_bbox(const BBox& box) {
    const bool finite = std::isfinite(box.x0) && std::isfinite(box.y0) && std::isfinite(box.x1) &&
                        std::isfinite(box.y1);
    if (!finite || box.x0 > box.x1 || box.y0 > box.y1) {
        throw Error(ErrorKind::InvalidBox, "bounding box needs x0 <= x1 and y0 <= y1");
    }
}

bool point_in_bbox(Point p, const BBox& box) {
    validate_bbox(box);
    return p.x >= box.x0 && p.x <= box.x1 && p.y >= box.y0 && p.y <= box.y1;
}

ZoomTrace make_trace(double r, std::optional<Point> p1, std::optional<Point> p2_crop) {
    ZoomTrace trace;
    trace.r = r;
    trace.p1 = p1;
    if (!p1) {
        trace.parse_failed_stage = ParseStage::Step1;
        return trace;
    }
    trace.crop = make_crop(*p1, r);
    if (!p2_crop) {
        trace.parse_failed_stage = ParseStage::Step2;
        return trace;
    }
    trace.p2_crop = p2_crop;
    trace.final_point = from_crop(*p2_crop, *trace.crop);
    trace.consistency = consistency(*p2_crop);
    return trace;
}

}  // namespace zoomsig
