#pragma once

#include <optional>

namespace zoomsig {

/// Side of the normalized coordinate space every model predicts into.
inline constexpr double kCanvas = 1000.0;
/// Center of a zoomed crop in crop coordinates.
inline constexpr double kCropCenter = 500.0;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned box, inclusive on every edge.
struct BBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Square crop region in original coordinates. Always of side r * 1000 and
/// fully inside the canvas; `clipped` records whether it had to be shifted
/// away from the requested center to get there.
struct CropBox {
    BBox box;
    double r = 1.0;
    bool clipped = false;

    [[nodiscard]] double side() const noexcept { return r * kCanvas; }
    [[nodiscard]] Point effective_center() const noexcept {
        return {(box.x0 + box.x1) / 2.0, (box.y0 + box.y1) / 2.0};
    }

    friend bool operator==(const CropBox&, const CropBox&) = default;
};

enum class ParseStage { None, Step1, Step2 };

/// One model's 2-step record for one sample. Absent fields come from parse
/// failures: a step-1 failure leaves everything empty, a step-2 failure
/// keeps p1 and the crop.
struct ZoomTrace {
    double r = 0.5;
    std::optional<Point> p1;
    std::optional<CropBox> crop;
    std::optional<Point> p2_crop;
    std::optional<Point> final_point;
    std::optional<double> consistency;
    ParseStage parse_failed_stage = ParseStage::None;

    [[nodiscard]] bool has_prediction() const noexcept { return final_point.has_value(); }

    friend bool operator==(const ZoomTrace&, const ZoomTrace&) = default;
};

void validate_ratio(double r);

/// Builds the crop of side r * 1000 around `center`, translated per axis by
/// the minimal amount that keeps it inside [0, 1000]^2.
CropBox make_crop(Point center, double r);

/// Rebuilds a CropBox from stored corners of a crop taken at ratio `r`.
/// `requested_center`, when given, decides the clipped flag.
CropBox crop_from_corners(const BBox& corners, double r, std::optional<Point> requested_center);

/// Original space -> crop space: (q - effective_center) / r + (500, 500).
Point to_crop(Point q, const CropBox& crop) noexcept;

/// Crop space -> original space; exact inverse of to_crop.
Point from_crop(Point p, const CropBox& crop) noexcept;

/// Distance of a crop-space prediction from the crop center.
double consistency(Point p2_crop) noexcept;

/// Step-1 error length implied by a consistency value under a perfect step 2.
double implied_step1_error(double c, double r);

bool target_in_crop(Point t, const CropBox& crop) noexcept;

void validate_bbox(const BBox& box);
bool point_in_bbox(Point p, const BBox& box);

/// Assembles a trace from the two raw predictions, deriving crop, final point
/// and consistency.
ZoomTrace make_trace(double r, std::optional<Point> p1, std::optional<Point> p2_crop);

}  // namespace zoomsig
