#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vtask::geometry {

/// Number of quantization bins per image axis. Bin indices run 0..kNumBins-1.
inline constexpr int kNumBins = 1000;

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct ImageSize {
  double width = 0.0;
  double height = 0.0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Axis-aligned box given by its top-left (x0, y0) and bottom-right (x1, y1) corners.
struct BBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double area() const noexcept { return width() * height(); }
  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Quadrilateral text region. The first vertex is top-left and the rest follow
/// clockwise; the stored order is taken as given.
struct QuadBox {
  std::array<Point, 4> vertices{};
  friend bool operator==(const QuadBox&, const QuadBox&) = default;
};

/// Simple polygon with at least three vertices in clockwise screen order.
struct Polygon {
  std::vector<Point> vertices;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

using Region = std::variant<BBox, QuadBox, Polygon>;

enum class RegionKind { Box, Quad, Polygon };

const char* to_string(RegionKind kind) noexcept;

/// A region expressed as location-token bin indices, x then y per vertex.
struct QuantizedRegion {
  RegionKind kind = RegionKind::Box;
  std::vector<int> bins;
  friend bool operator==(const QuantizedRegion&, const QuantizedRegion&) = default;
};

struct ScoredBox {
  BBox box;
  double score = 0.0;
  std::optional<std::string> label;
  friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

// Validation. Each throws DomainError describing the first violation.
void validate(const ImageSize& size);
void validate(const BBox& box);
void validate(const BBox& box, const ImageSize& size);
void validate(const Polygon& polygon);
void validate(const QuantizedRegion& region);
void validate(const ScoredBox& box);

bool within(const Point& p, const ImageSize& size) noexcept;

RegionKind kind_of(const Region& region) noexcept;

/// Shoelace area computed with the y axis flipped to point up, so clockwise
/// screen order gives a non-positive value.
double signed_area(std::span<const Point> vertices) noexcept;
bool is_clockwise(const Polygon& polygon) noexcept;

/// Smallest axis-aligned box containing every vertex of the region.
BBox envelope(const Region& region) noexcept;

/// floor(v * 1000 / extent) clamped to [0, 999].
int quantize_coord(double v, double extent);

/// Centre of bin b: (b + 0.5) / 1000 * extent.
double dequantize_coord(int bin, double extent);

QuantizedRegion quantize_region(const Region& region, const ImageSize& size);
Region dequantize_region(const QuantizedRegion& region, const ImageSize& size);

double iou(const BBox& a, const BBox& b) noexcept;

/// Greedy non-maximum suppression. Returns indices into `boxes` of the kept
/// boxes, in descending score order (equal scores keep input order). A box is
/// kept iff its IoU with every previously kept box (sharing its label when
/// class_aware) is below iou_threshold.
std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes, double iou_threshold,
                                     bool class_aware);

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold,
                           bool class_aware);

}  // namespace vtask::geometry
