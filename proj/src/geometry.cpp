#include "vtask/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vtask/error.hpp"

namespace vtask::geometry {

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::size_t expected_bins(RegionKind kind, std::size_t actual) {
  switch (kind) {
    case RegionKind::Box:
      return 4;
    case RegionKind::Quad:
      return 8;
    case RegionKind::Polygon:
      return actual;
  }
  return 0;
}

}  // namespace

const char* to_string(RegionKind kind) noexcept {
  switch (kind) {
    case RegionKind::Box:
      return "box";
    case RegionKind::Quad:
      return "quad";
    case RegionKind::Polygon:
      return "polygon";
  }
  return "?";
}

void validate(const ImageSize& size) {
  if (!(size.width > 0.0) || !std::isfinite(size.width)) {
    throw DomainError("image width must be positive, got " + fmt_num(size.width));
  }
  if (!(size.height > 0.0) || !std::isfinite(size.height)) {
    throw DomainError("image height must be positive, got " + fmt_num(size.height));
  }
}

void validate(const BBox& box) {
  if (!std::isfinite(box.x0) || !std::isfinite(box.y0) || !std::isfinite(box.x1) ||
      !std::isfinite(box.y1)) {
    throw DomainError("box has non-finite coordinate");
  }
  if (box.x0 > box.x1) {
    throw DomainError("box x0 " + fmt_num(box.x0) + " exceeds x1 " + fmt_num(box.x1));
  }
  if (box.y0 > box.y1) {
    throw DomainError("box y0 " + fmt_num(box.y0) + " exceeds y1 " + fmt_num(box.y1));
  }
}

bool within(const Point& p, const ImageSize& size) noexcept {
  return p.x >= 0.0 && p.x <= size.width && p.y >= 0.0 && p.y <= size.height;
}

void validate(const BBox& box, const ImageSize& size) {
  validate(box);
  if (!within({box.x0, box.y0}, size) || !within({box.x1, box.y1}, size)) {
    throw DomainError("box (" + fmt_num(box.x0) + ", " + fmt_num(box.y0) + ", " + fmt_num(box.x1) +
                      ", " + fmt_num(box.y1) + ") lies outside a " + fmt_num(size.width) + "x" +
                      fmt_num(size.height) + " image");
  }
}

void validate(const Polygon& polygon) {
  if (polygon.vertices.size() < 3) {
    throw DomainError("polygon needs at least 3 vertices, got " +
                      std::to_string(polygon.vertices.size()));
  }
  if (!is_clockwise(polygon)) {
    throw DomainError("polygon vertices are not in clockwise order");
  }
}

void validate(const QuantizedRegion& region) {
  const std::size_t n = region.bins.size();
  if (region.kind == RegionKind::Polygon) {
    if (n < 6 || n % 2 != 0) {
      throw DomainError("polygon needs an even number of at least 6 bins, got " +
                        std::to_string(n));
    }
  } else if (n != expected_bins(region.kind, n)) {
    throw DomainError(std::string(to_string(region.kind)) + " needs " +
                      std::to_string(expected_bins(region.kind, n)) + " bins, got " +
                      std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (region.bins[i] < 0 || region.bins[i] >= kNumBins) {
      throw DomainError("bin " + std::to_string(region.bins[i]) + " at position " +
                        std::to_string(i) + " is outside [0, 999]");
    }
  }
}

void validate(const ScoredBox& box) {
  validate(box.box);
  if (!(box.score >= 0.0 && box.score <= 1.0)) {
    throw DomainError("score " + fmt_num(box.score) + " is outside [0, 1]");
  }
}

RegionKind kind_of(const Region& region) noexcept {
  switch (region.index()) {
    case 0:
      return RegionKind::Box;
    case 1:
      return RegionKind::Quad;
    default:
      return RegionKind::Polygon;
  }
}

double signed_area(std::span<const Point> vertices) noexcept {
  const std::size_t n = vertices.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = vertices[i];
    const Point& b = vertices[(i + 1) % n];
    // y negated: screen coordinates grow downward.
    twice += a.x * (-b.y) - b.x * (-a.y);
  }
  return twice / 2.0;
}

bool is_clockwise(const Polygon& polygon) noexcept {
  return signed_area(polygon.vertices) <= 0.0;
}

BBox envelope(const Region& region) noexcept {
  return std::visit(
      [](const auto& r) -> BBox {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BBox>) {
          return r;
        } else {
          std::span<const Point> pts(r.vertices.data(), r.vertices.size());
          if (pts.empty()) return {};
          BBox b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
          for (const Point& p : pts) {
            b.x0 = std::min(b.x0, p.x);
            b.y0 = std::min(b.y0, p.y);
            b.x1 = std::max(b.x1, p.x);
            b.y1 = std::max(b.y1, p.y);
          }
          return b;
        }
      },
      region);
}

int quantize_coord(double v, double extent) {
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw DomainError("extent must be positive, got " + fmt_num(extent));
  }
  if (!(v >= 0.0 && v <= extent)) {
    throw DomainError("coordinate " + fmt_num(v) + " is outside [0, " + fmt_num(extent) + "]");
  }
  // Multiply before dividing so integral inputs scale exactly.
  const double scaled = std::floor(v * kNumBins / extent);
  return std::clamp(static_cast<int>(scaled), 0, kNumBins - 1);
}

double dequantize_coord(int bin, double extent) {
  if (bin < 0 || bin >= kNumBins) {
    throw DomainError("bin " + std::to_string(bin) + " is outside [0, 999]");
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw DomainError("extent must be positive, got " + fmt_num(extent));
  }
  return (bin + 0.5) * extent / kNumBins;
}

namespace {

void quantize_points(std::span<const Point> pts, const ImageSize& size, std::vector<int>& out) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    try {
      out.push_back(quantize_coord(pts[i].x, size.width));
      out.push_back(quantize_coord(pts[i].y, size.height));
    } catch (const DomainError& e) {
      throw DomainError("vertex " + std::to_string(i) + ": " + e.what());
    }
  }
}

std::vector<Point> dequantize_points(const std::vector<int>& bins, const ImageSize& size) {
  std::vector<Point> pts;
  pts.reserve(bins.size() / 2);
  for (std::size_t i = 0; i + 1 < bins.size(); i += 2) {
    pts.push_back({dequantize_coord(bins[i], size.width), dequantize_coord(bins[i + 1], size.height)});
  }
  return pts;
}

}  // namespace

QuantizedRegion quantize_region(const Region& region, const ImageSize& size) {
  validate(size);
  QuantizedRegion q;
  q.kind = kind_of(region);
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, BBox>) {
          validate(r);
          const std::array<Point, 2> corners{Point{r.x0, r.y0}, Point{r.x1, r.y1}};
          quantize_points(corners, size, q.bins);
        } else {
          if constexpr (std::is_same_v<T, Polygon>) {
            if (r.vertices.size() < 3) {
              throw DomainError("polygon needs at least 3 vertices, got " +
                                std::to_string(r.vertices.size()));
            }
          }
          quantize_points(std::span<const Point>(r.vertices.data(), r.vertices.size()), size,
                          q.bins);
        }
      },
      region);
  return q;
}

Region dequantize_region(const QuantizedRegion& region, const ImageSize& size) {
  validate(size);
  try {
    validate(region);
  } catch (const DomainError& e) {
    throw CodecError(e.what());
  }
  std::vector<Point> pts = dequantize_points(region.bins, size);
  switch (region.kind) {
    case RegionKind::Box:
      return BBox{pts[0].x, pts[0].y, pts[1].x, pts[1].y};
    case RegionKind::Quad: {
      QuadBox quad;
      std::copy(pts.begin(), pts.end(), quad.vertices.begin());
      return quad;
    }
    case RegionKind::Polygon:
      return Polygon{std::move(pts)};
  }
  throw CodecError("unknown region kind");
}

double iou(const BBox& a, const BBox& b) noexcept {
  const double iw = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double ih = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes, double iou_threshold,
                                     bool class_aware) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });

  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const ScoredBox& cand = boxes[idx];
    bool keep = true;
    for (std::size_t k : kept) {
      if (class_aware && boxes[k].label != cand.label) continue;
      if (iou(boxes[k].box, cand.box) >= iou_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) kept.push_back(idx);
  }
  return kept;
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold,
                           bool class_aware) {
  std::vector<ScoredBox> out;
  for (std::size_t i : nms_indices(boxes, iou_threshold, class_aware)) out.push_back(boxes[i]);
  return out;
}

}  // namespace vtask::geometry
