#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svam {

enum class Color : std::uint8_t { Black, White };

enum class BoundaryMode { Clamp, WrapHorizontal };

enum class LengthDirection { PxToMm, MmToPx };

// Screen/world geometry and timing of the display + actuator loop.
// Defaults: 1000 px of cursor travel per 40 mm of mouse travel, a 60 Hz
// 1920x1080 display, and a 120 Hz drive frequency.
struct MappingConfig {
    int px_per_sweep = 1000;
    double mm_per_sweep = 40.0;
    double refresh_hz = 60.0;
    double drive_freq_hz = 120.0;
    int screen_w_px = 1920;
    int screen_h_px = 1080;

    double mm_per_px() const { return mm_per_sweep / px_per_sweep; }

    // Throws std::invalid_argument unless every field is strictly positive.
    void validate() const;
};

// Binary pixel field, row-major. Immutable after construction.
class TextureGrid {
public:
    TextureGrid(int width_px, int height_px, std::vector<Color> pixels,
                std::optional<int> stripe_width_px = std::nullopt);

    static TextureGrid uniform(int width_px, int height_px, Color color);

    int width() const { return width_; }
    int height() const { return height_; }
    std::optional<int> stripe_width() const { return stripe_width_; }
    std::span<const Color> pixels() const { return pixels_; }

    // Unchecked for speed; use color_at() for arbitrary coordinates.
    Color at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    double black_fraction() const;

    bool operator==(const TextureGrid& other) const {
        return width_ == other.width_ && height_ == other.height_ && pixels_ == other.pixels_;
    }

private:
    int width_;
    int height_;
    std::optional<int> stripe_width_;
    std::vector<Color> pixels_;
};

// Vertical stripes with equal line and space width w: column x is Black iff
// floor(x / w) is even, so the leftmost column is always Black.
TextureGrid make_stripes(int stripe_width_px, int width_px, int height_px);

// Total lookup. Clamp snaps out-of-range coordinates to the nearest edge;
// WrapHorizontal reduces x modulo the width (y is clamped in both modes).
Color color_at(const TextureGrid& grid, std::int64_t x, std::int64_t y,
               BoundaryMode boundary = BoundaryMode::Clamp);

double convert_length(double value, LengthDirection direction, const MappingConfig& cfg = {});

// Reads a P2 (ASCII) or P5 (binary) portable graymap with maxval <= 255.
// Gray values below `threshold` (on a 0..255 scale) become Black.
// Throws ParseError carrying the byte offset of the problem.
TextureGrid load_pgm(std::string_view bytes, int threshold = 128);

// Binary P5 export, Black = 0, White = 255.
std::string to_pgm(const TextureGrid& grid);

}  // namespace svam
