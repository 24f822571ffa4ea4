#include "svam/texture.hpp"

#include "svam/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace svam {

void MappingConfig::validate() const {
    if (px_per_sweep <= 0 || !(mm_per_sweep > 0.0) || !(refresh_hz > 0.0) || !(drive_freq_hz > 0.0) ||
        screen_w_px <= 0 || screen_h_px <= 0)
        throw std::invalid_argument("mapping config: all fields must be strictly positive");
}

TextureGrid::TextureGrid(int width_px, int height_px, std::vector<Color> pixels,
                         std::optional<int> stripe_width_px)
    : width_(width_px), height_(height_px), stripe_width_(stripe_width_px), pixels_(std::move(pixels)) {
    if (width_ < 1 || height_ < 1) throw std::invalid_argument("texture: dimensions must be >= 1");
    if (pixels_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_))
        throw std::invalid_argument("texture: pixel count does not match dimensions");
}

TextureGrid TextureGrid::uniform(int width_px, int height_px, Color color) {
    if (width_px < 1 || height_px < 1) throw std::invalid_argument("texture: dimensions must be >= 1");
    return TextureGrid(width_px, height_px,
                       std::vector<Color>(static_cast<std::size_t>(width_px) * height_px, color));
}

double TextureGrid::black_fraction() const {
    const auto black = std::count(pixels_.begin(), pixels_.end(), Color::Black);
    return static_cast<double>(black) / static_cast<double>(pixels_.size());
}

TextureGrid make_stripes(int stripe_width_px, int width_px, int height_px) {
    if (stripe_width_px < 1 || width_px < 1 || height_px < 1)
        throw std::invalid_argument("make_stripes: all arguments must be >= 1");
    if (stripe_width_px > width_px)
        throw std::invalid_argument("make_stripes: stripe width exceeds texture width");

    std::vector<Color> row(width_px);
    for (int x = 0; x < width_px; ++x)
        row[x] = (x / stripe_width_px) % 2 == 0 ? Color::Black : Color::White;

    std::vector<Color> pixels;
    pixels.reserve(static_cast<std::size_t>(width_px) * height_px);
    for (int y = 0; y < height_px; ++y) pixels.insert(pixels.end(), row.begin(), row.end());
    return TextureGrid(width_px, height_px, std::move(pixels), stripe_width_px);
}

Color color_at(const TextureGrid& grid, std::int64_t x, std::int64_t y, BoundaryMode boundary) {
    const std::int64_t w = grid.width();
    const std::int64_t h = grid.height();
    if (boundary == BoundaryMode::WrapHorizontal) {
        x %= w;
        if (x < 0) x += w;
    } else {
        x = std::clamp<std::int64_t>(x, 0, w - 1);
    }
    y = std::clamp<std::int64_t>(y, 0, h - 1);
    return grid.at(static_cast<int>(x), static_cast<int>(y));
}

double convert_length(double value, LengthDirection direction, const MappingConfig& cfg) {
    if (!(value >= 0.0)) throw std::invalid_argument("convert_length: value must be >= 0");
    cfg.validate();
    // Multiply before dividing so integer pixel counts map to the correctly
    // rounded millimetre value (4 px -> 0.16 mm exactly).
    if (direction == LengthDirection::PxToMm) return value * cfg.mm_per_sweep / cfg.px_per_sweep;
    return value * cfg.px_per_sweep / cfg.mm_per_sweep;
}

namespace {

class PgmCursor {
public:
    explicit PgmCursor(std::string_view bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ >= bytes_.size(); }

    // Skips whitespace and '#' comments (comments run to end of line).
    void skip_space() {
        while (pos_ < bytes_.size()) {
            const auto c = static_cast<unsigned char>(bytes_[pos_]);
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(c)) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what) {
        skip_space();
        const auto start = pos_;
        long v = 0;
        auto [ptr, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + bytes_.size(), v);
        if (ec != std::errc{} || v < 0)
            throw ParseError(std::string("pgm: expected ") + what + " at byte " + std::to_string(start), start);
        pos_ = static_cast<std::size_t>(ptr - bytes_.data());
        return v;
    }

    unsigned char read_byte() { return static_cast<unsigned char>(bytes_[pos_++]); }
    std::size_t remaining() const { return bytes_.size() - pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

TextureGrid load_pgm(std::string_view bytes, int threshold) {
    if (threshold < 0 || threshold > 255) throw std::invalid_argument("load_pgm: threshold must be in 0..255");
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw ParseError("pgm: missing P2/P5 magic at byte 0", 0);
    const bool binary = bytes[1] == '5';

    PgmCursor cur(bytes);
    cur.advance(2);
    cur.skip_space();
    const auto width_at = cur.offset();
    const long width = cur.read_uint("width");
    const long height = cur.read_uint("height");
    cur.skip_space();
    const auto maxval_at = cur.offset();
    const long maxval = cur.read_uint("maxval");
    if (width < 1 || height < 1)
        throw ParseError("pgm: non-positive dimensions at byte " + std::to_string(width_at), width_at);
    if (maxval < 1 || maxval > 255)
        throw ParseError("pgm: maxval must be in 1..255 (byte " + std::to_string(maxval_at) + ")", maxval_at);

    const auto count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<Color> pixels(count);
    auto classify = [&](long gray, std::size_t at) {
        if (gray > maxval)
            throw ParseError("pgm: gray value exceeds maxval at byte " + std::to_string(at), at);
        const long scaled = maxval == 255 ? gray : (gray * 255 + maxval / 2) / maxval;
        return scaled < threshold ? Color::Black : Color::White;
    };

    if (binary) {
        // Exactly one whitespace byte separates the header from the raster.
        if (cur.at_end() || !std::isspace(static_cast<unsigned char>(bytes[cur.offset()])))
            throw ParseError("pgm: missing whitespace after maxval at byte " + std::to_string(cur.offset()),
                             cur.offset());
        cur.advance(1);
        if (cur.remaining() < count)
            throw ParseError("pgm: truncated payload at byte " + std::to_string(bytes.size()) + " (expected " +
                                 std::to_string(count) + " pixel bytes)",
                             bytes.size());
        for (std::size_t i = 0; i < count; ++i) {
            const auto at = cur.offset();
            pixels[i] = classify(cur.read_byte(), at);
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            cur.skip_space();
            if (cur.at_end())
                throw ParseError("pgm: truncated payload at byte " + std::to_string(cur.offset()) + " (pixel " +
                                     std::to_string(i) + " of " + std::to_string(count) + ")",
                                 cur.offset());
            const auto at = cur.offset();
            pixels[i] = classify(cur.read_uint("gray value"), at);
        }
    }
    return TextureGrid(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

std::string to_pgm(const TextureGrid& grid) {
    std::string out = "P5\n" + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
    out.reserve(out.size() + grid.pixels().size());
    for (auto c : grid.pixels()) out.push_back(c == Color::Black ? static_cast<char>(0) : static_cast<char>(255));
    return out;
}

}  // namespace svam
