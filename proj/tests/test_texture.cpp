#include "support.hpp"

#include "svam/errors.hpp"
#include "svam/texture.hpp"

#include <cmath>

using namespace svam;
using svam::test::forall;
using svam::test::uniform_int;

namespace {

// Direct statement of the stripe rule, independent of the generator.
Color stripe_rule(std::int64_t x, int w) { return (x / w) % 2 == 0 ? Color::Black : Color::White; }

std::int64_t clamp64(std::int64_t v, std::int64_t lo, std::int64_t hi) { return v < lo ? lo : (v > hi ? hi : v); }

Color reference_lookup(const TextureGrid& g, std::int64_t x, std::int64_t y, BoundaryMode mode) {
    const auto w = static_cast<std::int64_t>(g.width());
    const auto xr = mode == BoundaryMode::Clamp ? clamp64(x, 0, w - 1) : ((x % w) + w) % w;
    const auto yr = clamp64(y, 0, g.height() - 1);
    return g.pixels()[static_cast<std::size_t>(yr * w + xr)];
}

}  // namespace

TEST_CASE("make_stripes: one-pixel stripes alternate from black") {
    const auto g = make_stripes(1, 4, 1);
    CHECK(g.at(0, 0) == Color::Black);
    CHECK(g.at(1, 0) == Color::White);
    CHECK(g.at(2, 0) == Color::Black);
    CHECK(g.at(3, 0) == Color::White);
    CHECK(g.stripe_width() == 1);
}

TEST_CASE("make_stripes: four-pixel stripes, rows identical") {
    const auto g = make_stripes(4, 8, 2);
    for (int y = 0; y < 2; ++y) {
        for (int x = 0; x < 4; ++x) CHECK(g.at(x, y) == Color::Black);
        for (int x = 4; x < 8; ++x) CHECK(g.at(x, y) == Color::White);
    }
}

TEST_CASE("make_stripes: 32 px over a full screen gives 30 stripes of each color") {
    const auto g = make_stripes(32, 1920, 1080);
    int black = 0, white = 0;
    int run = 1;
    for (int x = 1; x <= g.width(); ++x) {
        if (x < g.width() && g.at(x, 0) == g.at(x - 1, 0)) {
            ++run;
            continue;
        }
        CHECK(run == 32);
        (g.at(x - 1, 0) == Color::Black ? black : white)++;
        run = 1;
    }
    CHECK(black == 30);
    CHECK(white == 30);
    for (int y = 0; y < g.height(); y += 97)
        for (int x = 0; x < g.width(); ++x) REQUIRE(g.at(x, y) == g.at(x, 0));
}

TEST_CASE("make_stripes: rejects bad arguments") {
    CHECK_THROWS_AS(make_stripes(0, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_stripes(2, 0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_stripes(2, 4, -1), std::invalid_argument);
    CHECK_THROWS_AS(make_stripes(8, 4, 1), std::invalid_argument);
}

TEST_CASE("make_stripes: stripe rule and black fraction") {
    forall(11, 200, [](auto& rng, int) {
        const int w = uniform_int(rng, 1, 40);
        const int width = uniform_int(rng, w, 400);
        const int height = uniform_int(rng, 1, 5);
        const auto g = make_stripes(w, width, height);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) REQUIRE(g.at(x, y) == stripe_rule(x, w));
        if (width % (2 * w) == 0) CHECK(g.black_fraction() == 0.5);
    });
}

TEST_CASE("color_at: stripe lookups and boundary modes") {
    const auto g = make_stripes(4, 8, 1);
    CHECK(color_at(g, 3, 0) == Color::Black);
    CHECK(color_at(g, 4, 0) == Color::White);
    CHECK(color_at(g, 9, 0, BoundaryMode::Clamp) == Color::White);
    CHECK(color_at(g, 9, 0, BoundaryMode::WrapHorizontal) == Color::Black);
    CHECK(color_at(g, -1, 0, BoundaryMode::Clamp) == Color::Black);
    CHECK(color_at(g, -1, 0, BoundaryMode::WrapHorizontal) == Color::White);
    CHECK(color_at(g, 2, 1000) == Color::Black);
    CHECK(color_at(g, 2, -1000) == Color::Black);
}

TEST_CASE("color_at: agrees with a reference lookup, wrap is periodic") {
    forall(12, 200, [](auto& rng, int) {
        const int width = uniform_int(rng, 1, 50);
        const int height = uniform_int(rng, 1, 6);
        std::vector<Color> px(static_cast<std::size_t>(width * height));
        for (auto& c : px) c = uniform_int(rng, 0, 1) ? Color::Black : Color::White;
        const TextureGrid g(width, height, px);
        for (int k = 0; k < 50; ++k) {
            const std::int64_t x = uniform_int(rng, -200, 200);
            const std::int64_t y = uniform_int(rng, -10, 10);
            for (auto mode : {BoundaryMode::Clamp, BoundaryMode::WrapHorizontal})
                REQUIRE(color_at(g, x, y, mode) == reference_lookup(g, x, y, mode));
            REQUIRE(color_at(g, x, y, BoundaryMode::WrapHorizontal) ==
                    color_at(g, x + width, y, BoundaryMode::WrapHorizontal));
        }
    });
}

TEST_CASE("convert_length: lab length table") {
    const int px[] = {1, 2, 4, 8, 16, 32};
    const double mm[] = {0.04, 0.08, 0.16, 0.32, 0.64, 1.28};
    for (int i = 0; i < 6; ++i) {
        CAPTURE(px[i]);
        CHECK(convert_length(px[i], LengthDirection::PxToMm) == mm[i]);
    }
    CHECK(convert_length(0.04, LengthDirection::MmToPx) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(convert_length(-1.0, LengthDirection::PxToMm), std::invalid_argument);
}

TEST_CASE("convert_length: round trip") {
    forall(13, 500, [](auto& rng, int) {
        const double v = std::exp(svam::test::uniform_real(rng, -10.0, 10.0));
        MappingConfig cfg;
        cfg.px_per_sweep = uniform_int(rng, 1, 5000);
        cfg.mm_per_sweep = svam::test::uniform_real(rng, 0.5, 500.0);
        const double back = convert_length(convert_length(v, LengthDirection::PxToMm, cfg), LengthDirection::MmToPx, cfg);
        REQUIRE(std::abs(back - v) <= 1e-12 * v);
    });
}

TEST_CASE("MappingConfig: defaults and validation") {
    MappingConfig cfg;
    CHECK(cfg.mm_per_px() == doctest::Approx(0.04).epsilon(1e-15));
    CHECK_NOTHROW(cfg.validate());
    cfg.refresh_hz = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("load_pgm: ASCII extremes") {
    const auto g = load_pgm("P2\n1 2\n255\n0 255\n");
    CHECK(g.width() == 1);
    CHECK(g.height() == 2);
    CHECK(g.at(0, 0) == Color::Black);
    CHECK(g.at(0, 1) == Color::White);
    CHECK_FALSE(g.stripe_width().has_value());
}

TEST_CASE("load_pgm: comments, threshold and maxval scaling") {
    const auto g = load_pgm("P2 # comment\n# another\n3 1 15\n7 8 15\n");
    CHECK(g.at(0, 0) == Color::Black);  // 7/15 -> 119
    CHECK(g.at(1, 0) == Color::White);  // 8/15 -> 136
    CHECK(g.at(2, 0) == Color::White);
    const auto strict = load_pgm("P2\n2 1\n255\n127 128\n", 128);
    CHECK(strict.at(0, 0) == Color::Black);
    CHECK(strict.at(1, 0) == Color::White);
}

TEST_CASE("load_pgm: binary round trip of generated stripes") {
    const auto g = make_stripes(4, 64, 8);
    const auto back = load_pgm(to_pgm(g));
    CHECK(back == g);
}

TEST_CASE("load_pgm: errors name the byte offset") {
    try {
        load_pgm("P5\n4 4\n255\n" + std::string(10, '\0'));
        FAIL("truncated payload accepted");
    } catch (const ParseError& e) {
        CHECK(e.location() == 21);
        CHECK(std::string(e.what()).find("byte 21") != std::string::npos);
    }
    try {
        load_pgm("P2\n2 1\n300\n0 0\n");
        FAIL("maxval 300 accepted");
    } catch (const ParseError& e) {
        CHECK(e.location() == 7);
    }
    CHECK_THROWS_AS(load_pgm("P6\n1 1\n255\n\0"), ParseError);
    CHECK_THROWS_AS(load_pgm("P2\n2\n"), ParseError);
    CHECK_THROWS_AS(load_pgm("P2\n2 1\n255\n0\n"), ParseError);
    CHECK_THROWS_AS(load_pgm("P2\n1 1\n100\n101\n"), ParseError);
    CHECK_THROWS_AS(load_pgm("P2\nx 1\n255\n0\n"), ParseError);
}
