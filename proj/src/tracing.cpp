#include "svam/tracing.hpp"

#include "csv.hpp"
#include "svam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svam {

namespace {

// Interpolated coordinates that are integers up to round-off (240 * k / 60)
// must floor to that integer.
constexpr double kSnap = 1e-9;

std::int64_t floor_px(double v) { return static_cast<std::int64_t>(std::floor(v + kSnap)); }

}  // namespace

Trajectory::Trajectory(std::vector<TracePoint> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("trajectory: no samples");
    if (samples_.front().t_s != 0.0) throw std::invalid_argument("trajectory: first sample must be at t = 0");
    for (std::size_t i = 1; i < samples_.size(); ++i)
        if (!(samples_[i].t_s > samples_[i - 1].t_s))
            throw std::invalid_argument("trajectory: sample times must be strictly increasing");
}

Position Trajectory::position_at(double t_s) const {
    if (t_s <= 0.0) return {samples_.front().x_px, samples_.front().y_px};
    if (t_s >= duration_s()) return {samples_.back().x_px, samples_.back().y_px};
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), t_s,
                               [](double t, const TracePoint& p) { return t < p.t_s; });
    const auto& b = *hi;
    const auto& a = *(hi - 1);
    const double u = (t_s - a.t_s) / (b.t_s - a.t_s);
    return {a.x_px + (b.x_px - a.x_px) * u, a.y_px + (b.y_px - a.y_px) * u};
}

Trajectory constant_sweep(const SweepParams& p) {
    if (!(p.speed_px_s >= 0.0)) throw std::invalid_argument("constant_sweep: speed must be >= 0");
    if (!(p.x_min_px < p.x_max_px)) throw std::invalid_argument("constant_sweep: x_min must be < x_max");
    if (p.start_x_px < p.x_min_px || p.start_x_px > p.x_max_px)
        throw std::invalid_argument("constant_sweep: start outside [x_min, x_max]");
    if (!(p.duration_s > 0.0)) throw std::invalid_argument("constant_sweep: duration must be > 0");

    std::vector<TracePoint> pts{{0.0, p.start_x_px, p.y_px}};
    double t = 0.0;
    double x = p.start_x_px;
    double dir = 1.0;
    bool stopped = p.speed_px_s == 0.0;

    while (!stopped) {
        double to_bound = (dir > 0 ? p.x_max_px - x : x - p.x_min_px) / p.speed_px_s;
        if (to_bound <= 0.0) {
            if (!p.reversing) {
                stopped = true;
                break;
            }
            dir = -dir;
            continue;
        }
        if (t + to_bound >= p.duration_s) break;
        t += to_bound;
        x = dir > 0 ? p.x_max_px : p.x_min_px;
        pts.push_back({t, x, p.y_px});
        if (p.reversing)
            dir = -dir;
        else
            stopped = true;
    }

    if (pts.back().t_s < p.duration_s) {
        const double remaining = p.duration_s - t;
        const double end_x = stopped ? x : x + dir * p.speed_px_s * remaining;
        pts.push_back({p.duration_s, end_x, p.y_px});
    }
    return Trajectory(std::move(pts));
}

Trajectory stroke_sweep(const StrokeParams& p) {
    if (!(p.mean_speed_px_s >= 0.0)) throw std::invalid_argument("stroke_sweep: speed must be >= 0");
    if (!(p.stroke_px > 0.0)) throw std::invalid_argument("stroke_sweep: stroke length must be > 0");
    if (!(p.duration_s > 0.0)) throw std::invalid_argument("stroke_sweep: duration must be > 0");
    if (!(p.sample_hz > 0.0)) throw std::invalid_argument("stroke_sweep: sample rate must be > 0");

    if (p.mean_speed_px_s == 0.0)
        return Trajectory({{0.0, p.start_x_px, p.y_px}, {p.duration_s, p.start_x_px, p.y_px}});

    const double stroke_s = p.stroke_px / p.mean_speed_px_s;
    auto x_at = [&](double t) {
        const double strokes = t / stroke_s;
        const double k = std::floor(strokes);
        const double s = strokes - k;
        const double shape = s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        const bool outbound = std::fmod(k, 2.0) == 0.0;
        return p.start_x_px + p.stroke_px * (outbound ? shape : 1.0 - shape);
    };

    const auto n = static_cast<std::int64_t>(std::floor(p.duration_s * p.sample_hz));
    std::vector<TracePoint> pts;
    pts.reserve(static_cast<std::size_t>(n) + 2);
    for (std::int64_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / p.sample_hz;
        if (t > p.duration_s) break;
        pts.push_back({t, x_at(t), p.y_px});
    }
    if (pts.back().t_s < p.duration_s) pts.push_back({p.duration_s, x_at(p.duration_s), p.y_px});
    return Trajectory(std::move(pts));
}

FrameSamples sample_at_refresh(const Trajectory& traj, double refresh_hz) {
    if (!(refresh_hz > 0.0)) throw std::invalid_argument("sample_at_refresh: refresh must be > 0");
    const auto last = static_cast<std::int64_t>(std::floor(traj.duration_s() * refresh_hz + kSnap));

    FrameSamples out{refresh_hz, {}};
    out.frames.reserve(static_cast<std::size_t>(last) + 1);
    const auto samples = traj.samples();
    std::size_t seg = 0;
    for (std::int64_t k = 0; k <= last; ++k) {
        const double t = std::min(static_cast<double>(k) / refresh_hz, traj.duration_s());
        while (seg + 1 < samples.size() && samples[seg + 1].t_s < t) ++seg;
        double x = samples[seg].x_px;
        double y = samples[seg].y_px;
        if (seg + 1 < samples.size() && t > samples[seg].t_s) {
            const auto& a = samples[seg];
            const auto& b = samples[seg + 1];
            const double u = (t - a.t_s) / (b.t_s - a.t_s);
            x = a.x_px + (b.x_px - a.x_px) * u;
            y = a.y_px + (b.y_px - a.y_px) * u;
        }
        out.frames.push_back({k, floor_px(x), floor_px(y)});
    }
    return out;
}

double average_speed(const Trajectory& traj) {
    const auto s = traj.samples();
    if (s.size() < 2) throw std::invalid_argument("average_speed: need at least 2 samples");
    double length = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) length += std::hypot(s[i].x_px - s[i - 1].x_px, s[i].y_px - s[i - 1].y_px);
    return length / traj.duration_s();
}

std::string write_trajectory_csv(const Trajectory& traj) {
    std::string out = "t_s,x_px,y_px\n";
    for (const auto& p : traj.samples())
        out += csv::format_double(p.t_s) + "," + csv::format_double(p.x_px) + "," + csv::format_double(p.y_px) + "\n";
    return out;
}

Trajectory read_trajectory_csv(std::string_view text) {
    csv::Reader reader(text);
    std::string_view line;
    if (!reader.next(line)) throw ParseError("trajectory csv: empty input", 1);
    const csv::Header header(line, reader.line_number());
    const auto it = header.index("t_s"), ix = header.index("x_px"), iy = header.index("y_px");

    std::vector<TracePoint> pts;
    while (reader.next(line)) {
        const auto ln = reader.line_number();
        const auto f = csv::split(line);
        if (f.size() != header.size()) throw ParseError("trajectory csv: wrong field count at line " + std::to_string(ln), ln);
        pts.push_back({csv::parse_double(f[it], ln, "t_s"), csv::parse_double(f[ix], ln, "x_px"),
                       csv::parse_double(f[iy], ln, "y_px")});
    }
    try {
        return Trajectory(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("trajectory csv: ") + e.what(), reader.line_number());
    }
}

std::string write_frames_csv(const FrameSamples& frames) {
    std::string out = "frame,x_px,y_px\n";
    for (const auto& f : frames.frames)
        out += std::to_string(f.index) + "," + std::to_string(f.x_px) + "," + std::to_string(f.y_px) + "\n";
    return out;
}

FrameSamples read_frames_csv(std::string_view text, double refresh_hz) {
    if (!(refresh_hz > 0.0)) throw std::invalid_argument("read_frames_csv: refresh must be > 0");
    csv::Reader reader(text);
    std::string_view line;
    if (!reader.next(line)) throw ParseError("frames csv: empty input", 1);
    const csv::Header header(line, reader.line_number());
    const auto ik = header.index("frame"), ix = header.index("x_px"), iy = header.index("y_px");

    FrameSamples out{refresh_hz, {}};
    while (reader.next(line)) {
        const auto ln = reader.line_number();
        const auto f = csv::split(line);
        if (f.size() != header.size()) throw ParseError("frames csv: wrong field count at line " + std::to_string(ln), ln);
        Frame fr{csv::parse_int(f[ik], ln, "frame"), csv::parse_int(f[ix], ln, "x_px"), csv::parse_int(f[iy], ln, "y_px")};
        if (fr.index != static_cast<std::int64_t>(out.frames.size()))
            throw ParseError("frames csv: frame indices must be consecutive from 0 (line " + std::to_string(ln) + ")", ln);
        out.frames.push_back(fr);
    }
    return out;
}

}  // namespace svam
