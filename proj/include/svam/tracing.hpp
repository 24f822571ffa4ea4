#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace svam {

struct TracePoint {
    double t_s = 0.0;
    double x_px = 0.0;
    double y_px = 0.0;
};

struct Position {
    double x_px = 0.0;
    double y_px = 0.0;
};

// Continuous pointer path, linearly interpolated between samples.
// Invariant: t strictly increasing, first t = 0, duration = last t.
class Trajectory {
public:
    explicit Trajectory(std::vector<TracePoint> samples);

    std::span<const TracePoint> samples() const { return samples_; }
    double duration_s() const { return samples_.back().t_s; }

    // Clamps t to [0, duration].
    Position position_at(double t_s) const;

private:
    std::vector<TracePoint> samples_;
};

struct Frame {
    std::int64_t index = 0;
    std::int64_t x_px = 0;
    std::int64_t y_px = 0;

    bool operator==(const Frame&) const = default;
};

// Cursor positions as the display sees them: frame k is drawn at k / refresh_hz.
struct FrameSamples {
    double refresh_hz = 60.0;
    std::vector<Frame> frames;

    double time_of(std::int64_t frame_index) const { return static_cast<double>(frame_index) / refresh_hz; }
    bool operator==(const FrameSamples&) const = default;
};

struct SweepParams {
    double start_x_px = 0.0;
    double speed_px_s = 240.0;
    double duration_s = 5.0;
    double x_min_px = 0.0;
    double x_max_px = 1000.0;
    bool reversing = false;
    double y_px = 0.0;
};

// Constant-speed horizontal sweep starting in +x. With `reversing` the
// direction flips at each bound (triangle wave); otherwise the cursor stops
// at the bound. Samples are placed at every corner so interpolation is exact.
Trajectory constant_sweep(const SweepParams& params);

struct StrokeParams {
    double start_x_px = 0.0;
    double mean_speed_px_s = 240.0;
    double duration_s = 5.0;
    double stroke_px = 480.0;
    double y_px = 0.0;
    double sample_hz = 1000.0;
};

// Back-and-forth strokes of fixed length, each following the minimum-jerk
// profile x = L (10 s^3 - 15 s^4 + 6 s^5). Every stroke takes
// stroke_px / mean_speed seconds, so the average speed is mean_speed while
// the instantaneous speed ranges from 0 to 1.875x the mean.
Trajectory stroke_sweep(const StrokeParams& params);

// One frame per tick k / refresh_hz in [0, duration]; positions floored.
FrameSamples sample_at_refresh(const Trajectory& traj, double refresh_hz);

// Path length over duration (Euclidean, piecewise linear).
double average_speed(const Trajectory& traj);

std::string write_trajectory_csv(const Trajectory& traj);
Trajectory read_trajectory_csv(std::string_view text);

std::string write_frames_csv(const FrameSamples& frames);
FrameSamples read_frames_csv(std::string_view text, double refresh_hz);

}  // namespace svam
