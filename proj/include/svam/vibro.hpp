#pragma once

#include "svam/texture.hpp"
#include "svam/tracing.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace svam {

struct FrameState {
    std::int64_t frame_index = 0;
    bool on = false;

    bool operator==(const FrameState&) const = default;
};

// Per-frame actuator gate. The drive runs at drive_freq_hz while `on`.
// A state change takes effect at the frame that observes the new color.
class VibrationTimeline {
public:
    VibrationTimeline(double refresh_hz, double drive_freq_hz, std::vector<FrameState> states);

    double refresh_hz() const { return refresh_hz_; }
    double drive_freq_hz() const { return drive_freq_hz_; }
    std::span<const FrameState> states() const { return states_; }

    // Frame indices (and times) at which `on` differs from the previous frame.
    std::vector<std::int64_t> transition_frames() const;
    std::vector<double> transitions() const;
    std::size_t transition_count() const;

    // Time from the first to the last frame.
    double span_s() const;
    double on_fraction() const;

private:
    double refresh_hz_;
    double drive_freq_hz_;
    std::vector<FrameState> states_;
};

VibrationTimeline render_timeline(const TextureGrid& grid, const FrameSamples& frames, const MappingConfig& cfg,
                                  BoundaryMode boundary = BoundaryMode::Clamp);

// Transitions in (t0, t0 + window_s] per second, t0 being the first frame.
double toggle_rate(const VibrationTimeline& tl, double window_s);

// Stripe-cycle frequency seen by a cursor moving at `speed`: one black + one
// white stripe per cycle.
double stripe_frequency(double speed_px_s, double stripe_width_px);

// Stripe-cycle frequency after folding by the display refresh, in
// [0, refresh / 2]. Exact multiples of the refresh fold to 0: the cursor lands
// on the same color every frame.
double alias_frequency(double speed_px_s, double stripe_width_px, double refresh_hz);

// Square wave at the drive frequency (+1/-1, phase continuous in absolute
// time) gated by the timeline; 0 while off. Covers n_frames / refresh seconds.
std::vector<std::int8_t> drive_waveform(const VibrationTimeline& tl, double sample_rate_hz);

std::string write_timeline_csv(const VibrationTimeline& tl);
std::string write_waveform_csv(std::span<const std::int8_t> samples, double sample_rate_hz);

}  // namespace svam
