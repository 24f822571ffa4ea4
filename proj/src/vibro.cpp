#include "svam/vibro.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svam {

VibrationTimeline::VibrationTimeline(double refresh_hz, double drive_freq_hz, std::vector<FrameState> states)
    : refresh_hz_(refresh_hz), drive_freq_hz_(drive_freq_hz), states_(std::move(states)) {
    if (!(refresh_hz_ > 0.0) || !(drive_freq_hz_ > 0.0))
        throw std::invalid_argument("timeline: refresh and drive frequency must be > 0");
}

std::vector<std::int64_t> VibrationTimeline::transition_frames() const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 1; i < states_.size(); ++i)
        if (states_[i].on != states_[i - 1].on) out.push_back(states_[i].frame_index);
    return out;
}

std::vector<double> VibrationTimeline::transitions() const {
    std::vector<double> out;
    for (auto k : transition_frames()) out.push_back(static_cast<double>(k) / refresh_hz_);
    return out;
}

std::size_t VibrationTimeline::transition_count() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < states_.size(); ++i) n += states_[i].on != states_[i - 1].on;
    return n;
}

double VibrationTimeline::span_s() const {
    if (states_.empty()) return 0.0;
    return static_cast<double>(states_.back().frame_index - states_.front().frame_index) / refresh_hz_;
}

double VibrationTimeline::on_fraction() const {
    if (states_.empty()) return 0.0;
    std::size_t on = 0;
    for (const auto& s : states_) on += s.on;
    return static_cast<double>(on) / static_cast<double>(states_.size());
}

VibrationTimeline render_timeline(const TextureGrid& grid, const FrameSamples& frames, const MappingConfig& cfg,
                                  BoundaryMode boundary) {
    if (frames.frames.empty()) throw std::invalid_argument("render_timeline: no frames");
    cfg.validate();
    std::vector<FrameState> states;
    states.reserve(frames.frames.size());
    for (const auto& f : frames.frames)
        states.push_back({f.index, color_at(grid, f.x_px, f.y_px, boundary) == Color::Black});
    return VibrationTimeline(cfg.refresh_hz, cfg.drive_freq_hz, std::move(states));
}

double toggle_rate(const VibrationTimeline& tl, double window_s) {
    if (!(window_s > 0.0)) throw std::invalid_argument("toggle_rate: window must be > 0");
    if (tl.states().empty()) throw std::invalid_argument("toggle_rate: empty timeline");
    if (window_s > tl.span_s() + 1e-9) throw std::invalid_argument("toggle_rate: window exceeds timeline span");

    const auto first = tl.states().front().frame_index;
    const auto last = first + static_cast<std::int64_t>(std::floor(window_s * tl.refresh_hz() + 1e-9));
    std::size_t count = 0;
    for (auto k : tl.transition_frames())
        if (k <= last) ++count;
    return static_cast<double>(count) / window_s;
}

double stripe_frequency(double speed_px_s, double stripe_width_px) {
    if (!(speed_px_s >= 0.0)) throw std::invalid_argument("stripe_frequency: speed must be >= 0");
    if (!(stripe_width_px > 0.0)) throw std::invalid_argument("stripe_frequency: stripe width must be > 0");
    return speed_px_s / (2.0 * stripe_width_px);
}

double alias_frequency(double speed_px_s, double stripe_width_px, double refresh_hz) {
    if (!(refresh_hz > 0.0)) throw std::invalid_argument("alias_frequency: refresh must be > 0");
    const double f = stripe_frequency(speed_px_s, stripe_width_px);
    const double folded = std::abs(f - refresh_hz * std::round(f / refresh_hz));
    return std::clamp(folded, 0.0, refresh_hz / 2.0);
}

std::vector<std::int8_t> drive_waveform(const VibrationTimeline& tl, double sample_rate_hz) {
    if (!(sample_rate_hz >= 4.0 * tl.drive_freq_hz()))
        throw std::invalid_argument("drive_waveform: sample rate must be >= 4x the drive frequency");

    const auto states = tl.states();
    const auto n_frames = static_cast<double>(states.size());
    const auto n = static_cast<std::size_t>(std::llround(n_frames / tl.refresh_hz() * sample_rate_hz));
    const double half_periods_per_sample = 2.0 * tl.drive_freq_hz() / sample_rate_hz;
    const double frames_per_sample = tl.refresh_hz() / sample_rate_hz;

    std::vector<std::int8_t> out(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i);
        auto frame = static_cast<std::size_t>(std::floor(s * frames_per_sample + 1e-9));
        if (frame >= states.size()) frame = states.size() - 1;
        if (!states[frame].on) continue;
        const auto half = static_cast<std::int64_t>(std::floor(s * half_periods_per_sample + 1e-9));
        out[i] = half % 2 == 0 ? 1 : -1;
    }
    return out;
}

std::string write_timeline_csv(const VibrationTimeline& tl) {
    std::string out = "frame,t_s,on\n";
    for (const auto& s : tl.states())
        out += std::to_string(s.frame_index) + "," + csv::format_double(static_cast<double>(s.frame_index) / tl.refresh_hz()) +
               "," + (s.on ? "1" : "0") + "\n";
    return out;
}

std::string write_waveform_csv(std::span<const std::int8_t> samples, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("write_waveform_csv: sample rate must be > 0");
    std::string out = "t_s,amplitude\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
        out += csv::format_double(static_cast<double>(i) / sample_rate_hz) + "," + std::to_string(samples[i]) + "\n";
    return out;
}

}  // namespace svam
