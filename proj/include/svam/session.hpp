#pragma once

#include "svam/harness.hpp"
#include "svam/texture.hpp"
#include "svam/tracing.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace svam {

enum class SessionMode { Explore, Experiment };

struct PointerEvent {
    std::int64_t t_ms = 0;
    std::int64_t x_px = 0;
    std::int64_t y_px = 0;
};

struct VibrationEvent {
    std::int64_t t_ms = 0;
    bool on = false;
    double freq_hz = 120.0;

    bool operator==(const VibrationEvent&) const = default;
};

struct ServiceConfig {
    MappingConfig mapping;
    bool frame_quantize = true;
    BoundaryMode boundary = BoundaryMode::Clamp;
    std::filesystem::path out_dir = "sessions";
};

struct StartOptions {
    SessionMode mode = SessionMode::Explore;
    SessionConfig experiment;
    int participant_id = 1;
    int line_width_px = 4;               // explore: stripe texture when no image given
    std::optional<TextureGrid> texture;  // explore: explicit image
};

// Display-rate sampling of a pointer stream. A report is assigned to tick
// floor(t_ms * refresh / 1000); the first report of each new tick defines
// that frame. Disabled quantizers pass every report through.
class FrameQuantizer {
public:
    FrameQuantizer(double refresh_hz, bool enabled);

    std::int64_t tick_of(std::int64_t t_ms) const;

    // The frame this report defines, or nullopt when its tick is already drawn.
    std::optional<Frame> accept(const PointerEvent& ev);

    // Frames from the first tick to the latest, gaps held at the previous
    // position, re-indexed from 0.
    FrameSamples trace() const;

    void reset();

private:
    double refresh_hz_;
    bool enabled_;
    std::vector<Frame> frames_;  // consecutive ticks starting at base_tick_
    std::int64_t base_tick_ = 0;
};

struct SessionUpdate {
    std::vector<PhaseEvent> phases;
    std::vector<VibrationEvent> vibration;
    bool completed = false;

    void append(SessionUpdate other);
};

// One live session. Not thread-safe: SessionManager serializes access.
// Times are milliseconds on the service clock; pointer t_ms values are the
// client's and only order and quantize reports.
class Session {
public:
    enum class State { Active, Completed, Finalized, Aborted };

    Session(std::string id, StartOptions options, const ServiceConfig& service, std::int64_t now_ms);

    const std::string& id() const { return id_; }
    SessionMode mode() const { return options_.mode; }
    State state() const { return state_; }
    const StartOptions& options() const { return options_; }

    // Moves experiment phases forward to now. The first call reports the
    // first trial's First phase.
    SessionUpdate advance(std::int64_t now_ms);

    // Edge-triggered: returns an event only when the on/off state changes.
    // Out-of-order reports are dropped with a warning.
    std::optional<VibrationEvent> handle_pointer(const PointerEvent& ev);

    // Throws SessionError in Explore mode or when not active, PhaseViolation
    // outside Respond.
    SessionUpdate submit_response(Response choice, std::int64_t now_ms);

    // Ends an Explore session (Completed) or aborts an Experiment.
    void stop();
    void abort();

    // Writes artifacts below out_dir/<id>/. Throws SessionError unless Completed.
    std::vector<std::filesystem::path> finalize();

    const TextureGrid* current_texture() const;
    Phase phase() const;
    std::optional<ScheduledTrial> current_trial() const;
    const std::vector<VibrationEvent>& vibration_log() const { return log_; }
    const std::vector<TrialRecord>& records() const { return records_; }
    FrameSamples explore_trace() const { return quantizer_.trace(); }
    const Schedule& schedule() const { return schedule_; }

private:
    void enter(Phase p, std::int64_t now_ms, SessionUpdate& up);
    std::optional<VibrationEvent> set_state(bool on, std::int64_t t_ms);
    void start_trial(std::int64_t now_ms);

    std::string id_;
    StartOptions options_;
    ServiceConfig service_;
    State state_ = State::Active;

    std::map<int, TextureGrid> textures_;
    Schedule schedule_;
    std::size_t trial_ = 0;
    std::optional<PhaseTracker> tracker_;
    std::int64_t respond_started_ms_ = 0;
    std::vector<std::pair<FrameSamples, FrameSamples>> traces_;  // per completed trial

    FrameQuantizer quantizer_;
    std::optional<std::int64_t> last_pointer_ms_;
    bool on_ = false;
    std::int64_t last_emit_ms_ = 0;
    std::vector<VibrationEvent> log_;
    std::vector<TrialRecord> records_;
    FrameSamples first_trace_;
};

// Owns all sessions; each session is guarded by its own mutex so sessions
// proceed independently.
class SessionManager {
public:
    using Clock = std::function<std::int64_t()>;

    explicit SessionManager(ServiceConfig config, Clock clock = {});

    const ServiceConfig& config() const { return config_; }
    std::int64_t now_ms() const { return clock_(); }

    std::string start_session(StartOptions options);

    // Runs fn(session) under the session's lock. Throws SessionError for an
    // unknown id.
    template <typename Fn>
    auto with_session(const std::string& id, Fn&& fn) {
        auto entry = find(id);
        std::lock_guard lock(entry->mutex);
        return fn(entry->session);
    }

    SessionUpdate advance(const std::string& id);
    std::optional<VibrationEvent> handle_pointer(const std::string& id, const PointerEvent& ev);
    SessionUpdate submit_response(const std::string& id, Response choice);
    std::vector<std::filesystem::path> finalize_session(const std::string& id);
    void remove(const std::string& id);
    std::size_t active_count() const;

private:
    struct Entry {
        Entry(std::string id, StartOptions options, const ServiceConfig& service, std::int64_t now)
            : session(std::move(id), std::move(options), service, now) {}
        std::mutex mutex;
        Session session;
    };

    std::shared_ptr<Entry> find(const std::string& id) const;

    ServiceConfig config_;
    Clock clock_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t next_id_ = 1;
};

}  // namespace svam
