#include "svam/session.hpp"

#include "svam/errors.hpp"
#include "svam/scaling.hpp"
#include "svam/vibro.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace svam {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

FrameQuantizer::FrameQuantizer(double refresh_hz, bool enabled) : refresh_hz_(refresh_hz), enabled_(enabled) {
    if (!(refresh_hz_ > 0.0)) throw std::invalid_argument("frame quantizer: refresh must be > 0");
}

std::int64_t FrameQuantizer::tick_of(std::int64_t t_ms) const {
    return static_cast<std::int64_t>(std::floor(static_cast<double>(t_ms) * refresh_hz_ / 1000.0 + 1e-9));
}

std::optional<Frame> FrameQuantizer::accept(const PointerEvent& ev) {
    if (!enabled_) {
        Frame f{static_cast<std::int64_t>(frames_.size()), ev.x_px, ev.y_px};
        frames_.push_back(f);
        return f;
    }
    const auto tick = tick_of(ev.t_ms);
    if (frames_.empty()) {
        base_tick_ = tick;
    } else {
        const auto last = base_tick_ + static_cast<std::int64_t>(frames_.size()) - 1;
        if (tick <= last) return std::nullopt;
        const auto held = frames_.back();
        for (auto k = last + 1; k < tick; ++k) frames_.push_back({k - base_tick_, held.x_px, held.y_px});
    }
    frames_.push_back({tick - base_tick_, ev.x_px, ev.y_px});
    return Frame{tick, ev.x_px, ev.y_px};
}

FrameSamples FrameQuantizer::trace() const { return {refresh_hz_, frames_}; }

void FrameQuantizer::reset() {
    frames_.clear();
    base_tick_ = 0;
}

void SessionUpdate::append(SessionUpdate other) {
    phases.insert(phases.end(), other.phases.begin(), other.phases.end());
    vibration.insert(vibration.end(), other.vibration.begin(), other.vibration.end());
    completed = completed || other.completed;
}

Session::Session(std::string id, StartOptions options, const ServiceConfig& service, std::int64_t now_ms)
    : id_(std::move(id)),
      options_(std::move(options)),
      service_(service),
      quantizer_(service.mapping.refresh_hz, service.frame_quantize) {
    service_.mapping.validate();
    const auto& m = service_.mapping;
    if (options_.mode == SessionMode::Explore) {
        if (options_.texture)
            textures_.emplace(0, *options_.texture);
        else
            textures_.emplace(0, make_stripes(options_.line_width_px, m.screen_w_px, m.screen_h_px));
        return;
    }
    options_.experiment.validate();
    schedule_ = build_schedule(options_.experiment, options_.participant_id);
    for (int w : options_.experiment.textures) textures_.emplace(w, make_stripes(w, m.screen_w_px, m.screen_h_px));
    start_trial(now_ms);
}

void Session::start_trial(std::int64_t now_ms) {
    tracker_.emplace(options_.experiment, schedule_.trials.at(trial_), static_cast<double>(now_ms) / 1000.0);
}

Phase Session::phase() const { return tracker_ ? tracker_->phase() : Phase::First; }

std::optional<ScheduledTrial> Session::current_trial() const {
    if (mode() != SessionMode::Experiment || trial_ >= schedule_.trials.size()) return std::nullopt;
    return schedule_.trials[trial_];
}

const TextureGrid* Session::current_texture() const {
    if (state_ != State::Active) return nullptr;
    if (mode() == SessionMode::Explore) return &textures_.at(0);
    const auto& t = schedule_.trials[trial_];
    switch (tracker_->phase()) {
        case Phase::First: return &textures_.at(t.first_px);
        case Phase::Second: return &textures_.at(t.second_px);
        default: return nullptr;
    }
}

std::optional<VibrationEvent> Session::set_state(bool on, std::int64_t t_ms) {
    if (on == on_) return std::nullopt;
    on_ = on;
    last_emit_ms_ = std::max(t_ms, last_emit_ms_);
    VibrationEvent ev{last_emit_ms_, on, service_.mapping.drive_freq_hz};
    log_.push_back(ev);
    return ev;
}

void Session::enter(Phase p, std::int64_t now_ms, SessionUpdate& up) {
    auto off = [&] {
        if (auto ev = set_state(false, now_ms)) up.vibration.push_back(*ev);
    };
    switch (p) {
        case Phase::First:
        case Phase::Second:
            quantizer_.reset();
            break;
        case Phase::Rest:
            first_trace_ = quantizer_.trace();
            quantizer_.reset();
            off();
            break;
        case Phase::Respond:
            traces_.emplace_back(std::move(first_trace_), quantizer_.trace());
            first_trace_ = {};
            quantizer_.reset();
            respond_started_ms_ = now_ms;
            off();
            break;
    }
}

SessionUpdate Session::advance(std::int64_t now_ms) {
    SessionUpdate up;
    if (mode() != SessionMode::Experiment || state_ != State::Active) return up;
    for (const auto& ev : tracker_->advance(static_cast<double>(now_ms) / 1000.0)) {
        enter(ev.phase, now_ms, up);
        up.phases.push_back(ev);
    }
    return up;
}

std::optional<VibrationEvent> Session::handle_pointer(const PointerEvent& ev) {
    if (state_ != State::Active) throw SessionError("session " + id_ + " is not active");
    if (last_pointer_ms_ && ev.t_ms < *last_pointer_ms_) {
        spdlog::warn("session {}: dropping out-of-order pointer event (t_ms {} < {})", id_, ev.t_ms, *last_pointer_ms_);
        return std::nullopt;
    }
    last_pointer_ms_ = ev.t_ms;

    const auto* grid = current_texture();
    if (grid == nullptr) return std::nullopt;
    const auto frame = quantizer_.accept(ev);
    if (!frame) return std::nullopt;
    const bool on = color_at(*grid, frame->x_px, frame->y_px, service_.boundary) == Color::Black;
    return set_state(on, ev.t_ms);
}

SessionUpdate Session::submit_response(Response choice, std::int64_t now_ms) {
    if (mode() == SessionMode::Explore) throw SessionError("explore sessions have no response channel");
    if (state_ != State::Active) throw SessionError("session " + id_ + " is not active");
    auto up = advance(now_ms);
    if (tracker_->phase() != Phase::Respond)
        throw PhaseViolation("response during phase '" + std::string(to_string(tracker_->phase())) + "'");

    const auto& t = schedule_.trials[trial_];
    records_.push_back({options_.participant_id, t.set_index, t.trial_index, t.first_px, t.second_px, choice,
                        now_ms - respond_started_ms_});
    ++trial_;
    if (trial_ == schedule_.trials.size()) {
        state_ = State::Completed;
        tracker_.reset();
        up.completed = true;
        return up;
    }
    start_trial(now_ms);
    up.append(advance(now_ms));
    return up;
}

void Session::stop() {
    if (state_ != State::Active) return;
    state_ = mode() == SessionMode::Explore ? State::Completed : State::Aborted;
}

void Session::abort() {
    if (state_ == State::Active || state_ == State::Completed) state_ = State::Aborted;
}

std::vector<std::filesystem::path> Session::finalize() {
    switch (state_) {
        case State::Active: throw SessionError("session " + id_ + " is still active");
        case State::Aborted: throw SessionError("session " + id_ + " was aborted");
        case State::Finalized: throw SessionError("session " + id_ + " is already finalized");
        case State::Completed: break;
    }
    const auto dir = service_.out_dir / id_;
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    auto emit = [&](const std::filesystem::path& p, const std::string& content) {
        write_file(p, content);
        paths.push_back(p);
    };

    if (mode() == SessionMode::Explore) {
        emit(dir / "trace.csv", write_frames_csv(quantizer_.trace()));
        state_ = State::Finalized;
        return paths;
    }

    emit(dir / "trials.csv", write_trials_csv(records_));
    const auto trace_dir = dir / "traces";
    std::filesystem::create_directories(trace_dir);
    for (std::size_t i = 0; i < records_.size() && i < traces_.size(); ++i) {
        const auto& r = records_[i];
        emit(trace_dir / trace_file_name(r.participant_id, r.set_index, r.trial_index, Response::First),
             write_frames_csv(traces_[i].first));
        emit(trace_dir / trace_file_name(r.participant_id, r.set_index, r.trial_index, Response::Second),
             write_frames_csv(traces_[i].second));
    }
    std::string vib = "t_ms,state,freq_hz\n";
    for (const auto& v : log_)
        vib += std::to_string(v.t_ms) + "," + (v.on ? "on" : "off") + "," + std::to_string(std::lround(v.freq_hz)) + "\n";
    emit(dir / "vibration.csv", vib);

    const auto matrix = tally_matrix(records_, options_.experiment.textures);
    emit(dir / "matrix.csv", write_matrix_csv(matrix));
    if (matrix.complete()) emit(dir / "scales.csv", write_scales_csv(thurstone_case_v(matrix)));
    state_ = State::Finalized;
    return paths;
}

SessionManager::SessionManager(ServiceConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
    config_.mapping.validate();
    if (!clock_) {
        const auto origin = std::chrono::steady_clock::now();
        clock_ = [origin] {
            return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - origin)
                .count();
        };
    }
}

std::string SessionManager::start_session(StartOptions options) {
    std::string id;
    {
        std::lock_guard lock(mutex_);
        static thread_local std::mt19937 rng{std::random_device{}()};
        char suffix[9];
        std::snprintf(suffix, sizeof suffix, "%08x", static_cast<unsigned>(rng()));
        id = "s" + std::to_string(next_id_++) + "-" + suffix;
    }
    auto entry = std::make_shared<Entry>(id, std::move(options), config_, clock_());
    std::lock_guard lock(mutex_);
    sessions_.emplace(id, std::move(entry));
    return id;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError("unknown session '" + id + "'");
    return it->second;
}

SessionUpdate SessionManager::advance(const std::string& id) {
    return with_session(id, [&](Session& s) { return s.advance(clock_()); });
}

std::optional<VibrationEvent> SessionManager::handle_pointer(const std::string& id, const PointerEvent& ev) {
    return with_session(id, [&](Session& s) { return s.handle_pointer(ev); });
}

SessionUpdate SessionManager::submit_response(const std::string& id, Response choice) {
    return with_session(id, [&](Session& s) { return s.submit_response(choice, clock_()); });
}

std::vector<std::filesystem::path> SessionManager::finalize_session(const std::string& id) {
    return with_session(id, [&](Session& s) { return s.finalize(); });
}

void SessionManager::remove(const std::string& id) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
}

std::size_t SessionManager::active_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

}  // namespace svam
