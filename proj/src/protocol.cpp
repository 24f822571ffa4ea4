#include "svam/protocol.hpp"

#include "svam/errors.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cmath>

namespace svam {

using nlohmann::json;

std::string base64_encode(std::string_view bytes) {
    using namespace boost::archive::iterators;
    using It = base64_from_binary<transform_width<std::string_view::const_iterator, 6, 8>>;
    std::string out(It(bytes.begin()), It(bytes.end()));
    out.append((3 - bytes.size() % 3) % 3, '=');
    return out;
}

std::string base64_decode(std::string_view text) {
    using namespace boost::archive::iterators;
    using It = transform_width<binary_from_base64<std::string_view::const_iterator>, 8, 6>;
    std::size_t pad = 0;
    while (!text.empty() && text.back() == '=') {
        text.remove_suffix(1);
        ++pad;
    }
    if (pad > 2 || text.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/") !=
                       std::string_view::npos)
        throw std::invalid_argument("invalid base64 payload");
    std::string out(It(text.begin()), It(text.end()));
    // transform_width emits a partial trailing byte when the input length is
    // not a multiple of 4.
    out.resize(text.size() * 6 / 8);
    return out;
}

namespace {

json error_msg(std::string_view code, std::string_view detail) {
    return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

json phase_msg(const PhaseEvent& ev) {
    return {{"type", "phase"}, {"phase", to_string(ev.phase)}, {"trial", ev.trial_index}, {"set", ev.set_index}};
}

json vibration_msg(const VibrationEvent& ev) {
    json j{{"type", "vibration"}, {"t_ms", ev.t_ms}, {"state", ev.on ? "on" : "off"}};
    if (ev.freq_hz == std::round(ev.freq_hz))
        j["freq_hz"] = static_cast<std::int64_t>(ev.freq_hz);
    else
        j["freq_hz"] = ev.freq_hz;
    return j;
}

void push_update(std::vector<std::string>& out, const SessionUpdate& up) {
    // Phase entry turns the actuator off before the new phase is announced.
    for (const auto& v : up.vibration) out.push_back(vibration_msg(v).dump());
    for (const auto& p : up.phases) out.push_back(phase_msg(p).dump());
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config field '") + key + "' has the wrong type");
    }
}

std::int64_t require_int(const json& msg, const char* key) {
    if (!msg.contains(key) || !msg.at(key).is_number_integer())
        throw std::invalid_argument(std::string("field '") + key + "' must be an integer");
    return msg.at(key).get<std::int64_t>();
}

}  // namespace

StartOptions parse_start_options(std::string_view mode, const std::string& config_json, const MappingConfig& mapping) {
    StartOptions opts;
    if (mode == "explore")
        opts.mode = SessionMode::Explore;
    else if (mode == "experiment")
        opts.mode = SessionMode::Experiment;
    else
        throw std::invalid_argument("mode must be 'explore' or 'experiment'");

    const json cfg = config_json.empty() ? json::object() : json::parse(config_json);
    if (!cfg.is_object()) throw std::invalid_argument("config must be an object");

    opts.participant_id = get_or<int>(cfg, "participant_id", 1);
    auto& e = opts.experiment;
    e.seed = get_or<std::uint64_t>(cfg, "seed", 0);
    e.textures = get_or<std::vector<int>>(cfg, "textures", e.textures);
    e.sets = get_or<int>(cfg, "sets", e.sets);
    const int n = static_cast<int>(e.textures.size());
    e.pairs_per_set = get_or<int>(cfg, "pairs_per_set", n * (n - 1));
    e.touch_s = get_or<double>(cfg, "touch_s", e.touch_s);
    e.rest_s = get_or<double>(cfg, "rest_s", e.rest_s);
    e.participants = 1;
    if (opts.mode == SessionMode::Experiment) e.validate();

    opts.line_width_px = get_or<int>(cfg, "line_width", opts.line_width_px);
    if (cfg.contains("pgm_base64")) {
        const auto threshold = get_or<int>(cfg, "threshold", 128);
        opts.texture = load_pgm(base64_decode(get_or<std::string>(cfg, "pgm_base64", "")), threshold);
    } else if (opts.mode == SessionMode::Explore) {
        const int w = get_or<int>(cfg, "width_px", mapping.screen_w_px);
        const int h = get_or<int>(cfg, "height_px", mapping.screen_h_px);
        opts.texture = make_stripes(opts.line_width_px, w, h);
    }
    return opts;
}

ProtocolEndpoint::~ProtocolEndpoint() {
    try {
        on_close();
    } catch (...) {
    }
}

std::vector<std::string> ProtocolEndpoint::on_message(std::string_view text) {
    try {
        return handle(text);
    } catch (const PhaseViolation& e) {
        return {error_msg("phase-violation", e.what()).dump()};
    } catch (const SessionError& e) {
        return {error_msg("session", e.what()).dump()};
    } catch (const SessionFault& e) {
        return {error_msg("session-fault", e.what()).dump()};
    } catch (const ParseError& e) {
        return {error_msg("bad-config", e.what()).dump()};
    } catch (const json::exception& e) {
        return {error_msg("bad-message", e.what()).dump()};
    } catch (const std::invalid_argument& e) {
        return {error_msg("bad-message", e.what()).dump()};
    } catch (const std::exception& e) {
        spdlog::error("protocol: {}", e.what());
        return {error_msg("internal", e.what()).dump()};
    }
}

std::vector<std::string> ProtocolEndpoint::handle(std::string_view text) {
    const json msg = json::parse(text);
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string())
        throw std::invalid_argument("message must be an object with a string 'type'");
    const auto type = msg.at("type").get<std::string>();
    std::vector<std::string> out;

    if (type == "start") {
        if (session_) throw SessionError("connection already has session " + *session_);
        const auto mode = msg.value("mode", std::string{});
        const auto cfg = msg.contains("config") ? msg.at("config").dump() : std::string{};
        const auto opts = parse_start_options(mode, cfg, manager_.config().mapping);
        session_ = manager_.start_session(opts);
        out.push_back(json{{"type", "started"}, {"session_id", *session_}}.dump());

        manager_.with_session(*session_, [&](Session& s) {
            const auto* grid = s.mode() == SessionMode::Explore ? s.current_texture() : nullptr;
            json tex{{"type", "texture"}, {"show", grid != nullptr}};
            if (grid) {
                tex["width_px"] = grid->width();
                tex["height_px"] = grid->height();
                tex["pgm_base64"] = base64_encode(to_pgm(*grid));
            } else {
                // Participants trace blind: only the size of the field is sent.
                tex["width_px"] = manager_.config().mapping.screen_w_px;
                tex["height_px"] = manager_.config().mapping.screen_h_px;
            }
            out.push_back(tex.dump());
        });
        push_update(out, manager_.advance(*session_));
        return out;
    }

    if (!session_) throw SessionError("no session: send a start message first");

    if (type == "pointer") {
        const PointerEvent ev{require_int(msg, "t_ms"), require_int(msg, "x_px"), require_int(msg, "y_px")};
        push_update(out, manager_.advance(*session_));
        if (auto v = manager_.handle_pointer(*session_, ev)) out.push_back(vibration_msg(*v).dump());
        return out;
    }
    if (type == "response") {
        const auto choice = msg.value("choice", std::string{});
        if (choice != "first" && choice != "second") throw std::invalid_argument("choice must be 'first' or 'second'");
        push_update(out, manager_.advance(*session_));
        const auto up = manager_.submit_response(*session_, choice == "first" ? Response::First : Response::Second);
        push_update(out, up);
        if (up.completed) finish(out, true);
        return out;
    }
    if (type == "stop") {
        const bool explore = manager_.with_session(*session_, [](Session& s) {
            s.stop();
            return s.mode() == SessionMode::Explore;
        });
        finish(out, explore);
        return out;
    }
    throw std::invalid_argument("unknown message type '" + type + "'");
}

void ProtocolEndpoint::finish(std::vector<std::string>& out, bool finalize) {
    json artifacts = json::array();
    if (finalize)
        for (const auto& p : manager_.finalize_session(*session_)) artifacts.push_back(p.string());
    out.push_back(json{{"type", "done"}, {"artifacts", artifacts}}.dump());
    manager_.remove(*session_);
    session_.reset();
}

std::vector<std::string> ProtocolEndpoint::on_tick() {
    std::vector<std::string> out;
    if (!session_) return out;
    try {
        push_update(out, manager_.advance(*session_));
    } catch (const std::exception& e) {
        out.push_back(error_msg("session-fault", e.what()).dump());
    }
    return out;
}

void ProtocolEndpoint::on_close() {
    if (!session_) return;
    const auto id = *session_;
    session_.reset();
    try {
        manager_.with_session(id, [](Session& s) {
            if (s.mode() == SessionMode::Explore && s.state() == Session::State::Active) {
                s.stop();
                s.finalize();
            } else {
                s.abort();
            }
        });
    } catch (const std::exception& e) {
        spdlog::warn("session {}: close cleanup failed: {}", id, e.what());
    }
    manager_.remove(id);
}

}  // namespace svam
