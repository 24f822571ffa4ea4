#pragma once

#include "svam/session.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svam {

// JSON message handling for one client connection, independent of the
// transport. Each call returns the messages to send back, in order.
//
// client -> server
//   {"type":"start","mode":"explore"|"experiment","config":{...}}
//   {"type":"pointer","t_ms":int,"x_px":int,"y_px":int}
//   {"type":"response","choice":"first"|"second"}
//   {"type":"stop"}
// server -> client
//   started, phase, vibration, texture, done, error
class ProtocolEndpoint {
public:
    explicit ProtocolEndpoint(SessionManager& manager) : manager_(manager) {}
    ~ProtocolEndpoint();

    ProtocolEndpoint(const ProtocolEndpoint&) = delete;
    ProtocolEndpoint& operator=(const ProtocolEndpoint&) = delete;

    std::vector<std::string> on_message(std::string_view text);

    // Periodic wake-up so phases advance without client traffic.
    std::vector<std::string> on_tick();

    // Connection lost: explore sessions are finalized, experiments aborted.
    void on_close();

    const std::optional<std::string>& session_id() const { return session_; }

private:
    std::vector<std::string> handle(std::string_view text);
    void finish(std::vector<std::string>& out, bool finalize);

    SessionManager& manager_;
    std::optional<std::string> session_;
};

// Parses the "config" object of a start message. Throws std::invalid_argument.
StartOptions parse_start_options(std::string_view mode, const std::string& config_json, const MappingConfig& mapping);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace svam
