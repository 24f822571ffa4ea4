#pragma once

#include "svam/session.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace svam {

// WebSocket front end for SessionManager. Serves the JSON protocol on
// /session; any other path gets 404.
class SessionServer {
public:
    // port 0 binds an ephemeral port; see port().
    SessionServer(SessionManager& manager, std::string address, std::uint16_t port, int threads = 1);
    ~SessionServer();

    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    // Binds and starts the worker threads. Returns immediately.
    void start();
    void stop();

    std::uint16_t port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace svam
