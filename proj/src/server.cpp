#include "svam/server.hpp"

#include "svam/protocol.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <deque>
#include <mutex>
#include <thread>

namespace svam {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, SessionManager& manager)
        : ws_(std::move(socket)), timer_(ws_.get_executor()), endpoint_(manager) {
        const double refresh = manager.config().mapping.refresh_hz;
        tick_ = std::chrono::microseconds(static_cast<std::int64_t>(1e6 / refresh));
    }

    void run() {
        asio::dispatch(ws_.get_executor(), [self = shared_from_this()] { self->read_request(); });
    }

private:
    void read_request() {
        http::async_read(ws_.next_layer(), buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) {
                             if (ec) return;
                             self->on_request();
                         });
    }

    void on_request() {
        if (request_.target() != "/session" || !websocket::is_upgrade(request_)) {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found,
                                                                            request_.version());
            res->set(http::field::content_type, "text/plain");
            res->body() = "not found\n";
            res->keep_alive(false);
            res->prepare_payload();
            http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
                beast::error_code ignored;
                self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ignored);
            });
            return;
        }
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
            if (ec) {
                spdlog::warn("websocket handshake failed: {}", ec.message());
                return;
            }
            self->open_ = true;
            self->schedule_tick();
            self->read();
        });
    }

    void read() {
        buffer_.consume(buffer_.size());
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            const auto text = beast::buffers_to_string(self->buffer_.data());
            self->send(self->endpoint_.on_message(text));
            self->read();
        });
    }

    void schedule_tick() {
        timer_.expires_after(tick_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || !self->open_) return;
            self->send(self->endpoint_.on_tick());
            self->schedule_tick();
        });
    }

    void send(std::vector<std::string> messages) {
        if (!open_) return;
        const bool idle = queue_.empty();
        for (auto& m : messages) queue_.push_back(std::move(m));
        if (idle && !queue_.empty()) write();
    }

    void write() {
        ws_.text(true);
        ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write();
        });
    }

    void close() {
        if (!open_) return;
        open_ = false;
        timer_.cancel();
        queue_.clear();
        endpoint_.on_close();
    }

    websocket::stream<beast::tcp_stream> ws_;
    asio::steady_timer timer_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> request_;
    ProtocolEndpoint endpoint_;
    std::deque<std::string> queue_;
    std::chrono::microseconds tick_{16667};
    bool open_ = false;
};

}  // namespace

struct SessionServer::Impl {
    Impl(SessionManager& m, std::string addr, std::uint16_t p, int n)
        : manager(m), address(std::move(addr)), requested_port(p), threads(n), acceptor(ioc) {}

    void accept() {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (!acceptor.is_open()) return;
                if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
            } else {
                std::make_shared<Connection>(std::move(socket), manager)->run();
            }
            accept();
        });
    }

    SessionManager& manager;
    std::string address;
    std::uint16_t requested_port;
    int threads;
    asio::io_context ioc;
    tcp::acceptor acceptor;
    std::vector<std::thread> workers;
    std::mutex mutex;
    bool stopped = false;
};

SessionServer::SessionServer(SessionManager& manager, std::string address, std::uint16_t port, int threads)
    : impl_(std::make_unique<Impl>(manager, std::move(address), port, threads < 1 ? 1 : threads)) {}

SessionServer::~SessionServer() { stop(); }

void SessionServer::start() {
    auto& im = *impl_;
    const tcp::endpoint ep(asio::ip::make_address(im.address), im.requested_port);
    im.acceptor.open(ep.protocol());
    im.acceptor.set_option(asio::socket_base::reuse_address(true));
    im.acceptor.bind(ep);
    im.acceptor.listen(asio::socket_base::max_listen_connections);
    im.accept();
    for (int i = 0; i < im.threads; ++i) im.workers.emplace_back([&im] { im.ioc.run(); });
    spdlog::info("listening on ws://{}:{}/session", im.address, port());
}

void SessionServer::stop() {
    auto& im = *impl_;
    {
        std::lock_guard lock(im.mutex);
        if (im.stopped) return;
        im.stopped = true;
    }
    asio::post(im.ioc, [&im] {
        beast::error_code ignored;
        im.acceptor.close(ignored);
    });
    im.ioc.stop();
    for (auto& t : im.workers)
        if (t.joinable()) t.join();
    im.workers.clear();
}

std::uint16_t SessionServer::port() const { return impl_->acceptor.local_endpoint().port(); }

}  // namespace svam
