// Copyright 2026 The tpsim Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file at the root of this distribution or
// at http://www.apache.org/licenses/LICENSE-2.0

#include "tpsim/transport.hpp"

#include <sys/ioctl.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>
#include <stdexcept>

namespace tpsim {

namespace {

// Frames cross as encoded byte runs tagged with the sending end. Bytes fed
// through inject_raw carry no endpoint tag and are discarded at poll time.
class InProcessConduit final : public FrameConduit {
public:
    void send(ConduitEnd from, const Frame& frame) override {
        auto bytes = encode_frame(frame.type, frame.payload);
        inbox(peer_of(from)).push_back(Run{from, std::move(bytes), false});
    }

    std::vector<Frame> poll(ConduitEnd at) override {
        std::vector<Frame> frames;
        auto& box = inbox(at);
        while (!box.empty()) {
            Run run = std::move(box.front());
            box.pop_front();
            if (run.injected) {
                ++injected_rejected_;
                continue;
            }
            Frame frame = decode_frame(run.bytes);
            notify(run.from, frame);
            frames.push_back(std::move(frame));
        }
        return frames;
    }

    void inject_raw(ConduitEnd at, std::span<const std::uint8_t> bytes) override {
        inbox(at).push_back(Run{peer_of(at), {bytes.begin(), bytes.end()}, true});
    }

private:
    struct Run {
        ConduitEnd from;
        std::vector<std::uint8_t> bytes;
        bool injected;
    };

    static ConduitEnd peer_of(ConduitEnd end) {
        return end == ConduitEnd::Client ? ConduitEnd::Server : ConduitEnd::Client;
    }

    std::deque<Run>& inbox(ConduitEnd at) {
        return at == ConduitEnd::Client ? to_client_ : to_server_;
    }

    std::deque<Run> to_client_;
    std::deque<Run> to_server_;
};

// The same pipe over a kernel stream socket pair. Possession of a socket end
// is the endpoint identity, so third-party injection has no analogue here;
// inject_raw is routed through the same rejection counter for parity.
class SocketConduit final : public FrameConduit {
public:
    SocketConduit() {
        int fds[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
            throw std::runtime_error(std::string("socketpair: ") + std::strerror(errno));
        }
        client_fd_ = fds[0];
        server_fd_ = fds[1];
    }

    ~SocketConduit() override {
        ::close(client_fd_);
        ::close(server_fd_);
    }

    SocketConduit(const SocketConduit&) = delete;
    SocketConduit& operator=(const SocketConduit&) = delete;

    void send(ConduitEnd from, const Frame& frame) override {
        const auto bytes = encode_frame(frame.type, frame.payload);
        write_all(fd_of(from), bytes);
    }

    std::vector<Frame> poll(ConduitEnd at) override {
        drain_fd(at);
        std::vector<Frame> frames = reader_of(at).drain();
        const ConduitEnd from = at == ConduitEnd::Client ? ConduitEnd::Server : ConduitEnd::Client;
        for (const Frame& frame : frames) {
            notify(from, frame);
        }
        return frames;
    }

    void inject_raw(ConduitEnd, std::span<const std::uint8_t>) override {
        // No third party can hold this socket pair; count and drop.
        ++injected_rejected_;
    }

private:
    int fd_of(ConduitEnd end) const {
        return end == ConduitEnd::Client ? client_fd_ : server_fd_;
    }

    FrameReader& reader_of(ConduitEnd end) {
        return end == ConduitEnd::Client ? client_reader_ : server_reader_;
    }

    static void write_all(int fd, std::span<const std::uint8_t> bytes) {
        std::size_t done = 0;
        while (done < bytes.size()) {
            const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
            if (n < 0) {
                throw std::runtime_error(std::string("socket write: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
    }

    void drain_fd(ConduitEnd at) {
        const int fd = fd_of(at);
        int available = 0;
        if (::ioctl(fd, FIONREAD, &available) != 0) {
            throw std::runtime_error(std::string("ioctl FIONREAD: ") + std::strerror(errno));
        }
        if (available <= 0) {
            return;
        }
        std::vector<std::uint8_t> buf(static_cast<std::size_t>(available));
        std::size_t done = 0;
        while (done < buf.size()) {
            const ssize_t n = ::read(fd, buf.data() + done, buf.size() - done);
            if (n <= 0) {
                throw std::runtime_error(std::string("socket read: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
        reader_of(at).feed(buf);
    }

    int client_fd_ = -1;
    int server_fd_ = -1;
    FrameReader client_reader_;
    FrameReader server_reader_;
};

} // namespace

std::unique_ptr<FrameConduit> make_conduit(TransportKind kind) {
    if (kind == TransportKind::LoopbackSocket) {
        return std::make_unique<SocketConduit>();
    }
    return std::make_unique<InProcessConduit>();
}

} // namespace tpsim
