#include <arpa/inet.h>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sys/socket.h>
#include <unistd.h>

#include "casbridge/bridge/bridge.hpp"

namespace casbridge::bridge {

namespace {

std::uint64_t parse_id(const std::string& text) {
    if (text.empty() || text.size() > 19 || text.find_first_not_of("0123456789") != std::string::npos)
        throw ProtocolError("bad request id '" + text + "'");
    return std::stoull(text);
}

// id, word, rest; the rest may be empty and may contain spaces.
std::tuple<std::string, std::string, std::string> split3(const std::string& body) {
    auto a = body.find(' ');
    if (a == std::string::npos) throw ProtocolError("frame has no operation: '" + body + "'");
    auto b = body.find(' ', a + 1);
    std::string word = body.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1);
    std::string rest = b == std::string::npos ? "" : body.substr(b + 1);
    return {body.substr(0, a), word, rest};
}

void read_exact(int fd, char* buf, std::size_t n, bool& clean_eof) {
    std::size_t got = 0;
    clean_eof = false;
    while (got < n) {
        ssize_t r = ::recv(fd, buf + got, n - got, 0);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("recv: ") + std::strerror(errno));
        }
        if (r == 0) {
            if (got == 0) {
                clean_eof = true;
                return;
            }
            throw TransportError("connection closed in the middle of a frame");
        }
        got += static_cast<std::size_t>(r);
    }
}

}  // namespace

std::string to_string(Op op) {
    switch (op) {
        case Op::EvalScoped: return "eval_scoped";
        case Op::EvalGlobal: return "eval_global";
        case Op::Ping: return "ping";
        case Op::Shutdown: return "shutdown";
    }
    return "?";
}

Op parse_op(const std::string& text) {
    if (text == "eval_scoped") return Op::EvalScoped;
    if (text == "eval_global") return Op::EvalGlobal;
    if (text == "ping") return Op::Ping;
    if (text == "shutdown") return Op::Shutdown;
    throw ProtocolError("unknown operation '" + text + "'");
}

std::string format_request(const WireRequest& r) {
    return std::to_string(r.id) + ' ' + to_string(r.op) + ' ' + r.payload;
}

WireRequest parse_request(const std::string& body) {
    auto [id, op, payload] = split3(body);
    return {parse_id(id), parse_op(op), payload};
}

std::string format_response(const WireResponse& r) {
    return std::to_string(r.id) + (r.ok ? " ok " : " error ") + r.payload;
}

WireResponse parse_response(const std::string& body) {
    auto [id, status, payload] = split3(body);
    if (status != "ok" && status != "error") throw ProtocolError("bad response status '" + status + "'");
    return {parse_id(id), status == "ok", payload};
}

std::string encode_frame(const std::string& body) {
    if (body.size() > kMaxFrame) throw ProtocolError("frame too large");
    std::uint32_t n = htonl(static_cast<std::uint32_t>(body.size()));
    std::string out(reinterpret_cast<const char*>(&n), 4);
    return out + body;
}

void write_frame(int fd, const std::string& body) {
    std::string data = encode_frame(body);
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t r = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(r);
    }
}

std::optional<std::string> read_frame(int fd) {
    char len[4];
    bool eof = false;
    read_exact(fd, len, 4, eof);
    if (eof) return std::nullopt;
    std::uint32_t n;
    std::memcpy(&n, len, 4);
    n = ntohl(n);
    if (n > kMaxFrame) throw ProtocolError("frame of " + std::to_string(n) + " bytes exceeds the limit");
    std::string body(n, '\0');
    if (n) {
        read_exact(fd, body.data(), n, eof);
        if (eof) throw TransportError("connection closed before the frame body");
    }
    return body;
}

Address parse_address(const std::string& text) {
    Address a;
    if (text.find('/') != std::string::npos) {
        a.path = text;
        return a;
    }
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("address '" + text + "' is neither a path nor host:port");
    a.unix_socket = false;
    a.host = text.substr(0, colon);
    if (a.host.empty()) a.host = "127.0.0.1";
    std::string port = text.substr(colon + 1);
    if (port.empty() || port.find_first_not_of("0123456789") != std::string::npos || std::stoul(port) > 65535)
        throw std::invalid_argument("bad port in '" + text + "'");
    a.port = static_cast<std::uint16_t>(std::stoul(port));
    return a;
}

std::string resolve_address(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BRIDGE_ADDR"); env && *env) return env;
    return "/tmp/casbridge.sock";
}

}  // namespace casbridge::bridge
