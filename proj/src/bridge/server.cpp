#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include "casbridge/bridge/bridge.hpp"

namespace casbridge::bridge {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<CExpr> read_definitions_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<CExpr> out;
    std::string line;
    while (std::getline(in, line)) {
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        out.push_back(cexpr::parse_fullform(line));
    }
    return out;
}

Server::Server(ServerConfig config) : config_(std::move(config)) {
    global_.recursion_limit = config_.recursion_limit;
    for (const auto& path : config_.rule_files) {
        reflect::ForwardRuleSet extra;
        extra.load(read_file(path));
        for (const auto& r : extra.rules()) global_.add_forward_rule(r);
    }
    if (!config_.aux_file.empty())
        for (const auto& d : read_definitions_file(config_.aux_file)) engine::eval(d, global_);
}

Server::~Server() {
    if (listen_fd_ >= 0) {
        ::close(listen_fd_);
        Address a = parse_address(config_.address);
        if (a.unix_socket) ::unlink(a.path.c_str());
    }
}

void Server::bind() {
    Address a = parse_address(config_.address);
    if (a.unix_socket) {
        sockaddr_un sa{};
        if (a.path.size() >= sizeof sa.sun_path) throw TransportError("socket path too long: " + a.path);
        sa.sun_family = AF_UNIX;
        std::strcpy(sa.sun_path, a.path.c_str());
        ::unlink(a.path.c_str());
        listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0)
            throw TransportError("bind " + a.path + ": " + std::strerror(errno));
    } else {
        addrinfo hints{}, *res = nullptr;
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        hints.ai_flags = AI_PASSIVE;
        if (int rc = ::getaddrinfo(a.host.c_str(), std::to_string(a.port).c_str(), &hints, &res); rc != 0)
            throw TransportError("resolve " + a.host + ": " + gai_strerror(rc));
        listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        int rc = listen_fd_ < 0 ? -1 : ::bind(listen_fd_, res->ai_addr, res->ai_addrlen);
        ::freeaddrinfo(res);
        if (rc < 0) throw TransportError("bind " + config_.address + ": " + std::strerror(errno));
    }
    if (::listen(listen_fd_, 8) < 0) throw TransportError(std::string("listen: ") + std::strerror(errno));
}

void Server::serve() {
    if (listen_fd_ < 0) bind();
    while (!stopping_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("accept: ") + std::strerror(errno));
        }
        try {
            serve_connection(fd);
        } catch (const TransportError&) {
            // the client went away; wait for the next one
        }
        ::close(fd);
    }
}

void Server::serve_connection(int fd) {
    while (!stopping_) {
        auto body = read_frame(fd);
        if (!body) return;
        WireResponse resp;
        try {
            resp = handle(parse_request(*body));
        } catch (const ProtocolError& e) {
            resp = {0, false, e.what()};
        }
        write_frame(fd, format_response(resp));
    }
}

WireResponse Server::handle(const WireRequest& r) {
    WireResponse out{r.id, true, "Null"};
    try {
        switch (r.op) {
            case Op::Ping:
                break;
            case Op::Shutdown:
                stopping_ = true;
                break;
            case Op::EvalScoped: {
                CExpr e = cexpr::parse_fullform(r.payload);
                engine::EvalContext ctx = global_.scoped_copy();
                out.payload = cexpr::print_fullform(engine::eval(e, ctx));
                ctx.clear();
                break;
            }
            case Op::EvalGlobal:
                out.payload = cexpr::print_fullform(engine::eval(cexpr::parse_fullform(r.payload), global_));
                break;
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.payload = e.what();
        std::replace(out.payload.begin(), out.payload.end(), '\n', ' ');
    }
    return out;
}

}  // namespace casbridge::bridge
