#include <algorithm>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include "casbridge/bridge/bridge.hpp"
#include "casbridge/reflect/reflect.hpp"

namespace casbridge::bridge {

namespace {

int connect_to(const Address& a, const std::string& text) {
    if (a.unix_socket) {
        sockaddr_un sa{};
        if (a.path.size() >= sizeof sa.sun_path) throw TransportError("socket path too long: " + a.path);
        sa.sun_family = AF_UNIX;
        std::strcpy(sa.sun_path, a.path.c_str());
        int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
            int err = errno;
            ::close(fd);
            throw TransportError("connect " + text + ": " + std::strerror(err));
        }
        return fd;
    }
    addrinfo hints{}, *res = nullptr;
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (int rc = ::getaddrinfo(a.host.c_str(), std::to_string(a.port).c_str(), &hints, &res); rc != 0)
        throw TransportError("resolve " + a.host + ": " + gai_strerror(rc));
    int fd = -1;
    for (auto* p = res; p; p = p->ai_next) {
        fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw TransportError("connect " + text + ": " + std::strerror(errno));
    return fd;
}

// Top-level " // " separators, skipping brackets and string literals.
std::vector<std::string> split_postfix(const std::string& text) {
    std::vector<std::string> parts;
    int depth = 0;
    bool in_string = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '[' || c == '{' || c == '(') ++depth;
        else if (c == ']' || c == '}' || c == ')') --depth;
        else if (c == '/' && depth == 0 && i + 1 < text.size() && text[i + 1] == '/') {
            parts.push_back(text.substr(start, i - start));
            start = i + 2;
            ++i;
        }
    }
    parts.push_back(text.substr(start));
    return parts;
}

}  // namespace

CExpr parse_command(const std::string& text) {
    auto parts = split_postfix(text);
    CExpr out = cexpr::parse_fullform(parts[0]);
    for (std::size_t i = 1; i < parts.size(); ++i) out = CExpr::app(cexpr::parse_fullform(parts[i]), {out});
    return out;
}

Client::Client(const std::string& address) : fd_(connect_to(parse_address(address), address)) {}

Client::~Client() {
    if (fd_ >= 0) ::close(fd_);
}

WireResponse Client::request(Op op, const std::string& payload) {
    std::lock_guard lock(mu_);
    if (fd_ < 0) throw TransportError("client is closed");
    std::uint64_t id = next_id_++;
    write_frame(fd_, format_request({id, op, payload}));
    auto body = read_frame(fd_);
    if (!body) throw TransportError("server closed the connection");
    WireResponse r = parse_response(*body);
    if (r.id != id)
        throw ProtocolError("response id " + std::to_string(r.id) + " does not match request " + std::to_string(id));
    return r;
}

namespace {

CExpr result_of(const WireResponse& r) {
    if (!r.ok) throw ServerError(r.payload);
    return cexpr::parse_fullform(r.payload);
}

// Text without postfix application goes to the server verbatim, so that
// syntax errors are reported there.
std::string wire_text(const std::string& code) {
    if (split_postfix(code).size() == 1) return code;
    return cexpr::print_fullform(parse_command(code));
}

}  // namespace

CExpr Client::execute(const std::string& code) { return result_of(request(Op::EvalScoped, wire_text(code))); }
CExpr Client::execute_global(const std::string& code) { return result_of(request(Op::EvalGlobal, wire_text(code))); }
CExpr Client::execute(const CExpr& e) { return result_of(request(Op::EvalScoped, cexpr::print_fullform(e))); }
CExpr Client::execute_global(const CExpr& e) {
    return result_of(request(Op::EvalGlobal, cexpr::print_fullform(e)));
}

void Client::ping() { result_of(request(Op::Ping, "")); }

void Client::shutdown() {
    result_of(request(Op::Shutdown, ""));
    std::lock_guard lock(mu_);
    ::close(fd_);
    fd_ = -1;
}

void Client::preload(const std::string& path) {
    {
        std::lock_guard lock(mu_);
        if (std::find(preloaded_.begin(), preloaded_.end(), path) != preloaded_.end()) return;
    }
    for (const auto& d : read_definitions_file(path)) execute_global(d);
    std::lock_guard lock(mu_);
    preloaded_.push_back(path);
}

kexpr::KExpr run_command_on(const std::string& cmd, const kexpr::KExpr& e, Client& client,
                            const interpret::BackRuleSet& rules, const std::string& aux_file) {
    static const std::string tokens[] = {"\xE2\x9F\xA8" "e\xE2\x9F\xA9", "<e>"};  // ⟨e⟩
    std::size_t count = 0, at = std::string::npos, len = 0;
    for (const auto& t : tokens) {
        for (auto p = cmd.find(t); p != std::string::npos; p = cmd.find(t, p + t.size())) {
            ++count;
            at = p;
            len = t.size();
        }
    }
    if (count != 1)
        throw std::invalid_argument("command needs exactly one placeholder, found " + std::to_string(count));
    std::string text = cmd.substr(0, at) + cexpr::print_fullform(reflect::encode_kernel_expr(e)) + cmd.substr(at + len);
    if (!aux_file.empty()) client.preload(aux_file);
    return interpret::pexpr_of_mmexpr({}, client.execute(text), rules);
}

}  // namespace casbridge::bridge
