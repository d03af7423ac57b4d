#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/engine/eval.hpp"
#include "casbridge/interpret/interpret.hpp"
#include "casbridge/kexpr/expr.hpp"

namespace casbridge::bridge {

using cexpr::CExpr;

class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The server answered with status `error`.
class ServerError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class Op { EvalScoped, EvalGlobal, Ping, Shutdown };
std::string to_string(Op op);
Op parse_op(const std::string& text);

struct WireRequest {
    std::uint64_t id = 0;
    Op op = Op::Ping;
    std::string payload;
};

struct WireResponse {
    std::uint64_t id = 0;
    bool ok = true;
    std::string payload;  // FullForm, or the error message
};

/// Frame bodies are `id SP op SP payload` and `id SP ok|error SP payload`.
std::string format_request(const WireRequest& r);
WireRequest parse_request(const std::string& body);
std::string format_response(const WireResponse& r);
WireResponse parse_response(const std::string& body);

constexpr std::uint32_t kMaxFrame = 64u << 20;

/// 4-byte big-endian length, then the body.
std::string encode_frame(const std::string& body);
void write_frame(int fd, const std::string& body);
/// nullopt on a clean end of stream before the first length byte.
std::optional<std::string> read_frame(int fd);

/// An address containing '/' is a unix socket path; anything else is host:port.
struct Address {
    bool unix_socket = true;
    std::string path;
    std::string host;
    std::uint16_t port = 0;
};
Address parse_address(const std::string& text);
/// `flag` when non-empty, else $BRIDGE_ADDR, else /tmp/casbridge.sock.
std::string resolve_address(const std::string& flag = "");

struct ServerConfig {
    std::string address;
    std::vector<std::string> rule_files;  // extra forward rules, loaded into the global context
    std::string aux_file;                 // definitions evaluated globally at startup
    std::size_t recursion_limit = 10000;
};

/// Sequential evaluation server over the built-in engine. One connection is
/// served at a time and one request is in flight.
class Server {
  public:
    explicit Server(ServerConfig config);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and listens; after this returns clients may connect.
    void bind();
    /// Accept loop; returns after a shutdown request has been answered.
    void serve();

    /// Handles one request without any transport. Scoped requests evaluate in
    /// a copy of the global context that is cleared right afterwards.
    WireResponse handle(const WireRequest& r);
    bool stopping() const { return stopping_; }

    engine::EvalContext& global_context() { return global_; }

  private:
    void serve_connection(int fd);

    ServerConfig config_;
    engine::EvalContext global_;
    int listen_fd_ = -1;
    bool stopping_ = false;
};

/// Reads one expression per non-blank line; lines starting with `#` are comments.
std::vector<CExpr> read_definitions_file(const std::string& path);

/// Splits `a // f // g` at top level into `g[f[a]]`, parsing each part as FullForm.
CExpr parse_command(const std::string& text);

class Client {
  public:
    explicit Client(const std::string& address);
    ~Client();
    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    CExpr execute(const std::string& code);
    CExpr execute_global(const std::string& code);
    CExpr execute(const CExpr& e);
    CExpr execute_global(const CExpr& e);
    void ping();
    /// Asks the server to stop; returns once it has acknowledged.
    void shutdown();

    /// Evaluates every definition of `path` globally, once per client and path.
    void preload(const std::string& path);

    /// Sends a request and returns the raw response; ids are checked.
    WireResponse request(Op op, const std::string& payload);

  private:
    std::mutex mu_;
    int fd_ = -1;
    std::uint64_t next_id_ = 1;
    std::vector<std::string> preloaded_;
};

/// Replaces the single `⟨e⟩` (or `<e>`) in `cmd` with the FullForm encoding of
/// `e`, evaluates the command on the server and reads the answer back as a
/// pre-expression. `aux_file`, when given, is preloaded first.
kexpr::KExpr run_command_on(const std::string& cmd, const kexpr::KExpr& e, Client& client,
                            const interpret::BackRuleSet& rules = interpret::BackRuleSet::defaults(),
                            const std::string& aux_file = "");

}  // namespace casbridge::bridge
