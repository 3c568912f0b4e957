#include "rfb/remote.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <nlohmann/json.hpp>

#include "rfb/error.hpp"

namespace rfb {

using nlohmann::json;

std::string encode_request(std::int64_t id, std::string_view molecule) {
  return json{{"id", id}, {"molecule", molecule}}.dump();
}

std::string encode_response(std::int64_t id, const std::vector<Proposal>& reactions) {
  json list = json::array();
  for (const auto& r : reactions) list.push_back({{"reactants", r.reactants}, {"score", r.score}});
  return json{{"id", id}, {"reactions", std::move(list)}}.dump();
}

Response decode_response(std::string_view line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorKind::protocol, "response is not a JSON object");
  if (doc.contains("error")) {
    const auto msg = doc["error"].is_string() ? doc["error"].get<std::string>() : doc["error"].dump();
    throw Error(ErrorKind::protocol, "server reported an error: " + msg);
  }
  if (!doc.contains("id") || !doc["id"].is_number_integer()) throw Error(ErrorKind::protocol, "response id missing");
  if (!doc.contains("reactions") || !doc["reactions"].is_array()) {
    throw Error(ErrorKind::protocol, "response 'reactions' missing or not an array");
  }
  Response out;
  out.id = doc["id"].get<std::int64_t>();
  for (const auto& r : doc["reactions"]) {
    if (!r.is_object() || !r.contains("reactants") || !r["reactants"].is_array() || !r.contains("score") ||
        !r["score"].is_number()) {
      throw Error(ErrorKind::protocol, "malformed reaction entry");
    }
    Proposal p;
    for (const auto& m : r["reactants"]) {
      if (!m.is_string()) throw Error(ErrorKind::protocol, "reactant is not a string");
      p.reactants.push_back(m.get<std::string>());
    }
    p.score = r["score"].get<double>();
    out.reactions.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------- transports

namespace {

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::io, std::string("write to model server failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string read_line(int fd, std::string& buffer, std::chrono::milliseconds limit) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (true) {
    if (auto nl = buffer.find('\n'); nl != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorKind::timeout, "no response from model server");
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::io, std::string("poll failed: ") + std::strerror(errno));
    }
    if (rc == 0) throw Error(ErrorKind::timeout, "no response from model server");
    char chunk[4096];
    const auto n = ::read(fd, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorKind::io, std::string("read from model server failed: ") + std::strerror(errno));
    }
    if (n == 0) throw Error(ErrorKind::protocol, "model server closed the connection");
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

}  // namespace

ProcessChannel::ProcessChannel(const std::vector<std::string>& argv) {
  if (argv.empty()) throw Error(ErrorKind::invalid_config, "empty server command");
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Error(ErrorKind::io, "pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorKind::io, "pipe failed");
  }
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_ = ::fork();
  if (pid_ < 0) throw Error(ErrorKind::io, "fork failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  // A dead server must surface as an error, not a signal.
  ::signal(SIGPIPE, SIG_IGN);
}

ProcessChannel::~ProcessChannel() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    if (::waitpid(pid_, &status, WNOHANG) == 0) {
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
    }
  }
}

void ProcessChannel::send_line(std::string_view line) {
  std::string framed(line);
  framed += '\n';
  write_all(to_child_, framed);
}

std::string ProcessChannel::receive_line(std::chrono::milliseconds limit) {
  return read_line(from_child_, buffer_, limit);
}

TcpChannel::TcpChannel(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found) != 0) {
    throw Error(ErrorKind::io, "cannot resolve model server host '" + host + "'");
  }
  for (addrinfo* a = found; a; a = a->ai_next) {
    fd_ = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd_ < 0) continue;
    if (::connect(fd_, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd_);
    fd_ = -1;
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) throw Error(ErrorKind::io, "cannot connect to model server " + host + ":" + std::to_string(port));
  ::signal(SIGPIPE, SIG_IGN);
}

TcpChannel::~TcpChannel() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpChannel::send_line(std::string_view line) {
  std::string framed(line);
  framed += '\n';
  write_all(fd_, framed);
}

std::string TcpChannel::receive_line(std::chrono::milliseconds limit) { return read_line(fd_, buffer_, limit); }

// ---------------------------------------------------------------- client

RemoteModel::RemoteModel(std::unique_ptr<LineChannel> channel, std::chrono::milliseconds timeout,
                         std::size_t max_children, std::size_t max_reactants)
    : channel_(std::move(channel)), timeout_(timeout), max_children_(max_children), max_reactants_(max_reactants) {
  if (!channel_) throw Error(ErrorKind::invalid_config, "remote model needs a channel");
}

std::vector<Proposal> RemoteModel::generate(std::string_view molecule) {
  const std::int64_t id = next_id_++;
  channel_->send_line(encode_request(id, molecule));
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorKind::timeout, "model server timed out");
    Response r = decode_response(channel_->receive_line(left));
    if (r.id < id) continue;
    if (r.id != id) {
      throw Error(ErrorKind::protocol, "response id " + std::to_string(r.id) + " does not match request " + std::to_string(id));
    }
    validate_proposals(molecule, r.reactions, max_children_, max_reactants_);
    return std::move(r.reactions);
  }
}

}  // namespace rfb
