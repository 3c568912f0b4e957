#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rfb/reaction_model.hpp"

namespace rfb {

// Line-delimited JSON reaction-model protocol.
//   request:  {"id":<int>,"molecule":<string>}
//   response: {"id":<int>,"reactions":[{"reactants":[...],"score":<real>}, ...]}
std::string encode_request(std::int64_t id, std::string_view molecule);
std::string encode_response(std::int64_t id, const std::vector<Proposal>& reactions);

struct Response {
  std::int64_t id = 0;
  std::vector<Proposal> reactions;
};

// Parses one response line. Malformed JSON, missing fields, wrong types or an
// "error" reply raise a protocol error.
Response decode_response(std::string_view line);

// A bidirectional line transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(std::string_view line) = 0;
  // Blocks until a full line arrives; throws timeout after `limit`.
  virtual std::string receive_line(std::chrono::milliseconds limit) = 0;
};

// Runs a server as a child process and talks over its stdin/stdout.
class ProcessChannel final : public LineChannel {
 public:
  explicit ProcessChannel(const std::vector<std::string>& argv);
  ~ProcessChannel() override;
  ProcessChannel(const ProcessChannel&) = delete;
  ProcessChannel& operator=(const ProcessChannel&) = delete;

  void send_line(std::string_view line) override;
  std::string receive_line(std::chrono::milliseconds limit) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

class TcpChannel final : public LineChannel {
 public:
  TcpChannel(const std::string& host, std::uint16_t port);
  ~TcpChannel() override;
  TcpChannel(const TcpChannel&) = delete;
  TcpChannel& operator=(const TcpChannel&) = delete;

  void send_line(std::string_view line) override;
  std::string receive_line(std::chrono::milliseconds limit) override;

 private:
  int fd_ = -1;
  std::string buffer_;
};

// Backward model served by an external process. One request is in flight at a
// time; responses carrying the id of an earlier, timed-out request are skipped.
class RemoteModel final : public BackwardModel {
 public:
  explicit RemoteModel(std::unique_ptr<LineChannel> channel,
                       std::chrono::milliseconds timeout = std::chrono::seconds(30), std::size_t max_children = 0,
                       std::size_t max_reactants = 0);

  std::int64_t last_id() const noexcept { return next_id_ - 1; }

 protected:
  std::vector<Proposal> generate(std::string_view molecule) override;

 private:
  std::unique_ptr<LineChannel> channel_;
  std::chrono::milliseconds timeout_;
  std::size_t max_children_;
  std::size_t max_reactants_;
  std::int64_t next_id_ = 1;
};

}  // namespace rfb
