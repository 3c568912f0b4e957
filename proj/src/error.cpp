#include "rfb/error.hpp"

namespace rfb {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_config: return "invalid-config";
    case ErrorKind::precondition: return "precondition-violation";
    case ErrorKind::rejected_proposal: return "rejected-proposal";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::protocol: return "protocol";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::internal: return "internal-inconsistency";
    case ErrorKind::migration: return "migration";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace rfb
