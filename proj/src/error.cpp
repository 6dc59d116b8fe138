#include "hmmred/error.hpp"

namespace hmmred {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kReducibility: return "reducibility";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kSizeLimit: return "size-limit";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kConsistency: return "consistency";
    case ErrorKind::kDegenerateState: return "degenerate-state";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

}  // namespace hmmred
