#ifndef HMMRED_ERROR_HPP
#define HMMRED_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace hmmred {

enum class ErrorKind {
  kValidation,       // parameter invariants violated
  kReducibility,     // stationary vector not unique
  kDomain,           // symbol / index out of range
  kSizeLimit,        // m^n too large for the index width or the dense cap
  kShape,            // matrix dimensions inconsistent
  kInput,            // input distribution or matrix not normalized
  kConsistency,      // solver invariant broken mid-run
  kDegenerateState,  // a state has zero mass at the marginal length
  kParse,            // malformed model file
  kIo,               // file not found / unwritable
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hmmred

#endif  // HMMRED_ERROR_HPP
