#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsafev {

// Base for every domain error raised by the library. The C API maps these
// onto status codes at the boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthError : Error {
  using Error::Error;
};
struct ParamError : Error {
  using Error::Error;
};
struct SizeError : Error {
  using Error::Error;
};
struct TagError : Error {
  using Error::Error;
};
struct CodecError : Error {
  using Error::Error;
};
struct DuplicateIdentityError : Error {
  using Error::Error;
};
struct DependencyError : Error {
  using Error::Error;
};
struct UnknownTokenError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct UnknownKeyError : Error {
  using Error::Error;
};
struct RoutingError : Error {
  using Error::Error;
};
struct CapabilityError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct FreshnessViolation : Error {
  using Error::Error;
};
struct ProtocolError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

// Configuration parsing reports every violated invariant at once.
struct ValidationError : Error {
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), issues(std::move(problems)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration";
    for (const auto& p : v) {
      s += "; ";
      s += p;
    }
    return s;
  }
};

// Rejection causes carried by session records and traces. These are protocol
// outcomes, not programming errors, so they travel as values.
enum class RejectReason {
  None,
  Freshness,
  Replay,
  UnknownKey,
  GatewayAuth,
  TokenAuth,
  KeyConfirm,
  Tag,
  Codec,
  Routing,
  State,
  Login,
  Timeout,
};

const char* to_string(RejectReason r);

// Result of a protocol step: either a value or a rejection with its cause.
template <typename T>
struct Outcome {
  std::optional<T> value;
  RejectReason reason = RejectReason::None;
  std::string detail;

  bool ok() const { return value.has_value(); }
  T& operator*() { return *value; }
  const T& operator*() const { return *value; }
  T* operator->() { return &*value; }
  const T* operator->() const { return &*value; }

  static Outcome success(T v) {
    Outcome o;
    o.value = std::move(v);
    return o;
  }
  static Outcome rejected(RejectReason r, std::string d) {
    Outcome o;
    o.reason = r;
    o.detail = std::move(d);
    return o;
  }
};

}  // namespace qsafev
