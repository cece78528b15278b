#pragma once

#include <stdexcept>
#include <string>

namespace sepctl {

// Failure classes carried by every library exception.  The CLI maps these to
// process exit codes; library callers can switch on them without string
// matching.
enum class ErrorClass {
  usage,                   // bad arguments / misuse of an entry point
  parse,                   // malformed scenario or table file
  invariant,               // a declared object fails its own invariants
  domain,                  // index or realization outside a declared space
  impossible_observation,  // Bayes correction hit zero predictive mass
  resolution,              // belief grid too coarse for a requested projection
  insufficient_data,       // empirical estimate queried on an unseen key
  verification,            // an internal consistency check came back false
  unsupported,             // operation undefined for this scenario family
  too_large,               // enumeration precondition exceeded
};

const char* error_class_name(ErrorClass c);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass c, const std::string& msg)
      : std::runtime_error(std::string("error[") + error_class_name(c) + "]: " + msg),
        class_(c) {}

  ErrorClass error_class() const { return class_; }

 private:
  ErrorClass class_;
};

[[noreturn]] inline void fail(ErrorClass c, const std::string& msg) { throw Error(c, msg); }

inline void require(bool ok, ErrorClass c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

}  // namespace sepctl
