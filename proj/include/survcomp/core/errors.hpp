#pragma once

#include <stdexcept>
#include <string>

namespace survcomp {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (bad CSV, negative times, bad options).
class invalid_input_error : public error {
 public:
  using error::error;
};

/// A statistic cannot be evaluated on the given data.
class computation_error : public error {
 public:
  using error::error;
};

class no_events_error : public computation_error {
 public:
  no_events_error() : computation_error("no events: the data contain no observed event") {}
  explicit no_events_error(const std::string& what) : computation_error(what) {}
};

class degenerate_variance_error : public computation_error {
 public:
  degenerate_variance_error() : computation_error("degenerate variance: statistic has zero variance") {}
  explicit degenerate_variance_error(const std::string& what) : computation_error(what) {}
};

class undefined_statistic_error : public computation_error {
 public:
  using computation_error::computation_error;
};

}  // namespace survcomp
