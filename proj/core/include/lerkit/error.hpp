#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lerkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParam : public Error {
 public:
  InvalidParam(std::string field, std::string reason);
  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string field_;
  std::string reason_;
};

class CapacityMismatch : public Error {
 public:
  CapacityMismatch(std::size_t window_capacity, std::size_t weight_count);
};

/// A spoofed trial never crossed the threshold within the step cap.
class Nonterminating : public Error {
 public:
  using Error::Error;
};

/// No threshold reaches the requested expected detection step count.
class Unachievable : public Error {
 public:
  explicit Unachievable(double target_e, std::string detail);
  double target() const noexcept { return target_; }

 private:
  double target_;
};

class InfeasibleMonotoneFit : public Error {
 public:
  explicit InfeasibleMonotoneFit(std::size_t index);
  /// 1-based window index where the fit broke.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class KeyExpired : public Error {
 public:
  explicit KeyExpired(std::string entity);
  const std::string& entity() const noexcept { return entity_; }

 private:
  std::string entity_;
};

class UnknownId : public Error {
 public:
  explicit UnknownId(std::string id);
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b);
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason);
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class UnknownEntity : public Error {
 public:
  explicit UnknownEntity(std::string id);
};

class CoincidentCenters : public Error {
 public:
  CoincidentCenters();
};

}  // namespace lerkit
