#pragma once

#include <stdexcept>
#include <string>

namespace bihyper {

// Error taxonomy used across the library. The CLI maps each kind to a
// one-line "error: <kind>: <message>" diagnostic and a nonzero exit.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& m) : Error("shape", m) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& m) : Error("contract", m) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& m) : Error("numeric", m) {}
};

class IngestError : public Error {
 public:
  explicit IngestError(const std::string& m) : Error("ingest", m) {}
};

class MetricError : public Error {
 public:
  explicit MetricError(const std::string& m) : Error("metric", m) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace bihyper
