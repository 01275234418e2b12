#pragma once

#include <stdexcept>
#include <string>

namespace mapeval {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Geometry / query errors
struct DegenerateRay : Error {
  DegenerateRay() : Error("degenerate ray: observation center coincides with target point") {}
};
struct EmptyInput : Error {
  using Error::Error;
};

// Pipeline errors
struct FrameMismatch : Error {
  using Error::Error;
};
struct InvalidScanOrFireId : Error {
  using Error::Error;
};
struct EmptySubmap : Error {
  using Error::Error;
};
struct InputMismatch : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};

// Simulation / disturbance errors
struct SpecError : Error {
  using Error::Error;
};
struct PlanOutOfRange : Error {
  using Error::Error;
};

// I/O errors
struct IoError : Error {
  using Error::Error;
};
struct ParseError : Error {
  ParseError(const std::string& file, int line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};
struct NonContiguousIndex : Error {
  using Error::Error;
};
struct BadMagic : Error {
  using Error::Error;
};
struct TruncatedFile : Error {
  using Error::Error;
};

}  // namespace mapeval
