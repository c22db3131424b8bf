#pragma once

#include <stdexcept>
#include <string>

namespace deepmap {

// Error taxonomy. Every category maps to one CLI exit code, so subsystems
// throw the most specific type they can.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Bad parameter or precondition violation (CLI exit 2).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

// Malformed input file: wrong syntax, missing mandatory file.
class FormatError : public Error {
  public:
    using Error::Error;
};

// Structurally inconsistent data: index out of range, dimension mismatch.
class IntegrityError : public Error {
  public:
    using Error::Error;
};

// Refused to act, e.g. would overwrite existing output (CLI exit 3).
class RefusalError : public Error {
  public:
    using Error::Error;
};

// Required input missing on disk (CLI exit 4).
class MissingInputError : public Error {
  public:
    using Error::Error;
};

// Training aborted, e.g. non-finite gradient.
class TrainingError : public Error {
  public:
    using Error::Error;
};

} // namespace deepmap
