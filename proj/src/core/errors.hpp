#ifndef CELF_CORE_ERRORS_HPP
#define CELF_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace celf {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(what) {}
};

[[noreturn]] void fail_invalid(const std::string& what);
[[noreturn]] void fail_dims(const std::string& what);

}  // namespace celf

#endif
