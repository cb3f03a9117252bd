#pragma once

#include <stdexcept>
#include <string>

namespace evrender {

/// Base class for errors caused by user input (bad files, bad flags).
class UserError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public UserError {
public:
    using UserError::UserError;
};

class ValidationError : public UserError {
public:
    using UserError::UserError;
};

class IoError : public UserError {
public:
    using UserError::UserError;
};

}  // namespace evrender
